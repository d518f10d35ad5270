"""Continuous-logic formulas, their evaluation and the axiom library."""
from .ast import Condition, Term
from .axioms import AxiomInstance, Instantiation, ModelContext, axiom_library, parse_ids
from .dsl import format_condition, format_term, parse
from .evaluate import Evaluator, eval_closed, eval_term
from .search import BallSearch, estimate, eval_condition
from .suite import AxiomReport, SuiteResult, run_suite

__all__ = ["Term", "Condition", "AxiomInstance", "Instantiation", "ModelContext", "axiom_library",
           "parse_ids", "parse", "format_condition", "format_term", "Evaluator", "eval_term",
           "eval_closed", "BallSearch", "estimate", "eval_condition", "AxiomReport", "SuiteResult",
           "run_suite"]
