"""Command line front end.

Subcommands::

    wstar check-axioms   --model M.json [--axioms 1-20] [--gamma ln2] ...
    wstar verify-lemmas  --model M.json --lemma {contprod,normg,contmod,spectral,forms}
    wstar spectrum       --model M.json [--operator X.json | --unit w_0_1]
    wstar definability   --model M.json

Exit codes: 0 success, 1 a check failed, 2 invalid input.  Errors are written
to stderr as one JSON object.  Every JSON document carries ``"v": 1``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from . import definability, discretization
from .clogic import BallSearch, Instantiation, run_suite
from .clogic.suite import natural_key
from .errors import BadExponents, InvalidInput, WStarError
from .metrics import (continuity_modular_check, continuity_product_check, normg_identity_check,
                      norm_star_spectral)
from .model import as_matrix, matrix_from_json, model_from_json
from .modular import ModularCalculus, arveson_spectrum
from .smearing import dlvp_map, fejer_map, spectral_membership_test

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
LEMMAS = ("contprod", "normg", "contmod", "spectral", "forms")
NORMG_TOL = 1e-10


class _Invalid(Exception):
    """Argument error raised instead of argparse's usage exit."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Invalid(message)


def _emit_error(code, message):
    sys.stderr.write(json.dumps({"v": SCHEMA_VERSION, "error": code, "message": message}) + "\n")


def parse_gamma(text):
    """``"ln2"``, ``"ln(3)"``, ``"log 2"`` or a plain number to a positive float."""
    if text is None:
        return None
    s = str(text).strip().lower().replace(" ", "")
    m = re.fullmatch(r"-?(?:ln|log)\(?([0-9]*\.?[0-9]+(?:e-?[0-9]+)?)\)?", s)
    try:
        val = abs(math.log(float(m.group(1)))) if m else abs(float(s))
    except ValueError:
        raise InvalidInput(f"cannot read lattice spacing {text!r}") from None
    if not val > 0:
        raise InvalidInput("lattice spacing must be non-zero")
    return val


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None


def _load_model(path):
    model, constants, _ = model_from_json(_read_json(path))
    return model, constants


def _seed(args):
    env = os.environ.get("WSTAR_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise InvalidInput(f"WSTAR_SEED must be an integer, got {env!r}") from None
    return args.seed


def _write(args, doc, text):
    out = json.dumps(doc, indent=2) + "\n" if args.format == "json" else text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _table(headers, rows):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    line = lambda cells: "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    return "\n".join([line(headers), line(["-" * w for w in widths])] + [line(r) for r in rows]) + "\n"


def _fmt(v):
    return f"{v:.3e}" if isinstance(v, float) else str(v)


# --- check-axioms ----------------------------------------------------------------------

def cmd_check_axioms(args):
    model, constants = _load_model(args.model)
    mc = ModularCalculus(model)
    inst = Instantiation(gamma=parse_gamma(args.gamma))
    search = BallSearch(samples=args.samples, seed=_seed(args))
    from .clogic.axioms import parse_ids

    try:
        ids = parse_ids(args.axioms)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    result = run_suite(model, ids, search, args.tol, mc=mc, constants=constants, inst=inst,
                       threads=args.threads, timing=args.timing)
    doc = {"v": SCHEMA_VERSION, "command": "check-axioms", "tol": args.tol, "seed": search.seed,
           "samples": search.samples, "summary": result.summary, "ok": result.ok,
           "reports": [r.to_json() for r in result.reports]}
    rows = [[r.axiom_id, _fmt(r.value), _fmt(r.tolerance), "pass" if r.passed else "FAIL",
             "expected-fail" if r.expected_fail else ""] for r in result.reports]
    s = result.summary
    text = _table(["axiom", "value", "tol", "result", "note"], rows)
    text += (f"total {s['total']}  passed {s['passed']}  failed {s['failed']}  "
             f"expected failures {s['expected_failures']}  unexpected passes {s['unexpected_passes']}\n")
    _write(args, doc, text)
    return EXIT_OK if result.ok else EXIT_FAIL


# --- verify-lemmas -----------------------------------------------------------------------

def _random_ops(rng, d, count, m=1.0):
    return [definability.random_ball(rng, d, m) for _ in range(count)]


def _lemma_normg(mc, rng, args):
    rows = []
    for x in _random_ops(rng, mc.dim, args.samples, 3.0):
        lhs, rhs = normg_identity_check(mc, x)
        err = abs(lhs - rhs)
        tol = NORMG_TOL * (1.0 + 0.5 * lhs)
        rows.append({"lhs": lhs, "rhs": rhs, "margin": err - tol, "worst": err})
    return rows, "|2||x||^* - ||G_0(x)||^#| <= 1e-10 (1 + ||x||^*)"


def _lemma_contprod(mc, rng, args):
    from .modular import spectral_truncate

    rows = []
    a_values = [args.a] if args.a is not None else [0.5, 1.0, 2.0]
    for k in range(args.samples):
        a = a_values[k % len(a_values)]
        x, y = _random_ops(rng, mc.dim, 2, 1.0)
        lhs, rhs = continuity_product_check(mc, a, x, y)
        if spectral_truncate(mc, a, x).opnorm == 0.0:
            continue
        rows.append({"a": a, "lhs": lhs, "rhs": rhs, "margin": lhs - rhs, "worst": lhs - rhs})
    return rows, "||x' y||^* <= (2 e^a + e^{a/2}) ||x'|| ||y||^*"


def _lemma_contmod(mc, rng, args):
    rows = []
    for t in (0.01, 0.1, 1.0):
        for x in _random_ops(rng, mc.dim, args.samples, 1.0):
            lhs, rhs = continuity_modular_check(mc, t, x)
            rows.append({"t": t, "lhs": lhs, "rhs": rhs, "margin": lhs - rhs, "worst": lhs - rhs})
    kernel = discretization.KernelSpec.fejer(1.0, 0.0)
    for n in range(2, 7):
        for x in _random_ops(rng, mc.dim, max(1, args.samples // 10), 1.0):
            res = discretization.riemann_sigma_f(mc, kernel, n, x)
            dist = norm_star_spectral(mc, res.approx.mat - res.exact.mat)
            rows.append({"n": n, "lhs": dist, "rhs": res.bound, "margin": dist - res.bound,
                         "worst": dist - res.bound})
    return rows, "||sigma_t(x) - x||^* <= 2|t| ||x||^#; Riemann Fejer scheme within its bound"


def _lemma_spectral(mc, rng, args):
    rows = []
    for k, x in enumerate(_random_ops(rng, mc.dim, args.samples, 1.0)):
        K = 1 + k % 3
        fx = fejer_map(mc, K, 0.0, x)
        spec = arveson_spectrum(mc, fx)
        outside = max([abs(v) - K for v in spec], default=-K)
        member = spectral_membership_test(mc, K, fx, 4 * K + 4)
        fixed = float(np.linalg.norm(dlvp_map(mc, K, fx).mat - fx.mat, 2))
        worst = max(outside + 1e-9, fixed - 1e-10 * (1.0 + fx.opnorm), 0.0 if member else 1.0)
        rows.append({"K": K, "lhs": fixed, "rhs": 0.0, "margin": worst, "worst": fixed})
    return rows, "Spec(F_K x) in [-K, K], F_K x passes the window test and H_K fixes it"


def _lemma_forms(mc, rng, args):
    alphas = [args.alpha] if args.alpha is not None else [0.25, 1.0 / 3.0]
    betas = [args.beta] if args.beta is not None else [0.0, 1.0 / 3.0]
    for a in alphas:
        for b in betas:
            if not (0.0 < a < 0.5) or b < 0.0 or a + b >= 1.0:
                raise BadExponents(f"need 0 < alpha < 1/2, beta >= 0, alpha + beta < 1; got {a}, {b}")
    rows = []
    per = max(1, args.samples // 10)
    for a in alphas:
        for n in range(2, 6):
            for x, y in zip(_random_ops(rng, mc.dim, per), _random_ops(rng, mc.dim, per)):
                for b in betas:
                    r = discretization.form_recursion(mc, a, b, n, 2, 2, x, y)
                    err = abs(r.approx - r.exact)
                    rows.append({"alpha": a, "beta": b, "n": n, "lhs": err, "rhs": r.bound,
                                 "margin": err - r.bound, "worst": err})
                r = discretization.form_top_level(mc, a, n, 2, 1, x, y)
                err = abs(r.approx - r.exact)
                rows.append({"alpha": a, "beta": 1.0 - a, "n": n, "lhs": err, "rhs": r.bound,
                             "margin": err - r.bound, "worst": err})
    return rows, "Riemann sums of the forms within their closed-form bounds"


_LEMMA_FUNCS = {"normg": _lemma_normg, "contprod": _lemma_contprod, "contmod": _lemma_contmod,
                "spectral": _lemma_spectral, "forms": _lemma_forms}


def cmd_verify_lemmas(args):
    if args.samples < 1:
        raise InvalidInput("--samples must be positive")
    model, _ = _load_model(args.model)
    mc = ModularCalculus(model)
    rng = np.random.default_rng(_seed(args))
    rows, statement = _LEMMA_FUNCS[args.lemma](mc, rng, args)
    violations = sum(1 for r in rows if r["margin"] > 0)
    worst = max((r["worst"] for r in rows), default=0.0)
    margin = max((r["margin"] for r in rows), default=0.0)
    ok = violations == 0
    doc = {"v": SCHEMA_VERSION, "command": "verify-lemmas", "lemma": args.lemma, "statement": statement,
           "trials": len(rows), "violations": violations, "worst": worst, "worst_margin": margin,
           "pass": ok}
    text = _table(["lemma", "trials", "violations", "worst", "worst_margin", "result"],
                  [[args.lemma, len(rows), violations, _fmt(worst), _fmt(margin), "pass" if ok else "FAIL"]])
    _write(args, doc, text)
    return EXIT_OK if ok else EXIT_FAIL


# --- spectrum ------------------------------------------------------------------------------

def cmd_spectrum(args):
    model, constants = _load_model(args.model)
    mc = ModularCalculus(model)
    doc = {"v": SCHEMA_VERSION, "command": "spectrum", "dim": model.dim, "spectrum": list(mc.spectrum())}
    lines = ["Sp(sigma) = {" + ", ".join(f"{v:.6g}" for v in mc.spectrum()) + "}"]
    ops = {}
    if args.operator:
        obj = _read_json(args.operator)
        if isinstance(obj, dict):
            obj = obj.get("matrix", obj.get("operator"))
        ops["operator"] = matrix_from_json(obj)
    for name in args.unit or ():
        if name not in constants:
            raise InvalidInput(f"model has no constant {name!r}; available: {sorted(constants, key=natural_key)}")
        ops[name] = as_matrix(constants[name])
    if ops:
        doc["operators"] = {}
        for name, mat in ops.items():
            spec = list(arveson_spectrum(mc, mat))
            doc["operators"][name] = spec
            lines.append(f"Spec({name}) = {{" + ", ".join(f"{v:.6g}" for v in spec) + "}")
    _write(args, doc, "\n".join(lines) + "\n")
    return EXIT_OK


# --- definability ----------------------------------------------------------------------------

def cmd_definability(args):
    model, _ = _load_model(args.model)
    mc = ModularCalculus(model)
    records = definability.run_chain(mc, seed=_seed(args))
    ok = all(r.passed for r in records)
    doc = {"v": SCHEMA_VERSION, "command": "definability", "seed": _seed(args), "ok": ok,
           "stages": [r.to_json() for r in records]}
    rows = [[r.stage, ",".join(f"{k}={v:g}" if not isinstance(v, tuple) else f"{k}={list(v)}"
                               for k, v in sorted(r.params.items())),
             _fmt(r.gap), _fmt(r.bound + r.remainder), "pass" if r.passed else "FAIL"] for r in records]
    _write(args, doc, _table(["stage", "params", "gap", "bound", "result"], rows))
    return EXIT_OK if ok else EXIT_FAIL


# --- entry point -------------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="wstar", description="Finite-dimensional workbench for W*-probability spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--model", required=True, help="model JSON file")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "text"), default="json")

    c = sub.add_parser("check-axioms", help="evaluate instantiated axioms on a model")
    common(c)
    c.add_argument("--axioms", default="1-20", help='id ranges such as "1-20" or "21,24-25" or "all"')
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--samples", type=int, default=32)
    c.add_argument("--gamma", help="lattice spacing for (21)-(23), e.g. ln2")
    c.add_argument("--threads", type=int, default=1)
    c.add_argument("--timing", action="store_true", help="record wall times (reports then differ run to run)")
    c.set_defaults(func=cmd_check_axioms)

    v = sub.add_parser("verify-lemmas", help="run an inequality or identity battery")
    common(v)
    v.add_argument("--lemma", required=True, choices=LEMMAS)
    v.add_argument("--samples", type=int, default=32)
    v.add_argument("--a", type=float, help="truncation radius for contprod")
    v.add_argument("--alpha", type=float, help="form exponent alpha")
    v.add_argument("--beta", type=float, help="form exponent beta")
    v.set_defaults(func=cmd_verify_lemmas)

    s = sub.add_parser("spectrum", help="modular spectrum and Arveson spectra of operators")
    common(s)
    s.add_argument("--operator", help="operator JSON file (matrix encoding)")
    s.add_argument("--unit", action="append", help="named model constant such as w_0_1")
    s.set_defaults(func=cmd_spectrum)

    d = sub.add_parser("definability", help="stage table of the definability chain")
    common(d)
    d.set_defaults(func=cmd_definability)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise InvalidInput("--threads must be at least 1")
        return args.func(args)
    except _Invalid as exc:
        _emit_error("UsageError", str(exc))
        return EXIT_INVALID
    except WStarError as exc:
        _emit_error(exc.code, str(exc))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
