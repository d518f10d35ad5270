"""Finite-dimensional workbench for W*-probability spaces."""
