"""Numerical verification toolkit for 2-Hessian operators and P-function principles."""

__version__ = "0.1.0"
