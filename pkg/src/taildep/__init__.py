"""Semiparametric estimation of bivariate tail dependence."""

__version__ = "0.1.0"
