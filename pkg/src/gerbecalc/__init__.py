"""Discrete differential geometry of principal gerbes on triangulated manifolds.

Modules:
    liecore: matrix Lie groups, algebras, exp/log, invariant polynomials.
    complexes: triangulated complexes, barycentric subdivision, star covers.
    dcalc: cochains, coboundary, cup product, Maurer-Cartan, integration.
    gerbedata: gerbe cocycles, lifting gerbes, pullback.
    connective: connective structures, curvings, curvature, characteristic forms.
    holonomy: surface holonomy by descent.
"""
from . import complexes, connective, dcalc, gerbedata, holonomy, liecore
from .errors import GerbeError

__all__ = ["complexes", "connective", "dcalc", "gerbedata", "holonomy", "liecore", "GerbeError"]
__version__ = "0.1.0"
