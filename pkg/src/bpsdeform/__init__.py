"""Numerical toolkit for branch-point deformations of projective structures on hyperelliptic curves."""

from .beltrami import BranchChart, BumpProfile, MoveSpec, QuadratureSpec, quadrature_contraction, residue_contraction
from .cpoly import Poly, Series, roots
from .critical import BranchConfig, critical_line, criticality_test, kernel, pairing_matrix, q_constants, rank_profile
from .errors import BPSError
from .hyperelliptic import Affine, Curve, Divisor, Infinity, OneForm, QuadDiff, is_canonical, oneform_divisor
from .sl2 import CurvePath, ProjPoint, Sl2System, branch_divisor, eigen_residual, monodromy

__version__ = "0.1.0"
