"""Independent reference computations used by the acceptance suite and tests.

Nothing here shares code paths with the quantities being checked: the
abelian integral is computed by scipy's adaptive quadrature with its own
square-root continuation.
"""
from __future__ import annotations

import cmath
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .hyperelliptic import Curve


def _continued_roots(curve: Curve, a: complex, b: complex, y_start: complex, n: int) -> np.ndarray:
    ys = np.empty(n + 1, complex)
    y = y_start
    for i, s in enumerate(np.linspace(0.0, 1.0, n + 1)):
        r = cmath.sqrt(curve.P(a + s * (b - a)))
        y = r if abs(r - y) <= abs(r + y) else -r
        ys[i] = y
    return ys


def abelian_integral(curve: Curve, waypoints: Sequence[complex], sheet: int, f: Sequence[complex],
                     n_track: int = 4000) -> complex:
    """``int f(x) dx / y`` along a polygon, ``y`` continued from ``sheet * sqrt(P(x0))``."""
    fpoly = np.polynomial.Polynomial(np.asarray(f, dtype=complex))
    wps = [complex(w) for w in waypoints]
    y = sheet * cmath.sqrt(curve.P(wps[0]))
    total = 0j
    for a, b in zip(wps[:-1], wps[1:]):
        ys = _continued_roots(curve, a, b, y, n_track)

        def integrand(s, part, a=a, b=b, ys=ys):
            x = a + s * (b - a)
            i = min(int(s * n_track), n_track - 1)
            guess = ys[i] + (s * n_track - i) * (ys[i + 1] - ys[i])
            r = cmath.sqrt(curve.P(x))
            yy = r if abs(r - guess) <= abs(r + guess) else -r
            v = fpoly(x) / yy * (b - a)
            return v.real if part == 0 else v.imag

        re = quad(integrand, 0.0, 1.0, args=(0,), epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        im = quad(integrand, 0.0, 1.0, args=(1,), epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        total += complex(re, im)
        y = ys[-1]
    return total
