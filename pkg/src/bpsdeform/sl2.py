"""Trace-free systems ``d Phi = A Phi`` of holomorphic 1-forms on a hyperelliptic curve.

``A = [[a11, a12], [a21, -a11]]`` with each entry ``f_ij(x) dx/y``.  For a
point ``[c1:c2]`` of the projective line the form
``c1^2 a21 - 2 c1 c2 a11 - c2^2 a12`` vanishes exactly where ``(c1, c2)`` is an
eigenvector of ``A``; its zero divisor is the branch divisor of the induced
projective structure.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cpoly import Poly
from .errors import (
    InvalidInput,
    InvalidPath,
    SheetMismatch,
    StepFailure,
    WeierstrassChart,
    ZeroTheta,
)
from .hyperelliptic import Affine, Curve, CurvePoint, Divisor, Infinity, OneForm, oneform_divisor

PATH_MARGIN = 1e-3
MONODROMY_TOL = 1e-10


@dataclass(frozen=True)
class Sl2System:
    """Entries of ``A``; the zero system is allowed (its monodromy is the identity)."""

    curve: Curve
    a11: OneForm
    a12: OneForm
    a21: OneForm

    def __post_init__(self):
        g = self.curve.g
        for name in ("a11", "a12", "a21"):
            w = getattr(self, name)
            if not isinstance(w, OneForm):
                w = OneForm(w, g)
                object.__setattr__(self, name, w)
            if w.g != g:
                raise InvalidInput(f"{name} has genus {w.g}, curve has genus {g}")

    @property
    def is_zero(self) -> bool:
        return self.a11.is_zero and self.a12.is_zero and self.a21.is_zero

    @classmethod
    def from_coeffs(cls, curve: Curve, a11: Sequence[complex], a12: Sequence[complex],
                    a21: Sequence[complex]) -> "Sl2System":
        g = curve.g
        return cls(curve, OneForm(a11, g), OneForm(a12, g), OneForm(a21, g))

    def matrix_at(self, x: complex, y: complex) -> np.ndarray:
        """``A`` as a matrix of scalars ``f_ij(x)/y`` (coefficient of ``dx``)."""
        f11, f12, f21 = self.a11.f(x), self.a12.f(x), self.a21.f(x)
        return np.array([[f11, f12], [f21, -f11]], dtype=complex) / y

    def to_json(self) -> dict:
        enc = lambda w: [[v.real, v.imag] for v in w.coeffs]
        return {"a11": enc(self.a11), "a12": enc(self.a12), "a21": enc(self.a21)}


class ProjPoint:
    """``[c1:c2]``, scaled so that the larger entry has modulus 1."""

    __slots__ = ("c1", "c2")

    def __init__(self, c1: complex, c2: complex):
        c1, c2 = complex(c1), complex(c2)
        if c1 == 0 and c2 == 0:
            raise InvalidInput("[0:0] is not a point of the projective line")
        s = c1 if abs(c1) >= abs(c2) else c2
        # divide by the dominant entry so that representatives of one point coincide
        object.__setattr__(self, "c1", c1 / s)
        object.__setattr__(self, "c2", c2 / s)

    def __setattr__(self, name, value):
        raise AttributeError("ProjPoint is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjPoint) and abs(self.c1 - other.c1) + abs(self.c2 - other.c2) < 1e-12

    def __hash__(self):
        return hash((round(self.c1.real, 12), round(self.c1.imag, 12),
                     round(self.c2.real, 12), round(self.c2.imag, 12)))

    def __repr__(self) -> str:
        return f"[{self.c1:.6g}:{self.c2:.6g}]"


def _theta_poly(sys: Sl2System, c1: complex, c2: complex) -> Poly:
    return sys.a21.f * (c1 * c1) - sys.a11.f * (2 * c1 * c2) - sys.a12.f * (c2 * c2)


def theta(sys: Sl2System, c: ProjPoint | tuple[complex, complex]) -> OneForm:
    """``c1^2 a21 - 2 c1 c2 a11 - c2^2 a12``; may be the zero form."""
    c1, c2 = (c.c1, c.c2) if isinstance(c, ProjPoint) else c
    return OneForm(_theta_poly(sys, c1, c2), sys.curve.g)


def branch_divisor(sys: Sl2System, c: ProjPoint) -> Divisor:
    th = theta(sys, c)
    if th.is_zero:
        raise ZeroTheta(f"the branch form vanishes identically for c = {c!r}")
    return oneform_divisor(sys.curve, th)


def eigen_residual(sys: Sl2System, c: ProjPoint, pt: CurvePoint) -> float:
    """``|Theta(pt)|`` relative to the largest ``|a_ij(pt)|`` (0 when all vanish)."""
    if isinstance(pt, Infinity):
        raise WeierstrassChart("eigen_residual needs an affine point")
    if sys.curve.is_weierstrass(pt):
        raise WeierstrassChart(f"{pt!r} is a Weierstrass point")
    x, y = pt.x, pt.y
    scale = max(abs(sys.a11.f(x)), abs(sys.a12.f(x)), abs(sys.a21.f(x))) / abs(y)
    if scale == 0:
        return 0.0
    return abs(_theta_poly(sys, c.c1, c.c2)(x) / y) / scale


# ---------------------------------------------------------------------------
# paths and monodromy

@dataclass(frozen=True)
class CurvePath:
    """Piecewise-linear path in the ``x``-plane, lifted from ``sheet`` at the start.

    A closed path returns to its first waypoint; the lift must then end on
    the starting sheet.
    """

    waypoints: tuple[complex, ...]
    sheet: int = 1
    closed: bool = False

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.waypoints)
        if self.closed and len(pts) > 1 and abs(pts[-1] - pts[0]) > 0:
            pts = pts + (pts[0],)
        object.__setattr__(self, "waypoints", pts)
        if len(pts) < 2:
            raise InvalidPath("a path needs at least two waypoints")
        if self.sheet not in (1, -1):
            raise InvalidPath("sheet must be +1 or -1")

    @classmethod
    def circle(cls, center: complex, radius: float, n: int = 64, sheet: int = 1,
               start_angle: float = 0.0) -> "CurvePath":
        ang = start_angle + 2 * np.pi * np.arange(n) / n
        return cls(tuple(center + radius * np.exp(1j * ang)), sheet, closed=True)

    @property
    def segments(self):
        return list(zip(self.waypoints[:-1], self.waypoints[1:]))

    def to_json(self) -> dict:
        return {"waypoints": [[w.real, w.imag] for w in self.waypoints], "sheet": self.sheet,
                "closed": self.closed}

    @classmethod
    def from_json(cls, data: dict) -> "CurvePath":
        try:
            wps = tuple(complex(a, b) for a, b in data["waypoints"])
            return cls(wps, int(data.get("sheet", 1)), bool(data.get("closed", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidPath(f"malformed path: {exc}") from None


def _segment_distance(a: complex, b: complex, w: np.ndarray) -> np.ndarray:
    d = b - a
    if d == 0:
        return np.abs(w - a)
    s = np.clip(((w - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(a + s * d - w)


def check_path(curve: Curve, path: CurvePath, margin: float = PATH_MARGIN) -> None:
    for a, b in path.segments:
        if a == b:
            raise InvalidPath("consecutive waypoints coincide")
        dist = float(np.min(_segment_distance(a, b, curve.weierstrass)))
        if dist <= margin:
            raise InvalidPath(f"segment {a} -> {b} passes within {dist:.2e} of a Weierstrass value")


def _near_root(px: complex, guess: complex) -> complex:
    r = cmath.sqrt(px)
    return r if abs(r - guess) <= abs(r + guess) else -r


def lift_path(curve: Curve, path: CurvePath) -> list[tuple[complex, complex]]:
    """Dense ``(x, y)`` samples along the path with ``y`` continued analytically.

    Each step is short compared with the distance to the nearest Weierstrass
    value and turns ``arg y`` by less than pi/4.
    """
    check_path(curve, path)
    x0 = path.waypoints[0]
    out = [(x0, path.sheet * cmath.sqrt(curve.P(x0)))]
    for a, b in path.segments:
        stack = [b]
        xa, ya = out[-1]
        while stack:
            xb = stack[-1]
            reach = 0.5 * min(curve.min_weierstrass_distance(xa), curve.min_weierstrass_distance(xb))
            if abs(xb - xa) > reach:
                stack.append(0.5 * (xa + xb))
                continue
            yb = _near_root(curve.P(xb), ya)
            if abs(cmath.phase(yb / ya)) >= np.pi / 4:
                stack.append(0.5 * (xa + xb))
                continue
            stack.pop()
            out.append((xb, yb))
            xa, ya = xb, yb
    return out


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _rk45(rhs, phi: np.ndarray, tol: float, h_min: float = 1e-12) -> np.ndarray:
    """Integrate ``phi' = rhs(s) @ phi`` over ``s in [0, 1]`` adaptively."""
    s, h = 0.0, 1.0
    k = [None] * 7
    while s < 1.0:
        h = min(h, 1.0 - s)
        if h < h_min:
            raise StepFailure(f"step size {h:.1e} underflowed at s = {s:.6f}")
        for i in range(7):
            inc = sum(_A[i][j] * k[j] for j in range(i)) if i else 0.0
            k[i] = rhs(s + _C[i] * h) @ (phi + h * inc)
        new = phi + h * sum(_B5[i] * k[i] for i in range(6))
        err = h * sum(_E[i] * k[i] for i in range(7))
        scale = tol * (1.0 + np.max(np.abs(new)))
        ratio = float(np.max(np.abs(err))) / scale
        if ratio <= 1.0:
            s += h
            phi = new
        h *= min(4.0, max(0.2, 0.9 * (ratio + 1e-300) ** -0.2))
    return phi


def monodromy(sys: Sl2System, path: CurvePath, tol: float = MONODROMY_TOL) -> np.ndarray:
    """``Phi(end)`` for ``d Phi = A Phi`` along the lifted path with ``Phi(start) = I``."""
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    curve = sys.curve
    samples = lift_path(curve, path)
    phi = np.eye(2, dtype=complex)
    for (xa, ya), (xb, yb) in zip(samples[:-1], samples[1:]):
        dx = xb - xa

        def rhs(s, xa=xa, ya=ya, yb=yb, dx=dx):
            x = xa + s * dx
            y = _near_root(curve.P(x), ya + s * (yb - ya))
            return sys.matrix_at(x, y) * dx

        phi = _rk45(rhs, phi, tol)
    if path.closed:
        y_start, y_end = samples[0][1], samples[-1][1]
        if abs(y_end - y_start) > abs(y_end + y_start):
            raise SheetMismatch("the closed path lifts to an open path: it ends on the other sheet")
    return phi


def start_point(curve: Curve, path: CurvePath) -> Affine:
    x0 = path.waypoints[0]
    return curve.point(x0, sheet=path.sheet)
