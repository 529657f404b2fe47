"""Beltrami differentials of branch-point movements.

A branch point of order ``m - 1`` sits at ``z = 0`` of a complex chart in
which the projective chart reads ``w = c(z) = z^m + ...``.  Moving its image
by ``t*q`` with the isotopy ``H(t, w) = w + t q eta(w)`` produces the
Beltrami coefficient ``mu_t``; its first-order term pairs with a holomorphic
quadratic differential ``alpha(z) dz^2`` either by the closed residue formula
or by direct integration over the annulus where ``eta`` is not constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial, pi

import numpy as np
from numpy.polynomial import legendre

from .cpoly import SERIES_ORDER, Series, jet, series_div
from .errors import (
    BranchPointSingularity,
    GridTooCoarse,
    InvalidInput,
    NonInjectiveIsotopy,
    OrderTooLow,
)


@dataclass(frozen=True)
class BranchChart:
    """Local model ``c(z) = z^m + sum_{k>m} e_k z^k`` of a projective chart."""

    m: int
    c: Series = None
    r_disk: float = 1.0

    def __post_init__(self):
        if self.m < 2:
            raise InvalidInput("chart covering order m must be >= 2")
        if self.c is None:
            object.__setattr__(self, "c", Series([0.0] * self.m + [1.0], SERIES_ORDER))
        co = self.c.coeffs
        if self.c.order < self.m:
            raise InvalidInput("chart series must be truncated at order >= m")
        if np.any(co[: self.m] != 0) or co[self.m] != 1:
            raise InvalidInput("chart must have the form z^m + higher order terms")

    @classmethod
    def standard(cls, m: int, order: int = SERIES_ORDER, r_disk: float = 1.0) -> "BranchChart":
        return cls(m, Series([0.0] * m + [1.0], max(order, m)), r_disk)

    @property
    def g_series(self) -> Series:
        """``c'(z) z^(1-m)``, with constant term ``m``."""
        m, co = self.m, self.c.coeffs
        n = self.c.order - m
        return Series([(j + m) * co[j + m] for j in range(n + 1)], n)

    def value(self, z):
        return self.c(z)

    def deriv(self, z):
        return self.c.derivative()(z)


def _smoothstep(n: int) -> np.polynomial.Polynomial:
    """C^n polynomial step on [0, 1] of degree 2n+1, rising from 0 to 1."""
    coef = np.zeros(2 * n + 2)
    for k in range(n + 1):
        coef[n + 1 + k] = comb(n + k, k) * comb(2 * n + 1, n - k) * (-1) ** k
    return np.polynomial.Polynomial(coef)


@dataclass(frozen=True)
class BumpProfile:
    """Radial bump ``eta(w) = h(|w|^2)`` equal to 1 on ``|w| <= r1`` and 0 on ``|w| >= r2``.

    ``smoothness`` is the order of contact at the seams; the default 2 gives
    the quintic smoothstep.
    """

    r1: float
    r2: float
    smoothness: int = 2
    _step: np.polynomial.Polynomial = field(init=False, repr=False, compare=False)
    _dstep: np.polynomial.Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.r1 < self.r2:
            raise InvalidInput("bump radii must satisfy 0 < r1 < r2")
        if self.smoothness < 1:
            raise InvalidInput("smoothness must be >= 1")
        s = _smoothstep(self.smoothness)
        object.__setattr__(self, "_step", s)
        object.__setattr__(self, "_dstep", s.deriv())

    def _u(self, s):
        a, b = self.r1**2, self.r2**2
        return np.clip((b - s) / (b - a), 0.0, 1.0)

    def h(self, s):
        return self._step(self._u(s))

    def dh(self, s):
        a, b = self.r1**2, self.r2**2
        inside = (s > a) & (s < b)
        return np.where(inside, -self._dstep(self._u(s)) / (b - a), 0.0)

    @property
    def lipschitz(self) -> float:
        """``sup |grad eta| = sup 2 |h'(|w|^2)| |w|``, by dense sampling plus margin."""
        s = np.linspace(self.r1**2, self.r2**2, 4001)
        return float(np.max(2 * np.abs(self.dh(s)) * np.sqrt(s))) * 1.001


def eta(b: BumpProfile, w):
    w = np.asarray(w, dtype=complex)
    out = b.h(np.abs(w) ** 2)
    return float(out) if out.ndim == 0 else out


def eta_wbar(b: BumpProfile, w):
    """``d eta / d wbar = h'(|w|^2) w``."""
    w = np.asarray(w, dtype=complex)
    out = b.dh(np.abs(w) ** 2) * w
    return complex(out) if out.ndim == 0 else out


def eta_w(b: BumpProfile, w):
    """``d eta / d w = h'(|w|^2) conj(w)``."""
    w = np.asarray(w, dtype=complex)
    out = b.dh(np.abs(w) ** 2) * np.conj(w)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MoveSpec:
    q: complex
    t: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise InvalidInput("t must lie in [0, 1]")

    def check(self, b: BumpProfile, r_disk: float = 1.0) -> None:
        if b.r2 > r_disk:
            raise InvalidInput("bump support exceeds the chart disk")
        if abs(self.q) >= r_disk - b.r2:
            raise InvalidInput(f"|q| = {abs(self.q):.3g} must be < r_disk - r2 = {r_disk - b.r2:.3g}")
        if abs(self.t * self.q) * b.lipschitz >= 1.0:
            raise NonInjectiveIsotopy(
                f"|t q| * Lip(eta) = {abs(self.t * self.q) * b.lipschitz:.3g} >= 1")


def move_isotopy(spec: MoveSpec, b: BumpProfile, w, r_disk: float = 1.0):
    """``H(t, w) = w + t q eta(w)``."""
    spec.check(b, r_disk)
    return w + spec.t * spec.q * eta(b, w)


def _mu(chart: BranchChart, b: BumpProfile, tq: complex, z, first_order: bool):
    z = np.asarray(z, dtype=complex)
    w = chart.value(z)
    cp = np.asarray(chart.deriv(z), dtype=complex)
    ewb = np.asarray(eta_wbar(b, w), dtype=complex)
    singular = cp == 0
    if np.any(singular & (ewb != 0)):
        raise BranchPointSingularity("c'(z) vanishes where eta is not locally constant")
    safe = np.where(singular, 1.0, cp)
    num = tq * ewb * np.conj(safe)
    den = safe if first_order else (1.0 + tq * np.asarray(eta_w(b, w))) * safe
    out = np.where(singular, 0.0, num / den)
    return complex(out) if out.ndim == 0 else out


def mu_t(chart: BranchChart, b: BumpProfile, spec: MoveSpec, z):
    """Beltrami coefficient of the moved structure in the ``z`` chart."""
    spec.check(b, chart.r_disk)
    return _mu(chart, b, spec.t * spec.q, z, first_order=False)


def mu_dot0(chart: BranchChart, b: BumpProfile, q: complex, z):
    """``d mu_t / dt`` at ``t = 0``: ``q eta_wbar(c) conj(c') / c'``."""
    return _mu(chart, b, q, z, first_order=True)


def residue_contraction(alpha: Series, chart: BranchChart, q: complex) -> complex:
    """Pairing of ``alpha(z) dz^2`` with the first-order Beltrami differential.

    ``2 pi i q / (m-2)! * (d/dz)^(m-2) (alpha / g)`` at 0, ``g = c' z^(1-m)``.
    """
    k = chart.m - 2
    if alpha.order < k:
        raise OrderTooLow(f"alpha must be expanded to order >= {k}")
    ratio = series_div(alpha, chart.g_series)
    return 2j * pi * q / factorial(k) * jet(ratio, k)


@dataclass(frozen=True)
class QuadratureSpec:
    n_radial: int = 24
    n_angular: int = 32
    tol: float = 1e-10
    max_refinements: int = 6
    radial_panels: int = 1


def _transition_radii(chart: BranchChart, b: BumpProfile, n_angles: int = 256) -> tuple[float, float]:
    """z-radii bracketing the preimage of the annulus ``r1 <= |w| <= r2``."""
    m = chart.m
    if not np.any(chart.c.coeffs[m + 1:]):
        return b.r1 ** (1.0 / m), b.r2 ** (1.0 / m)
    theta = np.linspace(0, 2 * pi, n_angles, endpoint=False)
    direction = np.exp(1j * theta)

    def ray_radius(level: float) -> np.ndarray:
        lo = np.zeros(n_angles)
        hi = np.full(n_angles, 2.0 * level ** (1.0 / m))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            big = np.abs(chart.value(mid * direction)) > level
            hi = np.where(big, mid, hi)
            lo = np.where(big, lo, mid)
        return 0.5 * (lo + hi)

    return float(ray_radius(b.r1).min()) * 0.999, float(ray_radius(b.r2).max()) * 1.001


def _polar_integral(f, rho0: float, rho1: float, nr: int, nt: int, panels: int) -> complex:
    xr, wr = legendre.leggauss(nr)
    xt, wt = legendre.leggauss(nt)
    theta = pi * (xt + 1.0)
    wtheta = pi * wt
    edges = np.linspace(rho0, rho1, panels + 1)
    parts = []
    for a, bnd in zip(edges[:-1], edges[1:]):
        rho = 0.5 * (bnd - a) * (xr + 1.0) + a
        wrho = 0.5 * (bnd - a) * wr
        R, T = np.meshgrid(rho, theta, indexing="ij")
        vals = f(R * np.exp(1j * T)) * R * (wrho[:, None] * wtheta[None, :])
        # numpy's sum is pairwise, so accumulation order is fixed for a given grid
        parts.append(np.sum(vals))
    return complex(np.sum(parts))


def quadrature_contraction(alpha: Series, chart: BranchChart, b: BumpProfile, q: complex,
                           grid: QuadratureSpec = QuadratureSpec()) -> complex:
    """The same pairing by direct 2-D integration of ``alpha * mu_dot0``.

    ``dz dzbar`` is taken as ``-2i dA``; tensor Gauss-Legendre in polar
    coordinates over the transition annulus, doubling both node counts until
    two successive values agree within ``grid.tol``.
    """
    rho0, rho1 = _transition_radii(chart, b)

    def integrand(z):
        return alpha(z) * mu_dot0(chart, b, q, z)

    floor = abs(q) * max(float(np.max(np.abs(alpha.coeffs))), 1e-300)
    nr, nt = grid.n_radial, grid.n_angular
    prev = _polar_integral(integrand, rho0, rho1, nr, nt, grid.radial_panels)
    for _ in range(grid.max_refinements):
        nr, nt = 2 * nr, 2 * nt
        cur = _polar_integral(integrand, rho0, rho1, nr, nt, grid.radial_panels)
        if abs(cur - prev) <= grid.tol * max(abs(cur), floor):
            return -2j * cur
        prev = cur
    raise GridTooCoarse(f"quadrature did not settle to {grid.tol:g} after {grid.max_refinements} refinements")
