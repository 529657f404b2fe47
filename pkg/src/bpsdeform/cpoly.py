"""Complex polynomials and truncated power series.

Polynomials and series store their coefficients in ascending degree as
read-only complex128 arrays.  Everything here is double precision.
"""
from __future__ import annotations

from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .errors import DivByNonUnit, InvalidInput, NonConvergence, OrderTooLow

ROOT_TOL = 1e-10
SERIES_ORDER = 16
MAX_ITER = 200

_EPS = np.finfo(float).eps


def _frozen(arr) -> np.ndarray:
    a = np.array(arr, dtype=complex).reshape(-1)
    a.flags.writeable = False
    return a


class Poly:
    """Polynomial with complex coefficients, ascending degree.

    Trailing exact zeros are stripped, so the leading coefficient is nonzero
    unless the polynomial is zero.  The zero polynomial has ``degree == -1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex] = ()):
        a = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex)
        nz = np.flatnonzero(a)
        a = a[: nz[-1] + 1] if nz.size else a[:0]
        object.__setattr__(self, "coeffs", _frozen(a))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Poly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1.0])
        return p

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "Poly":
        return cls([0.0] * k + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1]) if len(self.coeffs) else 0j

    def __call__(self, z):
        return peval(self, z)

    def __add__(self, other: "Poly") -> "Poly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return Poly(a)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-self.coeffs)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-_as_poly(other))

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly()
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self) -> str:
        return f"Poly({[complex(c) for c in self.coeffs]})"

    def shift(self, x0: complex) -> np.ndarray:
        """Taylor coefficients of ``p(x0 + t)`` in ``t``."""
        return taylor_shift(self, x0)

    def to_json(self) -> list:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "Poly":
        return cls([complex(re, im) for re, im in data])


def _as_poly(p) -> Poly:
    return p if isinstance(p, Poly) else Poly([p])


def peval(p: Poly, z):
    """Horner evaluation; works elementwise on arrays."""
    acc = np.zeros_like(np.asarray(z, dtype=complex))
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc) if np.ndim(acc) == 0 else acc


def derivative(p: Poly) -> Poly:
    n = len(p.coeffs)
    if n <= 1:
        return Poly()
    return Poly(p.coeffs[1:] * np.arange(1, n))


def taylor_shift(p: Poly, x0: complex) -> np.ndarray:
    """Coefficients of ``p(x0 + t)`` as a polynomial in ``t``."""
    n = len(p.coeffs)
    if n == 0:
        return np.zeros(0, complex)
    out = np.zeros(n, complex)
    a = np.array(p.coeffs, dtype=complex)
    for k in range(n):
        # synthetic division by (x - x0): remainder is the k-th Taylor coefficient
        m = len(a)
        q = np.zeros(max(m - 1, 0), complex)
        acc = 0j
        for i in range(m - 1, -1, -1):
            acc = acc * x0 + a[i]
            if i > 0:
                q[i - 1] = acc
        out[k] = acc
        a = q
    return out


def _abs_eval(p: Poly, r: float) -> float:
    return float(np.polyval(np.abs(p.coeffs[::-1]), r))


def _aberth(c: np.ndarray, max_iter: int) -> np.ndarray:
    """Simultaneous Aberth-Ehrlich iteration on a monic polynomial."""
    n = len(c) - 1
    p = Poly(c)
    dp = derivative(p)
    absc = np.abs(c)
    # Cauchy-type bound for the initial circle
    radius = 1.0 + float(np.max(absc[:-1])) if n > 0 else 1.0
    radius = min(radius, 2.0 * float(np.max(absc[:-1] ** (1.0 / (n - np.arange(n))))) + 1e-3)
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles) - c[-2] / n
    active = np.ones(n, bool)
    rev = absc[::-1]
    for _ in range(max_iter):
        if not active.any():
            return z
        pz = peval(p, z)
        dpz = peval(dp, z)
        bound = 8 * _EPS * np.polyval(rev, np.abs(z))
        done = np.abs(pz) <= bound
        active &= ~done
        if not active.any():
            return z
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            step = ratio / (1.0 - ratio * s)
        step = np.where(np.isfinite(step), step, 0.0)
        step[~active] = 0.0
        z = z - step
        tiny = np.abs(step) <= 4 * _EPS * np.maximum(np.abs(z), 1.0)
        active &= ~tiny
    if active.any():
        raise NonConvergence(f"Aberth iteration did not converge in {max_iter} iterations")
    return z


def _newton_polish(p: Poly, dp: Poly, z: complex, steps: int = 3) -> complex:
    for _ in range(steps):
        d = peval(dp, z)
        if d == 0:
            break
        znew = z - peval(p, z) / d
        if abs(peval(p, znew)) >= abs(peval(p, z)):
            break
        z = znew
    return z


def _cluster_radius(p: Poly, c: complex, k: int) -> float:
    """Attainable accuracy for a k-fold root of ``p`` at ``c`` in double precision."""
    t = taylor_shift(p, c)
    tk = abs(t[k]) if k < len(t) else 0.0
    if tk == 0.0:
        return 0.0
    backward = _EPS * _abs_eval(p, abs(c))
    return (backward / tk) ** (1.0 / k)


def _linkage(points: list[complex], radius: float) -> list[list[complex]]:
    groups: list[list[complex]] = []
    for a in points:
        hit = [g for g in groups if min(abs(a - b) for b in g) < radius]
        merged = [a]
        for g in hit:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    return groups


def roots(p: Poly, tol: float = ROOT_TOL, max_iter: int = MAX_ITER) -> list[tuple[complex, int]]:
    """Roots with multiplicities.

    Aberth-Ehrlich simultaneous iteration, Newton polishing, then merging of
    approximations closer than ``tol``.  A k-fold root is only resolved to
    about ``eps**(1/k)``, so a group of k approximations is also merged when
    its diameter lies within the attainable accuracy of a k-fold root at the
    group centre.
    """
    if p.degree < 1:
        raise InvalidInput("roots() needs a polynomial of degree >= 1")
    nz0 = int(np.flatnonzero(p.coeffs)[0])
    c = np.array(p.coeffs[nz0:], dtype=complex) / p.lead
    n = len(c) - 1
    approx: list[complex] = [0j] * nz0
    if n == 1:
        approx.append(complex(-c[0]))
    elif n > 1:
        z = _aberth(c, max_iter)
        q = Poly(c)
        dq = derivative(q)
        approx.extend(_newton_polish(q, dq, complex(zi)) for zi in z)
    scale = max(1.0, max(abs(a) for a in approx))
    out = []
    for group in _linkage(approx, 1e-3 * scale):
        centre = complex(np.mean(group))
        k = len(group)
        diam = max(abs(a - b) for a in group for b in group)
        if k > 1 and diam <= 50 * _cluster_radius(p, centre, k):
            d = p
            for _ in range(k - 1):
                d = derivative(d)
            out.append((_newton_polish(d, derivative(d), centre), k))
        else:
            for sub in _linkage(group, tol):
                out.append((complex(np.mean(sub)), len(sub)))
    out.sort(key=lambda rm: (round(rm[0].real, 9), round(rm[0].imag, 9)))
    return out


class Series:
    """Truncated power series ``c_0 + c_1 z + ... + c_N z^N``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex], order: int | None = None):
        a = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex)
        if order is None:
            order = max(len(a) - 1, 0)
        if order < 0:
            raise InvalidInput("series truncation order must be >= 0")
        b = np.zeros(order + 1, complex)
        k = min(len(a), order + 1)
        b[:k] = a[:k]
        object.__setattr__(self, "coeffs", _frozen(b))

    def __setattr__(self, name, value):
        raise AttributeError("Series is immutable")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return complex(acc) if np.ndim(acc) == 0 else acc

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise OrderTooLow(f"cannot extend a series of order {self.order} to {order}")
        return Series(self.coeffs[: order + 1], order)

    def derivative(self) -> "Series":
        n = self.order
        if n == 0:
            return Series([0.0], 0)
        return Series(self.coeffs[1:] * np.arange(1, n + 1), n - 1)

    def __add__(self, other) -> "Series":
        if not isinstance(other, Series):
            a = np.array(self.coeffs)
            a[0] += other
            return Series(a, self.order)
        n = min(self.order, other.order)
        return Series(self.coeffs[: n + 1] + other.coeffs[: n + 1], n)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(-self.coeffs, self.order)

    def __sub__(self, other) -> "Series":
        return self + (-other if isinstance(other, Series) else -other)

    def __mul__(self, other) -> "Series":
        if isinstance(other, Series):
            return series_mul(self, other)
        return Series(self.coeffs * complex(other), self.order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Series":
        if isinstance(other, Series):
            return series_div(self, other)
        return Series(self.coeffs / complex(other), self.order)

    def __repr__(self) -> str:
        return f"Series({[complex(c) for c in self.coeffs]}, order={self.order})"


def series_mul(a: Series, b: Series) -> Series:
    n = min(a.order, b.order)
    return Series(np.convolve(a.coeffs[: n + 1], b.coeffs[: n + 1])[: n + 1], n)


def series_div(a: Series, b: Series) -> Series:
    n = min(a.order, b.order)
    b0 = b.coeffs[0]
    if b0 == 0:
        raise DivByNonUnit("divisor series has zero constant term")
    out = np.zeros(n + 1, complex)
    bc = b.coeffs
    for k in range(n + 1):
        acc = a.coeffs[k] - np.dot(bc[1 : k + 1], out[k - 1 :: -1][:k]) if k else a.coeffs[0]
        out[k] = acc / b0
    return Series(out, n)


def series_sqrt(a: Series, root0: complex) -> Series:
    """Square root series whose constant term is ``root0`` (a square root of a_0)."""
    if root0 == 0:
        raise DivByNonUnit("square root series needs a nonzero constant term")
    n = a.order
    out = np.zeros(n + 1, complex)
    out[0] = root0
    for k in range(1, n + 1):
        s = np.dot(out[1:k], out[k - 1 : 0 : -1]) if k > 1 else 0.0
        out[k] = (a.coeffs[k] - s) / (2 * root0)
    return Series(out, n)


def series_compose(s: Series, t: Series) -> Series:
    """``s(t(z))``; ``t`` must have zero constant term."""
    if t.coeffs[0] != 0:
        raise InvalidInput("inner series of a composition must vanish at 0")
    n = min(s.order, t.order)
    tt = t.truncate(n)
    acc = Series([s.coeffs[n]], n)
    for c in s.coeffs[n - 1 :: -1] if n > 0 else []:
        acc = series_mul(acc, tt) + c
    if n == 0:
        acc = Series([s.coeffs[0]], 0)
    return acc


def jet(s: Series, k: int) -> complex:
    """k-th derivative at 0, i.e. ``k! * c_k``."""
    if k < 0:
        raise InvalidInput("jet order must be >= 0")
    if k > s.order:
        raise OrderTooLow(f"jet of order {k} requested from a series of order {s.order}")
    return factorial(k) * complex(s.coeffs[k])


def poly_to_series(p: Poly, order: int = SERIES_ORDER) -> Series:
    return Series(p.coeffs, order)
