"""Hyperelliptic curves ``y^2 = P(x)`` and their quadratic differentials.

The curve is the smooth compactification of the affine model; since
``deg P = 2g + 2`` is even there are two points at infinity, ``Infinity(+1)``
where ``y ~ +sqrt(lead) x^(g+1)`` and ``Infinity(-1)``.

Holomorphic quadratic differentials are written as

    U(x) dx^2/y^2 + V(x) dx^2/y,   deg U <= 2g-2,  deg V <= g-3,

the first summand invariant and the second anti-invariant under
``J(x, y) = (x, -y)``.  Local expressions use ``x - x0`` at affine
non-Weierstrass points, ``t`` with ``x - w = t^2 * unit`` at Weierstrass
points and ``s = 1/x`` at infinity.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from math import ceil, comb, log10
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .cpoly import Poly, Series, peval, roots, series_div, series_mul, series_sqrt, taylor_shift
from .errors import (
    InfinityChart,
    InvalidCurve,
    InvalidInput,
    NotOnCurve,
    UnstableExpansion,
    UnsupportedSupport,
    WeierstrassChart,
    ZeroDifferential,
    ZeroForm,
)

POINT_TOL = 1e-8
SVD_RTOL = 1e-9
# relative threshold below which a scaled local coefficient counts as zero
ORDER_RTOL = 1e-9


@dataclass(frozen=True)
class Affine:
    x: complex
    y: complex

    def __repr__(self) -> str:
        return f"Affine({self.x:.6g}, {self.y:.6g})"


@dataclass(frozen=True)
class Infinity:
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidInput("Infinity sign must be +1 or -1")


CurvePoint = Union[Affine, Infinity]


def same_point(a: CurvePoint, b: CurvePoint, tol: float = POINT_TOL) -> bool:
    if isinstance(a, Infinity) or isinstance(b, Infinity):
        return a == b
    return abs(a.x - b.x) < tol and abs(a.y - b.y) < tol


def involution(pt: CurvePoint) -> CurvePoint:
    """The hyperelliptic involution ``(x, y) -> (x, -y)``."""
    if isinstance(pt, Infinity):
        return Infinity(-pt.sign)
    return Affine(pt.x, -pt.y if pt.y != 0 else 0j)


class Curve:
    """Genus ``g >= 2`` hyperelliptic curve ``y^2 = P(x)`` with ``deg P = 2g+2``."""

    def __init__(self, P: Poly, weierstrass: Sequence[complex] | None = None):
        if P.degree < 6 or P.degree % 2:
            raise InvalidCurve(f"deg P must be even and >= 6, got {P.degree}")
        self.P = P
        self.g = P.degree // 2 - 1
        if weierstrass is None:
            rts = roots(P)
            if any(m > 1 for _, m in rts):
                raise InvalidCurve("P has a repeated root")
            weierstrass = [r for r, _ in rts]
        w = np.array(weierstrass, dtype=complex)
        if len(w) != P.degree:
            raise InvalidCurve("need exactly 2g+2 Weierstrass values")
        d = np.abs(w[:, None] - w[None, :]) + np.eye(len(w)) * 1e300
        if d.min() <= POINT_TOL:
            raise InvalidCurve("roots of P are not pairwise distinct")
        self.weierstrass = w
        self.weierstrass.flags.writeable = False
        self.sqrt_lead = cmath.sqrt(P.lead)

    @classmethod
    def from_roots(cls, ws: Iterable[complex], lead: complex = 1.0) -> "Curve":
        ws = list(ws)
        return cls(Poly.from_roots(ws, lead), ws)

    def __repr__(self) -> str:
        return f"Curve(g={self.g}, P={self.P!r})"

    def weierstrass_index(self, x: complex, tol: float = POINT_TOL) -> int | None:
        d = np.abs(self.weierstrass - x)
        j = int(np.argmin(d))
        return j if d[j] < tol else None

    def point(self, x: complex, y: complex | None = None, sheet: int = 1) -> Affine:
        """Affine point over ``x``; ``y`` defaults to ``sheet * sqrt(P(x))``."""
        x = complex(x)
        j = self.weierstrass_index(x)
        if j is not None:
            if y is not None and abs(y) > 1e-4:
                raise NotOnCurve(f"y must vanish over the Weierstrass value {x}")
            return Affine(complex(self.weierstrass[j]), 0j)
        px = self.P(x)
        if y is None:
            return Affine(x, sheet * cmath.sqrt(px))
        y = complex(y)
        if abs(y * y - px) >= POINT_TOL * (1 + abs(px)):
            raise NotOnCurve(f"({x}, {y}) does not satisfy y^2 = P(x)")
        return Affine(x, y)

    def check_point(self, pt: CurvePoint) -> CurvePoint:
        if isinstance(pt, Infinity):
            return pt
        return self.point(pt.x, pt.y)

    def is_weierstrass(self, pt: CurvePoint) -> bool:
        return isinstance(pt, Affine) and self.weierstrass_index(pt.x) is not None

    def min_weierstrass_distance(self, x: complex) -> float:
        return float(np.min(np.abs(self.weierstrass - x)))

    def to_json(self) -> dict:
        return {"P": self.P.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "Curve":
        return cls(Poly.from_json(data["P"]))


class Divisor:
    """Finite formal integer combination of curve points.

    Points closer than ``POINT_TOL`` are identified; zero multiplicities are
    dropped.
    """

    def __init__(self, entries: Iterable[tuple[CurvePoint, int]] = ()):
        merged: list[list] = []
        for pt, n in entries:
            n = int(n)
            for e in merged:
                if same_point(e[0], pt):
                    e[1] += n
                    break
            else:
                merged.append([pt, n])
        self.entries: tuple[tuple[CurvePoint, int], ...] = tuple((p, n) for p, n in merged if n != 0)

    @classmethod
    def of_points(cls, points: Iterable[CurvePoint]) -> "Divisor":
        return cls((p, 1) for p in points)

    @property
    def degree(self) -> int:
        return sum(n for _, n in self.entries)

    @property
    def is_effective(self) -> bool:
        return all(n > 0 for _, n in self.entries)

    @property
    def support(self) -> list[CurvePoint]:
        return [p for p, _ in self.entries]

    def multiplicity(self, pt: CurvePoint) -> int:
        return sum(n for p, n in self.entries if same_point(p, pt))

    def __iter__(self) -> Iterator[tuple[CurvePoint, int]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(self.entries + other.entries)

    def map(self, f) -> "Divisor":
        return Divisor((f(p), n) for p, n in self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Divisor) or len(self) != len(other):
            return False
        return all(other.multiplicity(p) == n for p, n in self.entries)

    def __repr__(self) -> str:
        return "Divisor(" + " + ".join(f"{n}*{p!r}" for p, n in self.entries) + ")"

    def to_json(self) -> list:
        out = []
        for p, n in self.entries:
            if isinstance(p, Infinity):
                out.append({"inf": p.sign, "mult": n})
            else:
                out.append({"x": [p.x.real, p.x.imag], "y": [p.y.real, p.y.imag], "mult": n})
        return out

    @classmethod
    def from_json(cls, curve: Curve, data: list) -> "Divisor":
        entries = []
        for item in data:
            n = int(item.get("mult", 1))
            if "inf" in item:
                entries.append((Infinity(int(item["inf"])), n))
            else:
                x = complex(*item["x"])
                y = complex(*item["y"]) if "y" in item else None
                entries.append((curve.point(x, y, int(item.get("sheet", 1))), n))
        return cls(entries)


class QuadDiff:
    """``U(x) dx^2/y^2 + V(x) dx^2/y`` with ``len(u) = 2g-1``, ``len(v) = g-2``."""

    __slots__ = ("u", "v")

    def __init__(self, u: Sequence[complex], v: Sequence[complex] = ()):
        u = np.array(u, dtype=complex).reshape(-1)
        v = np.array(v, dtype=complex).reshape(-1)
        if len(u) % 2 == 0 or len(u) < 3:
            raise InvalidInput("u must have odd length 2g-1 >= 3")
        g = (len(u) + 1) // 2
        if len(v) != g - 2:
            raise InvalidInput(f"v must have length g-2 = {g - 2}")
        u.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def __setattr__(self, name, value):
        raise AttributeError("QuadDiff is immutable")

    @property
    def genus(self) -> int:
        return (len(self.u) + 1) // 2

    @property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    @classmethod
    def from_vector(cls, vec: Sequence[complex], g: int) -> "QuadDiff":
        vec = np.asarray(vec, dtype=complex)
        return cls(vec[: 2 * g - 1], vec[2 * g - 1 :])

    @property
    def U(self) -> Poly:
        return Poly(self.u)

    @property
    def V(self) -> Poly:
        return Poly(self.v)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.u) and not np.any(self.v)

    def __add__(self, other: "QuadDiff") -> "QuadDiff":
        return QuadDiff(self.u + other.u, self.v + other.v)

    def __mul__(self, s) -> "QuadDiff":
        return QuadDiff(self.u * s, self.v * s)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"QuadDiff(u={list(self.u)}, v={list(self.v)})"


class OneForm:
    """``f(x) dx/y`` with ``deg f <= g-1``."""

    __slots__ = ("f", "g")

    def __init__(self, f: Poly | Sequence[complex], g: int):
        f = f if isinstance(f, Poly) else Poly(f)
        if f.degree > g - 1:
            raise InvalidInput(f"a holomorphic 1-form needs deg f <= g-1 = {g - 1}, got {f.degree}")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)

    def __setattr__(self, name, value):
        raise AttributeError("OneForm is immutable")

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero

    @property
    def coeffs(self) -> np.ndarray:
        out = np.zeros(self.g, complex)
        out[: len(self.f.coeffs)] = self.f.coeffs
        return out

    def __repr__(self) -> str:
        return f"OneForm({list(self.coeffs)}, g={self.g})"


def qd_basis(c: Curve) -> list[QuadDiff]:
    """Monomial basis: ``x^i dx^2/y^2`` (i <= 2g-2), then ``x^i dx^2/y`` (i <= g-3)."""
    g = c.g
    eye = np.eye(3 * g - 3)
    return [QuadDiff.from_vector(row, g) for row in eye]


# ---------------------------------------------------------------------------
# local expansions

def _affine_check(c: Curve, pt: CurvePoint) -> Affine:
    if isinstance(pt, Infinity):
        raise InfinityChart("x is not a coordinate at the points at infinity")
    pt = c.check_point(pt)
    if pt.y == 0:
        raise WeierstrassChart(f"x - {pt.x} is not a local coordinate at a Weierstrass point")
    return pt


def eval_x_chart(c: Curve, q: QuadDiff, pt: CurvePoint) -> complex:
    """Coefficient of ``(d(x - x0))^2`` of ``q`` at an affine non-Weierstrass point."""
    pt = _affine_check(c, pt)
    x, y = pt.x, pt.y
    val = peval(q.U, x) / c.P(x)
    if len(q.v):
        val += peval(q.V, x) / y
    return complex(val)


def _radius(c: Curve, x0: complex) -> float:
    return c.min_weierstrass_distance(x0)


def _recip_series(c: Curve, pt: Affine, order: int) -> tuple[Series, Series]:
    """Series of ``1/P(x0+t)`` and ``1/y(x0+t)`` on the branch through ``pt``."""
    Pt = Series(taylor_shift(c.P, pt.x), order)
    one = Series([1.0], order)
    inv_P = series_div(one, Pt)
    y = series_sqrt(Pt, pt.y)
    inv_y = series_div(one, y)
    return inv_P, inv_y


def _monomial_shift_matrix(n_mono: int, x0: complex, order: int) -> np.ndarray:
    """Row i holds the Taylor coefficients of ``(x0 + t)^i`` up to ``order``."""
    out = np.zeros((n_mono, order + 1), complex)
    for i in range(n_mono):
        for k in range(min(i, order) + 1):
            out[i, k] = comb(i, k) * x0 ** (i - k)
    return out


def _basis_local_matrix(c: Curve, pt: Affine, order: int) -> np.ndarray:
    """Local Taylor coefficients (columns k) of every basis element (rows)."""
    g = c.g
    inv_P, inv_y = _recip_series(c, pt, order)
    mono_u = _monomial_shift_matrix(2 * g - 1, pt.x, order)
    mono_v = _monomial_shift_matrix(max(g - 2, 0), pt.x, order)
    rows = [series_mul(Series(r, order), inv_P).coeffs for r in mono_u]
    rows += [series_mul(Series(r, order), inv_y).coeffs for r in mono_v]
    return np.array(rows)


def taylor_x_chart(c: Curve, q: QuadDiff, pt: CurvePoint, order: int) -> Series:
    """Taylor series in ``t = x - x0`` of the coefficient of ``q`` at ``pt``.

    ``y`` is continued as the square-root series of ``P(x0 + t)`` whose
    constant term is ``pt.y``.  Raises ``UnstableExpansion`` when the
    coefficients would span more than twelve orders of magnitude (the radius
    of convergence is the distance to the nearest Weierstrass value).
    """
    pt = _affine_check(c, pt)
    r = _radius(c, pt.x)
    if order > 0 and order * log10(max(1.0 / r, 1.0)) > 12:
        raise UnstableExpansion(f"order {order} expansion with convergence radius {r:.3g}")
    inv_P, inv_y = _recip_series(c, pt, order)
    out = series_mul(Series(taylor_shift(q.U, pt.x), order), inv_P)
    if len(q.v):
        out = out + series_mul(Series(taylor_shift(q.V, pt.x), order), inv_y)
    return out


def _reverse(coeffs: np.ndarray, length: int) -> np.ndarray:
    a = np.zeros(length, complex)
    a[: len(coeffs)] = coeffs
    return a[::-1]


def _infinity_series(c: Curve, sign: int, U: np.ndarray, V: np.ndarray | None, order: int,
                     one_form: bool = False) -> Series:
    """Local coefficient in ``s = 1/x`` at ``Infinity(sign)``.

    With ``P~(s) = s^(2g+2) P(1/s)`` and ``y = s^-(g+1) y~(s)``:
    ``U dx^2/y^2 -> U~/P~ ds^2``, ``V dx^2/y -> V~/y~ ds^2`` and
    ``f dx/y -> -f~/y~ ds``, where ``~`` reverses a coefficient list padded to
    its maximal length.
    """
    g = c.g
    Pt = Series(_reverse(c.P.coeffs, 2 * g + 3), order)
    yt = series_sqrt(Pt, sign * c.sqrt_lead)
    one = Series([1.0], order)
    if one_form:
        return -series_div(Series(_reverse(U, g), order), yt)
    out = series_div(Series(_reverse(U, 2 * g - 1), order), Pt)
    if V is not None and g > 2:
        out = out + series_mul(Series(_reverse(V, g - 2), order), series_div(one, yt))
    return out


def _first_nonzero(coeffs: np.ndarray, radius: float) -> int | None:
    scaled = np.abs(coeffs) * radius ** np.arange(len(coeffs))
    top = scaled.max() if len(scaled) else 0.0
    if top == 0.0:
        return None
    return int(np.flatnonzero(scaled > ORDER_RTOL * top)[0])


def vanishing_order(c: Curve, q: QuadDiff | OneForm, pt: CurvePoint) -> int:
    """Order of vanishing of a quadratic differential or 1-form at ``pt``."""
    if q.is_zero:
        raise ZeroDifferential("the zero differential vanishes to infinite order")
    g = c.g
    one_form = isinstance(q, OneForm)
    span = 1.0 + float(np.max(np.abs(c.weierstrass)))
    if isinstance(pt, Infinity):
        n = 4 * g
        if one_form:
            s = _infinity_series(c, pt.sign, q.coeffs, None, n, one_form=True)
        else:
            s = _infinity_series(c, pt.sign, q.u, q.v, n)
        return _first_nonzero(s.coeffs, min(1.0, 1.0 / span))
    pt = c.check_point(pt)
    j = c.weierstrass_index(pt.x)
    if j is not None:
        w = complex(c.weierstrass[j])
        r = min(1.0, _nearest_other(c, j))
        if one_form:
            return 2 * _first_nonzero(taylor_shift(q.f, w), r)
        orders = []
        if np.any(q.u):
            orders.append(2 * _first_nonzero(taylor_shift(q.U, w), r))
        if np.any(q.v):
            orders.append(2 * _first_nonzero(taylor_shift(q.V, w), r) + 1)
        return min(orders)
    if one_form:
        return _first_nonzero(taylor_shift(q.f, pt.x), min(1.0, span))
    r = min(1.0, _radius(c, pt.x))
    n = 4 * g
    inv_P, inv_y = _recip_series(c, pt, n)
    s = series_mul(Series(taylor_shift(q.U, pt.x), n), inv_P)
    if len(q.v):
        s = s + series_mul(Series(taylor_shift(q.V, pt.x), n), inv_y)
    return _first_nonzero(s.coeffs, r)


def _nearest_other(c: Curve, j: int) -> float:
    d = np.abs(c.weierstrass - c.weierstrass[j])
    d[j] = np.inf
    return float(d.min())


# ---------------------------------------------------------------------------
# jet conditions and Riemann-Roch dimensions

def _condition_rows(c: Curve, E: Divisor) -> np.ndarray:
    g = c.g
    nu, nv = 2 * g - 1, g - 2
    rows = []
    for pt, n in E:
        if isinstance(pt, Infinity):
            raise UnsupportedSupport("divisors supported at infinity are not handled")
        if n < 0:
            raise InvalidInput("divisor must be effective")
        pt = c.check_point(pt)
        if pt.y == 0:
            # t-coordinate: U part has order 2*ord(U), V part 2*ord(V)+1
            for k in range(ceil(n / 2)):
                row = np.zeros(nu + nv, complex)
                row[:nu] = _monomial_shift_matrix(nu, pt.x, k)[:, k]
                rows.append(row)
            for k in range(n // 2):
                row = np.zeros(nu + nv, complex)
                row[nu:] = _monomial_shift_matrix(nv, pt.x, k)[:, k]
                rows.append(row)
        else:
            local = _basis_local_matrix(c, pt, n - 1)
            r = min(1.0, _radius(c, pt.x))
            for k in range(n):
                rows.append(local[:, k] * r**k)
    if not rows:
        return np.zeros((0, nu + nv), complex)
    M = np.array(rows)
    norms = np.linalg.norm(M, axis=1)
    norms[norms == 0] = 1.0
    return M / norms[:, None]


def null_space(M: np.ndarray, rtol: float = SVD_RTOL) -> np.ndarray:
    """Orthonormal null-space basis (as columns) with cutoff ``rtol * sigma_max``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    if smax == 0.0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > rtol * smax))
    return vh[rank:].conj().T


def qd_with_zeros(c: Curve, E: Divisor) -> list[QuadDiff]:
    """Orthonormal basis of the quadratic differentials vanishing on ``E``."""
    K = null_space(_condition_rows(c, E))
    return [QuadDiff.from_vector(K[:, i], c.g) for i in range(K.shape[1])]


class CanonicalResult(NamedTuple):
    canonical: bool
    dim: int
    reason: str | None = None


def is_canonical(c: Curve, E: Divisor) -> CanonicalResult:
    """Degree ``2g-2`` and ``dim Q(X, -E) = g``; reports the dimension too."""
    dim = len(qd_with_zeros(c, E))
    if E.degree != 2 * c.g - 2:
        return CanonicalResult(False, dim, "degree")
    if dim != c.g:
        return CanonicalResult(False, dim, "dimension")
    return CanonicalResult(True, dim, None)


def oneform_divisor(c: Curve, w: OneForm) -> Divisor:
    """Zero divisor of ``f dx/y``; always of degree ``2g-2``."""
    if w.is_zero:
        raise ZeroForm("the zero 1-form has no divisor")
    coeffs = np.array(w.f.coeffs)
    # drop a numerically vanishing leading part (cancellation in linear combinations)
    top = np.max(np.abs(coeffs))
    keep = np.flatnonzero(np.abs(coeffs) > 1e-14 * top)
    f = Poly(coeffs[: keep[-1] + 1])
    entries: list[tuple[CurvePoint, int]] = []
    if f.degree >= 1:
        for r, m in roots(f):
            j = c.weierstrass_index(r, tol=1e-7)
            if j is not None:
                entries.append((Affine(complex(c.weierstrass[j]), 0j), 2 * m))
            else:
                p = c.point(r)
                entries.append((p, m))
                entries.append((involution(p), m))
    n_inf = c.g - 1 - f.degree
    if n_inf > 0:
        entries.append((Infinity(1), n_inf))
        entries.append((Infinity(-1), n_inf))
    return Divisor(entries)


# ---------------------------------------------------------------------------
# random sampling helpers

def random_curve(g: int, rng: np.random.Generator, radius: float = 1.5, min_sep: float = 0.25) -> Curve:
    """Monic curve whose Weierstrass values are uniform in a disk and well separated."""
    ws: list[complex] = []
    while len(ws) < 2 * g + 2:
        z = complex(*(rng.uniform(-radius, radius, 2)))
        if abs(z) <= radius and all(abs(z - w) > min_sep for w in ws):
            ws.append(z)
    return Curve.from_roots(ws)


def random_point(c: Curve, rng: np.random.Generator, radius: float = 2.0, margin: float = 0.05,
                 avoid_x: Iterable[complex] = (), x_sep: float = 1e-4) -> Affine:
    """Affine non-Weierstrass point with uniform ``x`` in a disk and random sheet."""
    avoid = list(avoid_x)
    while True:
        x = complex(*(rng.uniform(-radius, radius, 2)))
        if abs(x) > radius or c.min_weierstrass_distance(x) <= margin:
            continue
        if any(abs(x - a) <= x_sep for a in avoid):
            continue
        return c.point(x, sheet=1 if rng.random() < 0.5 else -1)
