"""Pairing between branch-point movements and quadratic differentials.

Each branch point ``p_j`` of order ``m_j - 1`` contributes one move parameter:
the unit displacement of its image in the ``x - x(p_j)`` chart.  Entry
``(a, j)`` of the pairing matrix is the residue contraction of the ``a``-th
basis quadratic differential against that move.  A nonzero kernel vector is a
first-order direction along which the underlying Riemann surface does not
change.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import pi
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .beltrami import BranchChart, residue_contraction
from .errors import DegenerateConfig, InvalidConfig, UnexpectedKernelDim
from .hyperelliptic import (
    Affine,
    Curve,
    CurvePoint,
    Divisor,
    Infinity,
    QuadDiff,
    eval_x_chart,
    involution,
    is_canonical,
    null_space,
    qd_basis,
    random_point,
    same_point,
    taylor_x_chart,
)

KERNEL_TOL = 1e-9
PAIR_XSEP = 1e-4


class BranchConfig:
    """Branch points with their orders (``order = m - 1 >= 1``)."""

    __slots__ = ("entries", "pairs")

    def __init__(self, entries: Iterable[tuple[CurvePoint, int]]):
        ents = []
        for pt, order in entries:
            if isinstance(pt, Infinity):
                raise InvalidConfig("branch points at infinity are not supported")
            if int(order) != order or order < 1:
                raise InvalidConfig(f"branch order must be a positive integer, got {order}")
            if pt.y == 0:
                raise InvalidConfig(f"{pt!r} is a Weierstrass point")
            ents.append((pt, int(order)))
        for i in range(len(ents)):
            for j in range(i):
                if same_point(ents[i][0], ents[j][0]):
                    raise InvalidConfig(f"branch points {i} and {j} coincide")
        object.__setattr__(self, "entries", tuple(ents))
        object.__setattr__(self, "pairs", self._find_pairs())

    def __setattr__(self, name, value):
        raise AttributeError("BranchConfig is immutable")

    @classmethod
    def simple(cls, points: Iterable[CurvePoint]) -> "BranchConfig":
        return cls((p, 1) for p in points)

    @classmethod
    def paired(cls, points: Iterable[CurvePoint], order: int = 1) -> "BranchConfig":
        """``p1, J p1, p2, J p2, ...``, all of the same order."""
        ents = []
        for p in points:
            ents += [(p, order), (involution(p), order)]
        return cls(ents)

    def _find_pairs(self) -> tuple[tuple[int, int], ...] | None:
        n = len(self.entries)
        if n % 2:
            return None
        used = [False] * n
        out = []
        for i, (p, o) in enumerate(self.entries):
            if used[i]:
                continue
            jp = involution(p)
            for j in range(i + 1, n):
                if not used[j] and self.entries[j][1] == o and same_point(self.entries[j][0], jp):
                    used[i] = used[j] = True
                    out.append((i, j))
                    break
            else:
                return None
        return tuple(out)

    @property
    def is_paired(self) -> bool:
        return self.pairs is not None

    @property
    def points(self) -> list[Affine]:
        return [p for p, _ in self.entries]

    @property
    def orders(self) -> list[int]:
        return [o for _, o in self.entries]

    @property
    def partition(self) -> list[int]:
        return sorted(self.orders, reverse=True)

    @property
    def k(self) -> int:
        return sum(self.orders)

    @property
    def is_simple(self) -> bool:
        return all(o == 1 for o in self.orders)

    def divisor(self) -> Divisor:
        return Divisor(self.entries)

    def check(self, c: Curve) -> None:
        for p, _ in self.entries:
            c.check_point(p)
            if c.is_weierstrass(p):
                raise InvalidConfig(f"{p!r} is a Weierstrass point")

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"BranchConfig({list(self.entries)!r})"

    def to_json(self) -> list:
        return [{"x": [p.x.real, p.x.imag], "y": [p.y.real, p.y.imag], "order": o}
                for p, o in self.entries]

    @classmethod
    def from_json(cls, c: Curve, data: list) -> "BranchConfig":
        ents = []
        for i, e in enumerate(data):
            try:
                x = complex(*e["x"])
                order = e.get("order", 1)
                if "y" in e:
                    pt = c.point(x, complex(*e["y"]))
                else:
                    pt = c.point(x, sheet=int(e.get("sheet", 1)))
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidConfig(f"config entry {i}: {exc}") from None
            ents.append((pt, order))
        return cls(ents)


@dataclass(frozen=True)
class PairingMatrix:
    M: np.ndarray
    config: BranchConfig
    chart: str = "x - x0"

    @property
    def shape(self) -> tuple[int, int]:
        return self.M.shape


def _column(c: Curve, basis: Sequence[QuadDiff], p: Affine, order: int) -> np.ndarray:
    if order == 1:
        return np.array([pi * 1j * eval_x_chart(c, a, p) for a in basis])
    m = order + 1
    chart = BranchChart.standard(m, order=2 * m)
    return np.array([residue_contraction(taylor_x_chart(c, a, p, m - 2), chart, 1.0) for a in basis])


def pairing_matrix(c: Curve, cfg: BranchConfig, basis: Sequence[QuadDiff] | None = None) -> PairingMatrix:
    """Rows: quadratic differentials (monomial basis by default); columns: branch points."""
    cfg.check(c)
    basis = qd_basis(c) if basis is None else list(basis)
    if not cfg.entries:
        return PairingMatrix(np.zeros((len(basis), 0), complex), cfg)
    cols = [_column(c, basis, p, o) for p, o in cfg.entries]
    return PairingMatrix(np.stack(cols, axis=1), cfg)


def kernel(M: PairingMatrix | np.ndarray, tol: float = KERNEL_TOL) -> list[np.ndarray]:
    """Orthonormal kernel basis, singular values below ``tol * sigma_max`` count as zero."""
    A = M.M if isinstance(M, PairingMatrix) else np.asarray(M, dtype=complex)
    if A.shape[1] == 0:
        return []
    return list(null_space(A, tol).T)


def rank(M: PairingMatrix | np.ndarray, tol: float = KERNEL_TOL) -> int:
    A = M.M if isinstance(M, PairingMatrix) else np.asarray(M)
    return A.shape[1] - len(kernel(A, tol))


class CriticalityResult(NamedTuple):
    kernel_dim: int
    is_canonical: bool
    consistent: bool


def criticality_test(c: Curve, cfg: BranchConfig, tol: float = KERNEL_TOL) -> CriticalityResult:
    """Kernel dimension, canonicity of the branch divisor, and ``kernel != 0 => canonical``."""
    if cfg.k > 2 * c.g - 2:
        raise InvalidConfig(f"total branching {cfg.k} exceeds 2g-2 = {2 * c.g - 2}")
    kd = len(kernel(pairing_matrix(c, cfg), tol))
    can = is_canonical(c, cfg.divisor()).canonical
    return CriticalityResult(kd, can, kd == 0 or can)


def _require_principal_paired(c: Curve, cfg: BranchConfig) -> None:
    if not (cfg.is_simple and cfg.is_paired and cfg.k == 2 * c.g - 2):
        raise InvalidConfig("expected 2g-2 simple branch points forming g-1 involution pairs")


def q_constants(c: Curve, cfg: BranchConfig, rtol: float = 1e-7) -> list[complex]:
    """Ratios tying the first ``g-2`` kernel coordinates to the last one.

    With ``x_1 .. x_{g-1}`` the pair abscissae and ``beta_l`` the
    anti-invariant differential ``prod_{k != l, k <= g-2} (x - x_k) dx^2/y``,
    ``Q_l = -beta_l(p_{g-1}) / beta_l(p_l)`` in the ``x`` chart.
    """
    _require_principal_paired(c, cfg)
    g = c.g
    reps = [cfg.entries[i][0] for i, _ in cfg.pairs]
    xs = [p.x for p in reps]
    scale = max(1.0, max(abs(x) for x in xs))
    out = []
    for l in range(g - 2):
        others = [xs[k] for k in range(g - 2) if k != l]

        def factor(p: Affine) -> complex:
            return complex(np.prod([p.x - xk for xk in others]))

        f_l, f_last = factor(reps[l]), factor(reps[g - 2])
        tiny = rtol * scale ** len(others)
        if abs(f_l) <= tiny or abs(f_last) <= tiny:
            raise DegenerateConfig(f"beta_{l + 1} vanishes at a required point (coincident x-coordinates?)")
        out.append(-(f_last / reps[g - 2].y) / (f_l / reps[l].y))
    return out


@dataclass(frozen=True)
class CriticalLine:
    vector: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    q: list[complex]
    pair_residual: float
    q_residual: float
    diagonal_defect: float
    singular_values: np.ndarray = field(repr=False)

    @property
    def basis(self) -> list[np.ndarray]:
        return [self.vector]

    @property
    def transverse(self) -> bool:
        """The line is not contained in the slice ``z_i = w_i``."""
        return self.diagonal_defect > 1e-6

    def to_json(self) -> dict:
        return {
            "kernel_dim": 1,
            "kernel": [[v.real, v.imag] for v in self.vector],
            "pairs": [list(p) for p in self.pairs],
            "q_constants": [[v.real, v.imag] for v in self.q],
            "pair_residual": self.pair_residual,
            "q_residual": self.q_residual,
            "diagonal_defect": self.diagonal_defect,
            "transverse": self.transverse,
        }


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    j = int(np.argmax(np.abs(v).round(12)))
    return v * (abs(v[j]) / v[j])


def critical_line(c: Curve, cfg: BranchConfig, tol: float = KERNEL_TOL) -> CriticalLine:
    """One-dimensional kernel for paired canonical simple configurations, with checks.

    Coordinates: ``z_i`` belongs to the first point of pair ``i`` and ``w_i``
    to its involution image.
    """
    _require_principal_paired(c, cfg)
    if not is_canonical(c, cfg.divisor()).canonical:
        raise InvalidConfig("the branch divisor is not canonical")
    pm = pairing_matrix(c, cfg)
    ker = kernel(pm, tol)
    if len(ker) != 1:
        raise UnexpectedKernelDim(f"expected a 1-dimensional kernel, found dimension {len(ker)}")
    v = _fix_phase(ker[0])
    z = np.array([v[i] for i, _ in cfg.pairs])
    w = np.array([v[j] for _, j in cfg.pairs])
    q = q_constants(c, cfg) if c.g >= 3 else []
    q_res = max((abs(z[l] - q[l] * z[-1]) for l in range(len(q))), default=0.0)
    return CriticalLine(
        vector=v,
        pairs=cfg.pairs,
        q=q,
        pair_residual=float(np.max(np.abs(z + w))),
        q_residual=float(q_res),
        diagonal_defect=float(np.max(np.abs(z - w))),
        singular_values=np.linalg.svd(pm.M, compute_uv=False),
    )


# ---------------------------------------------------------------------------
# random configurations

def random_config(c: Curve, k: int, rng: np.random.Generator, radius: float = 2.0) -> BranchConfig:
    """``k`` simple points with pairwise distinct ``x`` (no two share a fiber)."""
    pts: list[Affine] = []
    while len(pts) < k:
        pts.append(random_point(c, rng, radius=radius, avoid_x=[p.x for p in pts], x_sep=PAIR_XSEP))
    return BranchConfig.simple(pts)


def random_paired_config(c: Curve, n_pairs: int, rng: np.random.Generator, radius: float = 2.0) -> BranchConfig:
    pts: list[Affine] = []
    while len(pts) < n_pairs:
        pts.append(random_point(c, rng, radius=radius, avoid_x=[p.x for p in pts], x_sep=PAIR_XSEP))
    return BranchConfig.paired(pts)


def _rank_sample(args) -> int:
    curve_json, k, seed_seq = args
    c = Curve.from_json(curve_json)
    rng = np.random.default_rng(seed_seq)
    return rank(pairing_matrix(c, random_config(c, k, rng)))


def rank_profile(c: Curve, k: int, samples: int, seed: int = 0, workers: int = 1) -> dict:
    """Ranks of pairing matrices of random simple configurations of ``k`` points.

    One child seed per sample, so the result does not depend on ``workers``.
    """
    if k < 1 or samples < 1:
        raise InvalidConfig("k and samples must be positive")
    children = np.random.SeedSequence(seed).spawn(samples)
    jobs = [(c.to_json(), k, s) for s in children]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            ranks = list(ex.map(_rank_sample, jobs, chunksize=max(1, samples // (4 * workers))))
    else:
        ranks = [_rank_sample(j) for j in jobs]
    counts: dict[int, int] = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    return {
        "g": c.g,
        "k": k,
        "samples": samples,
        "seed": seed,
        "min_rank": min(ranks),
        "max_rank": max(ranks),
        "rank_counts": {str(r): n for r, n in sorted(counts.items())},
        "full_rank": min(ranks) == k,
    }
