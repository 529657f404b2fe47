"""Acceptance suite: eleven end-to-end checks with fixed seeds.

``run_all()`` prints one pass/fail line per check; it backs both the
``--selftest`` flag of the command-line tool and ``tests/test_acceptance.py``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import pi
from typing import Callable

import numpy as np

from .beltrami import (
    BranchChart,
    BumpProfile,
    MoveSpec,
    QuadratureSpec,
    mu_dot0,
    mu_t,
    quadrature_contraction,
    residue_contraction,
)
from .cpoly import Series
from .critical import (
    BranchConfig,
    critical_line,
    criticality_test,
    kernel,
    pairing_matrix,
    random_config,
    random_paired_config,
    rank,
)
from .errors import InvalidPath, SheetMismatch
from .hyperelliptic import (
    Curve,
    Divisor,
    involution,
    is_canonical,
    random_curve,
    random_point,
)
from .oracles import abelian_integral
from .sl2 import CurvePath, ProjPoint, Sl2System, branch_divisor, eigen_residual, monodromy


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.2f} s)"


def _cplx(rng: np.random.Generator, n: int | None = None):
    if n is None:
        return complex(rng.normal(), rng.normal())
    return rng.normal(size=n) + 1j * rng.normal(size=n)


BUMP_PAIRS = [(0.3, 0.7), (0.2, 0.5), (0.4, 0.9)]


def c01_residue_golden(seed: int = 101) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    chart = BranchChart.standard(2)
    worst, per_call = 0.0, []
    for _ in range(20):
        a, q = _cplx(rng), _cplx(rng)
        t0 = time.perf_counter()
        v = residue_contraction(Series([a], 0), chart, q)
        per_call.append(time.perf_counter() - t0)
        exact = pi * 1j * q * a
        worst = max(worst, abs(v - exact) / abs(exact))
    ms = float(np.median(per_call)) * 1e3
    return worst < 1e-12 and ms < 1.0, f"max rel err {worst:.1e}, median call {ms:.3f} ms"


def c02_oracle_equivalence(seed: int = 102) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst, n = 0.0, 0
    for m in (2, 3, 4):
        chart = BranchChart.standard(m)
        for r1, r2 in BUMP_PAIRS:
            b = BumpProfile(r1, r2)
            for _ in range(5):
                alpha = Series(_cplx(rng, 5), 4)
                q = _cplx(rng)
                ref = residue_contraction(alpha, chart, q)
                num = quadrature_contraction(alpha, chart, b, q)
                worst = max(worst, abs(num - ref) / abs(ref))
                n += 1
    dt = time.perf_counter() - t0
    return worst < 1e-6 and dt < 30.0 and n == 45, f"{n} cases, max rel err {worst:.1e}, {dt:.2f} s"


def c03_bump_independence(seed: int = 103) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for m in (2, 3, 4):
        chart = BranchChart.standard(m)
        for r1, r2 in BUMP_PAIRS:
            alpha, q = Series(_cplx(rng, 5), 4), _cplx(rng)
            v5 = quadrature_contraction(alpha, chart, BumpProfile(r1, r2, smoothness=2), q)
            v7 = quadrature_contraction(alpha, chart, BumpProfile(r1, r2, smoothness=3), q)
            worst = max(worst, abs(v5 - v7) / max(abs(v5), 1e-300))
    return worst < 1e-6, f"quintic vs septic smoothstep, max rel diff {worst:.1e}"


def c04_first_order(seed: int = 104) -> tuple[bool, str]:
    ts = np.array([1e-2, 1e-3, 1e-4])
    b = BumpProfile(0.3, 0.7)
    q = 0.1 + 0.05j
    g1 = np.linspace(-1.0, 1.0, 50)
    Z = g1[:, None] + 1j * g1[None, :]
    slopes = []
    for m in (2, 3):
        chart = BranchChart.standard(m)
        dot = mu_dot0(chart, b, q, Z)
        errs = [float(np.max(np.abs(mu_t(chart, b, MoveSpec(q, t), Z) / t - dot))) for t in ts]
        slopes.append(float(np.polyfit(np.log10(ts), np.log10(errs), 1)[0]))
    ok = all(abs(s - 1.0) <= 0.1 for s in slopes)
    return ok, "log-log slopes " + ", ".join(f"m={m}: {s:.3f}" for m, s in zip((2, 3), slopes))


def c05_canonical_divisors(seed: int = 105) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    bad_paired, bad_generic, n_generic = 0, 0, 0
    for g in (2, 3, 4):
        for _ in range(5):
            c = random_curve(g, rng)
            pts = []
            while len(pts) < g - 1:
                pts.append(random_point(c, rng, avoid_x=[p.x for p in pts]))
            E = Divisor.of_points(pts + [involution(p) for p in pts])
            r = is_canonical(c, E)
            bad_paired += not (r.canonical and r.dim == g)
    gens = (2, 3, 4)
    for i in range(100):
        g = gens[i % 3]
        c = random_curve(g, rng)
        cfg = random_config(c, 2 * g - 2, rng)
        r = is_canonical(c, cfg.divisor())
        bad_generic += r.canonical or r.dim != g - 1
        n_generic += 1
    dt = time.perf_counter() - t0
    ok = bad_paired == 0 and bad_generic == 0 and dt < 10.0
    return ok, (f"paired failures {bad_paired}/15, generic failures {bad_generic}/{n_generic}, "
                f"{dt:.2f} s")


def c06_sl2_cross_check(seed: int = 106) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    bad_deg = bad_res = bad_can = 0
    worst = 0.0
    for g in (2, 3, 4):
        for _ in range(50):
            c = random_curve(g, rng)
            sys_ = Sl2System.from_coeffs(c, _cplx(rng, g), _cplx(rng, g), _cplx(rng, g))
            cp = ProjPoint(_cplx(rng), _cplx(rng))
            D = branch_divisor(sys_, cp)
            bad_deg += D.degree != 2 * g - 2
            for pt in D.support:
                r = eigen_residual(sys_, cp, pt)
                worst = max(worst, r)
                bad_res += r >= 1e-8
            bad_can += not is_canonical(c, D).canonical
    dt = time.perf_counter() - t0
    ok = bad_deg == bad_res == bad_can == 0 and dt < 60.0
    return ok, (f"150 systems: degree failures {bad_deg}, residual failures {bad_res} "
                f"(max {worst:.1e}), non-canonical {bad_can}, {dt:.2f} s")


def _random_loop(c: Curve, rng: np.random.Generator) -> CurvePath:
    while True:
        center = complex(*rng.uniform(-1.0, 1.0, 2))
        radius = rng.uniform(0.3, 1.6)
        path = CurvePath.circle(center, radius, n=48, sheet=int(rng.choice([1, -1])))
        d = np.abs(c.weierstrass - center)
        if np.all(np.abs(d - radius) > 0.05) and np.sum(d < radius) % 2 == 0:
            return path


def _homotopic_pair(c: Curve, rng: np.random.Generator) -> tuple[CurvePath, CurvePath]:
    """A circle enclosing two Weierstrass values and a star-shaped wobble of it."""
    while True:
        i, j = rng.choice(len(c.weierstrass), 2, replace=False)
        center = 0.5 * (c.weierstrass[i] + c.weierstrass[j])
        radius = (0.5 * abs(c.weierstrass[i] - c.weierstrass[j]) + 0.05) / 0.75
        d = np.abs(c.weierstrass - center)
        # the wobble stays in the annulus 0.8 r .. 1.2 r, which must be free of branch values
        if np.sum(d < radius) != 2 or np.any((d > 0.75 * radius) & (d < 1.25 * radius + 0.05)):
            continue
        n = 48
        ang = 2 * np.pi * np.arange(n) / n
        wobble = 1.0 + 0.2 * rng.uniform(-1, 1, n)
        wobble[0] = 1.0
        sheet = int(rng.choice([1, -1]))
        a = CurvePath(tuple(center + radius * np.exp(1j * ang)), sheet, closed=True)
        b = CurvePath(tuple(center + radius * wobble * np.exp(1j * ang)), sheet, closed=True)
        return a, b


def c07_monodromy(seed: int = 107) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    det_err = ab_err = hom_err = 0.0
    for g in (2, 3):
        for _ in range(4):
            c = random_curve(g, rng)
            sys_ = Sl2System.from_coeffs(c, _cplx(rng, g), _cplx(rng, g), _cplx(rng, g))
            loop = _random_loop(c, rng)
            phi = monodromy(sys_, loop)
            det_err = max(det_err, abs(np.linalg.det(phi) - 1.0))

            f = _cplx(rng, g)
            diag = Sl2System.from_coeffs(c, f, [0], [0])
            phi = monodromy(diag, loop)
            I = abelian_integral(c, loop.waypoints, loop.sheet, f)
            ref = np.diag([np.exp(I), np.exp(-I)])
            ab_err = max(ab_err, float(np.max(np.abs(phi - ref)) / max(1.0, np.max(np.abs(ref)))))

            a, b = _homotopic_pair(c, rng)
            pa, pb = monodromy(sys_, a), monodromy(sys_, b)
            hom_err = max(hom_err, float(np.max(np.abs(pa - pb)) / max(1.0, np.max(np.abs(pa)))))
    ok = det_err < 1e-8 and ab_err < 1e-6 and hom_err < 1e-6
    return ok, f"|det-1| {det_err:.1e}, abelian err {ab_err:.1e}, homotopic diff {hom_err:.1e}"


def _mixed_config(c: Curve, rng: np.random.Generator) -> BranchConfig:
    g = c.g
    kind = rng.integers(4)
    if kind == 0:
        return random_config(c, int(rng.integers(1, 2 * g - 1)), rng)
    if kind == 1:
        return random_paired_config(c, int(rng.integers(1, g)), rng)
    if kind == 2:
        # some pairs plus unpaired simple points
        n_pairs = int(rng.integers(1, g))
        paired = random_paired_config(c, n_pairs, rng)
        extra = random_config(c, int(rng.integers(0, 2 * g - 2 - 2 * n_pairs + 1)), rng)
        ents = list(paired.entries)
        for p, o in extra.entries:
            if all(abs(p.x - q.x) > 1e-4 for q, _ in ents):
                ents.append((p, o))
        return BranchConfig(ents)
    # a higher-order point, possibly with its partner
    p = random_point(c, rng)
    order = int(rng.integers(2, 2 * g - 1))
    ents = [(p, order)]
    if 2 * order <= 2 * g - 2 and rng.random() < 0.5:
        ents.append((involution(p), order))
    return BranchConfig(ents)


def c08_holomoves_implication(seed: int = 108) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    counter = nontrivial = 0
    for i in range(200):
        c = random_curve(2 + i % 2, rng)
        r = criticality_test(c, _mixed_config(c, rng))
        nontrivial += r.kernel_dim > 0
        counter += not r.consistent
    return counter == 0, f"200 configs, {nontrivial} with nontrivial kernel, {counter} counterexamples"


def c09_hyperelliptic_converse(seed: int = 109) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    bad = []
    worst_pair = worst_q = 0.0
    for g in (2, 3, 4):
        for _ in range(10):
            c = random_curve(g, rng)
            L = critical_line(c, random_paired_config(c, g - 1, rng))
            worst_pair = max(worst_pair, L.pair_residual)
            worst_q = max(worst_q, L.q_residual)
            if L.pair_residual >= 1e-8 or L.q_residual >= 1e-8 or not L.transverse \
                    or any(abs(q) < 1e-12 for q in L.q) or len(L.q) != g - 2:
                bad.append(g)
    return not bad, (f"30 configs, kernel_dim 1 throughout, max |z+w| {worst_pair:.1e}, "
                     f"max |z-Qz| {worst_q:.1e}, failures {len(bad)}")


def c10_subcanonical_rank(seed: int = 110) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    bad, total = 0, 0
    for g in (2, 3, 4):
        for k in range(1, 2 * g - 2):
            for _ in range(100):
                c = random_curve(g, rng)
                bad += rank(pairing_matrix(c, random_config(c, k, rng))) != k
                total += 1
    return bad == 0, f"{total} configs over (g, k) with k < 2g-2, rank deficient {bad}"


def c11_chart_invariance(seed: int = 111) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    changed = 0
    dims = []
    for i in range(20):
        g = 2 + i % 3
        c = random_curve(g, rng)
        cfg = random_paired_config(c, g - 1, rng) if i % 2 else random_config(c, 2 * g - 2, rng)
        M = pairing_matrix(c, cfg).M
        d0 = len(kernel(M))
        dims.append(d0)
        for _ in range(20):
            scale = np.exp(rng.uniform(-2, 2, M.shape[1]) + 1j * rng.uniform(0, 2 * pi, M.shape[1]))
            changed += len(kernel(M * scale[None, :])) != d0
    return changed == 0, f"400 rescalings, kernel dims seen {sorted(set(dims))}, changes {changed}"


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "residue formula golden case", c01_residue_golden),
    (2, "residue vs quadrature oracle", c02_oracle_equivalence),
    (3, "bump-profile independence", c03_bump_independence),
    (4, "first-order Beltrami term", c04_first_order),
    (5, "canonical-divisor test", c05_canonical_divisors),
    (6, "sl2 branch divisors", c06_sl2_cross_check),
    (7, "monodromy", c07_monodromy),
    (8, "nontrivial kernel implies canonical", c08_holomoves_implication),
    (9, "hyperelliptic critical line", c09_hyperelliptic_converse),
    (10, "subcanonical immersion", c10_subcanonical_rank),
    (11, "chart invariance of kernel dimension", c11_chart_invariance),
]


def run_criterion(number: int) -> CriterionResult:
    num, name, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported rather than raised
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(verbose: bool = True) -> list[CriterionResult]:
    results = []
    for num, _, _ in CRITERIA:
        r = run_criterion(num)
        if verbose:
            print(r.line(), flush=True)
        results.append(r)
    if verbose:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return results
