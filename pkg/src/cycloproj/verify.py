"""Named numerical checks behind ``cycloproj verify``.

Every check takes a :class:`VerifyContext` and returns a :class:`CheckResult`.
Faults are injected through the context (a broken spectral clip handed to the
solver, a perturbed Laplacian handed to the eigen-analysis); nothing global is
patched.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .fn_solver import FeasibleSpec, SolveResult, maximize_product
from .linalg import operator_norm, spectral_clip
from .map_sim import power_error_norm
from .subspaces import (
    dixmier_by_definition,
    dixmier_number,
    friedrichs_number,
    lines_system,
    projector_sum,
    random_system,
)


def _broken_clip(A, lo, hi):
    return spectral_clip(A, lo, 1.1 * hi)


def _broken_laplacian(n):
    L = bounds.path_laplacian(n)
    L[0, 0] += 0.05
    return L


FAULTS = {
    "clip": {"clip": _broken_clip},
    "laplacian": {"laplacian": _broken_laplacian},
}


@dataclass
class CheckResult:
    name: str
    passed: bool | None  # None: skipped by the n filter
    detail: str

    @property
    def status(self) -> str:
        return {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]

    def line(self) -> str:
        return f"{self.status} {self.name}: {self.detail}"


@dataclass
class VerifyContext:
    seed: int = 42
    n: int | None = None  # restrict checks to this n where they range over n
    fault: str | None = None
    starts: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.fault is not None and self.fault not in FAULTS:
            raise ValueError(f"unknown fault {self.fault!r}; choose from {sorted(FAULTS)}")

    @property
    def clip(self):
        return FAULTS.get(self.fault, {}).get("clip", spectral_clip)

    @property
    def laplacian(self):
        return FAULTS.get(self.fault, {}).get("laplacian", bounds.path_laplacian)

    def ns(self, default) -> list[int]:
        return [k for k in default if self.n is None or k == self.n]

    def solve(self, n: int, c: float) -> SolveResult:
        key = (n, round(float(c), 12))
        if key not in self._cache:
            self._cache[key] = maximize_product(FeasibleSpec(n, key[1]), starts=self.starts, seed=self.seed, clip=self.clip)
        return self._cache[key]

    def solves(self) -> list[SolveResult]:
        return list(self._cache.values())


def _skip(name: str) -> CheckResult:
    return CheckResult(name, None, "no n in range")


def _grid(k: int) -> list[float]:
    return [round(i / k, 12) for i in range(k + 1)]


def check_f3_reproduction(ctx: VerifyContext) -> CheckResult:
    name = "f3-reproduction"
    if not ctx.ns([3]):
        return _skip(name)
    t0 = time.perf_counter()
    worst = max(abs(ctx.solve(3, c).f_estimate - bounds.f3_closed(c)) for c in _grid(20))
    dt = time.perf_counter() - t0
    return CheckResult(name, worst <= 1e-5 and dt < 30.0, f"max |f - f3| = {worst:.2e} over 21 points, {dt:.1f} s")


def check_small_c(ctx: VerifyContext) -> CheckResult:
    name = "small-c"
    ns = ctx.ns([3, 4, 5])
    if not ns:
        return _skip(name)
    worst = 0.0
    for n in ns:
        for frac in (0.2, 0.5, 0.9):
            c = frac / (n - 1) ** 2
            worst = max(worst, abs(ctx.solve(n, c).f_estimate - bounds.fn_small_c(n, c)))
    return CheckResult(name, worst <= 1e-5, f"max error {worst:.2e} for n in {ns}")


def check_functional_equation(ctx: VerifyContext) -> CheckResult:
    """f_n(1/((n-1)^2 c)) = f_n(c) / ((n-1)^(n-1) c^(n-1))."""
    name = "functional-equation"
    ns = ctx.ns([3, 4])
    if not ns:
        return _skip(name)
    ok, parts = True, []
    if 3 in ns:
        worst = 0.0
        for c in np.linspace(0.25, 1.0, 31):
            lhs = bounds.f3_closed(1 / (4 * c))
            rhs = bounds.f3_closed(c) / (4 * c * c)
            worst = max(worst, abs(lhs - rhs))
        ok &= worst <= 1e-15
        parts.append(f"n=3 closed form max gap {worst:.1e}")
    if 4 in ns:
        worst = 0.0
        for c in (0.15, 0.25, 0.4):
            lhs = ctx.solve(4, 1 / (9 * c)).f_estimate
            rhs = ctx.solve(4, c).f_estimate / (27 * c**3)
            worst = max(worst, abs(lhs - rhs))
        ok &= worst <= 1e-4
        parts.append(f"n=4 solver max gap {worst:.2e}")
    return CheckResult(name, bool(ok), "; ".join(parts))


def check_witness(ctx: VerifyContext) -> CheckResult:
    name = "witness"
    results = [r for r in ctx.solves() if ctx.n is None or r.spec.n == ctx.n]
    if not results:
        for c in (0.1, 0.5, 0.9):
            results.append(ctx.solve(ctx.n or 3, c))
    err = max(abs(r.witness_product_norm - r.f_estimate) for r in results)
    excess = max(r.witness_dixmier - r.spec.c for r in results)
    ok = err <= 1e-7 and excess <= 1e-7
    return CheckResult(name, ok, f"{len(results)} solves, max |norm - f| = {err:.2e}, max c_D - c = {excess:.2e}")


def check_sandwich(ctx: VerifyContext) -> CheckResult:
    name = "sandwich"
    ns = ctx.ns([3, 4, 5])
    if not ns:
        return _skip(name)
    lo_gap = hi_gap = -math.inf
    for n in ns:
        for c in (0.3, 0.6, 0.9):
            f = ctx.solve(n, c).f_estimate
            lo_gap = max(lo_gap, bounds.lb_construction(n, c) - f)
            hi_gap = max(hi_gap, f - bounds.ub_ours(n, c))
    ok = lo_gap <= 0.0 and hi_gap <= 1e-6
    return CheckResult(name, ok, f"max(lb - f) = {lo_gap:.2e}, max(f - ub) = {hi_gap:.2e}")


def check_kayalar_weinert(ctx: VerifyContext) -> CheckResult:
    name = "kayalar-weinert"
    rng = np.random.default_rng(ctx.seed)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 9))
        common = int(rng.integers(0, d // 2 + 1))
        dims = [int(rng.integers(common + 1, d + 1)) - common for _ in range(2)]
        sys = random_system(rng, 2, d, dims=dims, common_dim=common)
        cf = friedrichs_number(sys)
        for k in (1, 2, 3):
            worst = max(worst, abs(power_error_norm(sys, k) - cf ** (2 * k - 1)))
    return CheckResult(name, worst <= 1e-7, f"50 systems, k = 1..3, max error {worst:.2e}")


def check_sum_projections(ctx: VerifyContext) -> CheckResult:
    name = "sum-projections"
    rng = np.random.default_rng(ctx.seed + 1)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 6)) if ctx.n is None else ctx.n
        d = int(rng.integers(2, 8))
        sys = random_system(rng, n, d)
        lhs = operator_norm(projector_sum(sys))
        worst = max(worst, abs(lhs - 1 - (n - 1) * dixmier_by_definition(sys)))
    # lines at angle θ: c_D = cos θ exactly
    line_err = 0.0
    for theta in np.linspace(0.05, 1.5, 12):
        line_err = max(line_err, abs(dixmier_number(lines_system([0.0, theta])) - math.cos(theta)))
    ok = worst <= 1e-6 and line_err <= 1e-12
    return CheckResult(name, ok, f"50 systems max gap {worst:.2e}; two-line witness error {line_err:.1e}")


def check_path_laplacian(ctx: VerifyContext) -> CheckResult:
    name = "path-laplacian"
    eig_err = max(abs(bounds.fiedler(n, ctx.laplacian)[0] - 4 * bounds.sin2(n)) for n in range(2, 51))
    rng = np.random.default_rng(ctx.seed + 2)
    violations = 0
    for n in (3, 5, 8):
        for _ in range(1000):
            lhs, rhs = bounds.check_difference_inequality(rng.normal(size=n))
            violations += lhs > rhs * (1 + 1e-12)
    lhs, rhs = bounds.check_difference_inequality([1.0, 0.0, -1.0])
    eq_err = max(abs(lhs - 6), abs(rhs - 6))
    v = bounds.fiedler(3, ctx.laplacian)[1]
    lv, rv = bounds.check_difference_inequality(v)
    eq_err = max(eq_err, abs(lv - rv))
    ok = eig_err <= 1e-10 and violations == 0 and eq_err <= 1e-9
    return CheckResult(
        name, ok, f"max |λ2 - 4 sin²| = {eig_err:.1e}; {violations} violations in 3000 vectors; equality error {eq_err:.1e}"
    )


def check_lower_bound_slope(ctx: VerifyContext) -> CheckResult:
    name = "lower-bound-slope"
    ns = ctx.ns([3, 4, 5])
    if not ns:
        return _skip(name)
    rel = 0.0
    for n in ns:
        fit = bounds.probe_slope(n)
        rel = max(rel, abs(fit.slope + bounds.a_coef(n)) / bounds.a_coef(n))
    return CheckResult(name, rel <= 0.02, f"max relative slope error {rel:.2e} for n in {ns}")


def check_concavity(ctx: VerifyContext) -> CheckResult:
    name = "concavity"
    ns = ctx.ns([3, 4])
    if not ns:
        return _skip(name)
    worst_conc = worst_mono = -math.inf
    for n in ns:
        grid = _grid(20) if n == 3 else _grid(10)
        f = np.array([ctx.solve(n, c).f_estimate for c in grid])
        g = np.maximum(f, 0.0) ** (1.0 / (n - 1))
        worst_conc = max(worst_conc, float(np.max(0.5 * (g[:-2] + g[2:]) - g[1:-1])))
        worst_mono = max(worst_mono, float(np.max(f[:-1] - f[1:])))
    ok = worst_conc <= 1e-5 and worst_mono <= 1e-5
    return CheckResult(name, ok, f"max midpoint excess {worst_conc:.2e}, max decrease {worst_mono:.2e}")


def brute_force_f3(c_values, step: float = 1e-3, feas_tol: float = 1e-12) -> dict:
    """Grid search of a_12^2 over [[1,x,y],[x,1,x],[y,x,1]] with spectrum in [0, 1+2c]."""
    x = np.arange(0, int(round(1 / step)) + 1) * step
    y = np.arange(-int(round(1 / step)), int(round(1 / step)) + 1) * step
    best = {c: 0.0 for c in c_values}
    for chunk in np.array_split(x, 8):
        X, Y = np.meshgrid(chunk, y, indexing="ij")
        A = np.zeros(X.shape + (3, 3))
        A[..., 0, 0] = A[..., 1, 1] = A[..., 2, 2] = 1.0
        A[..., 0, 1] = A[..., 1, 0] = A[..., 1, 2] = A[..., 2, 1] = X
        A[..., 0, 2] = A[..., 2, 0] = Y
        w = np.linalg.eigvalsh(A)
        for c in c_values:
            ok = (w[..., 0] >= -feas_tol) & (w[..., -1] <= 1 + 2 * c + feas_tol)
            if ok.any():
                best[c] = max(best[c], float(np.max(X[ok] ** 2)))
    return best


def check_brute_force(ctx: VerifyContext) -> CheckResult:
    name = "brute-force"
    if not ctx.ns([3]):
        return _skip(name)
    cs = (0.1, 0.3, 0.7)
    t0 = time.perf_counter()
    grid_best = brute_force_f3(cs)
    gap = max(abs(grid_best[c] - ctx.solve(3, c).f_estimate) for c in cs)
    dt = time.perf_counter() - t0
    return CheckResult(name, gap <= 2e-3 and dt < 120.0, f"max |grid - solver| = {gap:.2e}, {dt:.1f} s")


def check_endpoints(ctx: VerifyContext) -> CheckResult:
    name = "endpoints"
    ns = ctx.ns([2, 3, 4])
    if not ns:
        return _skip(name)
    zero_ok = all(ctx.solve(n, 0.0).f_estimate == 0.0 for n in ns)
    low = min(ctx.solve(n, 1.0).f_estimate for n in ns)
    return CheckResult(name, zero_ok and low >= 1 - 1e-4, f"f(n,0) == 0: {zero_ok}; min f(n,1) = {low:.10f}")


CHECKS = {
    "f3-reproduction": check_f3_reproduction,
    "small-c": check_small_c,
    "functional-equation": check_functional_equation,
    "sandwich": check_sandwich,
    "kayalar-weinert": check_kayalar_weinert,
    "sum-projections": check_sum_projections,
    "path-laplacian": check_path_laplacian,
    "lower-bound-slope": check_lower_bound_slope,
    "concavity": check_concavity,
    "brute-force": check_brute_force,
    "endpoints": check_endpoints,
    # last, so it sees every solve the other checks made
    "witness": check_witness,
}


def run_checks(ctx: VerifyContext, only: str | None = None) -> list[CheckResult]:
    if only is not None and only not in CHECKS:
        raise KeyError(f"unknown check {only!r}; choose from {', '.join(CHECKS)}")
    names = [only] if only else list(CHECKS)
    return [CHECKS[k](ctx) for k in names]
