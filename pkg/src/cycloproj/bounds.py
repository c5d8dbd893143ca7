"""Closed forms, upper bounds and lower-bound constructions for f_n(c).

Also holds the path-graph Laplacian machinery the bounds are built from.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import eig_hermitian, operator_norm
from .map_sim import product_operator, product_operator_norm
from .subspaces import SubspaceSystem, dixmier_number, lines_system


def _check_c(c: float) -> float:
    c = float(c)
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c}")
    return c


@lru_cache(maxsize=None)
def sin2(n: int) -> float:
    """sin^2(pi / (2n))."""
    return math.sin(math.pi / (2 * n)) ** 2


def a_coef(n: int) -> float:
    return 2 * (n - 1) * sin2(n)


def b_coef(n: int) -> float:
    return 6 * (n - 1) ** 2 * sin2(n) ** 2


def f2_closed(c: float) -> float:
    return _check_c(c)


def f3_closed(c: float) -> float:
    c = _check_c(c)
    return 4 * c * c if c <= 0.25 else c


def fn_small_c(n: int, c: float) -> float:
    """(n-1)^(n-1) c^(n-1), valid only for c <= 1/(n-1)^2."""
    c = _check_c(c)
    if c > 1.0 / (n - 1) ** 2 + 1e-15:
        raise ValueError(f"small-c formula holds only for c <= 1/(n-1)^2 = {1 / (n - 1) ** 2:.6g}, got {c}")
    return float(((n - 1) * c) ** (n - 1))


def f_closed(n: int, c: float) -> float | None:
    """Exact f_n(c) where it is known, else None."""
    c = _check_c(c)
    if n == 2:
        return f2_closed(c)
    if n == 3:
        return f3_closed(c)
    if c <= 1.0 / (n - 1) ** 2:
        return fn_small_c(n, c)
    if c == 1.0:
        return 1.0
    return None


def ub_ours(n: int, c: float) -> float:
    c = _check_c(c)
    s = sin2(n)
    num = n - 4 * (n - 1) * s * (1 - c)
    den = n + 4 * (n - 1) ** 2 * s * (1 - c)
    return math.sqrt(max(num, 0.0) / den)


def ub_reciprocal_sqrt(n: int, c: float) -> float:
    """Intermediate bound 1/sqrt(1 + 4(n-1) sin^2(pi/2n) (1-c))."""
    c = _check_c(c)
    return 1.0 / math.sqrt(1 + 4 * (n - 1) * sin2(n) * (1 - c))


def ub_bgm(n: int, c: float) -> float:
    c = _check_c(c)
    return math.sqrt(1 - (1 - c) ** 2 / (16 * n * n))


def ub_bs(n: int, c: float) -> float:
    c = _check_c(c)
    return math.sqrt(1 - 3 * (n - 1) / n**3 * (1 - c))


def ub_quadratic(n: int, c: float) -> float:
    c = _check_c(c)
    return 1 - a_coef(n) * (1 - c) + b_coef(n) * (1 - c) ** 2


def lb_quadratic_template(n: int, c: float, b_tilde: float) -> float:
    c = _check_c(c)
    return 1 - a_coef(n) * (1 - c) - b_tilde * (1 - c) ** 2


# -- path graph ---------------------------------------------------------------


def path_laplacian(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("path Laplacian needs n >= 2")
    L = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    L[0, 0] = L[-1, -1] = 1.0
    return L


def fiedler(n: int, laplacian=path_laplacian) -> tuple[float, np.ndarray]:
    """Second-smallest eigenvalue of the path Laplacian and a unit eigenvector.

    The vector is real, orthogonal to the all-ones vector and has a
    nonnegative first component.
    """
    dec = eig_hermitian(laplacian(n))
    v = dec.eigenvectors[:, 1].real.copy()
    v -= v.mean()
    v /= np.linalg.norm(v)
    if v[0] < 0:
        v = -v
    return float(dec.eigenvalues[1]), v


def dn_constant(n: int) -> float:
    return n / (4 * sin2(n))


def check_difference_inequality(a) -> tuple[float, float]:
    """Both sides of Σ_{i<j}(a_i - a_j)^2 <= D_n Σ_i (a_i - a_{i+1})^2."""
    a = np.asarray(a, dtype=float)
    n = a.size
    diff = a[:, None] - a[None, :]
    lhs = float(np.sum(np.triu(diff, 1) ** 2))
    rhs = float(dn_constant(n) * np.sum(np.diff(a) ** 2))
    return lhs, rhs


def check_difference_inequality_vectors(V) -> tuple[float, float]:
    """Hilbert-space version for the columns v_1..v_n of V."""
    V = np.asarray(V, dtype=complex)
    n = V.shape[1]
    lhs = sum(np.linalg.norm(V[:, i] - V[:, j]) ** 2 for i in range(n) for j in range(i + 1, n))
    rhs = dn_constant(n) * sum(np.linalg.norm(V[:, i] - V[:, i + 1]) ** 2 for i in range(n - 1))
    return float(lhs), float(rhs)


# -- rotating-lines lower bound -------------------------------------------------


@dataclass(frozen=True)
class LowerBoundProbe:
    n: int
    tau: float
    alphas: np.ndarray
    c_of_tau: float
    product_norm: float
    det: float  # d(tau)
    s1: float  # Σ_{i<j} (α_i - α_j)^2
    s2: float  # Σ_i (α_i - α_{i+1})^2


def _pair_diffs(alphas: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(alphas.size, 1)
    return alphas[i] - alphas[j]


def probe_determinant(alphas: np.ndarray, tau: float) -> float:
    return float(np.sum(np.sin(_pair_diffs(alphas) * tau) ** 2))


def probe_system(alphas, tau: float) -> SubspaceSystem:
    """Lines L(α_k τ) in C^2."""
    return lines_system(np.asarray(alphas) * tau)


def lower_bound_probe(n: int, tau: float, alphas=None, validate: bool = True) -> LowerBoundProbe:
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    alphas = fiedler(n)[1] if alphas is None else np.asarray(alphas, dtype=float)
    d = probe_determinant(alphas, tau)
    if 4 * d > n * n + 1e-12:
        raise ValueError(f"d(tau) = {d} exceeds n^2/4; outside the construction")
    top = 0.5 * (n + math.sqrt(max(n * n - 4 * d, 0.0)))
    c = min(1.0, max(0.0, (top - 1) / (n - 1)))
    prod = float(np.prod(np.abs(np.cos(np.diff(alphas) * tau))))
    diffs = _pair_diffs(alphas)
    probe = LowerBoundProbe(
        n=n,
        tau=float(tau),
        alphas=alphas,
        c_of_tau=c,
        product_norm=prod,
        det=d,
        s1=float(np.sum(diffs**2)),
        s2=float(np.sum(np.diff(alphas) ** 2)),
    )
    if validate:
        sys = probe_system(alphas, tau)
        c_sys = dixmier_number(sys)
        p_sys = operator_norm(product_operator(sys))
        if abs(c_sys - c) > 1e-9 or abs(p_sys - prod) > 1e-9:
            raise ArithmeticError(
                f"probe formulas disagree with the explicit system: c {c} vs {c_sys}, product {prod} vs {p_sys}"
            )
    return probe


def probe_tau_max(alphas: np.ndarray) -> float:
    """First critical point of d(τ) > 0, i.e. the end of its increasing range."""
    diffs = _pair_diffs(alphas)
    diffs = diffs[np.abs(diffs) > 0]

    def slope(tau):
        return float(np.sum(diffs * np.sin(2 * diffs * tau)))

    h = math.pi / (64 * np.max(np.abs(diffs)))
    lo = 0.0
    hi = h
    while slope(hi) > 0:
        lo, hi = hi, hi + h
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return lo


@lru_cache(maxsize=None)
def _probe_range(n: int) -> tuple[float, float]:
    alphas = fiedler(n)[1]
    tmax = probe_tau_max(alphas)
    return tmax, lower_bound_probe(n, tmax, alphas, validate=False).c_of_tau


def invert_probe(n: int, c: float, tol: float = 1e-12) -> LowerBoundProbe:
    """Probe at the τ in [0, τ_max] where c(τ) = c.

    Bisection on τ (c decreases there).  The returned probe satisfies
    c - tol <= c_of_tau <= c, so its product norm is a lower bound for f_n(c).
    """
    c = _check_c(c)
    tmax, cmin = _probe_range(n)
    if c < cmin - tol:
        raise ValueError(f"c = {c} below the construction's range [{cmin:.6g}, 1] for n = {n}")
    alphas = fiedler(n)[1]
    if c >= 1.0:
        return lower_bound_probe(n, 0.0, alphas, validate=False)
    lo, hi = 0.0, tmax
    best = lower_bound_probe(n, hi, alphas, validate=False)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        probe = lower_bound_probe(n, mid, alphas, validate=False)
        if probe.c_of_tau > c:
            lo = mid
        else:
            hi, best = mid, probe
            if c - probe.c_of_tau <= tol:
                break
    return best


def lb_construction(n: int, c: float) -> float:
    """Lower bound on f_n(c) from the rotating-lines construction.

    Below the construction's reach c_min, concavity of f_n^(1/(n-1)) with
    f_n(0) = 0 gives f_n(c) >= (c/c_min)^(n-1) * lb(c_min).
    """
    c = _check_c(c)
    _, cmin = _probe_range(n)
    if c >= cmin:
        return invert_probe(n, c).product_norm
    return (c / cmin) ** (n - 1) * invert_probe(n, cmin).product_norm


@dataclass(frozen=True)
class SlopeFit:
    n: int
    slope: float  # d(product_norm)/d(1-c) at c -> 1
    b_tilde: float  # fitted curvature, labelled empirical
    one_minus_c: np.ndarray
    product_norm: np.ndarray


def probe_slope(n: int, lo: float = 1e-4, hi: float = 1e-2, points: int = 25) -> SlopeFit:
    """Fit product_norm - 1 = s (1-c) - b (1-c)^2 over 1-c in [lo, hi]."""
    x = np.geomspace(lo, hi, points)
    y = np.array([invert_probe(n, 1 - xi).product_norm for xi in x])
    coef, *_ = np.linalg.lstsq(np.column_stack([x, x**2]), y - 1, rcond=None)
    return SlopeFit(n, float(coef[0]), float(-coef[1]), x, y)


# -- table ----------------------------------------------------------------------

TABLE_HEADER = ["n", "c", "f_closed", "f_solver", "lb_construction", "ub_ours", "ub_bgm", "ub_bs", "ub_quadratic"]


@dataclass(frozen=True)
class BoundRow:
    n: int
    c: float
    f_closed: float | None
    f_solver: float | None
    lb_construction: float
    ub_ours: float
    ub_bgm: float
    ub_bs: float
    ub_quadratic: float
    lb_quadratic_template: float | None = None

    def cells(self) -> list[str]:
        def fmt(v):
            return "" if v is None else f"{v:.17g}"

        return [str(self.n)] + [fmt(getattr(self, k)) for k in TABLE_HEADER[1:]]


def bound_row(n: int, c: float, f_solver: float | None = None, b_tilde: float | None = None) -> BoundRow:
    return BoundRow(
        n=n,
        c=c,
        f_closed=f_closed(n, c),
        f_solver=f_solver,
        lb_construction=lb_construction(n, c),
        ub_ours=ub_ours(n, c),
        ub_bgm=ub_bgm(n, c),
        ub_bs=ub_bs(n, c),
        ub_quadratic=ub_quadratic(n, c),
        lb_quadratic_template=None if b_tilde is None else lb_quadratic_template(n, c, b_tilde),
    )


def bounds_table(n: int, c_grid, with_solver: bool = False, starts: int | None = None, seed: int = 42, workers: int = 1):
    """One BoundRow per grid point, in grid order."""
    grid = [_check_c(c) for c in c_grid]
    f_solver = [None] * len(grid)
    if with_solver:
        from .fn_solver import solve_grid

        f_solver = [r.f_estimate for r in solve_grid(n, grid, starts=starts, seed=seed, workers=workers)]
    return [bound_row(n, c, f) for c, f in zip(grid, f_solver)]


def table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def witness_product_check(n: int, tau: float) -> tuple[float, float]:
    """(formula product, ‖P_n...P_1 - P_0‖ of the explicit system) at τ > 0."""
    p = lower_bound_probe(n, tau, validate=False)
    return p.product_norm, product_operator_norm(probe_system(p.alphas, tau))
