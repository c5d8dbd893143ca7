"""Numerical solver for f_n(c) = max Π(A) over unit-diagonal A with 0 <= A <= tI.

Search runs over real persymmetric matrices with nonnegative superdiagonal,
which loses nothing (see :func:`canonicalize`).  Feasibility is restored after
every ascent step by Dykstra's alternating projections.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import CERT_TOL, FEAS_TOL, eigvalsh, gram_factor, spectral_clip
from .map_sim import product_operator
from .linalg import operator_norm
from .subspaces import Subspace, SubspaceSystem, dixmier_number

DYKSTRA_TOL = 1e-10
DYKSTRA_ROUNDS = 10000
ASCENT_STEPS = 5000
ASCENT_TOL = 1e-10
ARMIJO = 1e-4
SHRINK = 0.5
INITIAL_STEP = 0.1


class InfeasibleError(ValueError):
    pass


class ProjectionError(RuntimeError):
    def __init__(self, residual: float, rounds: int):
        super().__init__(f"Dykstra projection stalled after {rounds} rounds (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class FeasibleSpec:
    n: int
    c: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must lie in [0, 1], got {self.c}")

    @property
    def t(self) -> float:
        return 1.0 + (self.n - 1) * self.c


@dataclass
class SolveResult:
    spec: FeasibleSpec
    f_estimate: float
    optimum: np.ndarray
    certificate_value: float
    certificate_gap: float
    witness_product_norm: float
    witness_dixmier: float
    starts_used: int
    iterations: int
    seed: int
    start_values: list = field(default_factory=list)  # Π at each start's end point
    start_superdiagonals: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.certificate_gap <= CERT_TOL

    @property
    def start_dispersion(self) -> float:
        """Max spread of the optimal superdiagonal across starts (reported, not asserted)."""
        if len(self.start_superdiagonals) < 2:
            return 0.0
        S = np.array(self.start_superdiagonals)
        return float(np.max(S.max(axis=0) - S.min(axis=0)))

    def to_json(self) -> dict:
        return {
            "n": self.spec.n,
            "c": self.spec.c,
            "t": self.spec.t,
            "f_estimate": self.f_estimate,
            "optimum": self.optimum.tolist(),
            "certificate_value": self.certificate_value,
            "certificate_gap": self.certificate_gap,
            "witness_product_norm": self.witness_product_norm,
            "witness_dixmier": self.witness_dixmier,
            "starts_used": self.starts_used,
            "iterations": self.iterations,
            "seed": self.seed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def product(A) -> float:
    """Π(A) = |a_12 a_23 ... a_{n-1,n}|."""
    return float(np.prod(np.abs(np.diag(np.asarray(A), 1))))


def reverse(A: np.ndarray) -> np.ndarray:
    return A[::-1, ::-1]


def feasibility_violation(A, spec: FeasibleSpec) -> dict:
    A = np.asarray(A)
    w = eigvalsh(A)
    return {
        "unit diagonal": float(np.max(np.abs(np.diag(A) - 1.0))),
        "hermitian": float(np.max(np.abs(A - A.conj().T))),
        "lambda_min >= 0": float(max(0.0, -w[0])),
        "lambda_max <= t": float(max(0.0, w[-1] - spec.t)),
    }


def check_feasible(A, spec: FeasibleSpec, tol: float = FEAS_TOL) -> None:
    bad = {k: v for k, v in feasibility_violation(A, spec).items() if v > tol}
    if bad:
        raise InfeasibleError(f"matrix outside H_{spec.n}({spec.t:g}): " + ", ".join(f"{k} off by {v:.3e}" for k, v in bad.items()))


def canonicalize(A, spec: FeasibleSpec) -> np.ndarray:
    """Map A in H_n(t) to a real persymmetric point with Π no smaller.

    Diagonal unitary conjugation makes the superdiagonal nonnegative, the real
    part (average with the transpose) removes imaginary entries, and averaging
    with the index reversal makes the matrix persymmetric.
    """
    A = np.asarray(A, dtype=complex)
    check_feasible(A, spec)
    n = A.shape[0]
    u = np.ones(n, dtype=complex)
    for i in range(n - 1):
        a = A[i, i + 1]
        u[i + 1] = u[i] * (np.conj(a) / abs(a) if abs(a) > 0 else 1.0)
    B = np.conj(u)[:, None] * A * u[None, :]
    C = 0.5 * (B + B.T).real
    D = 0.5 * (C + reverse(C))
    np.fill_diagonal(D, 1.0)
    return D


def affine_projection(X: np.ndarray) -> np.ndarray:
    """Frobenius projection onto {symmetric, persymmetric, unit diagonal}."""
    R = X[::-1, ::-1]
    X = 0.25 * (X + X.T + R + R.T)
    np.fill_diagonal(X, 1.0)
    return X


def _box(X: np.ndarray, t: float, clip) -> np.ndarray:
    return np.real(clip(X, 0.0, t))


def _nonneg_superdiag(X: np.ndarray) -> np.ndarray:
    X = X.copy()
    n = X.shape[0]
    i = np.arange(n - 1)
    v = np.maximum(X[i, i + 1], 0.0)
    X[i, i + 1] = v
    X[i + 1, i] = v
    return X


def project_feasible(
    A,
    spec: FeasibleSpec,
    tol: float = DYKSTRA_TOL,
    max_rounds: int = DYKSTRA_ROUNDS,
    nonneg_superdiag: bool = False,
    clip=spectral_clip,
    return_rounds: bool = False,
):
    """Dykstra projection onto the real persymmetric slice of H_n(t).

    Alternates the closed-form affine projection with the spectral clip to
    [0, t]; ``nonneg_superdiag`` adds the orthant a_{i,i+1} >= 0 as a third set.
    """
    X = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    if nonneg_superdiag:
        # if the two-set projection already lies in the orthant it is the answer
        out, rounds = project_feasible(X, spec, tol, max_rounds, False, clip, True)
        if np.all(np.diag(out, 1) >= 0):
            return (out, rounds) if return_rounds else out
    t = spec.t
    x = X.copy()
    q_box = np.zeros_like(x)
    q_pos = np.zeros_like(x)
    for rounds in range(1, max_rounds + 1):
        y = affine_projection(x)
        z = _box(y + q_box, t, clip)
        q_box = y + q_box - z
        if nonneg_superdiag:
            w = _nonneg_superdiag(z + q_pos)
            q_pos = z + q_pos - w
        else:
            w = z
        step = np.linalg.norm(w - x)
        x = w
        # iterates can sit still while the corrections move; also require
        # the affine and spectral pieces to agree
        if step < tol and np.linalg.norm(y - x) < tol:
            break
    else:
        residual = np.linalg.norm(affine_projection(x) - x)
        if residual > 1e-6:
            raise ProjectionError(residual, max_rounds)
    out = affine_projection(x)
    if nonneg_superdiag:
        out = _nonneg_superdiag(out)
    return (out, rounds) if return_rounds else out


def log_objective(A: np.ndarray) -> float:
    d = np.diag(A, 1)
    if np.any(d <= 0):
        return -np.inf
    return float(np.sum(np.log(d)))


def log_gradient(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    G = np.zeros((n, n))
    i = np.arange(n - 1)
    g = 0.5 / np.diag(A, 1)
    G[i, i + 1] = g
    G[i + 1, i] = g
    return G


def projected_ascent(
    A0: np.ndarray,
    spec: FeasibleSpec,
    objective,
    gradient,
    max_steps: int = ASCENT_STEPS,
    tol: float = ASCENT_TOL,
    grow: float = 2.0,
    max_step: float = 1.0,
    **proj_kw,
) -> tuple[np.ndarray, float, int]:
    """Projected gradient ascent with Armijo backtracking."""
    A = A0
    f = objective(A)
    if f == -np.inf:
        raise ValueError("starting point has a nonpositive superdiagonal entry")
    s = INITIAL_STEP
    steps = 0
    for steps in range(1, max_steps + 1):
        G = gradient(A)
        while True:
            try:
                B = project_feasible(A + s * G, spec, **proj_kw)
            except ProjectionError:
                B, fb = None, -np.inf
            else:
                fb = objective(B)
            if B is not None and fb >= f + ARMIJO * float(np.sum(G * (B - A))):
                break
            s *= SHRINK
            if s < 1e-16:
                return A, f, steps
        delta = fb - f
        A, f = B, fb
        s = min(s * grow, max_step)
        if abs(delta) < tol:
            break
    return A, f, steps


def alternating_matrix(n: int, s: float) -> np.ndarray:
    """a_ij = (-1)^(i+j+1) s off the diagonal."""
    i = np.arange(n)
    sign = -((-1.0) ** (i[:, None] + i[None, :]))
    A = s * sign
    np.fill_diagonal(A, 1.0)
    return A


def corner_pattern(n: int, c: float) -> np.ndarray:
    """Tridiagonal sqrt(c) with corner 2c - 1: the n = 3 optimum, reused as a warm start."""
    A = np.eye(n) + np.sqrt(c) * (np.eye(n, k=1) + np.eye(n, k=-1))
    if n >= 3:
        A[0, -1] = A[-1, 0] = 2 * c - 1
    return A


def starting_points(spec: FeasibleSpec, starts: int, rng: np.random.Generator) -> list[np.ndarray]:
    n, c = spec.n, spec.c
    seeds = [
        np.eye(n) + 0.5 * c * (np.eye(n, k=1) + np.eye(n, k=-1)),
        alternating_matrix(n, min((n - 1) * c, 1.0 / (n - 1))),
        corner_pattern(n, c),
    ]
    while len(seeds) < starts:
        N = rng.normal(size=(n, n))
        seeds.append(np.eye(n) + c * 0.5 * (N + N.T))
    pts = []
    for S in seeds[:starts]:
        P = project_feasible(S, spec)
        P = canonicalize(P, spec)
        if np.all(np.diag(P, 1) > 0):
            pts.append(P)
    return pts


def certify_optimal(A, spec: FeasibleSpec, starts: int = 8, seed: int = 0, max_steps: int = 2000, clip=spectral_clip) -> float:
    """Largest value of B -> Σ b_{i,i+1}/a_{i,i+1} found over feasible B with b_{i,i+1} >= 0.

    A is certified optimal when this is <= n - 1 (up to CERT_TOL).
    """
    A = np.asarray(A, dtype=float)
    d = np.diag(A, 1)
    if np.any(d <= 1e-10):
        raise ValueError("certificate needs a strictly positive superdiagonal")
    n = spec.n
    W = np.zeros((n, n))
    i = np.arange(n - 1)
    W[i, i + 1] = W[i + 1, i] = 0.5 / d
    W = 0.5 * (W + reverse(W))

    def objective(B):
        return float(np.sum(np.diag(B, 1) / d))

    rng = np.random.default_rng(seed)
    best = -np.inf
    cands = [A, np.eye(n), corner_pattern(n, spec.c)]
    while len(cands) < starts:
        N = rng.normal(size=(n, n))
        cands.append(np.eye(n) + spec.c * 0.5 * (N + N.T))
    for B0 in cands[:starts]:
        try:
            B0 = project_feasible(B0, spec, nonneg_superdiag=True, clip=clip)
        except ProjectionError:
            continue
        _, f, _ = projected_ascent(
            B0, spec, objective, lambda B: W, max_steps=max_steps, tol=1e-11,
            max_step=10.0, nonneg_superdiag=True, clip=clip,
        )
        best = max(best, f)
    return best


def subspace_witness(A, spec: FeasibleSpec) -> tuple[SubspaceSystem, float, float]:
    """Lines through the Gram vectors of A; returns (system, ‖P_n...P_1‖, c_D)."""
    V = gram_factor(A)
    n = V.shape[1]
    sys = SubspaceSystem(n, tuple(Subspace(V[:, [k]]) for k in range(n)))
    return sys, operator_norm(product_operator(sys)), dixmier_number(sys)


def default_starts(n: int) -> int:
    return max(8, 2 * n)


def maximize_product(spec: FeasibleSpec, starts: int | None = None, seed: int = 42, clip=spectral_clip, certify: bool = True) -> SolveResult:
    n = spec.n
    starts = default_starts(n) if starts is None else int(starts)
    if starts < 1:
        raise ValueError("starts must be >= 1")
    if spec.c == 0.0:
        I = np.eye(n)
        _, pn, cd = subspace_witness(I, spec)
        return SolveResult(spec, 0.0, I, float("nan"), float("nan"), pn, cd, 0, 0, seed)

    rng = np.random.default_rng(seed)
    best_A, best_f = None, -np.inf
    total = 0
    values, diags = [], []
    pts = starting_points(spec, starts, rng)
    for A0 in pts:
        A, f, steps = projected_ascent(A0, spec, log_objective, log_gradient, clip=clip)
        total += steps
        values.append(float(np.exp(f)))
        diags.append(np.diag(A, 1).copy())
        if f > best_f:
            best_A, best_f = A, f
    if best_A is None or np.min(np.diag(best_A, 1)) <= 1e-14:
        I = np.eye(n)
        return SolveResult(spec, 0.0, I, float("nan"), float("nan"), 0.0, 0.0, len(pts), total, seed)

    f_est = product(best_A)
    cert = certify_optimal(best_A, spec, seed=seed, clip=clip) if certify else float("nan")
    _, pn, cd = subspace_witness(best_A, spec)
    return SolveResult(
        spec=spec,
        f_estimate=f_est,
        optimum=best_A,
        certificate_value=cert,
        certificate_gap=cert - (n - 1),
        witness_product_norm=pn,
        witness_dixmier=cd,
        starts_used=len(pts),
        iterations=total,
        seed=seed,
        start_values=values,
        start_superdiagonals=diags,
    )


def worker_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("CYCLOPROJ_THREADS", default)))
    except ValueError:
        return default


def solve_grid(n: int, c_grid, starts: int | None = None, seed: int = 42, workers: int | None = None, **kw) -> list[SolveResult]:
    """Solve every grid point; point k uses seed + k.  Output order follows the grid."""
    workers = worker_count() if workers is None else min(workers, worker_count(workers))
    jobs = [(FeasibleSpec(n, float(c)), seed + k) for k, c in enumerate(c_grid)]

    def run(job):
        spec, s = job
        return maximize_product(spec, starts=starts, seed=s, **kw)

    if workers <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))
