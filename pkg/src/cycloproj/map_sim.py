"""Cyclic alternating projections: traces, product norms and rate checks."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .linalg import operator_norm
from .subspaces import SubspaceSystem, friedrichs_number, intersection_projector


@dataclass(frozen=True)
class MapTrace:
    sweeps: int
    iterates: list  # x_0, x_n, x_2n, ...
    errors: list  # ‖x_kn - P_0 x_0‖
    contraction: list  # errors[k] / errors[k-1]; None where errors[k-1] == 0
    steps: list = field(default_factory=list)  # every x_j, only when requested

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sweep", "error", "ratio"])
        for k, e in enumerate(self.errors):
            r = self.contraction[k - 1] if k else None
            w.writerow([k, f"{e:.17g}", "" if r is None else f"{r:.17g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class RateReport:
    friedrichs: float
    c: float
    f_bound: float
    norms: list  # ‖(P_n...P_1)^k - P_0‖, k = 1..sweeps
    bounds: list  # f_bound**k

    @property
    def ok(self) -> bool:
        return all(v <= b + 1e-9 for v, b in zip(self.norms, self.bounds))


def product_operator(sys: SubspaceSystem) -> np.ndarray:
    """P_n ... P_2 P_1."""
    T = np.eye(sys.ambient_dim, dtype=complex)
    for P in sys.projectors():
        T = P @ T
    return T


def product_operator_norm(sys: SubspaceSystem) -> float:
    return operator_norm(product_operator(sys) - intersection_projector(sys))


def power_error_norm(sys: SubspaceSystem, k: int) -> float:
    """‖(P_n...P_1)^k - P_0‖."""
    T = np.linalg.matrix_power(product_operator(sys), k)
    return operator_norm(T - intersection_projector(sys))


def run_map(sys: SubspaceSystem, x0, sweeps: int, record_steps: bool = False) -> MapTrace:
    x = np.asarray(x0, dtype=complex).ravel()
    if x.shape[0] != sys.ambient_dim:
        raise ValueError(f"x0 has dimension {x.shape[0]}, system lives in C^{sys.ambient_dim}")
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    projs = sys.projectors()
    target = intersection_projector(sys) @ x
    iterates = [x.copy()]
    errors = [float(np.linalg.norm(x - target))]
    steps = [x.copy()] if record_steps else []
    for _ in range(sweeps):
        for P in projs:
            x = P @ x
            if record_steps:
                steps.append(x.copy())
        iterates.append(x.copy())
        errors.append(float(np.linalg.norm(x - target)))
    ratios = [errors[k] / errors[k - 1] if errors[k - 1] > 0 else None for k in range(1, len(errors))]
    return MapTrace(sweeps, iterates, errors, ratios, steps)


def default_rate_bound(n: int, c: float) -> float:
    from . import bounds

    if n == 2:
        return bounds.f2_closed(c)
    if n == 3:
        return bounds.f3_closed(c)
    return bounds.ub_ours(n, c)


def rate_check(sys: SubspaceSystem, c: float, sweeps: int, f_bound=None) -> RateReport:
    """Check ‖(P_n...P_1)^k - P_0‖ <= f(c)^k for k = 1..sweeps."""
    cf = friedrichs_number(sys)
    if cf > c + 1e-9:
        raise ValueError(f"measured Friedrichs number {cf:.12g} exceeds c = {c}")
    fb = default_rate_bound(sys.n, c) if f_bound is None else float(f_bound)
    T = product_operator(sys)
    P0 = intersection_projector(sys)
    norms, bnds = [], []
    Tk = np.eye(sys.ambient_dim, dtype=complex)
    for k in range(1, sweeps + 1):
        Tk = T @ Tk
        norms.append(operator_norm(Tk - P0))
        bnds.append(fb**k)
    return RateReport(cf, c, fb, norms, bnds)
