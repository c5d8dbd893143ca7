"""Command-line entry point: ``cycloproj {solve,table,simulate,verify}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds
from .fn_solver import FeasibleSpec, ProjectionError, SolveResult, maximize_product, subspace_witness, worker_count
from .map_sim import default_rate_bound, run_map
from .subspaces import SubspaceSystem, dixmier_number, friedrichs_number
from .verify import CHECKS, FAULTS, VerifyContext, run_checks

GRID_SNAP = 1e-12


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    c: float | None = None
    grid: list | None = None
    sweeps: int = 10
    starts: int | None = None
    seed: int = 42
    with_solver: bool = False
    system: str | None = None
    x0: str | None = None
    out: str | None = None
    format: str | None = None
    only: str | None = None
    fault: str | None = None

    def __post_init__(self):
        if self.n is not None and self.n < 2:
            raise ValueError(f"--n must be >= 2, got {self.n}")
        for c in ([self.c] if self.c is not None else []) + list(self.grid or []):
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"c values must lie in [0, 1], got {c}")
        if self.sweeps < 1:
            raise ValueError("--sweeps must be >= 1")


def parse_grid(text: str) -> list[float]:
    """``start:end:step`` (both ends included) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} is not start:end:step")
        start, end, step = map(float, parts)
        if step <= 0 or end < start:
            raise ValueError(f"grid {text!r} needs step > 0 and end >= start")
        count = int(math.floor((end - start) / step + GRID_SNAP)) + 1
        vals = [start + k * step for k in range(count)]
        # snap accumulated rounding onto the decimal grid and the end point
        vals = [round(v, 12) for v in vals]
        if abs(vals[-1] - end) <= GRID_SNAP:
            vals[-1] = end
        return vals
    return [float(v) for v in text.split(",") if v.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str, out: str | None) -> None:
    # side information goes to stderr when stdout carries the data
    print(msg, file=sys.stdout if out else sys.stderr)


SOLVE_SCALARS = [
    "n", "c", "t", "f_estimate", "certificate_value", "certificate_gap",
    "witness_product_norm", "witness_dixmier", "starts_used", "iterations", "seed",
]


def _solve_csv(res: SolveResult) -> str:
    d = res.to_json()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SOLVE_SCALARS)
    w.writerow([f"{d[k]:.17g}" if isinstance(d[k], float) else d[k] for k in SOLVE_SCALARS])
    return buf.getvalue()


def cmd_solve(cfg: RunConfig) -> int:
    if cfg.n is None or cfg.c is None:
        raise ValueError("solve needs --n and --c")
    try:
        res = maximize_product(FeasibleSpec(cfg.n, cfg.c), starts=cfg.starts, seed=cfg.seed)
    except (ProjectionError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return 2
    if not math.isfinite(res.f_estimate):
        print("solver failed: non-finite estimate", file=sys.stderr)
        return 2
    text = _solve_csv(res) if cfg.format == "csv" else res.dumps() + "\n"
    _emit(text, cfg.out)
    if cfg.system:
        wsys, _, _ = subspace_witness(res.optimum, res.spec)
        wsys.save(cfg.system)
    if math.isfinite(res.certificate_gap) and not res.certified:
        _note(f"# uncertified: certificate gap {res.certificate_gap:.3e}", cfg.out)
    return 0


def cmd_table(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise ValueError("table needs --n")
    grid = cfg.grid if cfg.grid is not None else ([cfg.c] if cfg.c is not None else parse_grid("0:1:0.05"))
    rows = bounds.bounds_table(cfg.n, grid, with_solver=cfg.with_solver, starts=cfg.starts, seed=cfg.seed, workers=worker_count())
    if cfg.format == "json":
        text = json.dumps([{k: getattr(r, k) for k in bounds.TABLE_HEADER} for r in rows], indent=1) + "\n"
    else:
        text = bounds.table_csv(rows)
    _emit(text, cfg.out)
    if cfg.n >= 3:
        fit = bounds.probe_slope(cfg.n)
        _note(f"# b_tilde (empirical fit of the lower-bound probe) = {fit.b_tilde:.6g}", cfg.out)
    a = bounds.a_coef(cfg.n)
    for r in rows:
        f = r.f_solver if r.f_solver is not None else r.f_closed
        if f is not None:
            _note(f"# c = {r.c:.6g}: f - (1 - a_n (1 - c)) = {f - (1 - a * (1 - r.c)):.6e}", cfg.out)
    return 0


def _load_vector(path: str, dim: int) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in data]
    x = np.array(vals, dtype=complex)
    if x.size != dim:
        raise ValueError(f"x0 has {x.size} entries, system lives in C^{dim}")
    return x


def cmd_simulate(cfg: RunConfig) -> int:
    if not cfg.system:
        raise ValueError("simulate needs --system")
    sysm = SubspaceSystem.load(cfg.system)
    if cfg.x0:
        x0 = _load_vector(cfg.x0, sysm.ambient_dim)
    else:
        rng = np.random.default_rng(cfg.seed)
        x0 = rng.normal(size=sysm.ambient_dim) + 1j * rng.normal(size=sysm.ambient_dim)
    trace = run_map(sysm, x0, cfg.sweeps)
    cf, cd = friedrichs_number(sysm), dixmier_number(sysm)
    rate = default_rate_bound(sysm.n, cf)
    if cfg.format == "json":
        text = json.dumps({"errors": trace.errors, "ratios": trace.contraction}) + "\n"
    else:
        text = trace.to_csv()
    _emit(text, cfg.out)
    _note(f"# c_F = {cf:.12g}", cfg.out)
    _note(f"# c_D = {cd:.12g}", cfg.out)
    _note(f"# predicted rate per sweep = {rate:.12g}", cfg.out)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    ctx = VerifyContext(seed=cfg.seed, n=cfg.n, fault=cfg.fault, starts=cfg.starts)
    results = run_checks(ctx, cfg.only)
    for r in results:
        print(r.line(), flush=True)
    failed = [r.name for r in results if r.passed is False]
    print(f"{len(results) - len(failed)}/{len(results)} checks without failure")
    return 1 if failed else 0


COMMANDS = {"solve": cmd_solve, "table": cmd_table, "simulate": cmd_simulate, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cycloproj", description=__doc__)
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--n", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--grid", type=parse_grid)
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--with-solver", action="store_true")
    p.add_argument("--system", help="subspace-system JSON (read by simulate, written by solve)")
    p.add_argument("--x0", help="JSON list of entries or [re, im] pairs")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--only", choices=list(CHECKS))
    p.add_argument("--fault", choices=sorted(FAULTS))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**vars(args))
        return COMMANDS[cfg.command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
