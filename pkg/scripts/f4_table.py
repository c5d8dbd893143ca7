"""Bounds table with solver column for n = 4 (or any n) on a c grid.

    python scripts/f4_table.py --n 4 --points 21 --out results/f4.csv
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cycloproj.bounds import bounds_table, table_csv
from cycloproj.fn_solver import worker_count


@dataclass
class Config:
    n: int = 4
    points: int = 21
    seed: int = 42
    out: str = "results/f4.csv"


def main(cfg: Config) -> None:
    grid = np.linspace(0, 1, cfg.points).round(12)
    rows = bounds_table(cfg.n, grid, with_solver=True, seed=cfg.seed, workers=worker_count())
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    Path(cfg.out).write_text(table_csv(rows))
    for r in rows:
        print(f"c={r.c:.3f}  lb={r.lb_construction:.6f}  f={r.f_solver:.6f}  ub={r.ub_ours:.6f}")
    print(f"wrote {cfg.out}")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    for k, v in vars(Config()).items():
        p.add_argument(f"--{k}", type=type(v), default=v)
    main(Config(**vars(p.parse_args())))
