"""Empirical margin f_n(c) - (1 - a_n (1 - c)).

Whether f_n(c) <= 1 - a_n(1-c) on all of [0, 1] is not known; this reports
the largest margin seen on a grid.  Nothing is asserted.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from cycloproj.bounds import a_coef
from cycloproj.fn_solver import solve_grid


@dataclass
class Config:
    n_min: int = 4
    n_max: int = 6
    points: int = 11
    seed: int = 42


def main(cfg: Config) -> None:
    grid = np.linspace(0, 1, cfg.points).round(12)
    for n in range(cfg.n_min, cfg.n_max + 1):
        res = solve_grid(n, grid, seed=cfg.seed, certify=False)
        margin = [r.f_estimate - (1 - a_coef(n) * (1 - c)) for r, c in zip(res, grid)]
        k = int(np.argmax(margin))
        print(f"n={n}: max margin {margin[k]:+.3e} at c={grid[k]:.3f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    for k, v in vars(Config()).items():
        p.add_argument(f"--{k.replace('_', '-')}", dest=k, type=type(v), default=v)
    main(Config(**vars(p.parse_args())))
