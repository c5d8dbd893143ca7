"""Spread of the per-start optima of the solver.

A small spread is consistent with a single maximizer on the search set; the
number is reported, not tested.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from cycloproj.fn_solver import FeasibleSpec, maximize_product


@dataclass
class Config:
    n_max: int = 7
    seed: int = 42


def main(cfg: Config) -> None:
    for n in range(4, cfg.n_max + 1):
        for c in (0.2, 0.5, 0.8):
            r = maximize_product(FeasibleSpec(n, c), seed=cfg.seed, certify=False)
            values = np.array(r.start_values)
            print(f"n={n} c={c}: f={r.f_estimate:.9f}  value spread {np.ptp(values):.2e}  superdiagonal spread {r.start_dispersion:.2e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    for k, v in vars(Config()).items():
        p.add_argument(f"--{k.replace('_', '-')}", dest=k, type=type(v), default=v)
    main(Config(**vars(p.parse_args())))
