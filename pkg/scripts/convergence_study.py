"""Monodromy error against the closed form as the integrator tolerance shrinks.

    python scripts/convergence_study.py [out.csv]

System: Q*(t) = exp(t W), W = pi [[0,-1],[1,0]], R* = diag(0, ln 2), T = 1,
whose monodromy is diag(-1, -2).
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from floqnf.integrator import fundamental_solution, monodromy
from floqnf.io import write_csv
from floqnf.linsys import manufacture, manufactured_solution, rotation_qspec


@dataclass
class Config:
    tols: tuple = (1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12)
    period: float = 1.0
    out: str | None = None


def run(cfg: Config):
    sys_ = manufacture(rotation_qspec(2, cfg.period), np.diag([0.0, np.log(2.0)]))
    oracle = manufactured_solution(sys_, cfg.period)
    rows = []
    for tol in cfg.tols:
        sol = fundamental_solution(sys_, tol)
        err = float(np.max(np.abs(monodromy(sol) - oracle)))
        rows.append((tol, err, sol.stats["steps"], sol.stats["rejected_steps"]))
    return rows


def main(argv):
    cfg = Config(out=argv[0] if argv else None)
    rows = run(cfg)
    print(f"{'tol':>8} {'error':>10} {'steps':>6} {'rejected':>8}")
    for tol, err, steps, rej in rows:
        print(f"{tol:8.0e} {err:10.2e} {steps:6d} {rej:8d}")
    if cfg.out:
        write_csv(cfg.out, ["tol", "error", "steps", "rejected"], rows)


if __name__ == "__main__":
    main(sys.argv[1:])
