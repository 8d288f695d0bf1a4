"""Survey A-indices and existence verdicts over random manufactured systems.

    python scripts/index_survey.py [count] [seed]

Every genuine monodromy has positive determinant, so the index must be even;
the script counts violations (there should be none) and compares the index
with the declared antiperiodic dimension of each system.
"""
from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass

import numpy as np

from floqnf.floquet import check_real_T_periodic_existence
from floqnf.linsys import random_manufactured


@dataclass
class Config:
    count: int = 50
    seed: int = 7
    dims: tuple = (2, 3, 4)
    declared: tuple = (0, 2)


def main(argv):
    cfg = Config(*(int(a) for a in argv[:2]))
    rng = np.random.default_rng(cfg.seed)
    tally, odd, mismatch = Counter(), 0, 0
    for _ in range(cfg.count):
        n = int(rng.choice(cfg.dims))
        d = int(rng.choice([x for x in cfg.declared if x <= n]))
        dec = check_real_T_periodic_existence(random_manufactured(rng, n, d))
        tally[(n, d, dec.a_index)] += 1
        odd += dec.a_index % 2
        # declared negative blocks may pair up and cancel, so the index can be lower
        mismatch += dec.a_index > d
    for (n, d, a), c in sorted(tally.items()):
        print(f"n={n} declared d={d} -> A-index {a}: {c}")
    print(f"odd indices: {odd}   index above declared: {mismatch}")


if __name__ == "__main__":
    main(sys.argv[1:])
