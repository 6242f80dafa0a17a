"""Worst finite-difference relative error per loss kernel on random inputs.

Shares the input generators of the test suite, so run it from the repo root:

    python3 scripts/gradient_report.py --draws 200
"""

import argparse
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "tests"))

from extrapkit.losskit import grad_check  # noqa: E402
from gradcases import KERNELS  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=100)
    ap.add_argument("--epsilon", type=float, default=1e-5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print("kernel,draws,max_rel_error,median_rel_error,seconds")
    for name, case in KERNELS.items():
        start = time.perf_counter()
        errs = [grad_check(fn, point, args.epsilon)
                for _ in range(args.draws) for point, fn in case(rng)]
        print(f"{name},{args.draws},{max(errs):.3e},{np.median(errs):.3e},"
              f"{time.perf_counter() - start:.2f}")


if __name__ == "__main__":
    main()
