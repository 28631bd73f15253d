"""Mean wall time of one two-step localization on the fixed array vs T."""
import argparse
import time

import numpy as np

from tdoa.model import NoiseModel, deploy_fixed_paper_array, make_rng, simulate
from tdoa.pipeline import localize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=1000)
    args = ap.parse_args()
    x = np.array([52.0, 52.0, 52.0])
    print(f"{'T':>5} {'m':>6} {'mean [s]':>12} {'median [s]':>12}")
    for T in (1, 3, 10, 30, 100, 300):
        arr = deploy_fixed_paper_array(T)
        ts = []
        for r in range(args.runs):
            meas = simulate(arr, x, NoiseModel(5.0), rng=make_rng(0, T, r))
            t0 = time.perf_counter()
            localize(meas)
            ts.append(time.perf_counter() - t0)
        print(f"{T:>5} {arr.m:>6} {np.mean(ts):>12.6f} {np.median(ts):>12.6f}")


if __name__ == "__main__":
    main()
