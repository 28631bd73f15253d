"""RMSE of the noise-variance estimate vs m on the random cube (sigma = 10)."""
import argparse

import numpy as np

from tdoa.errors import NumericalError
from tdoa.model import NoiseModel, deploy_uniform_cube, make_rng, simulate
from tdoa.noise_variance import estimate_sigma2

REFERENCE = {10: 63.1336, 30: 30.9802, 100: 16.5915, 300: 9.5205, 1000: 5.4593, 3000: 3.0107}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sigma, x = 10.0, np.array([15.0, 15.0, 15.0])
    print(f"{'m':>6} {'rmse':>10} {'reference':>10} {'failures':>9}")
    for m, ref in REFERENCE.items():
        err, fails = [], 0
        for t in range(args.trials):
            rng = make_rng(args.seed, m, t)
            meas = simulate(deploy_uniform_cube(100, m, rng=rng), x, NoiseModel(sigma), rng=rng)
            try:
                err.append(estimate_sigma2(meas).sigma2_hat - sigma**2)
            except NumericalError:
                fails += 1
        print(f"{m:>6} {np.sqrt(np.mean(np.square(err))):>10.4f} {ref:>10.4f} {fails:>9}")


if __name__ == "__main__":
    main()
