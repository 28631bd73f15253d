"""Random-cube campaign: bias and RMSE vs m for every estimator, plus RCRLB.

    python scripts/uniform_cube.py [--trials N] [--workers K] [--out DIR]
"""
import argparse
from dataclasses import replace
from pathlib import Path

from tdoa.harness import emit_results, load_config, run_campaign

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "uniform_cube.toml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", default="results/uniform_cube")
    args = ap.parse_args()

    cfg = replace(load_config(CONFIG), workers=args.workers, output_dir=args.out)
    if args.trials:
        cfg = replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    res = run_campaign(cfg)

    print(f"{'m':>6} " + " ".join(f"{e:>28}" for e in cfg.estimators) + f" {'rcrlb':>8}")
    for m in cfg.sizes:
        row = " ".join(f"{res.get(e, m).bias:>10.4f} / {res.get(e, m).rmse:<15.4f}" for e in cfg.estimators)
        print(f"{m:>6} {row} {res.get(cfg.estimators[0], m).rcrlb:>8.4f}")
    print("(bias / rmse)")
    emit_results(res, cfg.output_dir)
    print(f"results in {cfg.output_dir}")


if __name__ == "__main__":
    main()
