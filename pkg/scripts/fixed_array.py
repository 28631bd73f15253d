"""Fixed ten-sensor campaign: bias and RMSE vs repeats T, known vs estimated noise variance.

    python scripts/fixed_array.py [--trials N] [--workers K] [--out DIR]
"""
import argparse
from dataclasses import replace
from pathlib import Path

from tdoa.harness import emit_results, load_config, run_campaign

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "fixed_array.toml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/fixed_array")
    args = ap.parse_args()

    cfg = replace(load_config(CONFIG), workers=args.workers, output_dir=args.out)
    if args.trials:
        cfg = replace(cfg, trials=args.trials)
    res = run_campaign(cfg)

    print(f"{'T':>5} {'m':>5} " + " ".join(f"{e[:22]:>22}" for e in cfg.estimators) + f" {'rcrlb':>8}")
    for T in cfg.sizes:
        s0 = res.get(cfg.estimators[0], T)
        print(f"{T:>5} {s0.m:>5} " + " ".join(f"{res.get(e, T).rmse:>22.4f}" for e in cfg.estimators)
              + f" {s0.rcrlb:>8.4f}")
    emit_results(res, cfg.output_dir)
    print(f"results in {cfg.output_dir}")


if __name__ == "__main__":
    main()
