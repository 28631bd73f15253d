"""Two-step RMSE against RCRLB for several noise levels (fixed array, T = 100)."""
import argparse

from tdoa.harness import ExperimentConfig, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--T", type=int, default=100)
    args = ap.parse_args()
    print(f"{'sigma':>6} {'rmse':>10} {'rcrlb':>10} {'ratio':>7}")
    for sigma in (0.1, 0.2, 0.5, 1.0, 2.0, 5.0):
        cfg = ExperimentConfig(scenario="fixed_array", source=(51.0, 51.0, 51.0), sigma=sigma, sizes=(args.T,),
                               trials=args.trials, estimators=("two_step",))
        s = run_campaign(cfg).get("two_step", args.T)
        print(f"{sigma:>6} {s.rmse:>10.5f} {s.rcrlb:>10.5f} {s.rmse / s.rcrlb:>7.3f}")


if __name__ == "__main__":
    main()
