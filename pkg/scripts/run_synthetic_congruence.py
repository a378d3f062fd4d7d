"""Congruence of CCS with F1, pPDQ and OC-cost on two simulated detectors."""
import argparse
import time

from ccs.config import PROFILE_A, PROFILE_B
from ccs.synthetic import run_congruence_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-images", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=9)
    args = ap.parse_args()

    t0 = time.perf_counter()
    res = run_congruence_experiment(args.n_images, PROFILE_A, PROFILE_B, seed=args.seed, m=args.m)
    elapsed = time.perf_counter() - t0
    print(f"detector 1: {PROFILE_A}\ndetector 2: {PROFILE_B}")
    print(f"{'metric':8s} {'yellow':>6s} {'cons.':>6s} {'green':>6s} {'blue':>6s} {'red':>5s} {'cong%':>7s} {'rho':>7s}")
    for m, r in res.reports.items():
        print(f"{m.value:8s} {r.yellow:6d} {r.considered:6d} {r.green:6d} {r.blue:6d} {r.red:5d} "
              f"{r.congruence_pct:7.2f} {r.spearman_rho:7.4f}")
    print(f"{args.n_images} images in {elapsed:.2f} s")


if __name__ == "__main__":
    main()
