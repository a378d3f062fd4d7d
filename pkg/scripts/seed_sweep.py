"""Spread of the rank correlation over several simulation seeds."""
import argparse
import statistics

from ccs.config import DEFAULT_SEEDS, PROFILE_A, PROFILE_B
from ccs.congruence import Metric
from ccs.synthetic import run_congruence_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-images", type=int, default=500)
    ap.add_argument("--seeds", type=int, nargs="+", default=list(DEFAULT_SEEDS))
    args = ap.parse_args()

    rhos = {m: [] for m in Metric}
    for s in args.seeds:
        reports = run_congruence_experiment(args.n_images, PROFILE_A, PROFILE_B, seed=s).reports
        print(f"seed {s:4d}: " + "  ".join(f"{m.value}={reports[m].spearman_rho:.4f}" for m in Metric))
        for m in Metric:
            rhos[m].append(reports[m].spearman_rho)
    for m, vals in rhos.items():
        print(f"rho({m.value}): {statistics.fmean(vals):.4f} +/- {statistics.stdev(vals):.4f}")


if __name__ == "__main__":
    main()
