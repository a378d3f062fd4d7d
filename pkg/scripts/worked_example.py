"""Replay the three-augmentation worked example and print every intermediate."""
import numpy as np

from ccs import ConsensusConfig, compute_ccs
from ccs.consensus import AugmentedDetections, build_iou_matrix, resolve_kappa
from ccs.geometry import BBox, Detection

VIEWS = [
    [(0, 0, 4, 4), (10, 0, 12, 2)],
    [(1, 1, 4, 4), (10, 0, 12, 1)],
    [(0.5, 1.5, 5, 4)],
]


def main() -> None:
    ad = AugmentedDetections(
        "example", tuple(tuple(Detection(BBox(*b), 0, 0.9) for b in v) for v in VIEWS)
    )
    cfg = ConsensusConfig()
    np.set_printoptions(precision=4, suppress=True)
    v = ad.per_augmentation
    for i, j in [(0, 1), (1, 2), (0, 2)]:
        print(f"IoU views {i + 1},{j + 1}:\n{build_iou_matrix(v[i], v[j])}")
    print("kappa:", [resolve_kappa(ad, i, cfg) for i in range(len(v))])
    res = compute_ccs(ad, cfg)
    print("gamma:\n", res.gamma)
    print(f"CCS = {res.ccs:.6f}")


if __name__ == "__main__":
    main()
