from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccs.consensus import (
    AugmentedDetections,
    ConfigError,
    ConsensusConfig,
    KappaMode,
    build_iou_matrix,
    compute_ccs,
    pairwise_consensus,
    resolve_kappa,
    row_max,
    threshold_matrix,
)
from ccs.geometry import BBox, Detection

from conftest import FIG2_VIEWS, det, views_to_augmented
from oracles import ccs_exact

CFG = ConsensusConfig()


# -- worked example ------------------------------------------------------------


def test_fig2_iou_matrices(fig2):
    v = fig2.per_augmentation
    np.testing.assert_allclose(build_iou_matrix(v[0], v[1]), [[0.5625, 0], [0, 0.5]])
    o23 = build_iou_matrix(v[1], v[2])
    assert o23.shape == (2, 1)
    np.testing.assert_allclose(o23, [[0.5882], [0]], atol=5e-5)
    o13 = build_iou_matrix(v[0], v[2])
    np.testing.assert_allclose(o13, [[0.4730], [0]], atol=5e-5)


def test_fig2_threshold_and_row_max(fig2):
    v = fig2.per_augmentation
    assert np.all(threshold_matrix(build_iou_matrix(v[0], v[2]), 0.5) == 0)
    assert row_max(threshold_matrix(build_iou_matrix(v[0], v[1]), 0.5))[0] == 0.5625


def test_fig2_kappa(fig2):
    assert [resolve_kappa(fig2, i, CFG) for i in range(3)] == [2, 2, 1]


def test_fig2_gamma12(fig2):
    v = fig2.per_augmentation
    assert pairwise_consensus(v[0], v[1], CFG, 2) == 0.53125


def test_fig2_ccs_matches_exact_oracle(fig2):
    expected, gamma = ccs_exact(FIG2_VIEWS)
    res = compute_ccs(fig2, CFG)
    assert abs(res.ccs - float(expected)) <= 1e-12
    for (i, j), g in gamma.items():
        assert abs(res.gamma[i, j] - float(g)) <= 1e-12
    assert np.all(np.isnan(np.diag(res.gamma)))
    # counts differ between views 2 and 3, so the pair is asymmetric
    assert res.gamma[1, 2] != res.gamma[2, 1]
    assert gamma[(1, 2)] == Fraction(10, 17) / 2 and gamma[(2, 1)] == Fraction(10, 17)


# -- operation examples -----------------------------------------------------------


def test_empty_input_matrix_shape():
    assert build_iou_matrix([], [det(0, 0, 1, 1), det(2, 2, 3, 3)]).shape == (0, 2)


def test_threshold_zero_keeps_matrix():
    m = np.array([[0.1, 0.0], [0.3, 0.9]])
    np.testing.assert_array_equal(threshold_matrix(m, 0.0), m)


def test_threshold_boundary_is_kept():
    np.testing.assert_array_equal(threshold_matrix([[0.5, 0.49]], 0.5), [[0.5, 0.0]])


def test_row_max_cases():
    np.testing.assert_array_equal(row_max(np.zeros((2, 3))), [0, 0])
    np.testing.assert_array_equal(row_max(np.array([[0.2], [0.7]])), [0.2, 0.7])


def test_pairwise_empty_sides():
    a = [det(0, 0, 1, 1)]
    assert pairwise_consensus([], a, CFG, 1) == 0.0
    assert pairwise_consensus(a, [], CFG, 1) == 0.0


def test_pairwise_identical_sets():
    a = [det(0, 0, 4, 4), det(10, 10, 20, 20)]
    assert pairwise_consensus(a, a, CFG, 2) == 1.0


def test_all_equal_gamma_gives_that_value():
    views = [[(0, 0, 4, 4)]] * 4
    assert compute_ccs(views_to_augmented(views), CFG).ccs == 1.0


def test_all_empty_views():
    res = compute_ccs(views_to_augmented([[], [], []]), CFG)
    assert res.ccs == 0.0


def test_single_empty_view_zeroes_its_pairs():
    views = [[(0, 0, 4, 4)], [(0, 0, 4, 4)], []]
    res = compute_ccs(views_to_augmented(views), CFG)
    assert res.gamma[0, 2] == res.gamma[2, 0] == res.gamma[1, 2] == 0
    assert res.ccs == pytest.approx(2 / 6)


def test_score_filter_applied_before_ccs():
    low = Detection(BBox(50, 50, 60, 60), 0, 0.3)
    views = (
        (det(0, 0, 4, 4), low),
        (det(0, 0, 4, 4),),
    )
    res = compute_ccs(AugmentedDetections("x", views), CFG)
    assert res.ccs == 1.0
    assert res.kappa == (1, 1)


def test_too_few_augmentations():
    with pytest.raises(ValueError):
        compute_ccs(views_to_augmented([[(0, 0, 1, 1)]]), CFG)


def test_expected_m_enforced():
    with pytest.raises(ValueError):
        compute_ccs(views_to_augmented([[], []]), ConsensusConfig(m=3))


# -- kappa modes ----------------------------------------------------------------


def test_kappa_constant_one():
    cfg = ConsensusConfig(kappa_mode=KappaMode.CONSTANT_ONE)
    ad = views_to_augmented(FIG2_VIEWS)
    assert [resolve_kappa(ad, i, cfg) for i in range(3)] == [1, 1, 1]
    # no normalisation: gamma may exceed 1
    res = compute_ccs(ad, cfg)
    assert res.gamma[0, 1] == pytest.approx(1.0625)


def test_kappa_constant_n0_counts_baseline_at_lower_threshold():
    cfg = ConsensusConfig(kappa_mode="constant_n0")
    base = tuple(Detection(BBox(i * 10, 0, i * 10 + 5, 5), 0, s) for i, s in enumerate([0.9, 0.6, 0.3, 0.26, 0.1]))
    ad = AugmentedDetections("x", ((det(0, 0, 5, 5),), (det(0, 0, 5, 5),)), base)
    assert resolve_kappa(ad, 0, cfg) == 4
    assert compute_ccs(ad, cfg).ccs == pytest.approx(0.25)


def test_kappa_constant_n0_clamped_and_required():
    cfg = ConsensusConfig(kappa_mode=KappaMode.CONSTANT_N0)
    ad = AugmentedDetections("x", ((), ()), ())
    assert resolve_kappa(ad, 0, cfg) == 1
    with pytest.raises(ConfigError):
        resolve_kappa(AugmentedDetections("x", ((), ())), 0, cfg)


@pytest.mark.parametrize(
    "kwargs",
    [dict(beta=1.5), dict(beta=-0.1), dict(n0_score_threshold=0.6), dict(m=1), dict(kappa_mode="bogus")],
)
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        ConsensusConfig(**kwargs)


# -- properties -------------------------------------------------------------------

grid = st.integers(0, 40)


@st.composite
def box_tuples(draw):
    x, y = draw(grid), draw(grid)
    return (x, y, x + draw(st.integers(1, 15)), y + draw(st.integers(1, 15)))


views_strategy = st.lists(st.lists(box_tuples(), max_size=5), min_size=2, max_size=5)


@given(views_strategy)
def test_matches_exact_oracle(views):
    expected, _ = ccs_exact(views)
    assert compute_ccs(views_to_augmented(views), CFG).ccs == pytest.approx(float(expected), abs=1e-12)


@given(views_strategy)
def test_per_augmentation_range(views):
    res = compute_ccs(views_to_augmented(views), CFG)
    g = res.gamma[~np.eye(len(views), dtype=bool)]
    assert np.all((g >= 0) & (g <= 1 + 1e-12))
    assert 0 <= res.ccs <= 1 + 1e-12


@given(views_strategy, st.randoms(use_true_random=False))
def test_permutation_invariance(views, rnd):
    base = compute_ccs(views_to_augmented(views), CFG)
    shuffled = [rnd.sample(v, len(v)) for v in views]
    res = compute_ccs(views_to_augmented(shuffled), CFG)
    np.testing.assert_allclose(res.gamma, base.gamma, atol=1e-12)
    assert res.ccs == pytest.approx(base.ccs, abs=1e-12)


@given(st.lists(box_tuples(), min_size=1, max_size=5), st.integers(2, 6))
def test_identical_views_score_one(view, m):
    assert compute_ccs(views_to_augmented([view] * m), CFG).ccs == pytest.approx(1.0)


@given(views_strategy, st.data())
def test_spurious_box_never_raises_gamma(views, data):
    i = data.draw(st.integers(0, len(views) - 1))
    before = compute_ccs(views_to_augmented(views), CFG).gamma
    # far away from every generated box
    augmented = [list(v) for v in views]
    augmented[i].append((500, 500, 510, 510))
    after = compute_ccs(views_to_augmented(augmented), CFG).gamma
    for j in range(len(views)):
        if j == i:
            continue
        assert after[i, j] <= before[i, j] + 1e-12
        if views[i] and views[j] and before[i, j] > 0:
            assert after[i, j] < before[i, j]


def test_detail_retained(fig2):
    res = compute_ccs(fig2, CFG, keep_detail=True)
    np.testing.assert_allclose(res.per_pair_detail[(0, 1)], [0.5625, 0.5])
    assert len(res.per_pair_detail) == 6


def test_threaded_results_identical():
    from ccs.consensus import compute_ccs_many

    rng = np.random.default_rng(3)
    items = []
    for k in range(20):
        views = []
        for _ in range(9):
            xy = rng.uniform(0, 50, size=(rng.integers(0, 6), 2))
            views.append([(x, y, x + 10, y + 8) for x, y in xy])
        items.append(views_to_augmented(views, image_id=k))
    seq = [r.ccs for r in compute_ccs_many(items, CFG, threads=1)]
    par = [r.ccs for r in compute_ccs_many(items, CFG, threads=4)]
    assert seq == par
