import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regap.dataio import SyntheticSpec, gen_benchmark
from regap.detector import calibrate_threshold
from regap.edits import EditConfig, parse_edit_set
from regap.evalharness import (
    accuracy,
    auroc,
    average_precision,
    midranks,
    robustness_sweep,
    run_benchmark,
)
from regap.model import LatentPrior

PRIOR8 = LatentPrior("standard-normal", 8)
EDIT_CFG = EditConfig(patch_size=8, blend_alpha=0.5)


def pairwise_auroc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def threshold_sweep_ap(scores, labels):
    """Step AP over the distinct score thresholds, high to low."""
    n_pos = sum(labels)
    ap, prev_recall = 0.0, 0.0
    for t in sorted(set(scores), reverse=True):
        flagged = [y for s, y in zip(scores, labels) if s >= t]
        tp = sum(flagged)
        recall = tp / n_pos
        ap += (recall - prev_recall) * tp / len(flagged)
        prev_recall = recall
    return ap


def random_instance(rng, n, ties):
    labels = rng.random(n) < 0.5
    labels[0], labels[1] = True, False
    scores = rng.integers(0, 5, n).astype(float) if ties else rng.standard_normal(n)
    return list(scores + labels * rng.uniform(0, 1)), list(labels)


# ---------------------------------------------------------------- ranking metrics


def test_accuracy_examples():
    s, y = [0.1, 0.2, 0.8, 0.9], [False, False, True, True]
    assert accuracy(s, y, 0.5) == 1.0
    assert accuracy(s, [not v for v in y], 0.5) == 0.0
    assert accuracy([0.1, 0.6, 0.8, 0.9], y, 0.5) == 0.75
    with pytest.raises(ValueError):
        accuracy([], [], 0.0)


def test_accuracy_label_flip_complement():
    rng = np.random.default_rng(0)
    s, y = rng.standard_normal(30), rng.random(30) < 0.5
    assert accuracy(s, ~y, 0.1) == pytest.approx(1 - accuracy(s, y, 0.1))


def test_auroc_examples():
    assert auroc([0.1, 0.2, 0.3, 0.4], ["Real", "Real", "Generated", "Generated"]) == 1.0
    assert auroc([0.5] * 6, [True, False] * 3) == 0.5
    with pytest.raises(ValueError):
        auroc([0.1, 0.2], [True, True])


def test_ap_examples():
    assert average_precision([0.9, 0.8, 0.7], [True, False, True]) == pytest.approx(0.5 + 0.5 * 2 / 3, abs=1e-12)
    assert average_precision([0.9, 0.8, 0.1, 0.0], [True, True, False, False]) == 1.0
    with pytest.raises(ValueError):
        average_precision([0.1], [False])


def test_midranks_ties():
    np.testing.assert_array_equal(midranks(np.array([3.0, 1.0, 3.0, 2.0])), [3.5, 1.0, 3.5, 2.0])


@pytest.mark.parametrize("ties", [False, True])
def test_metrics_match_brute_force_oracles(ties):
    rng = np.random.default_rng(1 + ties)
    for _ in range(200):
        n = int(rng.integers(2, 51))
        scores, labels = random_instance(rng, n, ties)
        assert abs(auroc(scores, labels) - pairwise_auroc(scores, labels)) <= 1e-12
        assert abs(average_precision(scores, labels) - threshold_sweep_ap(scores, labels)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 50), st.booleans(),
       st.floats(0.1, 10.0), st.floats(-5.0, 5.0))
def test_auroc_rank_invariance_and_orientation(seed, n, ties, a, b):
    scores, labels = random_instance(np.random.default_rng(seed), n, ties)
    s = np.array(scores)
    base = auroc(s, labels)
    assert auroc(a * s + b, labels) == pytest.approx(base, abs=1e-12)
    assert auroc(np.exp(s / 10), labels) == pytest.approx(base, abs=1e-12)
    assert auroc(s, [not y for y in labels]) == pytest.approx(1 - base, abs=1e-12)


def test_calibrated_tau_keeps_real_recall():
    reals = np.random.default_rng(3).standard_normal(200)
    tau = calibrate_threshold(reals, 0.95).tau
    assert accuracy(reals, [False] * 200, tau) >= 0.95


# ---------------------------------------------------------------- benchmark runner


@pytest.fixture(scope="module")
def small_benchmark(dct_pair):
    spec = SyntheticSpec(n_real=40, n_generated=40, seed=5)
    return gen_benchmark(dct_pair, PRIOR8, spec)


def test_singleton_edit_set_max_equals_edit_row(dct_pair, small_benchmark):
    cal, ev = small_benchmark
    res = run_benchmark(dct_pair, cal, ev, parse_edit_set(["Fix"], EDIT_CFG), ["MSE"], ["Max"], 7, prior=PRIOR8)
    assert res.find("MSE", "M-E Max").report == res.find("MSE", "Fix").report


def test_benchmark_grid_and_rerun_bytes(dct_pair, small_benchmark, tmp_path):
    cal, ev = small_benchmark
    edits = parse_edit_set(["Add", "Fix", "Sem"], EDIT_CFG)
    for out in (tmp_path / "a", tmp_path / "b"):
        res = run_benchmark(dct_pair, cal, ev, edits, ["MSE", "SSIM"], ["Max", "Mean", "Min"], 7,
                            prior=PRIOR8, output_dir=out)
    for name in ("benchmark_MSE.csv", "benchmark_SSIM.csv", "benchmark_summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = [r.row for r in res.rows["MSE"]]
    assert rows == ["Add", "Fix", "Sem", "M-E Max", "M-E Mean", "M-E Min", "Static"]
    table = (tmp_path / "a" / "benchmark_MSE.csv").read_text().splitlines()
    assert table[0] == "row,metric,tau_mode,tau,acc,auroc,ap,n_pos,n_neg"
    assert len(table) == 8
    assert res.find("MSE", "Add").report.n_pos == 28 and res.find("MSE", "Add").report.n_neg == 28


def test_fixed_tau_recorded(dct_pair, small_benchmark):
    cal, ev = small_benchmark
    res = run_benchmark(dct_pair, cal, ev, parse_edit_set(["Add"], EDIT_CFG), ["MSE"], ["Max"], 7,
                        fixed_tau=-0.00472, prior=PRIOR8)
    row = res.find("MSE", "M-E Max")
    assert row.tau_mode == "fixed" and row.report.tau == -0.00472
    assert res.find("MSE", "Static").tau_mode == "calibrated"


# ---------------------------------------------------------------- robustness sweep


def test_full_crop_point_equals_benchmark_ap(dct_pair, small_benchmark):
    cal, ev = small_benchmark
    edits = parse_edit_set(["Add", "Fix", "Sem"], EDIT_CFG)
    bench = run_benchmark(dct_pair, cal, ev, edits, ["MSE"], ["Max"], 9, prior=PRIOR8)
    curve = robustness_sweep(dct_pair, cal, ev, edits, "crop-ratio", [1.0, 0.8], 9, prior=PRIOR8)
    assert curve.pairs[0][1] == bench.find("MSE", "M-E Max").report.ap


def test_jpeg_grid_points_and_outputs(dct_pair, small_benchmark, tmp_path):
    cal, ev = small_benchmark
    edits = parse_edit_set(["Add", "Fix", "Sem"], EDIT_CFG)
    curve = robustness_sweep(dct_pair, cal, ev, edits, "jpeg-quality", [90, 70, 50, 30], 9,
                             prior=PRIOR8, output_dir=tmp_path)
    assert [p for p, _ in curve.pairs] == [90, 70, 50, 30]
    assert all(pt.tau_mode == "recalibrate" for pt in curve.points)
    dat = (tmp_path / "sweep_jpeg-quality.dat").read_text().splitlines()
    assert dat[0] == "# jpeg-quality ap" and len(dat) == 5
    assert len((tmp_path / "sweep_jpeg-quality.csv").read_text().splitlines()) == 5


def test_sweep_tau_modes_share_ranking_metrics(dct_pair, small_benchmark):
    cal, ev = small_benchmark
    edits = parse_edit_set(["Add", "Fix"], EDIT_CFG)
    curves = [robustness_sweep(dct_pair, cal, ev, edits, "jpeg-quality", [70], 9, tau_mode=m,
                               fixed_tau=0.0, prior=PRIOR8) for m in ("recalibrate", "unperturbed", "fixed")]
    assert len({c.points[0].report.ap for c in curves}) == 1
    assert curves[2].points[0].report.tau == 0.0


@pytest.mark.parametrize("axis,grid", [("blur", [1, 2]), ("crop-ratio", [1.0, 0.8, 0.9]),
                                        ("jpeg-quality", []), ("jpeg-quality", [50, 50])])
def test_sweep_rejects_bad_axis_or_grid(dct_pair, small_benchmark, axis, grid):
    cal, ev = small_benchmark
    with pytest.raises(ValueError):
        robustness_sweep(dct_pair, cal, ev, parse_edit_set(["Fix"]), axis, grid, 0)
