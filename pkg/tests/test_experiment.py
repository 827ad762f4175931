import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmml.errors import PreconditionError, ProtocolError
from mmml.harness.experiment import (Hyper, SplitConfig, SweepRow, format_report, format_sweep,
                                     parse_report, partition, run_experiment, summarize, sweep)
from mmml.harness.synth import synth_generate

HYPER = Hyper(q=3, d_z=4)


@pytest.fixture(scope="module")
def sets():
    return synth_generate(3, 6, 20, 8, separation=3.0, seed=4)


class TestPartition:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(3, 8), min_size=2, max_size=5), st.integers(1, 2),
           st.sampled_from(["rest", 1]), st.integers(0, 2 ** 63 - 1), st.integers(0, 20))
    def test_valid_partition(self, per_class, n_gal, n_probe, seed, fold):
        labels = [f"k{c}" for c, n in enumerate(per_class) for _ in range(n)]
        split = SplitConfig(n_gal, n_probe, 1, seed)
        gallery, probe = partition(labels, split, fold)
        assert not set(gallery) & set(probe)
        for c, n in enumerate(per_class):
            assert sum(labels[i] == f"k{c}" for i in gallery) == n_gal
            expected = n - n_gal if n_probe == "rest" else n_probe
            assert sum(labels[i] == f"k{c}" for i in probe) == expected
        assert (gallery, probe) == partition(labels, split, fold)

    def test_folds_differ(self):
        labels = [c for c in "abc" for _ in range(8)]
        split = SplitConfig(3, "rest", 10, 0)
        assert len({tuple(partition(labels, split, k)[0]) for k in range(10)}) > 1

    def test_one_gallery(self):
        labels = list("aabbb")
        g, p = partition(labels, SplitConfig("one", "rest"), 0)
        assert len(g) == 2 and len(p) == 3

    def test_infeasible(self):
        labels = list("aaabbb")
        with pytest.raises(ProtocolError, match="infeasible"):
            partition(labels, SplitConfig(3, "rest"), 0)
        with pytest.raises(ProtocolError, match="infeasible"):
            partition(labels, SplitConfig(2, 2), 0)

    def test_config_validation(self):
        with pytest.raises(PreconditionError):
            SplitConfig(0)
        with pytest.raises(PreconditionError):
            SplitConfig(2, "all")
        with pytest.raises(PreconditionError):
            SplitConfig(2, folds=0)


class TestRunExperiment:
    def test_report_consistency(self, sets):
        report = run_experiment(sets, SplitConfig(3, "rest", 4, 1), HYPER)
        assert len(report.per_fold_accuracy) == 4
        assert all(0.0 <= a <= 1.0 for a in report.per_fold_accuracy)
        assert (report.mean, report.std) == summarize(report.per_fold_accuracy)
        assert report.mean == float(np.mean(report.per_fold_accuracy))
        assert report.std == float(np.std(report.per_fold_accuracy, ddof=1))
        assert sum(report.confusion.values()) == sum(t for _, t in report.per_fold_counts) == 4 * 9
        for acc, (correct, total) in zip(report.per_fold_accuracy, report.per_fold_counts):
            assert acc == correct / total

    def test_single_fold_std_zero(self, sets):
        report = run_experiment(sets, SplitConfig(3, "rest", 1, 0), HYPER)
        assert report.std == 0.0 and report.mean == report.per_fold_accuracy[0]

    def test_infeasible_before_work(self, sets):
        with pytest.raises(ProtocolError):
            run_experiment(sets, SplitConfig(6, "rest"), HYPER)

    def test_fold_annotation(self, sets):
        with pytest.raises(Exception, match="fold 0"):
            run_experiment(sets, SplitConfig(3, "rest", 2), dataclasses.replace(HYPER, d_z=50))

    def test_set_annotation(self, sets):
        with pytest.raises(Exception, match="c00_s00"):
            run_experiment(sets, SplitConfig(3, "rest", 1), dataclasses.replace(HYPER, q=30))

    def test_parallel_identical(self, sets):
        split = SplitConfig(3, 2, 5, 7)
        a = format_report(run_experiment(sets, split, HYPER, jobs=1))
        b = format_report(run_experiment(sets, split, HYPER, jobs=4))
        assert a == b

    def test_report_round_trip(self, sets):
        report = run_experiment(sets, SplitConfig(2, "rest", 3, 2), HYPER)
        back = parse_report(format_report(report))
        assert back.per_fold_accuracy == report.per_fold_accuracy
        assert back.per_fold_counts == report.per_fold_counts
        assert back.confusion == report.confusion
        assert back.config_echo == report.config_echo
        assert (back.mean, back.std) == summarize(back.per_fold_accuracy) == (report.mean, report.std)


class TestAblation:
    @pytest.mark.parametrize("normalize", [False, True])
    def test_zero_weight_equals_single_model(self, sets, normalize):
        split = SplitConfig(3, "rest", 3, 11)
        h = dataclasses.replace(HYPER, normalize_kernels=normalize)
        spd_only = run_experiment(sets, split, dataclasses.replace(h, u=(0.8, 0.2), models=("spd",)))
        grass_only = run_experiment(sets, split, dataclasses.replace(h, u=(0.8, 0.2), models=("grassmann",)))
        rows2 = sweep(sets, split, "u2_given_u1", [0.0], dataclasses.replace(h, u=(0.8, 0.5)))
        rows1 = sweep(sets, split, "u1_given_u2", [0.0], dataclasses.replace(h, u=(0.3, 0.2)))
        assert (rows2[0].mean, rows2[0].std) == (spd_only.mean, spd_only.std)
        assert (rows1[0].mean, rows1[0].std) == (grass_only.mean, grass_only.std)

    def test_weights_selection(self):
        assert Hyper(u=(0.8, 0.2), models=("grassmann",)).weights() == (0.2,)
        assert Hyper(u=(0.7,), models=("spd",)).weights() == (0.7,)
        with pytest.raises(PreconditionError):
            Hyper(models=("rbf",)).kinds


class TestSweep:
    def test_rows_and_determinism(self, sets):
        split = SplitConfig(3, "rest", 2, 3)
        rows = sweep(sets, split, "d_z", [1, 2, 3, 4], HYPER)
        assert [r.value for r in rows] == [1.0, 2.0, 3.0, 4.0]
        assert rows == sweep(sets, split, "d_z", [1, 2, 3, 4], HYPER)

    def test_q_axis(self, sets):
        rows = sweep(sets, SplitConfig(3, "rest", 1), "q", [1, 2], HYPER)
        assert len(rows) == 2

    def test_paired_with_run_experiment(self, sets):
        split = SplitConfig(3, "rest", 2, 5)
        rows = sweep(sets, split, "d_z", [2], HYPER)
        report = run_experiment(sets, split, dataclasses.replace(HYPER, d_z=2))
        assert (rows[0].mean, rows[0].std) == (report.mean, report.std)

    def test_errors(self, sets):
        with pytest.raises(PreconditionError):
            sweep(sets, SplitConfig(3), "eps", [1.0], HYPER)
        with pytest.raises(PreconditionError):
            sweep(sets, SplitConfig(3), "d_z", [], HYPER)

    def test_format(self):
        text = format_sweep("d_z", [SweepRow(1.0, 0.5, 0.25)], {"seed": "0"})
        assert text.splitlines() == ["# mmml sweep v1", "axis=d_z", "config.seed=0", "value,mean,std",
                                     "1.0,0.5,0.25"]


def test_zero_separation_is_chance():
    # five classes drawn from one distribution: accuracy averages near 1/5
    means = [run_experiment(synth_generate(5, 10, 30, 10, separation=0.0, seed=s),
                            SplitConfig(5, 5, 3, s), Hyper(q=3)).mean for s in range(10)]
    assert 0.1 <= float(np.mean(means)) <= 0.32
