import numpy as np
import pytest

import bnrisk as b
from bnrisk.evaluation import DegenerateLabelsError, ThresholdSelection, metrics_report

from conftest import make_net


def preds(labels, scores, excluded=()):
    return b.ScoredPredictions(
        np.asarray(labels, dtype=np.uint8), np.asarray(scores, dtype=float), tuple(excluded)
    )


def auc_pair_counting(labels, scores):
    """O(n^2) oracle: P(random positive outscores a random negative), ties 1/2."""
    pos = [s for l, s in zip(labels, scores) if l == 1]
    neg = [s for l, s in zip(labels, scores) if l == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


class TestConfusion:
    def test_published_crc_counts(self):
        cm = b.ConfusionMatrix(tn=243326, fp=96163, fn=70, tp=148)
        assert cm.sensitivity == pytest.approx(0.679, abs=1e-3)
        assert cm.specificity == pytest.approx(0.717, abs=1e-3)

    def test_published_diabetes_counts(self):
        cm = b.ConfusionMatrix(tn=249937, fp=78361, fn=3118, tp=8291)
        assert cm.sensitivity == pytest.approx(0.727, abs=1e-3)
        assert cm.specificity == pytest.approx(0.761, abs=1e-3)

    def test_threshold_zero_predicts_everything_positive(self):
        p = preds([0, 1, 0, 1], [0.1, 0.9, 0.4, 0.2])
        cm = b.confusion_at(p, 0.0)
        assert cm.sensitivity == 1.0
        assert cm.specificity == 0.0

    def test_counts_sum_to_rows_at_any_threshold(self):
        rng = np.random.default_rng(1)
        p = preds(rng.integers(0, 2, 100), rng.random(100))
        for t in (0.0, 0.25, 0.5, 0.99, 1.0):
            assert b.confusion_at(p, t).total == 100

    def test_gmean_is_geometric_mean(self):
        cm = b.ConfusionMatrix(tn=50, fp=50, fn=0, tp=100)
        assert cm.g_mean == pytest.approx(np.sqrt(1.0 * 0.5))


class TestScoreDataset:
    def test_score_equals_cpt_entry_when_blanket_is_parents(self, chain3_net):
        # C's Markov blanket is {B}: p(C | A, B) is the CPT row itself
        ds = b.forward_sample(chain3_net, 50, seed=3)
        sp = b.score_dataset(chain3_net, ds, "C", "1")
        for i in range(50):
            expected = chain3_net.cpts["C"].table[ds.codes[i, 1], 1]
            assert sp.scores[i] == pytest.approx(expected, abs=1e-12)

    def test_mean_score_matches_positive_rate(self, chain3_net):
        ds = b.forward_sample(chain3_net, 100_000, seed=4)
        sp = b.score_dataset(chain3_net, ds, "C", "1")
        assert sp.scores.mean() == pytest.approx(sp.labels.mean(), abs=0.01)

    def test_deterministic_cpt_gives_binary_scores(self):
        net = make_net(
            [("A", ("0", "1")), ("T", ("0", "1"))],
            [("A", "T")],
            {"A": [[0.5, 0.5]], "T": [[1.0, 0.0], [0.0, 1.0]]},
        )
        ds = b.forward_sample(net, 200, seed=5)
        sp = b.score_dataset(net, ds, "T", "1")
        assert set(np.unique(sp.scores)) <= {0.0, 1.0}

    def test_impossible_evidence_rows_excluded_and_reported(self):
        net = make_net(
            [("A", ("0", "1")), ("T", ("0", "1"))],
            [("A", "T")],
            {"A": [[1.0, 0.0]], "T": [[0.5, 0.5], [0.5, 0.5]]},
        )
        schema = net.schema
        codes = np.array([[0, 0], [1, 1], [0, 1]], dtype=np.int16)  # A=1 has mass 0
        ds = b.Dataset(schema, codes, np.zeros(3, dtype=np.int32))
        sp = b.score_dataset(net, ds, "T", "1")
        assert sp.excluded_rows == (1,)
        assert sp.n_rows == 2

    def test_elimination_fallback_matches_fast_path(self, chain3_net, monkeypatch):
        ds = b.forward_sample(chain3_net, 60, seed=6)
        fast = b.score_dataset(chain3_net, ds, "C", "1")
        from bnrisk import evaluation

        monkeypatch.setattr(evaluation, "JOINT_STATE_LIMIT", 0)
        slow = b.score_dataset(chain3_net, ds, "C", "1")
        np.testing.assert_allclose(fast.scores, slow.scores, atol=1e-12)
        np.testing.assert_array_equal(fast.labels, slow.labels)


class TestThresholdSelection:
    def test_perfect_separation_achieves_gmean_one(self):
        p = preds([0, 0, 0, 1, 1], [0.1, 0.2, 0.3, 0.8, 0.9])
        sel = b.select_threshold_gmean(p)
        assert sel.g_mean == pytest.approx(1.0)
        assert 0.3 < sel.threshold <= 0.8
        assert not sel.degenerate

    def test_identical_scores_degenerate(self):
        p = preds([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5])
        sel = b.select_threshold_gmean(p)
        assert sel.degenerate
        assert sel.g_mean == 0.0

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateLabelsError, match="degenerate labels"):
            b.select_threshold_gmean(preds([1, 1], [0.2, 0.4]))

    def test_chosen_threshold_beats_all_candidates(self):
        rng = np.random.default_rng(7)
        scores = rng.random(300)
        labels = (rng.random(300) < scores * 0.6).astype(int)
        p = preds(labels, scores)
        sel = b.select_threshold_gmean(p)
        uniq = np.unique(p.scores)
        candidates = np.concatenate([[0.0], (uniq[:-1] + uniq[1:]) / 2, [1.0]])
        for t in candidates:
            assert sel.g_mean >= b.confusion_at(p, float(t)).g_mean - 1e-12

    def test_imbalanced_threshold_far_below_half(self):
        # weak-signal generator at roughly 1:1500 positives
        rng = np.random.default_rng(8)
        n = 150_000
        x = rng.integers(0, 2, n)
        base = np.where(x == 1, 0.0012, 0.0002)
        labels = (rng.random(n) < base).astype(int)
        scores = base + rng.normal(0, 1e-5, n)  # model-like scores near the rates
        scores = np.clip(scores, 0, 1)
        assert 30 < labels.sum() < 300
        sel = b.select_threshold_gmean(preds(labels, scores))
        assert sel.threshold < 0.1


class TestAuc:
    def test_perfect_separation(self):
        assert b.auc(preds([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9])) == 1.0

    def test_uninformative_scores_near_half(self):
        rng = np.random.default_rng(9)
        labels = rng.integers(0, 2, 10_000)
        scores = rng.random(10_000)
        assert b.auc(preds(labels, scores)) == pytest.approx(0.5, abs=0.02)

    def test_matches_pair_counting_oracle_with_ties(self):
        rng = np.random.default_rng(10)
        labels = rng.integers(0, 2, 500)
        scores = rng.integers(0, 10, 500) / 10.0  # heavy ties
        if labels.sum() in (0, 500):
            labels[0] = 1 - labels[0]
        got = b.auc(preds(labels, scores))
        assert got == pytest.approx(auc_pair_counting(labels, scores), abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(11)
        labels = rng.integers(0, 2, 400)
        scores = rng.random(400)
        p1 = preds(labels, scores)
        for transform in (lambda s: s**3, lambda s: s / 2 + 0.25, lambda s: 1 - (1 - s) ** 2):
            p2 = preds(labels, transform(scores))
            assert b.auc(p2) == pytest.approx(b.auc(p1), abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateLabelsError):
            b.auc(preds([0, 0], [0.1, 0.2]))


class TestCalibration:
    def test_even_division(self):
        p = preds([0] * 10, np.linspace(0, 1, 10))
        curve = b.calibration_curve(p, 5)
        assert [bin.count for bin in curve.bins] == [2, 2, 2, 2, 2]

    def test_remainder_goes_to_lowest_bins(self):
        p = preds([0] * 11, np.linspace(0, 1, 11))
        curve = b.calibration_curve(p, 5)
        assert [bin.count for bin in curve.bins] == [3, 2, 2, 2, 2]

    def test_tie_heavy_scores_still_partition(self):
        rng = np.random.default_rng(12)
        scores = np.repeat([0.1, 0.1, 0.5, 0.5, 0.9], 13)[:60]
        labels = rng.integers(0, 2, 60)
        curve = b.calibration_curve(preds(labels, scores), 7)
        counts = [bin.count for bin in curve.bins]
        assert sum(counts) == 60
        assert max(counts) - min(counts) <= 1
        means = [bin.mean_score for bin in curve.bins]
        assert means == sorted(means)

    def test_self_calibrated_simulation(self):
        rng = np.random.default_rng(13)
        scores = rng.beta(2, 5, 100_000)
        labels = (rng.random(100_000) < scores).astype(int)
        curve = b.calibration_curve(preds(labels, scores), 10)
        for bin in curve.bins:
            assert abs(bin.mean_score - bin.positive_rate) < 0.03

    def test_bounds_on_n_bins(self):
        p = preds([0, 1, 0], [0.1, 0.2, 0.3])
        with pytest.raises(ValueError):
            b.calibration_curve(p, 1)
        with pytest.raises(ValueError):
            b.calibration_curve(p, 4)


def test_metrics_report_is_json_ready(chain3_net=None):
    rng = np.random.default_rng(14)
    scores = rng.random(200)
    labels = (rng.random(200) < scores).astype(int)
    p = preds(labels, scores)
    sel = b.select_threshold_gmean(p)
    report = metrics_report(p, sel.threshold, "gmean optimized on the evaluation data", 5, sel.degenerate)
    import json

    parsed = json.loads(json.dumps(report))
    assert parsed["format"] == "bnrisk-metrics"
    assert parsed["confusion"]["tp"] + parsed["confusion"]["fn"] == int(labels.sum())
    assert 0.0 <= parsed["auc"] <= 1.0
    assert len(parsed["calibration"]["bins"]) == 5
