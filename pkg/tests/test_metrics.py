from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbel.errors import ArgumentError, DataError, DimensionError
from dbel.metrics import ConfusionCounts, confusion, pca, pca_top3, pr_curve, report, roc_curve


def mann_whitney(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def brute_force_pr_auc(scores, labels):
    scores, labels = np.asarray(scores, float), np.asarray(labels)
    pts = []
    for thr in sorted(set(scores.tolist()), reverse=True):
        pred = scores >= thr
        tp = np.sum(pred & (labels == 1))
        pts.append((tp / labels.sum(), tp / pred.sum()))
    pts = [(0.0, pts[0][1])] + pts
    return sum((r2 - r1) * (p1 + p2) / 2 for (r1, p1), (r2, p2) in zip(pts, pts[1:]))


# ------------------------------------------------------------------- confusion

def test_confusion_examples():
    y = np.array([1] * 5 + [0] * 5)
    assert confusion(y, y) == ConfusionCounts(5, 0, 5, 0)
    assert confusion(y, np.ones(10, int)) == ConfusionCounts(5, 5, 0, 0)
    c = confusion([1, 1, 1, 1, 0, 0, 0, 0, 0, 0], [1, 1, 1, 0, 1, 0, 0, 0, 0, 0])
    assert (c.tp, c.fn, c.fp, c.tn) == (3, 1, 1, 5)


def test_confusion_length_mismatch():
    with pytest.raises(DimensionError):
        confusion([0, 1], [1])


def test_confusion_rejects_non_binary():
    with pytest.raises(DataError):
        confusion([0, 2], [1, 0])


# ---------------------------------------------------------------------- report

def test_report_example():
    r = report(ConfusionCounts(tp=3, fp=1, tn=5, fn=1))
    assert r.accuracy == 80.0
    assert r.precision == 0.75 and r.sensitivity == 0.75 and r.f_score == 0.75
    assert r.specificity == pytest.approx(0.8333, abs=1e-4)
    assert r.degenerate == ()


def test_report_perfect():
    r = report(ConfusionCounts(4, 0, 6, 0))
    assert r.accuracy == 100.0
    assert (r.precision, r.sensitivity, r.specificity, r.f_score) == (1.0, 1.0, 1.0, 1.0)


def test_report_degenerate_guard():
    r = report(ConfusionCounts(0, 0, 7, 0))
    assert r.precision == 0.0 and r.sensitivity == 0.0 and r.f_score == 0.0
    assert set(r.degenerate) == {"precision", "sensitivity", "f_score"}
    assert r.specificity == 1.0


def test_report_empty_counts():
    with pytest.raises(ArgumentError):
        report(ConfusionCounts(0, 0, 0, 0))


def test_negative_counts_rejected():
    with pytest.raises(ArgumentError):
        ConfusionCounts(-1, 0, 0, 0)


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(0, 500)] * 4).filter(lambda c: sum(c) > 0))
def test_report_matches_exact_fractions(c):
    tp, fp, tn, fn = c
    r = report(ConfusionCounts(tp, fp, tn, fn))

    def frac(a, b):
        return Fraction(a, b) if b else Fraction(0)

    pre, sen = frac(tp, tp + fp), frac(tp, tp + fn)
    f = frac(2 * sen * pre, 1) / (sen + pre) if sen + pre else Fraction(0)
    assert r.accuracy == pytest.approx(float(100 * Fraction(tp + tn, sum(c))), abs=1e-12)
    assert r.precision == pytest.approx(float(pre), abs=1e-12)
    assert r.sensitivity == pytest.approx(float(sen), abs=1e-12)
    assert r.specificity == pytest.approx(float(frac(tn, tn + fp)), abs=1e-12)
    assert r.f_score == pytest.approx(float(f), abs=1e-12)
    for v in (r.precision, r.sensitivity, r.specificity, r.f_score):
        assert 0.0 <= v <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=60).filter(lambda y: 0 < sum(y) < len(y)))
def test_self_report_is_perfect(y):
    r = report(confusion(y, y))
    assert r.accuracy == 100.0 and r.f_score == 1.0 and r.specificity == 1.0


def test_metrics_permutation_invariant():
    rng = np.random.default_rng(0)
    y, p, s = rng.integers(0, 2, 50), rng.integers(0, 2, 50), rng.random(50)
    perm = rng.permutation(50)
    assert report(confusion(y, p)) == report(confusion(y[perm], p[perm]))
    assert roc_curve(s, y).auc == pytest.approx(roc_curve(s[perm], y[perm]).auc, abs=1e-12)
    assert pr_curve(s, y).auc == pytest.approx(pr_curve(s[perm], y[perm]).auc, abs=1e-12)


# ---------------------------------------------------------------------- curves

def test_roc_examples():
    assert roc_curve([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]).auc == 1.0
    assert roc_curve([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]).auc == pytest.approx(0.75, abs=1e-12)
    assert roc_curve([0.1, 0.3, 0.8, 0.9], [1, 1, 0, 0]).auc == 0.0


def test_roc_endpoints_and_monotone():
    rng = np.random.default_rng(1)
    curve = roc_curve(rng.random(30), np.arange(30) % 2)
    assert (curve.x[0], curve.y[0]) == (0.0, 0.0)
    assert (curve.x[-1], curve.y[-1]) == (1.0, 1.0)
    assert np.all(np.diff(curve.x) >= 0) and np.all(np.diff(curve.y) >= 0)


def test_roc_ties_grouped():
    curve = roc_curve([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])
    assert curve.x.tolist() == [0.0, 1.0] and curve.y.tolist() == [0.0, 1.0]
    assert curve.auc == 0.5


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 200), st.integers(0, 2 ** 31), st.booleans())
def test_roc_auc_equals_pair_counting(n, seed, coarse):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    s = rng.integers(0, 5, n).astype(float) if coarse else rng.random(n)
    assert abs(roc_curve(s, y).auc - mann_whitney(s, y)) <= 1e-9


def test_roc_single_class_rejected():
    with pytest.raises(DataError):
        roc_curve([0.1, 0.2], [1, 1])


def test_pr_examples():
    assert pr_curve([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]).auc == 1.0
    flat = pr_curve(np.full(10, 0.3), np.arange(10) % 2)
    np.testing.assert_allclose(flat.y, 0.5)
    assert flat.auc == pytest.approx(0.5)
    s, y = [0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]
    assert abs(pr_curve(s, y).auc - brute_force_pr_auc(s, y)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 80), st.integers(0, 2 ** 31))
def test_pr_matches_threshold_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    y[0] = 1
    s = np.round(rng.random(n), 1)
    curve = pr_curve(s, y)
    assert abs(curve.auc - brute_force_pr_auc(s, y)) <= 1e-9
    assert 0.0 <= curve.auc <= 1.0
    assert curve.x[-1] == 1.0


def test_pr_needs_positive():
    with pytest.raises(DataError):
        pr_curve([0.1, 0.2], [0, 0])


def test_curve_length_mismatch():
    with pytest.raises(DimensionError):
        roc_curve([0.1, 0.2, 0.3], [0, 1])


# ------------------------------------------------------------------------- PCA

def test_pca_rank_one():
    t = np.linspace(-2, 3, 10)
    x = np.stack([t, t, np.zeros_like(t)], axis=1)
    proj = pca_top3(x)
    np.testing.assert_allclose(proj.components[0], np.array([1, 1, 0]) / np.sqrt(2), atol=1e-12)
    assert proj.explained_fraction[0] == pytest.approx(1.0, abs=1e-12)
    assert proj.reduced_rank
    np.testing.assert_array_equal(proj.explained_variance[1:], 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_pca_contracts(seed):
    x = np.random.default_rng(seed).normal(size=(40, 8)) @ np.diag(np.arange(8, 0, -1.0))
    proj = pca_top3(x, labels=np.arange(40) % 2)
    gram = proj.components @ proj.components.T
    assert np.max(np.abs(gram - np.eye(3))) <= 1e-6
    assert np.all(np.diff(proj.explained_fraction) <= 0)
    assert np.max(np.abs(proj.coordinates.mean(axis=0))) <= 1e-9
    assert not proj.reduced_rank
    for row in proj.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_pca_trace_identity():
    x = np.random.default_rng(3).normal(size=(20, 5))
    full = pca(x, k=5)
    assert full.explained_variance.sum() == pytest.approx(x.var(axis=0, ddof=1).sum(), abs=1e-6)
    assert full.explained_fraction.sum() == pytest.approx(1.0, abs=1e-12)


def test_pca_matches_svd():
    x = np.random.default_rng(4).normal(size=(30, 6))
    proj = pca_top3(x)
    _, sv, vt = np.linalg.svd(x - x.mean(axis=0), full_matrices=False)
    np.testing.assert_allclose(proj.explained_variance, sv[:3] ** 2 / 29, rtol=1e-10)
    np.testing.assert_allclose(np.abs(proj.components), np.abs(vt[:3]), atol=1e-8)


def test_pca_preconditions():
    with pytest.raises(DimensionError):
        pca_top3(np.zeros((3, 5)))
    with pytest.raises(ArgumentError):
        pca_top3(np.zeros((10, 2)))
