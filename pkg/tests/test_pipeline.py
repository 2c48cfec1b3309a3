import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from voronoi_fdr.errors import AreaSumMismatch, NonPositiveArea, OutOfDomain, TooFewPoints
from voronoi_fdr.geometry import PVector
from voronoi_fdr.ordering import OrderingScheme
from voronoi_fdr.pipeline import (
    PROBIT_CLAMP, annotate, combine, combined_values, cumulative_areas, probit_transform,
)

FIVE_VECTORS = [(0.85, 0.51), (0.91, 0.80), (0.23, 0.97), (0.62, 0.34), (0.07, 0.63)]
# prefix sums of the frozen nearest-neighbour oracle areas in Euclidean rank order
FIVE_VECTORS_EUCLID_T = [0.2209, 0.5804, 0.7189, 0.8585, 1.0]


def _probit_oracle(t):
    with mpmath.workdps(50):
        x = mpmath.mpf(float(t))
        return float(mpmath.sqrt(2) * mpmath.erfinv(2 * x - 1))


def test_cumulative_trivial():
    assert cumulative_areas([1.0]).tolist() == [1.0]
    assert cumulative_areas([0.5, 0.5]).tolist() == [0.5, 1.0]


def test_cumulative_errors():
    with pytest.raises(NonPositiveArea):
        cumulative_areas([0.0, 1.0])
    with pytest.raises(NonPositiveArea):
        cumulative_areas([])
    with pytest.raises(AreaSumMismatch):
        cumulative_areas([0.5, 0.4])


def test_five_vectors_prefix_sums_against_oracle():
    recs = combine(FIVE_VECTORS, OrderingScheme.EUCLIDEAN)
    np.testing.assert_allclose([r.T for r in recs], FIVE_VECTORS_EUCLID_T, atol=1e-3)
    assert [r.id for r in recs] == ["4", "3", "0", "2", "1"]


def test_five_vectors_ranks_in_records():
    recs = combine([PVector(f"g{i}", p) for i, p in enumerate(FIVE_VECTORS)], OrderingScheme.EUCLIDEAN)
    by_id = {r.id: r.rank for r in recs}
    assert [by_id[f"g{i}"] for i in range(5)] == [3, 5, 4, 2, 1]


def test_probit_values():
    assert probit_transform([0.5]).tolist() == [0.0]
    assert probit_transform([0.975])[0] == pytest.approx(_probit_oracle(0.975), abs=1e-9)
    assert probit_transform([0.975])[0] == pytest.approx(1.959964, abs=1e-6)
    top = probit_transform([1.0])[0]
    assert np.isfinite(top) and top == pytest.approx(_probit_oracle(1.0 - PROBIT_CLAMP), abs=1e-9)
    with pytest.raises(OutOfDomain):
        probit_transform([0.0])
    with pytest.raises(OutOfDomain):
        probit_transform([1.1])


def test_probit_accuracy_against_mpmath():
    t = np.concatenate([np.logspace(-12, -1, 40), np.linspace(0.01, 0.99, 40), 1 - np.logspace(-11, -2, 20)])
    z = probit_transform(t)
    ref = [_probit_oracle(x) for x in t]
    assert np.max(np.abs(z - ref)) < 1e-9


def test_mirror_pair_summation():
    recs = combine([(0.25, 0.5), (0.75, 0.5)], OrderingScheme.SUMMATION)
    assert [r.T for r in recs] == pytest.approx([0.5, 1.0])
    assert [r.rank for r in recs] == [1, 2]


def test_combine_needs_two_points():
    with pytest.raises(TooFewPoints):
        combine([(0.1, 0.1)])


def test_annotate_fills_decision_fields():
    recs = combine([(0.25, 0.5), (0.75, 0.5)])
    out = annotate(recs, fdr=[0.1, 0.9], left_fdr=[0.01, 0.5], reject=[True, False])
    assert out[0].reject and not out[1].reject
    assert out[0].left_fdr == 0.01 and recs[0].fdr is None


def test_null_z_is_standard_normal_across_seeds():
    crit = 1.63 / np.sqrt(1000)  # asymptotic 1% KS critical value
    passed = 0
    seeds = range(40)
    for seed in seeds:
        pts = np.random.default_rng(seed).random((1000, 2))
        z = combined_values(pts).Z
        passed += stats.kstest(z, "norm").statistic < crit
    assert passed >= 0.95 * len(seeds)


def test_null_t_histogram_uniform():
    pts = np.random.default_rng(99).random((2000, 2))
    T = combined_values(pts).T
    counts, _ = np.histogram(T, bins=20, range=(0, 1))
    assert stats.chisquare(counts).pvalue > 0.001


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 300), st.integers(0, 2**31 - 1), st.sampled_from(list(OrderingScheme)))
def test_record_invariants(n, seed, scheme):
    pts = np.random.default_rng(seed).random((n, 2))
    recs = combine(pts, scheme)
    T = np.array([r.T for r in recs])
    Z = np.array([r.Z for r in recs])
    assert [r.rank for r in recs] == list(range(1, n + 1))
    assert np.all(np.diff(T) > 0) and abs(T[-1] - 1) < 1e-9
    assert np.all(np.diff(Z) >= 0) and np.all(np.isfinite(Z))
    assert sorted(r.id for r in recs) == sorted(str(i) for i in range(n))
