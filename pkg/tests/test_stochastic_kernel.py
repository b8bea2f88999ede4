import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from poisson_er.analysis import chi_square_gof, chi_square_homogeneity
from poisson_er.errors import ParameterError
from poisson_er.stochastic_kernel import (
    RandomStream,
    counting_process_at,
    geometric_skip,
    geometric_skips,
    poisson_sample,
    poisson_samples,
    reference_diffusion,
    reference_marginals,
)


def _histogram(values, top):
    values = np.minimum(np.asarray(values), top)
    return np.bincount(values, minlength=top + 1)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
@settings(max_examples=25, deadline=None)
def test_same_key_same_draws(seed, stream_id):
    a = RandomStream(seed, stream_id)
    b = RandomStream(seed, stream_id)
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]


def test_distinct_streams_differ():
    draws = {tuple(RandomStream(7, i).generator.integers(0, 2**63, 4)) for i in range(50)}
    assert len(draws) == 50


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_stream_rejects_bad_seed(seed):
    with pytest.raises(ParameterError):
        RandomStream(seed, 0)


def test_poisson_zero_mean(stream):
    assert all(poisson_sample(stream, 0.0) == 0 for _ in range(100))


@pytest.mark.parametrize("mean", [-0.1, math.inf, math.nan])
def test_poisson_rejects_bad_mean(stream, mean):
    with pytest.raises(ParameterError):
        poisson_sample(stream, mean)


def test_poisson_pmf_at_zero(stream):
    draws = poisson_samples(stream, np.ones(10**6))
    assert abs(np.mean(draws == 0) - math.exp(-1)) < 0.002


def test_poisson_large_mean(stream):
    draws = poisson_samples(stream, np.full(10**4, 1e6))
    assert abs(draws.mean() - 1e6) < 3 * math.sqrt(1e6 / 1e4) * 10


def test_poisson_additivity(stream):
    size = 10**5
    total = poisson_samples(stream, np.full(size, 0.7)) + poisson_samples(stream, np.full(size, 1.6))
    direct = poisson_samples(stream, np.full(size, 2.3))
    top = max(total.max(), direct.max())
    report = chi_square_homogeneity(_histogram(total, top), _histogram(direct, top))
    assert report.passed, report


def test_counting_process_origin(stream):
    path = counting_process_at(stream, [0.0])
    assert path.counts.tolist() == [0]


def test_counting_process_increment_law(stream):
    gaps = np.array([counting_process_at(stream, [0.0, 1.0, 3.0]).counts for _ in range(10**5)])
    inc = gaps[:, 2] - gaps[:, 1]
    direct = poisson_samples(stream, np.full(10**5, 2.0))
    top = max(inc.max(), direct.max())
    assert chi_square_homogeneity(_histogram(inc, top), _histogram(direct, top)).passed


def test_counting_process_mean_and_law(stream):
    counts = np.array([counting_process_at(stream, [0.0, 5.0]).counts[1] for _ in range(10**5)])
    assert abs(counts.mean() - 5.0) < 0.05
    top = counts.max()
    expected = 10**5 * stats.poisson.pmf(np.arange(top + 1), 5.0)
    expected[-1] = 10**5 * stats.poisson.sf(top - 1, 5.0)
    assert chi_square_gof(np.bincount(counts), expected).passed


def test_counting_process_rejects_decreasing(stream):
    with pytest.raises(ParameterError):
        counting_process_at(stream, [0.0, 2.0, 1.0])


@given(st.lists(st.floats(0, 50), min_size=1, max_size=20))
@settings(max_examples=50, deadline=None)
def test_counting_process_nondecreasing(times):
    path = counting_process_at(RandomStream(3, 1), sorted(times))
    assert np.all(np.diff(path.counts) >= 0)
    assert path.counts[0] >= 0


def test_geometric_certain_success(stream):
    assert all(geometric_skip(stream, 1.0) == 1 for _ in range(100))


@pytest.mark.parametrize("p", [0.0, -0.5, 1.5])
def test_geometric_rejects_bad_p(stream, p):
    with pytest.raises(ParameterError):
        geometric_skip(stream, p)


def test_geometric_pmf_at_two(stream):
    gaps = geometric_skips(stream, 0.5, 10**6)
    assert abs(np.mean(gaps == 2) - 0.25) < 0.002


def test_geometric_mean(stream):
    gaps = geometric_skips(stream, 0.01, 10**6)
    assert abs(gaps.mean() - 100.0) < 1.0
    assert gaps.min() >= 1


def test_geometric_scalar_matches_law(stream):
    gaps = np.array([geometric_skip(stream, 0.3) for _ in range(20000)])
    top = 20
    ks = np.arange(1, top + 1)
    expected = 20000 * 0.3 * 0.7 ** (ks - 1)
    expected[-1] = 20000 * 0.7 ** (top - 1)
    observed = np.bincount(np.minimum(gaps, top), minlength=top + 1)[1:]
    assert chi_square_gof(observed, expected).passed


def test_reference_starts_at_zero(stream):
    path = reference_diffusion(stream, 0.0, 2.0, 0.01)
    assert path.values[0] == 0.0
    assert path.grid[-1] == pytest.approx(2.0)


def test_reference_rejects_bad_dt(stream):
    with pytest.raises(ParameterError):
        reference_diffusion(stream, 0.0, 1.0, 0.0)


def test_reference_mean_with_drift(stream):
    values = reference_marginals(stream, 2.0, [1.0], 10**4, dt=0.01)[:, 0]
    assert abs(values.mean() - 1.5) < 0.05


def test_reference_variance(stream):
    values = reference_marginals(stream, 0.0, [1.0], 10**4, dt=0.01)[:, 0]
    assert abs(values.var(ddof=1) - 1.0) < 0.05


def test_reference_marginals_match_single_paths():
    a = reference_marginals(RandomStream(9, 4), 0.5, [0.5, 1.0], 3, dt=0.05)
    assert a.shape == (3, 2)
    assert np.all(np.isfinite(a))
