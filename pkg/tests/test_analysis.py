import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from poisson_er.analysis import (
    beta_solver,
    chi_square_gof,
    chi_square_homogeneity,
    connectivity_limit,
    exact_connectivity_probability,
    fluid_curve,
    geometric_fit,
    ks_distance,
    ks_two_sample,
    summarize,
    theory_targets,
)
from poisson_er.errors import DomainError, ParameterError

# Roots of 1 - exp(-c t) - t from a plain bisection run to 1e-15, frozen here.
BETA_ORACLE = {
    1.01: 0.0197364104395924,
    1.1: 0.17613414363180913,
    1.5: 0.5828116438658113,
    2.0: 0.7968121300200199,
    3.0: 0.9404797907073597,
    5.0: 0.9930228463488553,
    10.0: 0.9999545794446534,
}
C_STAR_2 = 0.4063757399599601
SD_POISSONIZED_2 = 1.503717753349093
SD_FIXED_2 = 0.6778213061028976
CONNECT_ORACLE = {
    -2.0: 0.0006179789893310934,
    0.0: 0.36787944117144233,
    1.0: 0.6922006275553464,
    2.0: 0.8734230184931167,
    5.0: 0.9932847020678415,
}


def test_fluid_curve_basics():
    assert fluid_curve(3.0, 0.0) == 0.0
    assert fluid_curve(2.0, np.array([0.0, 1.0])).shape == (2,)
    h = 1e-6
    assert abs((fluid_curve(1.0, h) - fluid_curve(1.0, 0.0)) / h) < 1e-5


def test_fluid_curve_small_argument_precision():
    # 1 - exp(-x) - t with x = 1e-12 loses every digit without expm1.
    assert fluid_curve(1e-12, 1.0) == pytest.approx(1e-12 - 1.0, rel=1e-15)


@pytest.mark.parametrize("c", sorted(BETA_ORACLE))
def test_beta_matches_oracle(c):
    sol = beta_solver(c)
    assert sol.beta == pytest.approx(BETA_ORACLE[c], abs=1e-10)
    assert sol.residual <= 1e-12
    assert abs(fluid_curve(c, sol.beta)) <= 1e-12
    assert fluid_curve(c, sol.beta / 2) > 0


def test_beta_monotone_on_grid():
    betas = [beta_solver(c).beta for c in sorted(BETA_ORACLE)]
    assert all(a < b for a, b in zip(betas, betas[1:]))


def test_beta_subcritical_and_errors():
    assert beta_solver(0.5).beta == 0.0
    assert beta_solver(1.0).beta == 0.0
    with pytest.raises(ParameterError):
        beta_solver(0.0)
    with pytest.raises(ParameterError):
        beta_solver(2.0, tol=0.0)


def test_beta_large_c():
    assert fluid_curve(10.0, 0.9999) > 0
    assert beta_solver(10.0).beta > 0.9999


def test_beta_near_one_uses_expansion():
    c = 1.0 + 5e-10
    assert beta_solver(c).beta == pytest.approx(2 * (c - 1) / c**2)


@given(st.floats(1.001, 50.0))
@settings(max_examples=200, deadline=None)
def test_beta_is_first_root(c):
    sol = beta_solver(c)
    assert 0 < sol.beta < 1
    assert sol.residual <= 1e-12
    assert fluid_curve(c, sol.beta / 2) > 0


def test_theory_targets_at_two():
    t = theory_targets(2.0)
    assert t.c_star == pytest.approx(C_STAR_2, abs=1e-10)
    assert t.giant_sd_poissonized == pytest.approx(SD_POISSONIZED_2, abs=1e-9)
    assert t.giant_sd_fixed == pytest.approx(SD_FIXED_2, abs=1e-9)
    assert t.kc_success == t.beta
    assert beta_solver(t.c_star).beta == 0.0
    assert t.connect_limit(0.0) == pytest.approx(math.exp(-1))
    assert "connect_limit" not in t.as_dict()


@given(st.floats(1.01, 20.0))
@settings(max_examples=50, deadline=None)
def test_theory_target_invariants(c):
    t = theory_targets(c)
    assert 0 < t.c_star < 1
    assert t.giant_sd_fixed < t.giant_sd_poissonized


def test_theory_targets_domain():
    with pytest.raises(DomainError):
        theory_targets(1.0)


def test_connectivity_limit():
    values = [connectivity_limit(c) for c in sorted(CONNECT_ORACLE)]
    for c in CONNECT_ORACLE:
        assert connectivity_limit(c) == pytest.approx(CONNECT_ORACLE[c], rel=1e-12)
    assert all(0 < v < 1 for v in values)
    assert all(a < b for a, b in zip(values, values[1:]))


def test_ks_constant_sample():
    report = ks_distance(np.zeros(100), stats.norm.cdf)
    assert report.statistic == pytest.approx(0.5)
    assert not report.passed


def test_ks_single_point():
    assert ks_distance([0.0], stats.norm.cdf).statistic == pytest.approx(0.5)


def test_ks_rejects_unsorted():
    with pytest.raises(ParameterError):
        ks_distance([1.0, 0.0], stats.norm.cdf)


def test_ks_matches_scipy():
    x = np.sort(np.random.default_rng(4).normal(size=500))
    ours = ks_distance(x, stats.norm.cdf).statistic
    assert ours == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)


def test_ks_calibration():
    rng = np.random.default_rng(11)
    passes = sum(ks_distance(np.sort(rng.normal(size=10**4)), stats.norm.cdf).passed for _ in range(100))
    assert passes >= 99


def test_ks_two_sample():
    rng = np.random.default_rng(5)
    assert ks_two_sample(rng.normal(size=2000), rng.normal(size=3000)).passed
    assert not ks_two_sample(rng.normal(size=2000), rng.normal(0.5, size=2000)).passed


def test_chi_square_gof_pools_bins():
    report = chi_square_gof([50, 48, 1, 1], [50.0, 48.0, 1.0, 1.0])
    assert report.statistic == pytest.approx(0.0)
    assert report.passed


def test_chi_square_gof_detects_mismatch():
    assert not chi_square_gof([900, 100], [500.0, 500.0]).passed


def test_chi_square_homogeneity():
    assert chi_square_homogeneity([100, 200, 300], [100, 200, 300]).statistic == 0.0
    assert not chi_square_homogeneity([500, 100], [100, 500]).passed


def test_geometric_fit_degenerate():
    success, report = geometric_fit([0] * 50)
    assert success == 1.0
    assert report.passed


def test_geometric_fit_calibration():
    rng = np.random.default_rng(8)
    counts = rng.geometric(0.8, size=10**5) - 1
    success, report = geometric_fit(counts)
    assert abs(success - 0.8) < 0.005
    assert report.passed


def test_geometric_fit_rejects_wrong_law():
    rng = np.random.default_rng(9)
    _, report = geometric_fit(rng.poisson(3.0, size=10**4))
    assert not report.passed


def test_exact_connectivity():
    p = 0.3
    assert exact_connectivity_probability(3, p) == pytest.approx(3 * p**2 - 2 * p**3)
    assert exact_connectivity_probability(2, 0.7) == pytest.approx(0.7)
    assert exact_connectivity_probability(1, 0.1) == 1.0
    with pytest.raises(ParameterError):
        exact_connectivity_probability(8, 0.5)


def test_summarize():
    s = summarize([1.0, 2.0, 3.0, 4.0])
    assert s["mean"] == 2.5 and s["median"] == 2.5 and s["count"] == 4
    assert summarize([]) == {"count": 0}
