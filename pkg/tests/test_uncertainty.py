import math

import numpy as np
import pytest
import scipy.stats

from robustcounter.model import Model
from robustcounter.uncertainty import (
    RHS,
    Binomial,
    Bounded,
    BoundedRange,
    Discrete,
    Normal,
    Poisson,
    RobustConfig,
    UncertainSet,
    Uniform,
    bounded_interval,
    deviation_radius,
    discrete_deviation,
    format_annotations,
    normal_lambda,
    omega_from_kappa,
    parse_annotations,
)

from _oracles import binomial_tail_gt, erf_cdf_quantile, poisson_tail_gt


# -- omega_from_kappa ------------------------------------------------------------


def test_omega_anchors():
    assert omega_from_kappa(1.0) == 0.0
    assert omega_from_kappa(math.exp(-2.0)) == pytest.approx(2.0, abs=1e-12)
    # sqrt(-2 ln 0.05), frozen from a high-precision evaluation
    assert omega_from_kappa(0.05) == pytest.approx(2.44774683068, abs=1e-9)


def test_omega_domain():
    with pytest.raises(ValueError):
        omega_from_kappa(0.0)
    with pytest.raises(ValueError):
        omega_from_kappa(1.5)


def test_omega_round_trip():
    for omega in np.linspace(0.0, 6.0, 61):
        kappa = math.exp(-omega ** 2 / 2.0)
        assert omega_from_kappa(kappa) == pytest.approx(omega, abs=1e-10)


def test_omega_strictly_decreasing():
    kappas = np.linspace(0.01, 1.0, 50)
    omegas = [omega_from_kappa(k) for k in kappas]
    assert all(a > b for a, b in zip(omegas, omegas[1:]))


# -- normal_lambda ------------------------------------------------------------------


def test_normal_lambda_anchors():
    assert normal_lambda(0.5) == 0.0
    # bisection on an erf-based CDF, computed independently
    assert normal_lambda(0.05) == pytest.approx(erf_cdf_quantile(0.95), abs=1e-7)
    assert normal_lambda(0.05) == pytest.approx(1.6448536, abs=1e-6)
    assert normal_lambda(0.0228) == pytest.approx(1.9990772, abs=1e-6)
    assert normal_lambda(0.0228) == pytest.approx(2.0, abs=1e-3)


def test_normal_lambda_antisymmetry():
    for kappa in (0.01, 0.1, 0.3, 0.45):
        assert normal_lambda(kappa) == pytest.approx(-normal_lambda(1 - kappa),
                                                     abs=1e-12)


def test_normal_lambda_domain():
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            normal_lambda(bad)


def test_normal_lambda_monte_carlo_agreement():
    """Empirical exceedance of the quantile matches kappa within 3 sigma."""
    rng = np.random.default_rng(20240901)
    n = 10 ** 6
    samples = rng.standard_normal(n)
    for kappa in (0.5, 0.25, 0.05):
        lam = normal_lambda(kappa)
        frequency = float(np.mean(samples > lam))
        assert abs(frequency - kappa) <= 3.0 * math.sqrt(kappa * (1 - kappa) / n)


# -- discrete_deviation ----------------------------------------------------------------


def test_poisson_deviation_anchor():
    # a mean-5 count at the 24% reliability level deviates to 6
    assert discrete_deviation(Poisson(5.0), 0.24) == 6
    # cross-check against direct CDF summation
    assert poisson_tail_gt(5.0, 6) <= 0.24 < poisson_tail_gt(5.0, 5)


def test_poisson_deviation_near_one():
    # P(X > 0) = 1 - e^-5 ~ 0.99326 <= 0.999
    assert discrete_deviation(Poisson(5.0), 0.999) == 0


def test_binomial_deviation():
    assert discrete_deviation(Binomial(10, 0.5), 0.5) == 5
    assert binomial_tail_gt(10, 0.5, 5) <= 0.5 < binomial_tail_gt(10, 0.5, 4)


def test_discrete_deviation_general():
    dist = Discrete((1.0, 2.0, 5.0), (0.5, 0.3, 0.2))
    assert discrete_deviation(dist, 0.25) == 2.0
    assert discrete_deviation(dist, 0.1) == 5.0


def test_discrete_deviation_rejects_other_tags():
    with pytest.raises(ValueError):
        discrete_deviation(Normal(0.0, 1.0), 0.5)


def test_discrete_deviation_minimality_exhaustive():
    """Decrementing the returned t breaks the tail condition, for every
    Poisson mean up to 20 and a ladder of reliability levels."""
    for mean in range(1, 21):
        for kappa in (0.9, 0.5, 0.24, 0.1, 0.01):
            t = discrete_deviation(Poisson(float(mean)), kappa)
            assert poisson_tail_gt(float(mean), t) <= kappa
            if t > 0:
                assert poisson_tail_gt(float(mean), t - 1) > kappa


def test_poisson_matches_scipy_tails():
    for mean in (0.5, 3.0, 12.0, 500.0):
        for kappa in (0.6, 0.2, 0.05):
            t = discrete_deviation(Poisson(mean), kappa)
            assert scipy.stats.poisson.sf(t, mean) <= kappa + 1e-12
            if t > 0:
                assert scipy.stats.poisson.sf(t - 1, mean) > kappa


def test_binomial_matches_scipy_tails():
    for n, p in ((10, 0.5), (40, 0.2), (1000, 0.35)):
        for kappa in (0.6, 0.2, 0.05):
            t = discrete_deviation(Binomial(n, p), kappa)
            assert scipy.stats.binom.sf(t, n, p) <= kappa + 1e-12
            if t > 0:
                assert scipy.stats.binom.sf(t - 1, n, p) > kappa


# -- bounded_interval -----------------------------------------------------------------


def test_bounded_interval_relative():
    assert bounded_interval(10.0, 0.05) == (9.5, 10.5)
    assert bounded_interval(0.0, 0.3) == (0.0, 0.0)
    low, high = bounded_interval(-10.0, 0.05)
    assert (low, high) == (-10.5, -9.5)


def test_bounded_interval_explicit_range():
    assert bounded_interval(11.1, BoundedRange(10.1, 11.3)) == (10.1, 11.3)


def test_bounded_interval_rejects_nonfinite():
    with pytest.raises(ValueError):
        bounded_interval(math.inf, 0.1)


# -- conservatism ordering hook ----------------------------------------------------------


def test_normal_vs_bounded_radius_ordering():
    """The normal radius sits below the bounded radius exactly when
    lambda(kappa) * sigma < 1 (closed-form comparison)."""
    sigma = 1.0 / 3.0
    for kappa in (0.4, 0.25, 0.14, 0.05, 0.01, 0.0013):
        bounded = deviation_radius(7.0, Bounded(), epsilon=0.1)
        normal = deviation_radius(7.0, Normal(0.0, sigma), epsilon=0.1, kappa=kappa)
        if normal_lambda(kappa) * sigma < 1.0:
            assert normal < bounded
        else:
            assert normal > bounded


# -- RobustConfig / UncertainSet -----------------------------------------------------------


def test_robust_config_validation():
    cfg = RobustConfig(0.05, 0.1, 0.24)
    assert cfg.omega == pytest.approx(omega_from_kappa(0.24))
    with pytest.raises(ValueError):
        RobustConfig(-0.1, 0.0, 0.5)
    with pytest.raises(ValueError):
        RobustConfig(0.0, 0.0, 0.0)


def test_distribution_validation():
    with pytest.raises(ValueError):
        Normal(0.0, 0.0)
    with pytest.raises(ValueError):
        Poisson(0.0)
    with pytest.raises(ValueError):
        Binomial(5, 1.5)
    with pytest.raises(ValueError):
        Discrete((1.0, 2.0), (0.6, 0.6))
    with pytest.raises(ValueError):
        BoundedRange(3.0, 1.0)


def _small_model():
    m = Model()
    x = m.add_variable("x")
    y = m.add_variable("y")
    m.set_objective("max", [(x, 1.0), (y, 1.0)])
    m.add_constraint([(x, 2.0), (y, 1.0)], "<=", 6.0, label="cap")
    return m.finalize(), x, y


def test_uncertain_set_rejects_duplicates():
    m, x, _ = _small_model()
    uset = UncertainSet([(0, x, Bounded())])
    with pytest.raises(ValueError, match="duplicate"):
        uset.add(0, x, Bounded(0.1))


def test_uncertain_set_validates_references():
    m, x, _ = _small_model()
    UncertainSet([(0, x, Bounded()), (0, RHS, Bounded())]).validate(m)
    with pytest.raises(ValueError, match="unknown constraint"):
        UncertainSet([(5, x, Bounded())]).validate(m)


def test_annotation_round_trip():
    m, x, y = _small_model()
    uset = UncertainSet([
        (0, x, Bounded(0.05)),
        (0, y, Normal(100.0, 5.0)),
        (0, RHS, Uniform()),
    ])
    text = format_annotations(uset, m)
    again = parse_annotations(text, m)
    assert len(again) == 3
    assert again.entries[0].distribution == Bounded(0.05)
    assert again.entries[1].distribution == Normal(100.0, 5.0)
    assert again.entries[2].is_rhs


def test_annotation_unknown_label_named():
    m, x, _ = _small_model()
    with pytest.raises(ValueError, match="nosuch"):
        parse_annotations("nosuch x(bounded 0.05)\n", m)


def test_annotation_unknown_variable_named():
    m, _, _ = _small_model()
    with pytest.raises(ValueError, match="ghost"):
        parse_annotations("cap ghost(bounded)\n", m)
