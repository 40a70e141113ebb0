import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weibulltail.errors import BadK, DegenerateDenominator, DomainError, NonPositiveTail
from weibulltail.estimator import (hill_weights, k_rho, qq_pairs, tau_n, theta_general, theta_hill,
                                   theta_zipf, zeta_n, zipf_weights)
from weibulltail.sample import ingest
from weibulltail.scorefn import WeightSequence
from weibulltail.tailmodels import plugin_sample


def _zipf_eps_sup_oracle(n, k):
    a = [math.log(math.log(n / i)) for i in range(1, k)]
    z = sum(a) / len(a)
    return max(abs(math.log(n / k) * (ai - z) + math.log(i / k) + 1) for i, ai in enumerate(a, 1))


def test_general_hand_example():
    # X_{3,4} = e, X_{4,4} = e^2
    s = ingest([0.5, 0.7, math.e, math.e ** 2])
    got = theta_general(s, 2, hill_weights(2))
    assert got == pytest.approx(1 / math.log(2), rel=1e-14)
    assert got == pytest.approx(1 / (math.log(math.log(4)) - math.log(math.log(2))), rel=1e-14)


def test_hill_is_general_with_unit_weights():
    s = ingest(np.random.default_rng(1).weibull(1.5, 500))
    for k in (2, 10, 77, 499):
        assert theta_hill(s, k) == theta_general(s, k, WeightSequence(np.ones(k - 1), 0.0))


def test_hill_equal_top_values():
    assert theta_hill(ingest([1.0, 2.0, 5.0, 5.0, 5.0]), 3) == 0.0


def test_zipf_equal_top_values():
    assert theta_zipf(ingest([1.0, 2.0, 5.0, 5.0, 5.0, 5.0]), 4) == 0.0


@pytest.mark.parametrize("theta", [0.25, 0.5, 1.0, 2.0, 4.0])
def test_plugin_exactness(theta):
    s = plugin_sample(theta, 1000)
    for k in (2, 3, 10, 100, 500, 999):
        assert theta_hill(s, k) == pytest.approx(theta, rel=1e-12)
        if k >= 3:
            assert theta_zipf(s, k) == pytest.approx(theta, rel=1e-12)


def test_zipf_equals_general_with_zipf_weights():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(100, 2000))
        k = int(rng.integers(3, n // 4))
        s = ingest(rng.gamma(2.0, size=n))
        assert theta_general(s, k, zipf_weights(n, k)) == pytest.approx(theta_zipf(s, k), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3), st.integers(3, 60))
def test_scale_invariance(seed, c, k):
    x = np.random.default_rng(seed).weibull(0.8, 80) + 0.01
    s, sc = ingest(x), ingest(c * x)
    assert theta_hill(sc, k) == pytest.approx(theta_hill(s, k), rel=1e-9, abs=1e-12)
    assert theta_zipf(sc, k) == pytest.approx(theta_zipf(s, k), rel=1e-9, abs=1e-12)


def test_zipf_log_shift_invariance():
    x = np.random.default_rng(5).weibull(2.0, 300)
    s = ingest(x)
    shifted = ingest(np.exp(np.log(x) + 3.0))
    assert theta_zipf(shifted, 50) == pytest.approx(theta_zipf(s, 50), rel=1e-10)


def test_estimator_errors():
    s = ingest([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(BadK):
        theta_zipf(s, 2)
    with pytest.raises(BadK):
        theta_hill(s, 4)  # log log(n/k) undefined at k = n
    with pytest.raises(BadK):
        theta_general(s, 3, hill_weights(4))
    with pytest.raises(NonPositiveTail):
        theta_hill(ingest([-3.0, -2.0, -1.0, 4.0]), 3)
    with pytest.raises(DegenerateDenominator):
        theta_general(ingest([1.0, 2.0, 3.0, 4.0, 5.0]), 3, WeightSequence(np.zeros(2), 0.0))


def test_raw_negative_estimate_is_returned():
    s = ingest([1.0, 2.0, 3.0, 4.0, 5.0])
    w = WeightSequence(np.array([-1.0, -1.0]), 0.0)
    assert theta_general(s, 3, w) == pytest.approx(theta_hill(s, 3))
    # weights that flip the sign of the denominator only
    assert theta_general(s, 3, WeightSequence(np.array([0.0, 1.0]), 0.0)) > 0


def test_zipf_weights_examples():
    w = zipf_weights(4, 2)
    assert w.alphas.tolist() == [0.0]
    w = zipf_weights(1000, 40)
    assert abs(math.fsum(w.alphas)) <= 1e-13 * np.abs(w.alphas).sum()
    expected = [math.log(1000 / 40) * (math.log(math.log(1000 / i)) - zeta_n(1000, 40)) for i in range(1, 40)]
    np.testing.assert_allclose(w.alphas, expected, rtol=1e-12, atol=1e-14)


def test_zipf_weights_remainder():
    n, k = 10 ** 6, 100
    eps = zipf_weights(n, k).eps_sup
    assert eps == pytest.approx(_zipf_eps_sup_oracle(n, k), rel=1e-12)
    assert eps == pytest.approx(0.7647939096692, abs=1e-12)
    assert eps < math.log(k) ** 2 / math.log(n) + math.log(k) / k
    # the remainder shrinks as n grows at fixed k
    assert zipf_weights(10 ** 9, k).eps_sup < zipf_weights(10 ** 6, k).eps_sup < zipf_weights(10 ** 4, k).eps_sup


def test_tau_and_zeta_examples():
    assert tau_n(4, 2) == pytest.approx(math.log(2), rel=1e-14)
    assert zeta_n(4, 2) == pytest.approx(math.log(math.log(4)), rel=1e-14)
    assert zeta_n(4, 2) == pytest.approx(0.3266, abs=1e-4)


@pytest.mark.parametrize("n", [10, 1000, 10 ** 6])
def test_tau_zeta_bounds(n):
    for k in (2, 3, 7, n // 2, n - 1):
        assert tau_n(n, k) > 0
        assert zeta_n(n, k) <= math.log(math.log(n))
        if k >= 3:
            assert zeta_n(n, k) < math.log(math.log(n))
            assert zeta_n(n, k) > math.log(math.log(n / k))


@pytest.mark.parametrize("n", [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7])
def test_tau_expansion(n):
    k = int(n ** 0.3)
    assert abs(tau_n(n, k) * math.log(n / k) - 1) <= 3 * (math.log(k) / k + 1 / math.log(n / k))


def test_tau_bad_k():
    with pytest.raises(BadK):
        tau_n(10, 10)
    with pytest.raises(BadK):
        zeta_n(10, 1)


def test_k_rho_examples():
    assert k_rho(math.e, 0) == pytest.approx(1.0, rel=1e-15)
    for rho in (0, -0.5, -1, -7):
        assert k_rho(1.0, rho) == 0.0
    assert k_rho(2.0, -1) == pytest.approx(0.5, rel=1e-15)


def test_k_rho_matches_integral_and_is_continuous():
    from scipy import integrate

    for lam in (1.5, 3.0, 40.0):
        for rho in (-0.1, -1.0, -2.5):
            ref = integrate.quad(lambda u: u ** (rho - 1), 1, lam)[0]
            assert k_rho(lam, rho) == pytest.approx(ref, rel=1e-10)
        gaps = [abs(k_rho(lam, -10.0 ** -j) - k_rho(lam, 0)) for j in range(1, 9)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-7


def test_k_rho_bounds():
    # 0 <= K_rho(1 + x) <= x for x >= 0
    x = np.linspace(0, 50, 101)
    for rho in (0, -0.3, -2):
        v = k_rho(1 + x, rho)
        assert np.all(v >= 0) and np.all(v <= x + 1e-15)


def test_k_rho_domain():
    with pytest.raises(DomainError):
        k_rho(0.5, 0)
    with pytest.raises(DomainError):
        k_rho(2.0, 0.1)


def test_qq_pairs():
    theta = 1.7
    n = 200
    pts = qq_pairs(plugin_sample(theta, n), 150)
    assert len(pts) == 149
    a = np.array([p.abscissa for p in pts])
    y = np.array([p.ordinate for p in pts])
    np.testing.assert_allclose(y, theta * a, rtol=1e-12, atol=1e-12)
    assert np.all(np.diff(a) < 0) and np.all(np.diff(y) <= 0)
    assert pts[0].abscissa == pytest.approx(math.log(math.log(n)), rel=1e-15)
    assert len(qq_pairs(plugin_sample(theta, n), 2)) == 1
    with pytest.raises(BadK):
        qq_pairs(plugin_sample(theta, n), n)
