import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from weibulltail.errors import BadEpsilon, BadParam, IntegralDiverged, UnknownScore
from weibulltail.scorefn import (HILL, ZIPF, ExprFunction, ScoreFunction, check_envelope, get_score,
                                 load_scores, mu, score_from_config, sigma2, weights_from_score)


def _mu_oracle(w):
    return integrate.quad(lambda x: w(x) * math.log(1 / x), 0, 1, limit=200)[0]


def _sigma2_oracle(w):
    kernel = lambda y, x: w(x) * w(y) * (min(x, y) - x * y) / (x * y)
    lower = integrate.dblquad(kernel, 0, 1, 0, lambda x: x, epsabs=1e-11)[0]
    upper = integrate.dblquad(kernel, 0, 1, lambda x: x, 1, epsabs=1e-11)[0]
    return lower + upper


def test_hill_weights():
    ws = weights_from_score(HILL, 10, 4)
    assert ws.alphas.tolist() == [1.0, 1.0, 1.0]
    assert ws.eps_sup == 0.0


def test_zipf_score_weights():
    ws = weights_from_score(ZIPF, 10, 4)
    expected = [-(math.log(i / 4) + 1) for i in (1, 2, 3)]
    np.testing.assert_allclose(ws.alphas, expected, rtol=1e-15)
    np.testing.assert_allclose(ws.alphas, [0.3863, -0.3069, -0.7123], atol=5e-5)


def test_weights_with_eps():
    ws = weights_from_score(HILL, 10, 4, eps=[0.1, -0.1, 0.0])
    assert ws.eps_sup == 0.1
    np.testing.assert_allclose(ws.alphas, [1.1, 0.9, 1.0])
    with pytest.raises(BadEpsilon):
        weights_from_score(HILL, 10, 4, eps=[0.1, 0.2])


def test_mu_examples():
    assert mu(HILL, use_analytic=False) == pytest.approx(1.0, abs=1e-9)
    assert mu(ZIPF, use_analytic=False) == pytest.approx(1.0, abs=1e-9)
    assert mu(ScoreFunction("lin", lambda x: x)) == pytest.approx(0.25, abs=1e-9)


def test_sigma2_examples():
    assert sigma2(HILL, use_analytic=False) == pytest.approx(1.0, abs=1e-7)
    assert sigma2(ZIPF, use_analytic=False) == pytest.approx(2.0, abs=1e-7)
    assert sigma2(ScoreFunction("zero", lambda x: 0 * x)) == 0.0


def test_analytic_values_preferred():
    fake = dataclasses.replace(HILL, analytic_mu=3.0, analytic_sigma2=4.0)
    assert mu(fake) == 3.0 and sigma2(fake) == 4.0


# (W, exact mu, exact sigma2); the power law has mu = 1/(1-q)^2 and
# sigma2 = 2/(1-q) (1/(1-2q) - 1/(2-2q))
_CASES = [
    (lambda x: x, 0.25, 1 / 12),
    (lambda x: 1 - x, 0.75, None),
    (lambda x: x ** -0.3, 1 / 0.7 ** 2, 2 / 0.7 * (1 / 0.4 - 1 / 1.4)),
    (lambda x: np.cos(3 * x) - np.log(x) ** 2, None, None),
]


@pytest.mark.parametrize("w, mu_exact, s2_exact", _CASES)
def test_quadrature_against_scipy(w, mu_exact, s2_exact):
    f = ScoreFunction("case", w, M=10, q=0.3)
    m = mu(f)
    s2 = sigma2(f)
    assert m == pytest.approx(_mu_oracle(w), abs=1e-8)
    assert s2 == pytest.approx(_sigma2_oracle(w), abs=1e-6)
    if mu_exact is not None:
        assert m == pytest.approx(mu_exact, abs=1e-9)
    if s2_exact is not None:
        assert s2 == pytest.approx(s2_exact, abs=1e-7)


@pytest.mark.parametrize("a", [2.0, 1 / 3])
@pytest.mark.parametrize("base", [ZIPF, ScoreFunction("lin", lambda x: 1 - 2 * x)])
def test_linearity(a, base):
    scaled = ScoreFunction("scaled", lambda x: a * base(x), M=3 * a, q=base.q)
    assert mu(scaled, False) == pytest.approx(a * mu(base, False), abs=1e-9)
    assert sigma2(scaled, False) == pytest.approx(a * a * sigma2(base, False), abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.floats(-2, 2))
def test_sigma2_nonnegative(coefs, c_log):
    def w(x):
        return np.polynomial.polynomial.polyval(x, coefs) + c_log * np.log(x)

    f = ScoreFunction("poly", w, M=20, q=0.25)
    assert sigma2(f) >= -1e-7


def test_sigma2_diverges_near_half():
    f = ScoreFunction("steep", lambda x: x ** -0.6, M=100, q=0.49)
    with pytest.raises(IntegralDiverged):
        sigma2(f)


def test_envelope_builtin():
    assert check_envelope(HILL).ok
    assert check_envelope(ZIPF).ok


def test_envelope_zipf_with_p_half():
    # |W'| = 1/x cannot sit below 3 x^-(0.5+0.25) near 0
    report = check_envelope(dataclasses.replace(ZIPF, p=0.5))
    assert not report.ok
    assert report.w_margin > 0 and report.deriv_margin < 0
    assert report.worst_x < 1 / 81


@pytest.mark.parametrize("q", [0.0, 0.25, 0.49])
def test_envelope_too_steep(q):
    assert not check_envelope(ScoreFunction("steep", lambda x: x ** -0.6, M=1e6, q=q)).ok


def test_envelope_params_validated():
    with pytest.raises(BadParam):
        ScoreFunction("bad", lambda x: x, q=0.5)
    with pytest.raises(BadParam):
        ScoreFunction("bad", lambda x: x, p=1.0)
    with pytest.raises(BadParam):
        ScoreFunction("bad", lambda x: x, M=0)
    with pytest.raises(ValueError):
        check_envelope(HILL, grid_size=5)


def test_custom_score_config(tmp_path):
    cfg = {"name": "lin", "expr": "1 - x", "deriv": "-1 + 0*x", "M": 1, "q": 0, "p": 0}
    f = score_from_config(cfg)
    np.testing.assert_allclose(f(np.array([0.25, 0.5])), [0.75, 0.5])
    assert mu(f) == pytest.approx(0.75, abs=1e-9)
    assert check_envelope(f).ok
    path = tmp_path / "scores.json"
    path.write_text('{"scores": [{"name": "lin", "expr": "1 - x"}]}')
    assert "lin" in load_scores(path)
    assert get_score("lin", load_scores(path)).name == "lin"


def test_expr_function_pickles():
    import pickle

    f = pickle.loads(pickle.dumps(ExprFunction("log(x) + x")))
    assert f(1.0) == 1.0


def test_unknown_score():
    with pytest.raises(UnknownScore):
        get_score("nope")
    with pytest.raises(BadParam):
        score_from_config({"name": "x"})
