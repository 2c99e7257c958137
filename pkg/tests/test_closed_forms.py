import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from rfcw.closed_forms import (classical_rate, cramer_entropy, dichotomous_rate, dilog,
                               uniform_G)
from rfcw.field_models import Constant, FreeEnergy, Uniform
from rfcw.legendre import INF
from rfcw.phase_diagram import global_minima
from rfcw.rate_function import G_of, RateFunction, rate_I


def test_cramer_entropy():
    assert cramer_entropy(0.0) == 0.0
    assert cramer_entropy(1.0) == cramer_entropy(-1.0) == math.log(2)
    assert cramer_entropy(1.2) == INF
    xs = np.linspace(-0.99, 0.99, 199)
    v = np.array([cramer_entropy(x) for x in xs])
    assert np.max(np.abs(v - v[::-1])) < 1e-15
    assert np.all(v[:-2] + v[2:] - 2 * v[1:-1] > 0)


def test_classical_rate_examples():
    expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5) - 0.0625
    assert classical_rate(0.5, 0.5, 0.0) == pytest.approx(expected, abs=1e-14)
    assert classical_rate(1.3, 0.5, 0.0) == INF
    beta, h = 1.7, 0.2
    m = global_minima(FreeEnergy(Constant(h), beta))[0][0]
    assert classical_rate(m, beta, h) == pytest.approx(0.0, abs=1e-12)


def test_dichotomous_reduces_to_classical_at_zero_field():
    for beta in (0.4, 1.0, 2.2):
        for x in (-0.9, -0.3, 0.0, 0.55, 1.0):
            assert dichotomous_rate(x, beta, 0.0) == pytest.approx(classical_rate(x, beta, 0.0), abs=1e-12)


def test_dichotomous_rate_examples():
    beta, h = 0.6, 1.0
    rf = RateFunction(FreeEnergy(__import__("rfcw").Dichotomous(h), beta))
    assert dichotomous_rate(0.3, beta, h) == pytest.approx(rate_I(rf, 0.3), abs=1e-6)
    inf_G = min(v for _, v in rf.global_minima)
    assert dichotomous_rate(1.0, beta, h) == pytest.approx(math.log(2) - 0.3 - inf_G, abs=1e-14)
    assert dichotomous_rate(1.01, beta, h) == INF
    for x in (0.2, 0.7, 0.95):
        assert dichotomous_rate(-x, 1.9, 0.3) == pytest.approx(dichotomous_rate(x, 1.9, 0.3), abs=1e-14)


def test_dilog_special_values():
    assert dilog(0.0) == 0.0
    # partial sums of sum 1/n^2 with the integral tail bound 1/N
    N = 10**6
    partial = math.fsum(1.0 / k**2 for k in range(1, N + 1))
    assert dilog(1.0) == pytest.approx(partial, abs=1.0 / N)
    assert dilog(1.0) == pytest.approx(math.pi**2 / 6, abs=1e-15)
    # alternating series: error below the first omitted term
    alt = math.fsum((-1.0) ** k / k**2 for k in range(1, N + 1))
    assert dilog(-1.0) == pytest.approx(alt, abs=1.0 / (N + 1) ** 2)
    assert dilog(-1.0) == pytest.approx(-math.pi**2 / 12, abs=1e-15)


@pytest.mark.parametrize("z", np.concatenate([np.linspace(-1, 1, 81), [-0.5000001, 0.4999999, 1e-300, -0.99999]]))
def test_dilog_against_mpmath(z):
    assert dilog(z) == pytest.approx(float(mpmath.polylog(2, float(z))), abs=1e-14)


def test_dilog_properties():
    zs = np.linspace(-1, 1, 401)
    v = np.array([dilog(z) for z in zs])
    assert np.all(np.diff(v) > 0)
    neg = zs <= 0
    # alternating tail z**2/4 + z**3/9 + ... is non-negative for z in [-1, 0]
    assert np.all(v[neg] >= zs[neg])


def test_dilog_domain():
    with pytest.raises(ValueError):
        dilog(1.5)


def test_uniform_G_branches_agree():
    for beta, h in [(1.0, 0.5), (2.5, 1.0), (0.3, 0.2)]:
        assert abs(uniform_G(h - 1e-9, beta, h) - uniform_G(h + 1e-9, beta, h)) <= 1e-7


def test_uniform_G_matches_quadrature():
    rf = RateFunction(FreeEnergy(Uniform(1.0), 1.0))
    assert uniform_G(0.0, 1.0, 1.0) == pytest.approx(G_of(rf, 0.0), abs=1e-9)
    beta, h, x = 2.0, 0.5, 1.5
    integral, _ = quad(lambda u: float(mpmath.log(mpmath.cosh(beta * (x + u)))), -h, h, epsabs=1e-14)
    assert uniform_G(x, beta, h) == pytest.approx(beta / 2 * x * x - integral / (2 * h), abs=1e-9)


def test_uniform_G_oracle_grid():
    for beta in (0.5, 1.0, 2.5):
        for h in (0.3, 1.0):
            rf = RateFunction(FreeEnergy(Uniform(h), beta))
            for x in np.linspace(-2, 2, 41):
                assert abs(G_of(rf, x) - uniform_G(x, beta, h)) <= 1e-9
