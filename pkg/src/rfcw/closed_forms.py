"""Closed-form rate functions and free energies for three field laws.

These serve as oracles for the numerical conjugation pipeline: a constant
field, the symmetric two-valued field and the uniform field on ``[-h, h]``.
"""
from __future__ import annotations

import math

from .field_models import LN2, Constant, Dichotomous, FreeEnergy
from .legendre import INF
from .phase_diagram import global_minima

PI2_6 = math.pi**2 / 6.0
_SERIES_EPS = 1e-17


def cramer_entropy(x: float) -> float:
    """``I0(x) = (1+x)/2 ln(1+x) + (1-x)/2 ln(1-x)``; ``ln 2`` at ``|x| = 1``."""
    ax = abs(x)
    if ax > 1.0:
        return INF
    if ax == 1.0:
        return LN2
    return 0.5 * (1.0 + x) * math.log1p(x) + 0.5 * (1.0 - x) * math.log1p(-x)


def _min_G(model, beta: float) -> float:
    return min(v for _, v in global_minima(FreeEnergy(model, beta)))


def classical_rate(x: float, beta: float, h: float) -> float:
    """Rate function of the Curie-Weiss model in a constant field ``h``."""
    i0 = cramer_entropy(x)
    if i0 == INF:
        return INF
    # inf_y {-beta y^2/2 - beta h y + I0(y)} = min G by duality
    return -0.5 * beta * x * x - beta * h * x + i0 - _min_G(Constant(h), beta)


def dichotomous_rate(x: float, beta: float, h: float) -> float:
    """Rate function for fields ``+-h`` with probability 1/2 each."""
    ax = abs(x)
    if ax > 1.0:
        return INF
    inf_G = _min_G(Dichotomous(h, 0.5), beta)
    if ax == 1.0:
        return LN2 - 0.5 * beta * x * x - inf_G
    a = math.sinh(2.0 * beta * h)
    b = math.cosh(2.0 * beta * h)
    s = b + math.sqrt(1.0 + x * x * a * a)
    return (LN2 - 0.5 * beta * x * x
            + 0.5 * x * math.asinh(x / (1.0 - x * x) * s)
            + 0.5 * math.log(0.5 * (1.0 - x * x))
            - 0.5 * math.log(s)
            - inf_G)


def _dilog_series(z: float) -> float:
    # |z| <= 1/2: remainder after N terms is below |z|^(N+1) / ((N+1)^2 (1-|z|))
    az = abs(z)
    total = 0.0
    power = z
    n = 1
    while True:
        total += power / (n * n)
        if az ** (n + 1) / ((n + 1) ** 2 * (1.0 - az)) < _SERIES_EPS:
            return total
        n += 1
        power *= z


def dilog(z: float) -> float:
    """Dilogarithm ``sum_{n>=1} z**n / n**2`` for real ``|z| <= 1``."""
    z = float(z)
    if abs(z) > 1.0:
        raise ValueError(f"dilog is only defined here for |z| <= 1, got {z!r}")
    if z == 1.0:
        return PI2_6
    if abs(z) <= 0.5:
        return _dilog_series(z)
    if z < 0.0:
        # Landen: maps [-1, -1/2) into (1/3, 1/2]
        return -_dilog_series(z / (z - 1.0)) - 0.5 * math.log1p(-z) ** 2
    # reflection about 1/2
    return PI2_6 - math.log(z) * math.log1p(-z) - _dilog_series(1.0 - z)


def uniform_G(x: float, beta: float, h: float) -> float:
    """``beta*x**2/2 - f(beta*x)`` for fields uniform on ``[-h, h]``, via dilogarithms."""
    if not (h > 0 and beta > 0):
        raise ValueError("uniform_G needs h > 0 and beta > 0")
    ax = abs(x)
    c = 4.0 * beta * h
    G = LN2 + 0.5 * beta * x * x - dilog(-math.exp(-2.0 * beta * (h + ax))) / c
    if ax <= h:
        L = (-beta / (2.0 * h) * (x * x + h * h)
             - math.pi**2 / (24.0 * beta * h)
             - dilog(-math.exp(-2.0 * beta * (h - ax))) / c)
    else:
        L = -beta * ax + dilog(-math.exp(-2.0 * beta * (ax - h))) / c
    return G + L
