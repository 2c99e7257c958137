"""Random external field laws, sampled realizations and the free energies f_n, f.

Every field law here has a finite absolute first moment, so the empirical free
energy ``f_n(x) = mean(log cosh(x + beta*h_i))`` converges to a limit ``f``
that depends only on the one-site marginal (or stationary) law of the fields.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from scipy.integrate import quad
from scipy.sparse.csgraph import connected_components

LN2 = math.log(2.0)
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
PROB_TOL = 1e-12
STATIONARY_TOL = 1e-10
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-13
MAX_ORDER = 6


class InvalidModelError(ValueError):
    """Raised when a field law is constructed with inconsistent parameters."""


def logcosh(t):
    """Overflow-free ``log(cosh(t))``."""
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - LN2


def logcosh_derivative(t, order: int):
    """``d^order/dt^order log cosh(t)`` for order 0..6, as polynomials in tanh."""
    if order == 0:
        return logcosh(t)
    T = np.tanh(t)
    T2 = T * T
    s = 1.0 - T2
    if order == 1:
        return T
    if order == 2:
        return s
    if order == 3:
        return -2.0 * T * s
    if order == 4:
        return (-2.0 + 6.0 * T2) * s
    if order == 5:
        return (16.0 * T - 24.0 * T * T2) * s
    if order == 6:
        return (16.0 - 120.0 * T2 + 120.0 * T2 * T2) * s
    raise ValueError(f"derivative order {order} not supported (max {MAX_ORDER})")


def _check_probs(probs, name: str) -> None:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidModelError(f"{name} must be a non-empty vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidModelError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise InvalidModelError(f"{name} sums to {p.sum()!r}, not 1")


# ---------------------------------------------------------------------------
# Field laws
# ---------------------------------------------------------------------------

class FieldModel:
    """Base class of the random field laws.

    Subclasses are frozen dataclasses. Discrete laws expose their atoms,
    continuous ones (uniform on ``[-h, h]``) return ``None`` from ``atoms``.
    """

    variant: ClassVar[str]

    def atoms(self) -> tuple[np.ndarray, np.ndarray] | None:
        return None

    @property
    def mean(self) -> float:
        values, weights = self.atoms()
        return float(np.dot(values, weights))

    @property
    def symmetric(self) -> bool:
        """True when the one-site law is invariant under h -> -h."""
        atoms = self.atoms()
        if atoms is None:
            return True
        values, weights = atoms
        law: dict[float, float] = {}
        for v, w in zip(values, weights):
            law[float(v)] = law.get(float(v), 0.0) + float(w)
        return all(abs(w - law.get(-v, 0.0)) <= PROB_TOL for v, w in law.items())

    def _draw(self, rng: np.random.Generator, n: int, seed: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Constant(FieldModel):
    h: float
    variant: ClassVar[str] = "constant"

    def atoms(self):
        return np.array([self.h]), np.array([1.0])

    def _draw(self, rng, n, seed):
        return np.full(n, float(self.h))

    def to_dict(self):
        return {"variant": self.variant, "h": self.h}


@dataclass(frozen=True)
class Dichotomous(FieldModel):
    """Fields equal to ``+h`` with probability ``alpha`` and ``-h`` otherwise."""

    h: float
    alpha: float = 0.5
    variant: ClassVar[str] = "dichotomous"

    def __post_init__(self):
        if self.h < 0:
            raise InvalidModelError("dichotomous field strength h must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidModelError("alpha must lie in [0, 1]")

    def atoms(self):
        return np.array([self.h, -self.h]), np.array([self.alpha, 1.0 - self.alpha])

    @property
    def symmetric(self) -> bool:
        return self.alpha == 0.5 or self.h == 0

    def _draw(self, rng, n, seed):
        return np.where(rng.random(n) < self.alpha, float(self.h), -float(self.h))

    def to_dict(self):
        return {"variant": self.variant, "h": self.h, "alpha": self.alpha}


@dataclass(frozen=True)
class Uniform(FieldModel):
    h: float
    variant: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidModelError("uniform half-width h must be > 0")

    @property
    def mean(self) -> float:
        return 0.0

    def _draw(self, rng, n, seed):
        return rng.uniform(-self.h, self.h, size=n)

    def to_dict(self):
        return {"variant": self.variant, "h": self.h}


@dataclass(frozen=True)
class FiniteTable(FieldModel):
    values: tuple[float, ...]
    probs: tuple[float, ...]
    variant: ClassVar[str] = "table"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.values) != len(self.probs):
            raise InvalidModelError("values and probs have different lengths")
        _check_probs(self.probs, "probs")

    def atoms(self):
        return np.array(self.values), np.array(self.probs)

    def _draw(self, rng, n, seed):
        return rng.choice(np.array(self.values), size=n, p=np.array(self.probs))

    def to_dict(self):
        return {"variant": self.variant, "values": list(self.values), "probs": list(self.probs)}


@dataclass(frozen=True)
class MarkovChain(FieldModel):
    """Stationary irreducible Markov chain on finitely many real states.

    The limiting free energy only sees the stationary law; the transition
    matrix matters for sampling alone.
    """

    states: tuple[float, ...]
    transition: tuple[tuple[float, ...], ...]
    stationary: tuple[float, ...]
    variant: ClassVar[str] = "markov"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(float(s) for s in self.states))
        object.__setattr__(
            self, "transition", tuple(tuple(float(p) for p in row) for row in self.transition)
        )
        object.__setattr__(self, "stationary", tuple(float(p) for p in self.stationary))
        k = len(self.states)
        P = np.array(self.transition, dtype=float)
        if P.shape != (k, k):
            raise InvalidModelError(f"transition must be {k}x{k}, got shape {P.shape}")
        for i, row in enumerate(P):
            _check_probs(row, f"transition row {i}")
        _check_probs(self.stationary, "stationary")
        if len(self.stationary) != k:
            raise InvalidModelError("stationary has the wrong length")
        pi = np.array(self.stationary)
        if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
            raise InvalidModelError("stationary is not invariant under the transition matrix")
        n_comp, _ = connected_components(P > 0, directed=True, connection="strong")
        if n_comp != 1:
            raise InvalidModelError("transition matrix is not irreducible")

    @classmethod
    def from_transition(cls, states, transition) -> "MarkovChain":
        """Build a chain, solving for its stationary distribution."""
        P = np.asarray(transition, dtype=float)
        k = P.shape[0]
        A = np.vstack([P.T - np.eye(k), np.ones(k)])
        b = np.zeros(k + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        return cls(tuple(states), tuple(map(tuple, P)), tuple(pi))

    def atoms(self):
        return np.array(self.states), np.array(self.stationary)

    def _draw(self, rng, n, seed):
        states = np.array(self.states)
        cum = np.cumsum(np.array(self.transition), axis=1)
        cum[:, -1] = 1.0
        u = rng.random(n)
        idx = np.empty(n, dtype=np.int64)
        pi_cum = np.cumsum(self.stationary)
        pi_cum[-1] = 1.0
        idx[0] = np.searchsorted(pi_cum, u[0], side="right")
        for i in range(1, n):
            idx[i] = np.searchsorted(cum[idx[i - 1]], u[i], side="right")
        return states[idx]

    def to_dict(self):
        return {
            "variant": self.variant,
            "states": list(self.states),
            "transition": [list(row) for row in self.transition],
            "stationary": list(self.stationary),
        }


@dataclass(frozen=True)
class Rotation(FieldModel):
    """Fields ``h * (2*frac(w0 + i*alpha) - 1)`` driven by an irrational rotation.

    The rotation preserves Lebesgue measure and is ergodic, so the fields have
    the same limiting free energy as ``Uniform(h)``.
    """

    h: float
    alpha: float = math.sqrt(2.0) - 1.0
    variant: ClassVar[str] = "rotation"

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidModelError("rotation amplitude h must be > 0")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidModelError("rotation angle alpha must lie in (0, 1)")

    @property
    def mean(self) -> float:
        return 0.0

    def _draw(self, rng, n, seed):
        w0 = math.fmod(seed * GOLDEN, 1.0)
        phase = np.mod(w0 + np.arange(n) * self.alpha, 1.0)
        return self.h * (2.0 * phase - 1.0)

    def to_dict(self):
        return {"variant": self.variant, "h": self.h, "alpha": self.alpha}


_VARIANTS: dict[str, type[FieldModel]] = {
    cls.variant: cls for cls in (Constant, Dichotomous, Uniform, FiniteTable, MarkovChain, Rotation)
}


def model_from_dict(data: dict[str, Any]) -> FieldModel:
    data = dict(data)
    try:
        cls = _VARIANTS[data.pop("variant")]
    except KeyError as exc:
        raise InvalidModelError(f"unknown or missing field variant: {exc}") from None
    if cls is MarkovChain and "stationary" not in data:
        return MarkovChain.from_transition(data["states"], data["transition"])
    try:
        return cls(**data)
    except TypeError as exc:
        raise InvalidModelError(str(exc)) from None


def model_from_json(text: str) -> FieldModel:
    return model_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Realizations and free energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldRealization:
    values: np.ndarray
    seed: int
    model: FieldModel

    @property
    def n(self) -> int:
        return len(self.values)


def _canonical(v):
    # 1 and 1.0 describe the same law and must seed the same stream
    if isinstance(v, dict):
        return {k: _canonical(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_canonical(x) for x in v]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    return v


def _model_key(model: FieldModel) -> int:
    text = json.dumps(_canonical(model.to_dict()), sort_keys=True)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def sample_fields(model: FieldModel, n: int, seed: int) -> FieldRealization:
    """Draw ``h_1..h_n``; the result depends only on ``(model, n, seed)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, _model_key(model)])
    values = np.asarray(model._draw(rng, n, seed), dtype=float)
    values.setflags(write=False)
    return FieldRealization(values=values, seed=seed, model=model)


def f_n(realization: FieldRealization | np.ndarray, x, beta: float):
    """Empirical free energy ``(1/n) sum_i log cosh(x + beta*h_i)``."""
    h = realization.values if isinstance(realization, FieldRealization) else np.asarray(realization)
    x = np.asarray(x, dtype=float)
    out = logcosh(np.add.outer(x, beta * h)).mean(axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FreeEnergy:
    """Limiting free energy ``f(x) = E[log cosh(x + beta*h)]`` of a field law."""

    model: FieldModel
    beta: float
    mean_field: float = field(init=False)

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        object.__setattr__(self, "mean_field", float(self.model.mean))

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 0):
        """``f^(order)(x)``; analytic for every order >= 1."""
        atoms = self.model.atoms()
        if atoms is not None:
            values, weights = atoms
            x = np.asarray(x, dtype=float)
            terms = logcosh_derivative(np.add.outer(x, self.beta * values), order)
            out = terms @ weights
            return float(out) if np.ndim(out) == 0 else out
        return self._uniform_derivative(x, order)

    def _uniform_derivative(self, x, order: int):
        width = self.beta * self.model.h
        if order == 0:
            if np.ndim(x) == 0:
                return _uniform_logcosh_mean(float(x), width)
            return np.vectorize(_uniform_logcosh_mean)(np.asarray(x, dtype=float), width)
        x = np.asarray(x, dtype=float)
        diff = logcosh_derivative(x + width, order - 1) - logcosh_derivative(x - width, order - 1)
        out = diff / (2.0 * width)
        return float(out) if out.ndim == 0 else out


def _softplus_part(t):
    return np.log1p(np.exp(-2.0 * np.abs(t)))


def _uniform_logcosh_mean(x: float, width: float) -> float:
    """Average of log cosh over ``[x - width, x + width]``.

    ``log cosh t = |t| - ln 2 + log1p(exp(-2|t|))``; the first two terms are
    integrated exactly, the bounded remainder by adaptive quadrature.
    """
    lo, hi = x - width, x + width
    if lo >= 0.0 or hi <= 0.0:
        mean_abs = abs(x)
    else:
        mean_abs = (hi * hi + lo * lo) / (4.0 * width)
    points = [0.0] if lo < 0.0 < hi else None
    rest, _ = quad(_softplus_part, lo, hi, epsabs=QUAD_EPSABS * 2.0 * width, epsrel=QUAD_EPSREL,
                   limit=200, points=points)
    return mean_abs - LN2 + rest / (2.0 * width)


def limit_f(fe: FreeEnergy, x):
    return fe.derivative(x, 0)


def limit_f_prime(fe: FreeEnergy, x):
    return fe.derivative(x, 1)


def limit_f_second(fe: FreeEnergy, x):
    return fe.derivative(x, 2)
