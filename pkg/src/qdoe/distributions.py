"""Univariate distributions with exact cdf, quantile and seeded sampling.

Every distribution exposes ``cdf``, ``quantile`` (generalized inverse cdf)
and ``sample``; all three accept scalars or numpy arrays. Sampling is pure
inverse-transform on a caller-supplied ``numpy.random.Generator``, so two
generators with the same seed produce identical draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigError, DomainError, ParameterError

__all__ = [
    "Distribution",
    "Uniform",
    "Normal",
    "LogNormal",
    "Triangular",
    "Gumbel",
    "Truncated",
    "distribution_from_config",
]


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)) or np.any(np.isnan(u)):
        raise DomainError("quantile argument must lie in [0, 1]")
    return u


def _maybe_scalar(x, template):
    """Return a python float when the caller passed a scalar."""
    if np.ndim(template) == 0:
        return float(x)
    return x


@dataclass(frozen=True)
class Distribution:
    """Base class; concrete laws implement ``cdf``, ``quantile``, ``support``."""

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, u):
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        """Draw by applying the quantile function to uniform variates."""
        return self.quantile(rng.random(size))


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterError(f"uniform requires a < b, got [{self.a}, {self.b}]")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _maybe_scalar(np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0), x)

    def quantile(self, u):
        u = _check_u(u)
        return _maybe_scalar(self.a + u * (self.b - self.a), u)

    def support(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Normal(Distribution):
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"normal requires sigma > 0, got {self.sigma}")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _maybe_scalar(ndtr((x - self.mu) / self.sigma), x)

    def quantile(self, u):
        u = _check_u(u)
        return _maybe_scalar(self.mu + self.sigma * ndtri(u), u)

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class LogNormal(Distribution):
    """log X ~ Normal(mu, sigma); support (0, inf)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"lognormal requires sigma > 0, got {self.sigma}")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > 0, ndtr((np.log(np.maximum(x, 1e-300)) - self.mu) / self.sigma), 0.0)
        return _maybe_scalar(out, x)

    def quantile(self, u):
        u = _check_u(u)
        return _maybe_scalar(np.exp(self.mu + self.sigma * ndtri(u)), u)

    def support(self):
        return (0.0, math.inf)


@dataclass(frozen=True)
class Triangular(Distribution):
    """Triangular law on [a, b] with mode c, a <= c <= b."""

    a: float
    c: float
    b: float

    def __post_init__(self):
        if not (self.a <= self.c <= self.b and self.a < self.b):
            raise ParameterError(
                f"triangular requires a <= c <= b and a < b, got ({self.a}, {self.c}, {self.b})"
            )

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a, c, b = self.a, self.c, self.b
        span = b - a
        with np.errstate(divide="ignore", invalid="ignore"):
            left = np.where(c > a, (x - a) ** 2 / (span * (c - a)), 0.0)
            right = np.where(b > c, 1.0 - (b - x) ** 2 / (span * (b - c)), 1.0)
        out = np.select([x <= a, x < c, x < b], [0.0, left, right], default=1.0)
        return _maybe_scalar(out, x)

    def quantile(self, u):
        u = _check_u(u)
        a, c, b = self.a, self.c, self.b
        span = b - a
        fc = (c - a) / span
        lower = a + np.sqrt(np.maximum(u * span * (c - a), 0.0))
        upper = b - np.sqrt(np.maximum((1.0 - u) * span * (b - c), 0.0))
        return _maybe_scalar(np.where(u < fc, lower, upper), u)

    def support(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Gumbel(Distribution):
    """Gumbel maximum law, cdf exp(-exp(-(x - mu)/beta)).

    ``mu`` is the location and ``beta`` the scale (not a standard
    deviation).
    """

    mu: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError(f"gumbel requires beta > 0, got {self.beta}")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            out = np.exp(-np.exp(-(x - self.mu) / self.beta))
        return _maybe_scalar(out, x)

    def quantile(self, u):
        u = _check_u(u)
        with np.errstate(divide="ignore"):
            out = self.mu - self.beta * np.log(-np.log(u))
        return _maybe_scalar(out, u)

    def support(self):
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class Truncated(Distribution):
    """Restriction of ``inner`` to [lo, hi] (either bound may be infinite).

    The cdf is (F(x) - F(lo)) / (F(hi) - F(lo)) clipped to [0, 1]; the
    quantile composes the inner quantile with the rescaled argument, which
    is exact because every supported inner law has a closed-form quantile.
    """

    inner: Distribution
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"truncation requires lo < hi, got [{self.lo}, {self.hi}]")
        if self._mass() <= 0.0:
            raise ParameterError(
                f"inner law has no mass on the truncation window [{self.lo}, {self.hi}]"
            )

    def _f_lo(self) -> float:
        return float(self.inner.cdf(self.lo)) if math.isfinite(self.lo) else 0.0

    def _f_hi(self) -> float:
        return float(self.inner.cdf(self.hi)) if math.isfinite(self.hi) else 1.0

    def _mass(self) -> float:
        return self._f_hi() - self._f_lo()

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip((self.inner.cdf(x) - self._f_lo()) / self._mass(), 0.0, 1.0)
        return _maybe_scalar(out, x)

    def quantile(self, u):
        u = _check_u(u)
        return _maybe_scalar(self.inner.quantile(self._f_lo() + u * self._mass()), u)

    def support(self):
        lo_in, hi_in = self.inner.support()
        return (max(self.lo, lo_in), min(self.hi, hi_in))


_SIMPLE_TYPES = {
    "uniform": (Uniform, ("a", "b")),
    "normal": (Normal, ("mu", "sigma")),
    "lognormal": (LogNormal, ("mu", "sigma")),
    "triangular": (Triangular, ("a", "c", "b")),
    "gumbel": (Gumbel, ("mu", "beta")),
}


def distribution_from_config(spec: dict) -> Distribution:
    """Build a distribution from a config mapping like
    ``{"type": "triangular", "a": 49, "c": 50, "b": 51}``.

    Truncation wraps an inner declaration:
    ``{"type": "truncated", "inner": {...}, "lo": 500, "hi": 3000}``;
    omitting ``lo``/``hi`` (or passing null) leaves that side unbounded.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"distribution must be a mapping with a 'type' key, got {spec!r}")
    kind = spec["type"]
    if kind == "truncated":
        allowed = {"type", "inner", "lo", "hi"}
        unknown = set(spec) - allowed
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} for truncated distribution")
        if "inner" not in spec:
            raise ConfigError("truncated distribution requires an 'inner' declaration")
        inner = distribution_from_config(spec["inner"])
        lo = spec.get("lo")
        hi = spec.get("hi")
        return Truncated(
            inner,
            -math.inf if lo is None else float(lo),
            math.inf if hi is None else float(hi),
        )
    if kind not in _SIMPLE_TYPES:
        raise ConfigError(f"unknown distribution type {kind!r}")
    cls, fields = _SIMPLE_TYPES[kind]
    unknown = set(spec) - {"type", *fields}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} for {kind} distribution")
    missing = [f for f in fields if f not in spec]
    if missing:
        raise ConfigError(f"{kind} distribution missing parameters {missing}")
    return cls(*(float(spec[f]) for f in fields))
