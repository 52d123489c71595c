"""Benchmark models: analytic toys, the flood-risk overflow model and Van
Genuchten soil water retention curves.

Each model is a pure evaluator over rows in a declared column order, plus
an input schema describing the marginals and the dependence structure of
each group of columns. The schema is what the experiment runner needs to
build pools, copulas and designs for any sampling scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import beta as beta_dist

from .distributions import Distribution, Gumbel, LogNormal, Normal, Triangular, Truncated, Uniform
from .errors import ConfigError, DimensionError, DomainError, ParameterError
from .quantizer import CandidatePool

__all__ = [
    "InputGroup",
    "ModelSpec",
    "toy_eval",
    "flood_eval",
    "flood_evaluate",
    "vg_theta",
    "vg_conductivity",
    "vg_pool",
    "vg_pool_from_sample",
    "build_model",
    "MODEL_NAMES",
    "VG_COLUMNS",
    "VG_LATENT_CORRELATION",
]


@dataclass(frozen=True)
class InputGroup:
    """A block of model inputs sampled together.

    ``kind`` is one of:

    - ``independent``: columns with analytic marginals, mutually independent;
    - ``copula``: columns coupled by a Gaussian copula over analytic marginals;
    - ``generator``: columns known only through a joint simulator;
    - ``pool``: columns known only through a fixed sample matrix.

    Groups other than ``independent`` are the quantizable (dependent)
    blocks of the quantization-based schemes.
    """

    name: str
    columns: tuple[str, ...]
    kind: str
    marginals: tuple[Distribution, ...] | None = None
    correlation: np.ndarray | None = None
    generator: Callable[[int, np.random.Generator], np.ndarray] | None = None
    pool_points: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("independent", "copula", "generator", "pool"):
            raise ConfigError(f"unknown input group kind {self.kind!r}")
        if self.kind in ("independent", "copula") and (
            self.marginals is None or len(self.marginals) != len(self.columns)
        ):
            raise ConfigError(f"group {self.name!r} needs one marginal per column")
        if self.kind == "copula" and self.correlation is None:
            raise ConfigError(f"copula group {self.name!r} needs a correlation matrix")
        if self.kind == "generator" and self.generator is None:
            raise ConfigError(f"generator group {self.name!r} needs a generator callable")
        if self.kind == "pool" and self.pool_points is None:
            raise ConfigError(f"pool group {self.name!r} needs a sample matrix")

    @property
    def dependent(self) -> bool:
        return self.kind != "independent"


@dataclass(frozen=True)
class ModelSpec:
    """Named evaluator with its input schema.

    ``evaluate`` is vectorized over an (m, d) matrix whose columns follow
    ``columns``; ``eval_row`` evaluates a single row.
    """

    name: str
    columns: tuple[str, ...]
    groups: tuple[InputGroup, ...]
    evaluate: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.columns)

    def eval_row(self, row) -> float:
        row = np.asarray(row, dtype=float).reshape(-1)
        if row.shape[0] != self.d:
            raise DimensionError(f"model {self.name} expects {self.d} inputs, got {row.shape[0]}")
        return float(self.evaluate(row[None, :])[0])


# ---------------------------------------------------------------------------
# analytic toy functions

def _toy_square(x):
    return x[:, 0] ** 2


def _toy_x1x2(x):
    return x[:, 0] * x[:, 1]


def _toy_x2y(x):
    return x[:, 0] ** 2 * x[:, 1]


def _toy_x1px2_sq_y(x):
    return (x[:, 0] + x[:, 1]) ** 2 * x[:, 2]


def _toy_xy2py2(x):
    return x[:, 0] * x[:, 1] ** 2 + x[:, 1] ** 2


_TOYS: dict[str, tuple[int, Callable[[np.ndarray], np.ndarray]]] = {
    "square": (1, _toy_square),
    "x1x2": (2, _toy_x1x2),
    "x2y": (2, _toy_x2y),
    "x1px2_sq_y": (3, _toy_x1px2_sq_y),
    "xy2py2": (2, _toy_xy2py2),
}


def toy_eval(name: str, row) -> float:
    """Evaluate one analytic toy function on a row."""
    if name not in _TOYS:
        raise ConfigError(f"unknown toy function {name!r}")
    arity, fn = _TOYS[name]
    row = np.asarray(row, dtype=float).reshape(-1)
    if row.shape[0] != arity:
        raise DimensionError(f"toy {name} expects {arity} inputs, got {row.shape[0]}")
    return float(fn(row[None, :])[0])


# ---------------------------------------------------------------------------
# flood overflow model

FLOOD_COLUMNS = ("Q", "Ks", "Zv", "Zm", "Hd", "Cb", "L", "B")

FLOOD_MARGINALS = {
    "Q": Truncated(Gumbel(1013.0, 558.0), 500.0, 3000.0),
    "Ks": Truncated(Normal(30.0, 8.0), 15.0, math.inf),
    "Zv": Triangular(49.0, 50.0, 51.0),
    "Zm": Triangular(54.0, 55.0, 56.0),
    "Hd": Uniform(7.0, 9.0),
    "Cb": Triangular(55.0, 55.5, 56.0),
    "L": Triangular(4990.0, 5000.0, 5010.0),
    "B": Triangular(295.0, 300.0, 305.0),
}

# pairwise dependence: rho(Q, Ks) = 0.5, rho(Zv, Zm) = rho(L, B) = 0.3
FLOOD_CHANNEL_COLUMNS = ("Q", "Ks", "Zv", "Zm", "L", "B")
_FLOOD_CHANNEL_CORR = np.eye(6)
_FLOOD_CHANNEL_CORR[0, 1] = _FLOOD_CHANNEL_CORR[1, 0] = 0.5
_FLOOD_CHANNEL_CORR[2, 3] = _FLOOD_CHANNEL_CORR[3, 2] = 0.3
_FLOOD_CHANNEL_CORR[4, 5] = _FLOOD_CHANNEL_CORR[5, 4] = 0.3


def flood_evaluate(rows) -> np.ndarray:
    """Overflow height S = Zv + H - Hd - Cb for rows ordered like
    ``FLOOD_COLUMNS``, with the water level H = (Q / (B Ks sqrt((Zm - Zv)/L)))^0.6."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != 8:
        raise DimensionError(f"flood model expects 8 columns, got {rows.shape[1]}")
    q, ks, zv, zm, hd, cb, length, width = rows.T
    bad = (q <= 0) | (ks <= 0) | (width <= 0) | (length <= 0) | (zm <= zv)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"flood model domain violation on row {i}: {rows[i].tolist()}")
    h = (q / (width * ks * np.sqrt((zm - zv) / length))) ** 0.6
    return zv + h - hd - cb


def flood_eval(row) -> float:
    """Scalar wrapper around :func:`flood_evaluate`."""
    return float(flood_evaluate(np.asarray(row, dtype=float)[None, :])[0])


# ---------------------------------------------------------------------------
# Van Genuchten water retention and conductivity

VG_COLUMNS = ("theta_r", "theta_s", "alpha", "n", "k_sat")


def _check_vg_params(theta_r, theta_s, alpha, n):
    theta_r = np.asarray(theta_r, dtype=float)
    theta_s = np.asarray(theta_s, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    n = np.asarray(n, dtype=float)
    if np.any(theta_r < 0) or np.any(theta_r >= theta_s):
        raise ParameterError("retention parameters require 0 <= theta_r < theta_s")
    if np.any(alpha <= 0):
        raise ParameterError("retention parameter alpha must be positive")
    if np.any(n <= 1):
        raise ParameterError("retention parameter n must exceed 1")
    return theta_r, theta_s, alpha, n


def vg_theta(h, theta_r, theta_s, alpha, n):
    """Volumetric water content theta(h) = theta_r +
    (theta_s - theta_r) / (1 + (alpha |h|)^n)^(1 - 1/n)."""
    theta_r, theta_s, alpha, n = _check_vg_params(theta_r, theta_s, alpha, n)
    h = np.abs(np.asarray(h, dtype=float))
    out = theta_r + (theta_s - theta_r) / (1.0 + (alpha * h) ** n) ** (1.0 - 1.0 / n)
    return float(out) if np.ndim(out) == 0 else out


def vg_conductivity(h, theta_r, theta_s, alpha, n, k_sat):
    """Unsaturated conductivity
    K_sat sqrt(S) (1 - (1 - S^(1/(1 - 1/n)))^(1 - 1/n))^2 with the effective
    saturation S(h) = (theta(h) - theta_r) / (theta_s - theta_r)."""
    if np.any(np.asarray(k_sat, dtype=float) <= 0):
        raise ParameterError("k_sat must be positive")
    theta = vg_theta(h, theta_r, theta_s, alpha, n)
    theta_r = np.asarray(theta_r, dtype=float)
    theta_s = np.asarray(theta_s, dtype=float)
    n = np.asarray(n, dtype=float)
    s = np.clip((theta - theta_r) / (theta_s - theta_r), 0.0, 1.0)
    m = 1.0 - 1.0 / n
    out = k_sat * np.sqrt(s) * (1.0 - (1.0 - s ** (1.0 / m)) ** m) ** 2
    return float(out) if np.ndim(out) == 0 else out


# Latent correlations of the synthetic retention-parameter generator,
# ordered like VG_COLUMNS; verified positive definite.
VG_LATENT_CORRELATION = np.array(
    [
        [1.00, 0.45, -0.30, -0.35, -0.40],
        [0.45, 1.00, -0.10, -0.15, -0.20],
        [-0.30, -0.10, 1.00, 0.35, 0.55],
        [-0.35, -0.15, 0.35, 1.00, 0.30],
        [-0.40, -0.20, 0.55, 0.30, 1.00],
    ]
)


def _vg_marginal_transform(u: np.ndarray) -> np.ndarray:
    """Map uniform columns to physically plausible retention parameters."""
    z = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    theta_r = 0.01 + 0.10 * beta_dist.ppf(u[:, 0], 2.0, 2.0)
    theta_s = 0.30 + 0.20 * beta_dist.ppf(u[:, 1], 2.0, 2.0)
    alpha = np.exp(math.log(2.0) + 0.6 * z[:, 2])
    n = 1.0 + np.exp(math.log(0.45) + 0.40 * z[:, 3])
    k_sat = np.exp(math.log(1e-5) + 1.0 * z[:, 4])
    return np.column_stack([theta_r, theta_s, alpha, n, k_sat])


def _vg_valid_mask(rows: np.ndarray) -> np.ndarray:
    theta_r, theta_s, alpha, n, k_sat = rows.T
    return (
        (theta_r >= 0)
        & (theta_r < theta_s)
        & (alpha > 0)
        & (n > 1)
        & (k_sat > 0)
        & np.all(np.isfinite(rows), axis=1)
    )


def vg_pool(m: int, rng: np.random.Generator) -> CandidatePool:
    """Synthetic generator of correlated, physically valid retention
    parameter sets (columns ``VG_COLUMNS``).

    A Gaussian latent vector with ``VG_LATENT_CORRELATION`` is pushed
    through bounded beta marginals for the water contents and lognormal
    marginals for alpha, n - 1 and k_sat; rows violating
    theta_r < theta_s are rejected and redrawn.
    """
    if m < 1:
        raise ParameterError("pool size must be >= 1")
    chol = np.linalg.cholesky(VG_LATENT_CORRELATION)
    rows = np.empty((0, 5))
    while rows.shape[0] < m:
        need = m - rows.shape[0]
        latent = rng.standard_normal((need, 5)) @ chol.T
        batch = _vg_marginal_transform(ndtr(latent))
        batch = batch[_vg_valid_mask(batch)]
        rows = np.vstack([rows, batch])
    return CandidatePool(rows[:m])


def vg_pool_from_sample(rows) -> tuple[CandidatePool, int]:
    """Wrap an external retention-parameter sample as a candidate pool.

    Physically invalid rows are dropped; returns the pool and the number
    of rejected rows.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != 5:
        raise DimensionError(f"retention parameter sample must have 5 columns, got {rows.shape[1]}")
    mask = _vg_valid_mask(rows)
    rejected = int(np.sum(~mask))
    if not np.any(mask):
        raise ParameterError("every row of the sample is physically invalid")
    return CandidatePool(rows[mask]), rejected


# ---------------------------------------------------------------------------
# model registry

def _singleton_copula_group(name: str, marginal: Distribution) -> InputGroup:
    return InputGroup(
        name=name,
        columns=(name,),
        kind="copula",
        marginals=(marginal,),
        correlation=np.array([[1.0]]),
    )


def _gauss_pair_group(name, columns, rho) -> InputGroup:
    return InputGroup(
        name=name,
        columns=tuple(columns),
        kind="copula",
        marginals=(Normal(0.0, 1.0), Normal(0.0, 1.0)),
        correlation=np.array([[1.0, rho], [rho, 1.0]]),
    )


def _model_square(params) -> ModelSpec:
    return ModelSpec(
        name="square",
        columns=("x",),
        groups=(_singleton_copula_group("x", Normal(0.0, 1.0)),),
        evaluate=_toy_square,
    )


def _model_x1x2(params) -> ModelSpec:
    return ModelSpec(
        name="x1x2",
        columns=("x1", "x2"),
        groups=(_gauss_pair_group("x", ("x1", "x2"), 0.8),),
        evaluate=_toy_x1x2,
    )


def _model_x2y(params) -> ModelSpec:
    return ModelSpec(
        name="x2y",
        columns=("x", "y"),
        groups=(
            _singleton_copula_group("x", Normal(0.0, 1.0)),
            InputGroup("y", ("y",), "independent", marginals=(Uniform(0.0, 1.0),)),
        ),
        evaluate=_toy_x2y,
    )


def _model_x1px2_sq_y(params) -> ModelSpec:
    return ModelSpec(
        name="x1px2_sq_y",
        columns=("x1", "x2", "y"),
        groups=(
            _gauss_pair_group("x", ("x1", "x2"), 0.8),
            InputGroup("y", ("y",), "independent", marginals=(Uniform(0.0, 1.0),)),
        ),
        evaluate=_toy_x1px2_sq_y,
    )


def _model_xy2py2(params) -> ModelSpec:
    return ModelSpec(
        name="xy2py2",
        columns=("x", "y"),
        groups=(
            _singleton_copula_group("x", LogNormal(0.0, 1.0)),
            _singleton_copula_group("y", Normal(0.0, 1.0)),
        ),
        evaluate=_toy_xy2py2,
    )


def _model_flood(params) -> ModelSpec:
    channel = InputGroup(
        name="channel",
        columns=FLOOD_CHANNEL_COLUMNS,
        kind="copula",
        marginals=tuple(FLOOD_MARGINALS[c] for c in FLOOD_CHANNEL_COLUMNS),
        correlation=_FLOOD_CHANNEL_CORR.copy(),
    )
    structures = InputGroup(
        name="structures",
        columns=("Hd", "Cb"),
        kind="independent",
        marginals=(FLOOD_MARGINALS["Hd"], FLOOD_MARGINALS["Cb"]),
    )
    return ModelSpec(
        name="flood",
        columns=FLOOD_COLUMNS,
        groups=(channel, structures),
        evaluate=flood_evaluate,
    )


def _vg_group(params) -> InputGroup:
    pool_csv = params.get("pool_csv")
    if pool_csv is not None:
        from .quantizer import load_pool

        pool, _ = load_pool(pool_csv)
        pool, rejected = vg_pool_from_sample(pool.points)
        if rejected:
            import logging

            logging.getLogger("qdoe").warning(
                "dropped %d physically invalid retention rows from %s", rejected, pool_csv
            )
        return InputGroup("vg", VG_COLUMNS, "pool", pool_points=pool.points)
    return InputGroup(
        "vg", VG_COLUMNS, "generator", generator=lambda m, rng: vg_pool(m, rng).points
    )


def _model_vg_theta(params) -> ModelSpec:
    h = float(params.get("h", 1.0))

    def evaluate(rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return vg_theta(h, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])

    return ModelSpec(
        name="vg_theta",
        columns=VG_COLUMNS,
        groups=(_vg_group(params),),
        evaluate=evaluate,
        params={"h": h},
    )


def _model_vg_conductivity(params) -> ModelSpec:
    h = float(params.get("h", 1e-3))

    def evaluate(rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return vg_conductivity(h, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4])

    return ModelSpec(
        name="vg_conductivity",
        columns=VG_COLUMNS,
        groups=(_vg_group(params),),
        evaluate=evaluate,
        params={"h": h},
    )


def _model_synthetic_screen(params) -> ModelSpec:
    """Screening benchmark: three active inputs, two inert ones and one
    influential dependent three-column group."""
    rho = float(params.get("rho", 0.5))
    corr = np.full((3, 3), rho)
    np.fill_diagonal(corr, 1.0)
    group = InputGroup(
        name="w",
        columns=("w1", "w2", "w3"),
        kind="copula",
        marginals=(Normal(0.0, 1.0),) * 3,
        correlation=corr,
    )
    singles = InputGroup(
        name="x",
        columns=("x1", "x2", "x3", "x4", "x5"),
        kind="independent",
        marginals=(Uniform(0.0, 1.0),) * 5,
    )

    def evaluate(rows):
        # amplitudes balance the variance shares so no effect is drowned out
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        x1, x2, x3 = rows[:, 0], rows[:, 1], rows[:, 2]
        w = rows[:, 5:8]
        return 3.0 * x1 + 4.0 * x2**2 + 1.5 * np.sin(2.0 * np.pi * x3) + 0.6 * w.sum(axis=1)

    return ModelSpec(
        name="synthetic_screen",
        columns=("x1", "x2", "x3", "x4", "x5", "w1", "w2", "w3"),
        groups=(singles, group),
        evaluate=evaluate,
        params={"rho": rho},
    )


_MODEL_BUILDERS = {
    "square": _model_square,
    "x1x2": _model_x1x2,
    "x2y": _model_x2y,
    "x1px2_sq_y": _model_x1px2_sq_y,
    "xy2py2": _model_xy2py2,
    "flood": _model_flood,
    "vg_theta": _model_vg_theta,
    "vg_conductivity": _model_vg_conductivity,
    "synthetic_screen": _model_synthetic_screen,
}

MODEL_NAMES = tuple(sorted(_MODEL_BUILDERS))


def build_model(name: str, params: dict | None = None) -> ModelSpec:
    """Instantiate a registered benchmark model."""
    if name not in _MODEL_BUILDERS:
        raise ConfigError(f"unknown model {name!r}; available: {', '.join(MODEL_NAMES)}")
    return _MODEL_BUILDERS[name](params or {})
