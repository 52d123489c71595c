"""Construction of the sampling schemes, each yielding a weighted design.

Five stratified schemes plus plain Monte Carlo:

==========  ============================================================
``lhs``     one point per equal-probability interval in every coordinate
``lhsd``    LHS pushed through a Gaussian copula's conditional inverses
``rq``      one point per Voronoi cell of a quantized dependent group,
            weighted by the cell probabilities
``qlhs``    an rq block for the dependent group joined to an LHS block
            for the independent inputs through a random permutation
``q2lhs``   two rq blocks joined through a random permutation, weighted
            by the product of the matched cell probabilities
``mc``      independent rows with uniform weights
==========  ============================================================

Rows of uniform-weight schemes carry weight 1/n; rq and qlhs rows carry
the cell probabilities (summing to one); q2lhs weights are products that
the estimator normalizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copula import GaussianCopula, conditional_inverse
from .errors import ConfigError, DimensionError, ParameterError
from .quantizer import CandidatePool, Quantizer, sample_cell

__all__ = [
    "Design",
    "UNIFORM_SCHEMES",
    "WEIGHTED_SCHEMES",
    "lhs",
    "lhs_with_marginals",
    "lhsd",
    "rq_design",
    "qlhs_design",
    "q2lhs_design",
    "mc_design",
]

UNIFORM_SCHEMES = ("mc", "lhs", "lhsd")
WEIGHTED_SCHEMES = ("rq", "qlhs", "q2lhs")


@dataclass(frozen=True)
class Design:
    """An (n, d) sample matrix with per-row weights and column labels."""

    points: np.ndarray
    weights: np.ndarray
    scheme: str
    column_roles: tuple[str, ...]
    seed: int | None = None

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if points.shape[0] != weights.shape[0]:
            raise DimensionError("weights length does not match the number of rows")
        if len(self.column_roles) != points.shape[1]:
            raise DimensionError("column_roles length does not match the number of columns")
        if np.any(weights < 0.0):
            raise ParameterError("design weights must be nonnegative")
        if self.scheme in UNIFORM_SCHEMES:
            if not np.all(weights == weights[0]) or abs(weights[0] * len(weights) - 1.0) > 1e-12:
                raise ParameterError(f"{self.scheme} designs require uniform weights 1/n")
        elif self.scheme in ("rq", "qlhs"):
            if abs(weights.sum() - 1.0) > 1e-12:
                raise ParameterError(f"{self.scheme} weights must sum to 1")
        elif self.scheme != "q2lhs":
            raise ParameterError(f"unknown scheme tag {self.scheme!r}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "column_roles", tuple(self.column_roles))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path, header_comments=()) -> None:
        """Write the design with a trailing ``weight`` column (round-trip floats)."""
        lines = [f"# {c}" for c in header_comments]
        lines.append(",".join(self.column_roles) + ",weight")
        for row, w in zip(self.points, self.weights):
            lines.append(",".join(repr(float(v)) for v in row) + f",{float(w)!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _roles(column_roles, d: int, prefix: str = "x") -> tuple[str, ...]:
    if column_roles is None:
        return tuple(f"{prefix}{j}" for j in range(d))
    roles = tuple(column_roles)
    if len(roles) != d:
        raise DimensionError(f"expected {d} column roles, got {len(roles)}")
    return roles


def lhs(
    n: int,
    d: int,
    rng: np.random.Generator,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """Latin hypercube on the unit cube.

    Column j places exactly one point inside each interval
    [(k-1)/n, k/n) by combining an independent uniform permutation with a
    uniform jitter: (pi_j(i) - 1)/n + U_ij/n.
    """
    if n < 1 or d < 1:
        raise ConfigError(f"lhs requires n >= 1 and d >= 1, got n={n}, d={d}")
    jitter = rng.random((n, d))
    points = np.empty((n, d))
    for j in range(d):
        points[:, j] = (rng.permutation(n) + jitter[:, j]) / n
    return Design(points, np.full(n, 1.0 / n), "lhs", _roles(column_roles, d), seed)


def lhs_with_marginals(
    n: int,
    marginals,
    rng: np.random.Generator,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """LHS transported to arbitrary marginals by the quantile transform."""
    marginals = list(marginals)
    base = lhs(n, len(marginals), rng)
    points = np.column_stack(
        [marg.quantile(base.points[:, j]) for j, marg in enumerate(marginals)]
    )
    return Design(points, base.weights, "lhs", _roles(column_roles, len(marginals)), seed)


def lhsd(
    n: int,
    copula: GaussianCopula,
    marginals,
    rng: np.random.Generator,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """LHS for dependent inputs through a Gaussian copula.

    A uniform LHS is rebuilt coordinate by coordinate with the inverse
    conditional copulas, then each column goes through its marginal
    quantile. Marginals may be analytic laws or empirical ones: anything
    exposing ``quantile``. The first coordinate keeps exact LHS
    stratification because its conditional inverse is the identity.
    """
    marginals = list(marginals)
    if copula.d != len(marginals):
        raise DimensionError(
            f"copula dimension {copula.d} does not match {len(marginals)} marginals"
        )
    base = lhs(n, copula.d, rng)
    dependent = conditional_inverse(copula, base.points)
    points = np.column_stack(
        [marg.quantile(dependent[:, j]) for j, marg in enumerate(marginals)]
    )
    return Design(points, base.weights, "lhsd", _roles(column_roles, copula.d), seed)


def rq_design(
    quantizer: Quantizer,
    pool: CandidatePool,
    rng: np.random.Generator,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """Random quantization design: one conditional draw per Voronoi cell.

    Row i is sampled from the pool restricted to cell i and carries that
    cell's probability as its weight, so every cell contributes exactly
    one row and the weights sum to one.
    """
    points = np.vstack(
        [sample_cell(quantizer, pool, i, rng) for i in range(quantizer.n_cells)]
    )
    return Design(
        points,
        quantizer.probabilities.copy(),
        "rq",
        _roles(column_roles, quantizer.d),
        seed,
    )


def qlhs_design(
    quantizer: Quantizer,
    pool: CandidatePool,
    indep_marginals,
    rng: np.random.Generator,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """Quantization-based LHS: rq block joined to an LHS block.

    The dependent group is stratified by random quantization and the
    independent inputs by an LHS with their marginals; a uniform random
    permutation matches LHS rows to cells. Weights are the cell
    probabilities of the dependent block (the permutation only reorders
    the independent rows). Dependent columns come first.
    """
    indep_marginals = list(indep_marginals)
    if not indep_marginals:
        raise ConfigError("qlhs requires at least one independent marginal")
    dep = rq_design(quantizer, pool, rng)
    indep = lhs_with_marginals(dep.n, indep_marginals, rng)
    pi = rng.permutation(dep.n)
    points = np.hstack([dep.points, indep.points[pi]])
    d = quantizer.d + len(indep_marginals)
    return Design(points, dep.weights, "qlhs", _roles(column_roles, d), seed)


def q2lhs_design(
    quantizer_x: Quantizer,
    pool_x: CandidatePool,
    quantizer_y: Quantizer,
    pool_y: CandidatePool,
    rng: np.random.Generator,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """Double-quantization design for two independent dependent groups.

    Both groups are stratified by random quantization with the same cell
    count; a uniform random permutation matches x-cells to y-cells, and
    row i carries weight p_i * q_pi(i). The weights need not sum to one;
    the estimator normalizes by their total.
    """
    if quantizer_x.n_cells != quantizer_y.n_cells:
        raise ConfigError(
            f"q2lhs requires matching cell counts, got {quantizer_x.n_cells} "
            f"and {quantizer_y.n_cells}"
        )
    dep_x = rq_design(quantizer_x, pool_x, rng)
    dep_y = rq_design(quantizer_y, pool_y, rng)
    pi = rng.permutation(dep_x.n)
    points = np.hstack([dep_x.points, dep_y.points[pi]])
    weights = quantizer_x.probabilities * quantizer_y.probabilities[pi]
    d = quantizer_x.d + quantizer_y.d
    return Design(points, weights, "q2lhs", _roles(column_roles, d), seed)


def mc_design(
    points,
    *,
    column_roles=None,
    seed: int | None = None,
) -> Design:
    """Wrap independently sampled rows as a uniform-weight Monte Carlo design."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    return Design(points, np.full(n, 1.0 / n), "mc", _roles(column_roles, d), seed)
