"""Kernel dependence measures and permutation-based independence tests.

The dependence measure is the squared RKHS distance between the joint
embedding of (X, Y) and the product of the marginal embeddings, estimated
either by the centered Gram-matrix trace (uniform-weight samples) or by a
weighted three-term sum when the sample comes from a quantization design
with cell-probability weights. Independence is tested by permuting the
outputs against fixed inputs and comparing the observed statistic to the
permutation null.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .designs import Design
from .errors import ConfigError, DegeneracyError, DimensionError, ParameterError

__all__ = [
    "KernelSpec",
    "HsicResult",
    "ScreenResult",
    "gram",
    "hsic_v",
    "hsic_rq",
    "independence_test",
    "screen",
]


@dataclass(frozen=True)
class KernelSpec:
    """RBF kernel exp(-||x - x'||^2 / (2 theta^2)) with a bandwidth rule.

    ``scalar_rbf`` applies to single columns; ``group_rbf`` to multivariate
    blocks, optionally standardizing each column by the evaluation sample's
    mean and standard deviation first (recommended when column scales
    differ by orders of magnitude). Bandwidth rules:

    - ``fixed``: use ``bandwidth`` as given;
    - ``std``: the sample standard deviation (after standardization this
      is 1 for a group kernel);
    - ``median``: sqrt of half the median positive squared distance.
    """

    kind: str = "scalar_rbf"
    bandwidth: float | None = None
    bandwidth_rule: str = "std"
    standardize: bool = False

    def __post_init__(self):
        if self.kind not in ("scalar_rbf", "group_rbf"):
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.bandwidth_rule not in ("fixed", "std", "median"):
            raise ParameterError(f"unknown bandwidth rule {self.bandwidth_rule!r}")
        if self.bandwidth_rule == "fixed" and (self.bandwidth is None or self.bandwidth <= 0):
            raise ParameterError("fixed bandwidth rule requires bandwidth > 0")
        if self.standardize and self.kind != "group_rbf":
            raise ParameterError("standardization applies to group kernels only")

    @staticmethod
    def scalar(bandwidth: float | None = None, rule: str = "std") -> "KernelSpec":
        if bandwidth is not None:
            return KernelSpec("scalar_rbf", bandwidth, "fixed")
        return KernelSpec("scalar_rbf", None, rule)

    @staticmethod
    def group(
        standardize: bool = True, bandwidth: float | None = None, rule: str = "std"
    ) -> "KernelSpec":
        if bandwidth is not None:
            return KernelSpec("group_rbf", bandwidth, "fixed", standardize)
        return KernelSpec("group_rbf", None, rule, standardize)


@dataclass(frozen=True)
class HsicResult:
    """Dependence measure with the test statistic n * hsic and, when a
    permutation test ran, the tie-inclusive p-value and decision."""

    hsic_value: float
    statistic: float
    n: int
    p_value: float | None = None
    permutations: int = 0
    alpha: float | None = None
    reject: bool | None = None


@dataclass(frozen=True)
class ScreenResult:
    name: str
    hsic_value: float
    p_value: float
    reject: bool

    @property
    def decision(self) -> str:
        return "dependent" if self.reject else "independent"


def _as_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 2:
        raise DimensionError("kernel sample must have at least two rows")
    return x


def _resolve_bandwidth(x: np.ndarray, kernel: KernelSpec) -> float:
    if kernel.bandwidth_rule == "fixed":
        return float(kernel.bandwidth)
    if kernel.bandwidth_rule == "std":
        theta = float(np.sqrt(np.mean(np.var(x, axis=0))))
    else:
        sq = pdist(x, "sqeuclidean")
        positive = sq[sq > 0]
        if positive.size == 0:
            raise DegeneracyError("all sample rows coincide; median bandwidth undefined")
        theta = float(np.sqrt(np.median(positive) / 2.0))
    if not theta > 0.0:
        raise DegeneracyError("sample is constant; kernel bandwidth degenerates to zero")
    return theta


def gram(sample, kernel: KernelSpec) -> np.ndarray:
    """Kernel matrix of a sample; symmetric with exact unit diagonal."""
    x = _as_sample(sample)
    if kernel.kind == "scalar_rbf" and x.shape[1] != 1:
        raise DimensionError(
            f"scalar kernel expects a single column, got {x.shape[1]}; use a group kernel"
        )
    if kernel.standardize:
        std = x.std(axis=0)
        if np.any(std == 0.0):
            raise DegeneracyError("cannot standardize a constant column")
        x = (x - x.mean(axis=0)) / std
    theta = _resolve_bandwidth(x, kernel)
    sq = squareform(pdist(x, "sqeuclidean"))
    k = np.exp(-sq / (2.0 * theta * theta))
    np.fill_diagonal(k, 1.0)
    return k


def _center(k: np.ndarray) -> np.ndarray:
    """H K H with H = I - (1/n) * ones, computed without forming H."""
    row = k.mean(axis=0)
    return k - row[None, :] - row[:, None] + row.mean()


def _hsic_from_grams(kx: np.ndarray, ky: np.ndarray) -> float:
    n = kx.shape[0]
    return float(np.sum(_center(kx) * ky)) / (n * n)


def _weighted_terms(kx: np.ndarray, w: np.ndarray):
    """Precomputations reused across permutations of the weighted statistic."""
    kxw = kx @ w
    return kx * np.outer(w, w), float(w @ kxw), w * kxw


def _hsic_weighted_from_grams(kx: np.ndarray, ky: np.ndarray, w: np.ndarray) -> float:
    kx_ww, kx_quad, w_kxw = _weighted_terms(kx, w)
    kyw = ky @ w
    t1 = float(np.sum(kx_ww * ky))
    t2 = kx_quad * float(w @ kyw)
    t3 = float(np.sum(w_kxw * kyw))
    return t1 + t2 - 2.0 * t3


def hsic_v(x_sample, y_sample, kx: KernelSpec, ky: KernelSpec) -> HsicResult:
    """V-statistic estimate (1/n^2) tr(K_x H K_y H) from one joint sample."""
    x = _as_sample(x_sample)
    y = _as_sample(y_sample)
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"row counts differ: {x.shape[0]} vs {y.shape[0]}")
    value = _hsic_from_grams(gram(x, kx), gram(y, ky))
    return HsicResult(hsic_value=value, statistic=x.shape[0] * value, n=x.shape[0])


def hsic_rq(design: Design, outputs, kx: KernelSpec, ky: KernelSpec) -> HsicResult:
    """Weighted dependence estimate for a quantization design.

    With cell probabilities p the three expectation terms become double
    sums weighted by p_i p_j; uniform weights reduce this exactly to the
    V-statistic.
    """
    w = design.weights
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ParameterError("design weights must sum to 1 for the weighted estimate")
    y = _as_sample(outputs)
    if y.shape[0] != design.n:
        raise DimensionError("outputs are not aligned with the design rows")
    value = _hsic_weighted_from_grams(gram(design.points, kx), gram(y, ky), w)
    return HsicResult(hsic_value=value, statistic=design.n * value, n=design.n)


def _permutation_stats(
    ky: np.ndarray, perms: np.ndarray, kx: np.ndarray, w: np.ndarray | None
) -> np.ndarray:
    """Statistic for each permutation of the outputs, inputs held fixed.

    Permuting the outputs only permutes rows and columns of their Gram
    matrix, so the bandwidth and both Gram matrices are computed once.
    """
    n = ky.shape[0]
    stats = np.empty(perms.shape[0])
    if w is None:
        kxc = _center(kx)
        for b, p in enumerate(perms):
            ky_p = np.take(np.take(ky, p, axis=0), p, axis=1)
            stats[b] = np.vdot(kxc, ky_p) / (n * n)
    else:
        kx_ww, kx_quad, w_kxw = _weighted_terms(kx, w)
        for b, p in enumerate(perms):
            ky_p = np.take(np.take(ky, p, axis=0), p, axis=1)
            kyw = ky_p @ w
            stats[b] = np.vdot(kx_ww, ky_p) + kx_quad * (kyw @ w) - 2.0 * (w_kxw @ kyw)
    return stats


def independence_test(
    inputs,
    outputs,
    kx: KernelSpec,
    ky: KernelSpec,
    *,
    permutations: int,
    alpha: float = 0.05,
    rng: np.random.Generator,
    weights=None,
) -> HsicResult:
    """Permutation test of independence between inputs and outputs.

    The observed statistic is n times the dependence measure; the null
    sample recomputes it with the outputs permuted uniformly at random,
    keeping any weights attached to the input rows. The p-value is the
    tie-inclusive (1 + #{null >= observed}) / (B + 1), and the null
    hypothesis of independence is rejected when it falls below ``alpha``.
    """
    if permutations < 100:
        raise ConfigError(f"permutations must be >= 100, got {permutations}")
    x = _as_sample(inputs)
    y = _as_sample(outputs)
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"row counts differ: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if weights is not None:
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if weights.shape[0] != n:
            raise DimensionError("weights are not aligned with the input rows")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ParameterError("weights must sum to 1 for the weighted test")
    kx_m = gram(x, kx)
    ky_m = gram(y, ky)
    # the observed statistic goes through the identity permutation so ties
    # with the null sample are exact (identical arithmetic)
    observed = float(_permutation_stats(ky_m, np.arange(n)[None, :], kx_m, weights)[0])
    perms = np.vstack([rng.permutation(n) for _ in range(permutations)])
    null = _permutation_stats(ky_m, perms, kx_m, weights)
    p_value = (1.0 + int(np.sum(null >= observed))) / (permutations + 1.0)
    return HsicResult(
        hsic_value=observed,
        statistic=n * observed,
        n=n,
        p_value=p_value,
        permutations=permutations,
        alpha=alpha,
        reject=bool(p_value < alpha),
    )


def screen(
    design: Design,
    outputs,
    groups,
    *,
    group_kernels=None,
    output_kernel: KernelSpec | None = None,
    permutations: int,
    alpha: float = 0.05,
    rng: np.random.Generator,
) -> list[ScreenResult]:
    """Independence test of each input group against the shared output.

    ``groups`` is a sequence of (name, column-index list) pairs; kernels
    default to a scalar RBF for single columns and a standardized group
    RBF for blocks. Design weights stay attached to the input rows
    (normalized to sum to one); for uniform-weight designs this is exactly
    the unweighted test.
    """
    groups = list(groups)
    if group_kernels is None:
        group_kernels = [
            KernelSpec.scalar() if len(cols) == 1 else KernelSpec.group()
            for _, cols in groups
        ]
    if output_kernel is None:
        output_kernel = KernelSpec.scalar()
    if len(group_kernels) != len(groups):
        raise DimensionError("one kernel per group is required")
    y = _as_sample(outputs)
    w = design.weights / float(design.weights.sum())
    results = []
    for (name, cols), kernel in zip(groups, group_kernels):
        cols = list(cols)
        if not cols:
            raise ParameterError(f"group {name!r} selects no columns")
        if min(cols) < 0 or max(cols) >= design.d:
            raise DimensionError(f"group {name!r} references columns outside the design")
        outcome = independence_test(
            design.points[:, cols],
            y,
            kernel,
            output_kernel,
            permutations=permutations,
            alpha=alpha,
            rng=rng,
            weights=w,
        )
        results.append(
            ScreenResult(
                name=name,
                hsic_value=outcome.hsic_value,
                p_value=outcome.p_value,
                reject=outcome.reject,
            )
        )
    return results
