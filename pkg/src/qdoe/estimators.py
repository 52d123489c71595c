"""Weighted expectation estimators over design rows.

The estimator matches the design scheme: uniform schemes average, rq and
qlhs use the cell probabilities directly (their weights sum to one), and
q2lhs self-normalizes by the weight total.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .designs import Design
from .errors import ConfigError, EvaluationError

__all__ = ["EstimateResult", "ReplicateSummary", "estimate", "replicate"]


@dataclass(frozen=True)
class EstimateResult:
    value: float
    scheme: str
    n: int
    seed: int | None = None


def estimate(design: Design, f: Callable[[np.ndarray], float]) -> EstimateResult:
    """Estimate E[f] from a weighted design.

    ``f`` is evaluated on every row; a non-finite value aborts with the
    offending row index.
    """
    values = np.empty(design.n)
    for i, row in enumerate(design.points):
        values[i] = f(row)
        if not np.isfinite(values[i]):
            raise EvaluationError(
                f"evaluator returned non-finite value {values[i]} on row {i}: {row.tolist()}"
            )
    if design.scheme in ("rq", "qlhs"):
        value = float(design.weights @ values)
    elif design.scheme == "q2lhs":
        total = float(design.weights.sum())
        if total < 1e-300:
            raise EvaluationError("q2lhs weights are degenerate (sum below 1e-300)")
        value = float(design.weights @ values) / total
    else:
        value = float(values.mean())
    return EstimateResult(value=value, scheme=design.scheme, n=design.n, seed=design.seed)


@dataclass(frozen=True)
class ReplicateSummary:
    """Repetition statistics of one estimator configuration."""

    scheme: str
    n: int
    repetitions: int
    base_seed: int
    estimates: np.ndarray
    mean: float
    variance: float
    percentile_2_5: float
    percentile_97_5: float


def replicate(
    build_design: Callable[[np.random.Generator], Design],
    f: Callable[[np.ndarray], float],
    repetitions: int,
    base_seed: int,
    *,
    threads: int = 1,
) -> ReplicateSummary:
    """Repeat design construction and estimation with derived seeds.

    Repetition r runs on ``numpy.random.default_rng(base_seed + r)``, so
    results are reproducible and independent of execution order; with
    ``threads > 1`` repetitions fan out to a thread pool and are still
    assembled by index.
    """
    if repetitions < 2:
        raise ConfigError(f"repetitions must be >= 2, got {repetitions}")

    def one(r: int) -> tuple[float, str, int]:
        design = build_design(np.random.default_rng(base_seed + r))
        result = estimate(design, f)
        return result.value, result.scheme, result.n

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(repetitions)))
    else:
        outcomes = [one(r) for r in range(repetitions)]
    estimates = np.array([v for v, _, _ in outcomes])
    scheme, n = outcomes[0][1], outcomes[0][2]
    return ReplicateSummary(
        scheme=scheme,
        n=n,
        repetitions=repetitions,
        base_seed=base_seed,
        estimates=estimates,
        mean=float(estimates.mean()),
        variance=float(estimates.var(ddof=1)),
        percentile_2_5=float(np.percentile(estimates, 2.5)),
        percentile_97_5=float(np.percentile(estimates, 97.5)),
    )
