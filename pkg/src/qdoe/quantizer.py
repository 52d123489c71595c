"""Voronoi vector quantization of an empirical candidate pool.

The target distribution is represented by a large sample (the candidate
pool). Lloyd's fixed-point iteration (k-means) produces centroids, and the
Voronoi cell of each centroid becomes one stratum: its probability is the
fraction of pool points it captures, and conditional sampling inside a cell
draws uniformly among the captured pool points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DimensionError, ParameterError

__all__ = [
    "CandidatePool",
    "Quantizer",
    "lloyd",
    "assign",
    "distortion",
    "sample_cell",
    "save_quantizer",
    "load_quantizer",
    "save_pool",
    "load_pool",
]


@dataclass(frozen=True)
class CandidatePool:
    """Empirical stand-in for the input distribution: an (M, d) matrix."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError("candidate pool must be a non-empty 2-d matrix")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("candidate pool contains non-finite entries")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Quantizer:
    """Centroids, empirical cell probabilities and the pool assignment.

    Invariants: probabilities are cell counts divided by the pool size and
    sum to one; every pool point is assigned to its nearest centroid (ties
    to the lowest index); every cell is non-empty.
    """

    centroids: np.ndarray
    probabilities: np.ndarray
    pool_assignment: np.ndarray
    distortion: float
    distortion_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_cells(self) -> int:
        return self.centroids.shape[0]

    @property
    def d(self) -> int:
        return self.centroids.shape[1]

    @property
    def pool_size(self) -> int:
        return self.pool_assignment.shape[0]

    @cached_property
    def _cells(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pool indices grouped by cell: (sorted index array, offsets, counts)."""
        order = np.argsort(self.pool_assignment, kind="stable")
        counts = np.bincount(self.pool_assignment, minlength=self.n_cells)
        offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
        return order, offsets, counts

    def cell_members(self, cell: int) -> np.ndarray:
        """Indices of pool points assigned to ``cell``."""
        order, offsets, counts = self._cells
        return order[offsets[cell] : offsets[cell] + counts[cell]]


def _nearest(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels and squared distances; argmin ties break low."""
    sq = cdist(points, centroids, "sqeuclidean")
    labels = np.argmin(sq, axis=1)
    return labels, sq[np.arange(points.shape[0]), labels]


def _cell_means(points: np.ndarray, labels: np.ndarray, n_cells: int) -> np.ndarray:
    sums = np.zeros((n_cells, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=n_cells).astype(float)
    return sums / counts[:, None]


def _kmeanspp(points: np.ndarray, n_cells: int, rng: np.random.Generator) -> np.ndarray:
    """Distance-weighted seeding; never selects a duplicate of a chosen seed."""
    m = points.shape[0]
    chosen = [int(rng.integers(m))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, n_cells):
        cumulative = np.cumsum(d2)
        if cumulative[-1] <= 0.0:
            raise ParameterError("fewer distinct pool points than requested cells")
        idx = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
        chosen.append(min(idx, m - 1))
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _repair_empty_cells(points, centroids, labels, sq):
    """Reseed empty cells at the pool point farthest from its own centroid.

    Donor points come only from cells holding at least two points so a
    repair cannot empty another cell. Returns updated (centroids, labels,
    sq) once every cell is populated.
    """
    n_cells = centroids.shape[0]
    for _ in range(n_cells):
        counts = np.bincount(labels, minlength=n_cells)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return centroids, labels, sq
        donors = counts[labels] >= 2
        cand = np.where(donors, sq, -np.inf).argmax()
        centroids[empty[0]] = points[cand]
        labels, sq = _nearest(points, centroids)
    counts = np.bincount(labels, minlength=n_cells)
    if np.any(counts == 0):  # only reachable through adversarial exact ties
        raise RuntimeError("empty-cell repair failed to populate every cell")
    return centroids, labels, sq


def _lloyd_once(points, n_cells, rng, max_iter, rel_tol):
    centroids = _kmeanspp(points, n_cells, rng)
    labels, sq = _nearest(points, centroids)
    centroids, labels, sq = _repair_empty_cells(points, centroids, labels, sq)
    dist = float(sq.mean())
    history = [dist]
    for _ in range(max_iter):
        centroids = _cell_means(points, labels, n_cells)
        new_labels, sq = _nearest(points, centroids)
        centroids, new_labels, sq = _repair_empty_cells(points, centroids, new_labels, sq)
        new_dist = float(sq.mean())
        history.append(new_dist)
        fixed_point = np.array_equal(new_labels, labels)
        improvement = dist - new_dist
        labels, dist = new_labels, new_dist
        if fixed_point:
            break
        if rel_tol > 0.0 and history[-2] > 0.0 and improvement <= rel_tol * history[-2]:
            break
    return centroids, labels, dist, history


def lloyd(
    pool: CandidatePool,
    n_cells: int,
    rng: np.random.Generator,
    max_iter: int = 200,
    rel_tol: float = 1e-8,
    restarts: int = 5,
) -> Quantizer:
    """Quantize ``pool`` into ``n_cells`` Voronoi cells by Lloyd iteration.

    Parameters
    ----------
    pool : CandidatePool
        Empirical sample of the target distribution; its size should be
        much larger than ``n_cells``.
    n_cells : int
        Number of centroids, at most the number of distinct pool points.
    rng : numpy.random.Generator
        Drives the k-means++ style seeding of every restart.
    max_iter : int
        Iteration cap per restart.
    rel_tol : float
        Stop when the relative distortion improvement falls below this;
        pass 0 to iterate to an exact assignment fixed point.
    restarts : int
        Independent seedings; the lowest-distortion run wins.

    Returns
    -------
    Quantizer
        Centroids with empirical cell probabilities and the pool
        assignment; the per-iteration distortion history of the winning
        restart is attached and is non-increasing.
    """
    if n_cells < 1:
        raise ConfigError(f"n_cells must be >= 1, got {n_cells}")
    if restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")
    points = pool.points
    if n_cells > pool.m or (
        n_cells > 1 and n_cells > np.unique(points, axis=0).shape[0]
    ):
        raise ConfigError(
            f"requested {n_cells} cells but the pool holds fewer distinct points"
        )
    best = None
    for _ in range(restarts):
        candidate = _lloyd_once(points, n_cells, rng, max_iter, rel_tol)
        if best is None or candidate[2] < best[2]:
            best = candidate
    centroids, labels, dist, history = best
    probabilities = np.bincount(labels, minlength=n_cells) / pool.m
    return Quantizer(
        centroids=centroids,
        probabilities=probabilities,
        pool_assignment=labels.astype(np.int64),
        distortion=dist,
        distortion_history=tuple(history),
    )


def assign(point, quantizer: Quantizer) -> int:
    """Index of the Voronoi cell containing ``point`` (ties to lowest index)."""
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape[0] != quantizer.d:
        raise DimensionError(
            f"point has dimension {point.shape[0]}, quantizer expects {quantizer.d}"
        )
    labels, _ = _nearest(point[None, :], quantizer.centroids)
    return int(labels[0])


def distortion(quantizer: Quantizer, pool: CandidatePool) -> float:
    """Mean squared distance from pool points to their nearest centroid."""
    if pool.d != quantizer.d:
        raise DimensionError(f"pool dimension {pool.d} != quantizer dimension {quantizer.d}")
    _, sq = _nearest(pool.points, quantizer.centroids)
    return float(sq.mean())


def sample_cell(
    quantizer: Quantizer, pool: CandidatePool, cell: int, rng: np.random.Generator
) -> np.ndarray:
    """One draw from the pool restricted to ``cell``, uniformly at random.

    This is the empirical version of sampling the input distribution
    conditioned on the Voronoi cell.
    """
    if not 0 <= cell < quantizer.n_cells:
        raise ParameterError(f"cell index {cell} out of range [0, {quantizer.n_cells})")
    if pool.m != quantizer.pool_size:
        raise DimensionError("pool does not match the quantizer's assignment vector")
    members = quantizer.cell_members(cell)
    if members.size == 0:
        raise RuntimeError(f"cell {cell} is empty; lloyd() guarantees non-empty cells")
    return pool.points[members[int(rng.integers(members.size))]].copy()


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def save_quantizer(quantizer: Quantizer, path, header_comments=()) -> None:
    """Write a quantizer as labelled CSV sections (reloadable bit-exactly)."""
    lines = ["# qdoe-quantizer v1"]
    lines += [f"# {c}" for c in header_comments]
    lines.append(
        f"# n_cells={quantizer.n_cells} d={quantizer.d} "
        f"pool_size={quantizer.pool_size} distortion={quantizer.distortion!r}"
    )
    lines.append("centroids")
    lines += [_format_row(row) for row in quantizer.centroids]
    lines.append("probabilities")
    lines += [repr(float(p)) for p in quantizer.probabilities]
    lines.append("assignments")
    lines += [str(int(a)) for a in quantizer.pool_assignment]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_quantizer(path) -> Quantizer:
    """Reload a quantizer written by :func:`save_quantizer`."""
    sections: dict[str, list[str]] = {}
    current = None
    meta = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, value = token.partition("=")
                        meta[key] = value
                continue
            if line in ("centroids", "probabilities", "assignments"):
                current = line
                sections[current] = []
                continue
            if current is None:
                raise ParameterError(f"unexpected content before first section in {path}")
            sections[current].append(line)
    missing = {"centroids", "probabilities", "assignments"} - set(sections)
    if missing:
        raise ParameterError(f"quantizer file {path} missing sections {sorted(missing)}")
    centroids = np.array([[float(v) for v in row.split(",")] for row in sections["centroids"]])
    probabilities = np.array([float(v) for v in sections["probabilities"]])
    assignment = np.array([int(v) for v in sections["assignments"]], dtype=np.int64)
    return Quantizer(
        centroids=centroids,
        probabilities=probabilities,
        pool_assignment=assignment,
        distortion=float(meta.get("distortion", "nan")),
    )


def save_pool(pool: CandidatePool, path, column_names=None, header_comments=()) -> None:
    """Write a candidate pool as CSV with an optional named header row."""
    names = list(column_names) if column_names else [f"x{j}" for j in range(pool.d)]
    if len(names) != pool.d:
        raise DimensionError("column_names length does not match pool dimension")
    lines = ["# qdoe-pool v1"]
    lines += [f"# {c}" for c in header_comments]
    lines.append(",".join(names))
    lines += [_format_row(row) for row in pool.points]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_pool(path) -> tuple[CandidatePool, list[str]]:
    """Reload a pool CSV; returns the pool and its column names."""
    names = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if names is None:
                names = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    if names is None or not rows:
        raise ParameterError(f"pool file {path} holds no data")
    return CandidatePool(np.array(rows)), names
