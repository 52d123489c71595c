"""Experiment orchestration: configs to pools, designs, estimates and screenings.

This module resolves an :class:`~qdoe.config.ExperimentConfig` into the
concrete objects of the pipeline (joint samplers, candidate pools,
quantizers, designs) and implements the four CLI commands on top of the
library. Randomness is derived deterministically: design size index k uses
base seed ``seed + 1_000_000 * k`` and repetition r adds r, so every
artifact is byte-reproducible from the config alone.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .copula import EmpiricalMarginal, fit_gaussian_copula, gaussian_copula, conditional_inverse
from .designs import Design, lhs_with_marginals, lhsd, mc_design, q2lhs_design, qlhs_design, rq_design
from .errors import ConfigError
from .estimators import replicate
from .hsic import KernelSpec, screen
from .models import InputGroup, ModelSpec, build_model
from .quantizer import CandidatePool, Quantizer, lloyd, load_quantizer, save_pool, save_quantizer

__all__ = [
    "sample_group",
    "sample_joint",
    "group_pool",
    "build_design",
    "DesignBundle",
    "evaluate_design",
    "run_sample",
    "run_estimate",
    "run_hsic",
    "run_quantize",
]

log = logging.getLogger("qdoe")

_SWEEP_SEED_STRIDE = 1_000_000


def sample_group(group: InputGroup, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw m joint rows of one input group (columns in group order)."""
    d = len(group.columns)
    if group.kind == "independent":
        return np.column_stack([marg.sample(rng, m) for marg in group.marginals])
    if group.kind == "copula":
        cop = gaussian_copula(group.correlation)
        u = conditional_inverse(cop, rng.random((m, d)))
        return np.column_stack(
            [marg.quantile(u[:, j]) for j, marg in enumerate(group.marginals)]
        )
    if group.kind == "generator":
        rows = np.atleast_2d(np.asarray(group.generator(m, rng), dtype=float))
        if rows.shape != (m, d):
            raise ConfigError(f"generator for group {group.name!r} returned shape {rows.shape}")
        return rows
    # fixed pool: bootstrap rows
    idx = rng.integers(0, group.pool_points.shape[0], size=m)
    return group.pool_points[idx]


def sample_joint(columns, groups, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw m joint rows over all groups, scattered into canonical order."""
    out = np.empty((m, len(columns)))
    positions = {c: j for j, c in enumerate(columns)}
    for group in groups:
        block = sample_group(group, m, rng)
        for j, c in enumerate(group.columns):
            out[:, positions[c]] = block[:, j]
    return out


def group_pool(group: InputGroup, pool_size: int, rng: np.random.Generator) -> CandidatePool:
    """Candidate pool for quantizing one dependent group.

    Fixed pools are used as-is; simulable groups are drawn fresh at
    ``pool_size`` rows.
    """
    if group.kind == "pool":
        return CandidatePool(group.pool_points)
    return CandidatePool(sample_group(group, pool_size, rng))


def _dependent_groups(groups) -> list[InputGroup]:
    return [g for g in groups if g.dependent]


def _independent_columns(columns, groups) -> tuple[list[str], list]:
    names, marginals = [], []
    for group in groups:
        if not group.dependent:
            names.extend(group.columns)
            marginals.extend(group.marginals)
    order = [c for c in columns if c in names]
    reordered = [marginals[names.index(c)] for c in order]
    return order, reordered


def _column_marginals(columns, groups, pool_size: int, rng: np.random.Generator) -> list:
    """Per-column marginals for a plain LHS: analytic when declared,
    empirical (from a fresh pool draw) for simulator-only groups."""
    by_name = {}
    for group in groups:
        if group.marginals is not None:
            for c, marg in zip(group.columns, group.marginals):
                by_name[c] = marg
        else:
            block = group_pool(group, pool_size, rng).points
            for j, c in enumerate(group.columns):
                by_name[c] = EmpiricalMarginal(block[:, j])
    return [by_name[c] for c in columns]


def _joint_copula_and_marginals(columns, groups, pool_size: int, rng: np.random.Generator):
    """Joint Gaussian copula over all columns plus per-column marginals.

    Declared correlations are placed block-wise (independent groups give
    identity blocks); simulator-only groups are fitted from a fresh pool
    draw with empirical marginals.
    """
    d = len(columns)
    corr = np.eye(d)
    marginals: dict[str, object] = {}
    positions = {c: j for j, c in enumerate(columns)}
    for group in groups:
        idx = np.array([positions[c] for c in group.columns])
        if group.kind == "copula":
            corr[np.ix_(idx, idx)] = group.correlation
            for c, marg in zip(group.columns, group.marginals):
                marginals[c] = marg
        elif group.kind == "independent":
            for c, marg in zip(group.columns, group.marginals):
                marginals[c] = marg
        else:
            block = group_pool(group, pool_size, rng).points
            fitted = fit_gaussian_copula(block)
            corr[np.ix_(idx, idx)] = fitted.correlation
            for j, c in enumerate(group.columns):
                marginals[c] = EmpiricalMarginal(block[:, j])
    return gaussian_copula(corr), [marginals[c] for c in columns]


@dataclass(frozen=True)
class DesignBundle:
    """A design plus the quantization artifacts behind it, when any."""

    design: Design
    quantizers: dict[str, Quantizer]
    pools: dict[str, CandidatePool]


def _quantize_group(group, n, cfg, rng, shared, quantizer_files):
    if shared is not None and group.name in shared:
        return shared[group.name]
    if group.name in quantizer_files:
        quantizer = load_quantizer(quantizer_files[group.name])
        if group.kind != "pool":
            raise ConfigError(
                f"quantizer_files[{group.name!r}] requires a fixed pool group "
                "(the stored assignment must match the pool rows)"
            )
        pool = CandidatePool(group.pool_points)
        if quantizer.pool_size != pool.m:
            raise ConfigError(
                f"quantizer file for group {group.name!r} was built on "
                f"{quantizer.pool_size} pool rows, the pool has {pool.m}"
            )
        if quantizer.n_cells != n:
            raise ConfigError(
                f"quantizer file for group {group.name!r} has {quantizer.n_cells} "
                f"cells, the design requires {n}"
            )
        return quantizer, pool
    pool = group_pool(group, cfg.pool_size, rng)
    quantizer = lloyd(
        pool,
        n,
        rng,
        max_iter=cfg.lloyd.max_iter,
        rel_tol=cfg.lloyd.rel_tol,
        restarts=cfg.lloyd.restarts,
    )
    return quantizer, pool


def build_design(
    cfg: ExperimentConfig,
    columns,
    groups,
    scheme: str,
    n: int,
    rng: np.random.Generator,
    *,
    shared: dict | None = None,
    seed: int | None = None,
) -> DesignBundle:
    """Construct one design of the requested scheme and size."""
    quantizers: dict[str, Quantizer] = {}
    pools: dict[str, CandidatePool] = {}
    if scheme == "mc":
        design = mc_design(sample_joint(columns, groups, n, rng), column_roles=columns, seed=seed)
    elif scheme == "lhs":
        marginals = _column_marginals(columns, groups, cfg.pool_size, rng)
        design = lhs_with_marginals(n, marginals, rng, column_roles=columns, seed=seed)
    elif scheme == "lhsd":
        copula, marginals = _joint_copula_and_marginals(columns, groups, cfg.pool_size, rng)
        design = lhsd(n, copula, marginals, rng, column_roles=columns, seed=seed)
    elif scheme == "rq":
        if shared is not None and "__joint__" in shared:
            quantizer, pool = shared["__joint__"]
        elif len(groups) == 1 and groups[0].kind == "pool":
            quantizer, pool = _quantize_group(groups[0], n, cfg, rng, None, cfg.quantizer_files)
        else:
            pool = CandidatePool(sample_joint(columns, groups, cfg.pool_size, rng))
            quantizer = lloyd(pool, n, rng, max_iter=cfg.lloyd.max_iter,
                              rel_tol=cfg.lloyd.rel_tol, restarts=cfg.lloyd.restarts)
        quantizers["__joint__"], pools["__joint__"] = quantizer, pool
        design = rq_design(quantizer, pool, rng, column_roles=columns, seed=seed)
    elif scheme == "qlhs":
        dependent = _dependent_groups(groups)
        if len(dependent) != 1:
            raise ConfigError(
                f"qlhs requires exactly one dependent input group, found {len(dependent)}"
            )
        indep_names, indep_marginals = _independent_columns(columns, groups)
        if not indep_names:
            raise ConfigError("qlhs requires at least one independent input; use rq instead")
        dep = dependent[0]
        quantizer, pool = _quantize_group(dep, n, cfg, rng, shared, cfg.quantizer_files)
        quantizers[dep.name], pools[dep.name] = quantizer, pool
        design = qlhs_design(
            quantizer, pool, indep_marginals, rng,
            column_roles=tuple(dep.columns) + tuple(indep_names), seed=seed,
        )
    elif scheme == "q2lhs":
        dependent = _dependent_groups(groups)
        if len(dependent) != 2:
            raise ConfigError(
                f"q2lhs requires exactly two dependent input groups, found {len(dependent)}"
            )
        leftover = [c for g in groups if not g.dependent for c in g.columns]
        if leftover:
            raise ConfigError(f"q2lhs cannot place independent columns {leftover}")
        ga, gb = dependent
        qa, pa = _quantize_group(ga, n, cfg, rng, shared, cfg.quantizer_files)
        qb, pb = _quantize_group(gb, n, cfg, rng, shared, cfg.quantizer_files)
        quantizers[ga.name], pools[ga.name] = qa, pa
        quantizers[gb.name], pools[gb.name] = qb, pb
        design = q2lhs_design(
            qa, pa, qb, pb, rng,
            column_roles=tuple(ga.columns) + tuple(gb.columns), seed=seed,
        )
    else:
        raise ConfigError(f"unknown scheme {scheme!r}")
    return DesignBundle(design=design, quantizers=quantizers, pools=pools)


def _prebuild_shared(cfg, columns, groups, scheme, n) -> dict | None:
    """Fixed quantization artifacts for the shared-quantizer mode, built
    once from a seed derived from the config seed."""
    if not cfg.shared_quantizer or scheme not in ("rq", "qlhs", "q2lhs"):
        return None
    rng = np.random.default_rng([cfg.seed, 1])
    shared: dict = {}
    if scheme == "rq":
        pool = CandidatePool(sample_joint(columns, groups, cfg.pool_size, rng))
        quantizer = lloyd(pool, n, rng, max_iter=cfg.lloyd.max_iter,
                          rel_tol=cfg.lloyd.rel_tol, restarts=cfg.lloyd.restarts)
        shared["__joint__"] = (quantizer, pool)
        return shared
    for group in _dependent_groups(groups):
        shared[group.name] = _quantize_group(group, n, cfg, rng, None, cfg.quantizer_files)
    return shared


def _resolve_inputs(cfg: ExperimentConfig) -> tuple[tuple[str, ...], tuple[InputGroup, ...], ModelSpec | None]:
    model = None
    if cfg.model_name is not None:
        model = build_model(cfg.model_name, cfg.model_params)
    if cfg.columns is None or cfg.groups is None:
        raise ConfigError("config declares neither a model nor inline inputs")
    return cfg.columns, cfg.groups, model


def evaluate_design(model: ModelSpec, design: Design) -> np.ndarray:
    """Evaluate a model on design rows, reordering columns by their roles."""
    idx = [design.column_roles.index(c) for c in model.columns]
    return np.asarray(model.evaluate(design.points[:, idx]), dtype=float)


def _row_evaluator(model: ModelSpec, roles):
    idx = np.array([list(roles).index(c) for c in model.columns])

    def f(row):
        return float(model.evaluate(row[idx][None, :])[0])

    return f


def _meta_lines(cfg: ExperimentConfig, extra=()) -> list[str]:
    return [f"config_hash={cfg.config_hash} seed={cfg.seed}", *extra]


def _require(cfg, attr, command):
    value = getattr(cfg, attr)
    if value is None or (attr == "n" and not value):
        raise ConfigError(f"command {command!r} requires config key {attr!r}")
    return value


def run_sample(cfg: ExperimentConfig) -> list[Path]:
    """Write one design CSV per requested size; returns the paths."""
    scheme = _require(cfg, "scheme", "sample")
    _require(cfg, "n", "sample")
    columns, groups, _ = _resolve_inputs(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, n in enumerate(cfg.n):
        seed_n = cfg.seed + _SWEEP_SEED_STRIDE * k
        bundle = build_design(cfg, columns, groups, scheme, n,
                              np.random.default_rng(seed_n), seed=seed_n)
        path = out_dir / f"design_{scheme}_n{n}.csv"
        extra = [f"scheme={scheme} n={n}"]
        for name, quantizer in bundle.quantizers.items():
            extra.append(f"quantizer={name} distortion={quantizer.distortion!r}")
        bundle.design.to_csv(path, header_comments=_meta_lines(cfg, extra))
        summary = f"sample: scheme={scheme} n={n} d={bundle.design.d} -> {path}"
        for name, quantizer in bundle.quantizers.items():
            summary += f" [distortion({name})={quantizer.distortion:.6g}]"
        print(summary)
        paths.append(path)
    return paths


def run_estimate(cfg: ExperimentConfig, threads: int = 1) -> list[Path]:
    """Replicated estimation over the design-size sweep.

    Writes one repetition CSV per size plus a single JSON summary with
    mean, variance and the 2.5/97.5 percentiles per size.
    """
    scheme = _require(cfg, "scheme", "estimate")
    _require(cfg, "n", "estimate")
    repetitions = _require(cfg, "repetitions", "estimate")
    if repetitions < 2:
        raise ConfigError(f"config.repetitions: must be >= 2, got {repetitions}")
    columns, groups, model = _resolve_inputs(cfg)
    if model is None:
        raise ConfigError("command 'estimate' requires a model with an evaluator")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    entries = []
    for k, n in enumerate(cfg.n):
        base_seed = cfg.seed + _SWEEP_SEED_STRIDE * k
        shared = _prebuild_shared(cfg, columns, groups, scheme, n)

        def builder(rng, _n=n, _shared=shared):
            return build_design(cfg, columns, groups, scheme, _n, rng, shared=_shared).design

        # column order depends only on scheme and groups, so probe it once
        probe = build_design(cfg, columns, groups, scheme, n,
                             np.random.default_rng(base_seed), shared=shared)
        f = _row_evaluator(model, probe.design.column_roles)
        started = time.monotonic()
        summary = replicate(builder, f, repetitions, base_seed, threads=threads)
        elapsed = time.monotonic() - started
        rep_path = out_dir / f"estimates_{scheme}_{model.name}_n{n}.csv"
        lines = [f"# {c}" for c in _meta_lines(cfg, [f"scheme={scheme} model={model.name} n={n}"])]
        lines.append("seed,estimate")
        lines += [f"{base_seed + r},{float(v)!r}" for r, v in enumerate(summary.estimates)]
        rep_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(rep_path)
        entries.append(
            {
                "n": n,
                "repetitions": repetitions,
                "base_seed": base_seed,
                "mean": summary.mean,
                "variance": summary.variance,
                "percentile_2_5": summary.percentile_2_5,
                "percentile_97_5": summary.percentile_97_5,
            }
        )
        print(
            f"estimate: scheme={scheme} model={model.name} n={n} reps={repetitions} "
            f"mean={summary.mean:.6g} var={summary.variance:.3g} ({elapsed:.1f}s)"
        )
    summary_path = out_dir / f"summary_{scheme}_{model.name}.json"
    payload = {
        "meta": {"config_hash": cfg.config_hash, "seed": cfg.seed, "command": "estimate"},
        "model": model.name,
        "scheme": scheme,
        "shared_quantizer": cfg.shared_quantizer,
        "results": entries,
    }
    summary_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    paths.append(summary_path)
    return paths


def _default_hsic_groups(columns, groups) -> list[tuple[str, list[int]]]:
    """One singleton per independent column, one block per dependent group."""
    positions = {c: j for j, c in enumerate(columns)}
    out = []
    for group in groups:
        if group.dependent and len(group.columns) > 1:
            out.append((group.name, [positions[c] for c in group.columns]))
        else:
            out.extend((c, [positions[c]]) for c in group.columns)
    return out


def _kernel_for(cols, cfg: ExperimentConfig) -> KernelSpec:
    rule = cfg.kernels.bandwidth_rule
    if rule == "fixed":
        return (KernelSpec.scalar(bandwidth=cfg.kernels.bandwidth) if len(cols) == 1
                else KernelSpec.group(cfg.kernels.standardize_groups, bandwidth=cfg.kernels.bandwidth))
    if len(cols) == 1:
        return KernelSpec.scalar(rule=rule)
    return KernelSpec.group(cfg.kernels.standardize_groups, rule=rule)


def run_hsic(cfg: ExperimentConfig) -> list[Path]:
    """Screening: one independence test per input group, one CSV per size.

    Permutation statistics are computed by vectorized Gram-matrix
    lookups, so no worker pool is involved here.
    """
    scheme = _require(cfg, "scheme", "hsic")
    _require(cfg, "n", "hsic")
    columns, groups, model = _resolve_inputs(cfg)
    if model is None:
        raise ConfigError("command 'hsic' requires a model with an evaluator")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, n in enumerate(cfg.n):
        seed_n = cfg.seed + _SWEEP_SEED_STRIDE * k
        rng = np.random.default_rng(seed_n)
        bundle = build_design(cfg, columns, groups, scheme, n, rng, seed=seed_n)
        design = bundle.design
        outputs = evaluate_design(model, design)
        roles = design.column_roles
        if cfg.hsic_groups is not None:
            named = []
            for entry in cfg.hsic_groups:
                missing = [c for c in entry if c not in roles]
                if missing:
                    raise ConfigError(f"config.hsic_groups: unknown columns {missing}")
                named.append(("+".join(entry), [roles.index(c) for c in entry]))
        else:
            named = _default_hsic_groups(roles, groups)
        kernels = [_kernel_for(cols, cfg) for _, cols in named]
        results = screen(
            design,
            outputs,
            named,
            group_kernels=kernels,
            output_kernel=_kernel_for([0], cfg),
            permutations=cfg.test.permutations,
            alpha=cfg.test.alpha,
            rng=rng,
        )
        path = out_dir / f"screening_{scheme}_{model.name}_n{n}.csv"
        lines = [f"# {c}" for c in _meta_lines(
            cfg, [f"scheme={scheme} model={model.name} n={n} "
                  f"permutations={cfg.test.permutations} alpha={cfg.test.alpha!r}"])]
        lines.append("input,hsic,p_value,decision")
        for res in results:
            lines.append(f"{res.name},{res.hsic_value!r},{res.p_value!r},{res.decision}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"hsic: scheme={scheme} model={model.name} n={n} -> {path}")
        for res in results:
            print(f"  {res.name}: hsic={res.hsic_value:.4g} p={res.p_value:.4g} {res.decision}")
        paths.append(path)
    return paths


def run_quantize(cfg: ExperimentConfig) -> list[Path]:
    """Quantize one dependent group's pool and persist the artifact."""
    n_cells = _require(cfg, "n_cells", "quantize")
    columns, groups, _ = _resolve_inputs(cfg)
    dependent = _dependent_groups(groups)
    if cfg.group is not None:
        matches = [g for g in dependent if g.name == cfg.group]
        if not matches:
            raise ConfigError(f"config.group: no dependent group named {cfg.group!r}")
        target = matches[0]
    elif len(dependent) == 1:
        target = dependent[0]
    else:
        raise ConfigError(
            "config.group is required when the inputs declare several dependent groups"
        )
    rng = np.random.default_rng(cfg.seed)
    pool = group_pool(target, cfg.pool_size, rng)
    quantizer = lloyd(
        pool,
        n_cells,
        rng,
        max_iter=cfg.lloyd.max_iter,
        rel_tol=cfg.lloyd.rel_tol,
        restarts=cfg.lloyd.restarts,
    )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"quantizer_{target.name}_n{n_cells}.csv"
    save_quantizer(
        quantizer,
        path,
        header_comments=_meta_lines(
            cfg,
            [f"group={target.name} restarts={cfg.lloyd.restarts} "
             f"iterations={len(quantizer.distortion_history)}"],
        ),
    )
    paths = [path]
    if target.kind != "pool":
        pool_path = out_dir / f"pool_{target.name}.csv"
        save_pool(pool, pool_path, column_names=target.columns,
                  header_comments=_meta_lines(cfg))
        paths.append(pool_path)
    print(
        f"quantize: group={target.name} n_cells={n_cells} pool={pool.m} "
        f"distortion={quantizer.distortion:.6g} -> {path}"
    )
    return paths
