"""Expectation estimation benchmarks on the analytic toy models.

Reproduces the classic comparison tables: for each toy target the competing
schemes are replicated many times per design size, and the table reports the
repetition mean (unbiasedness) and variance (efficiency). Quantization-based
schemes should match the truth with far less variance than Monte Carlo.

Runs in about a minute; trim REPETITIONS for a quicker look.
"""

import numpy as np

from qdoe.config import ExperimentConfig, KernelSettings, LloydSettings, SignificanceSettings
from qdoe.estimators import replicate
from qdoe.models import build_model
from qdoe.runner import build_design

SIZES = (10, 20, 50, 100)
REPETITIONS = 300
STRIDE = 1_000_000

CFG = ExperimentConfig(
    seed=0, scheme=None, n=(), repetitions=None, pool_size=2000,
    lloyd=LloydSettings(max_iter=50, rel_tol=1e-6, restarts=1),
    model_name=None, model_params={}, columns=None, groups=None,
    kernels=KernelSettings(), test=SignificanceSettings(), hsic_groups=None,
    output_dir=".", shared_quantizer=False, quantizer_files={}, n_cells=None, group=None,
)

BENCHMARKS = [
    ("square", "E[X^2], X ~ N(0,1)", 1.0, ("rq", "lhs", "mc")),
    ("x1x2", "E[X1 X2], Gaussian pair, cov 0.8", 0.8, ("rq", "lhsd", "mc")),
    ("x2y", "E[X^2 Y], X ~ N(0,1), Y ~ U(0,1)", 0.5, ("qlhs", "lhs", "mc")),
    ("x1px2_sq_y", "E[(X1+X2)^2 Y], cov 0.8, Y ~ U(0,1)", 1.8, ("qlhs", "lhsd", "mc")),
    ("xy2py2", "E[X Y^2 + Y^2], X ~ LN(0,1), Y ~ N(0,1)", float(np.exp(0.5) + 1), ("q2lhs", "mc")),
]


def run(model_name, scheme, n, seed):
    model = build_model(model_name)

    def builder(rng):
        return build_design(CFG, model.columns, model.groups, scheme, n, rng).design

    probe = builder(np.random.default_rng(0))
    order = np.array([list(probe.column_roles).index(c) for c in model.columns])
    f = lambda row: float(model.evaluate(row[order][None, :])[0])
    return replicate(builder, f, REPETITIONS, seed)


for b, (name, label, truth, schemes) in enumerate(BENCHMARKS):
    print(f"\n=== {label}   (truth {truth:.4f}, {REPETITIONS} repetitions per size)")
    header = "scheme " + "".join(f" | n={n}: mean    var   " for n in SIZES)
    print(header)
    for s, scheme in enumerate(schemes):
        cells = []
        for k, n in enumerate(SIZES):
            seed = 100_000_000 * (b + 1) + 10_000_000 * s + STRIDE * k + 17
            summary = run(name, scheme, n, seed)
            cells.append(f" | {summary.mean:7.4f} {summary.variance:8.2e}")
        print(f"{scheme:6}" + "".join(cells))
    print("(the quantization-based scheme should track the truth with the smallest variance)")
