"""Convergence experiments: estimator error against exact attributions.

One experiment runs s independent simulations. A simulation draws one
coalition sample per budget, solves every configured method on that shared
sample, and records the squared estimation error per test instance. Errors
are averaged over instances within each simulation, then summarized across
simulations by nearest-rank percentiles.

The background subsample is fixed once per experiment and shared by the
exact reference and every simulation; only coalition sampling is re-seeded
per simulation. Re-drawing the background would make full-budget estimators
disagree with the reference for no informative reason.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__ as _tool_version
from .exceptions import BudgetError
from .explainers import (
    BackgroundSet,
    BlackBoxModel,
    ExplanationResult,
    build_value_function,
    explain_exact,
    explain_kadd,
    explain_kernel_shap,
    precompute_solver,
    sample_coalitions,
)

_METHOD_RE = re.compile(r"^kadd[(:]?(\d+)\)?$")


def parse_method(tag: str) -> tuple[str, int | None]:
    """Normalize a method tag: 'kernel' or 'kadd(k)' (also accepts kadd:k)."""
    tag = tag.strip().lower()
    if tag == "kernel":
        return "kernel", None
    match = _METHOD_RE.match(tag)
    if match:
        k = int(match.group(1))
        if k < 1:
            raise ValueError(f"k must be >= 1 in method {tag!r}")
        return f"kadd({k})", k
    raise ValueError(f"unknown method {tag!r}; expected 'kernel' or 'kadd(k)'")


def squared_error(exact: np.ndarray, estimate: np.ndarray) -> float:
    """Sum of squared per-attribute differences between two attribution vectors."""
    exact = np.asarray(exact, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if exact.shape != estimate.shape:
        raise ValueError(f"length mismatch: {exact.shape} vs {estimate.shape}")
    return float(np.sum((exact - estimate) ** 2))


def nearest_rank_percentile(values, a: float) -> float:
    """Nearest-rank percentile: the ceil(a*n)-th smallest value.

    Exact and interpolation-free; for odd n, a=0.5 is the middle element.
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"percentile must be in (0, 1), got {a}")
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise ValueError("percentile of an empty sequence")
    rank = math.ceil(a * len(ordered))
    return ordered[max(rank, 1) - 1]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    methods: tuple[str, ...]
    budgets: tuple[int, ...]
    simulations: int
    seed: int
    percentiles: tuple[float, ...] = (0.1, 0.5, 0.9)
    background_size: int | None = None
    big_weight: float = 1e6
    batch_size: int = 1024
    model_id: str = "model"
    dataset_id: str = "dataset"
    explicit_seeds: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.simulations < 1:
            raise ValueError("need at least one simulation")
        if self.explicit_seeds is not None and len(self.explicit_seeds) != self.simulations:
            raise ValueError(
                f"{len(self.explicit_seeds)} explicit seeds for "
                f"{self.simulations} simulations"
            )
        for p in self.percentiles:
            if not 0.0 < p < 1.0:
                raise ValueError(f"percentiles must lie in (0, 1), got {p}")
        parsed = tuple(parse_method(t)[0] for t in self.methods)
        object.__setattr__(self, "methods", parsed)

    def simulation_seeds(self) -> list[int]:
        if self.explicit_seeds is not None:
            return [int(s) for s in self.explicit_seeds]
        rng = np.random.default_rng(self.seed)
        return [int(v) for v in rng.integers(0, 2**63 - 1, size=self.simulations)]


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Long-form rows (method, budget, percentile, error) plus run metadata."""

    rows: tuple[tuple[str, int, float, float], ...]
    metadata: dict = field(default_factory=dict)

    def value(self, method: str, budget: int, percentile: float) -> float:
        for row in self.rows:
            if row[0] == method and row[1] == budget and row[2] == percentile:
                return row[3]
        raise KeyError((method, budget, percentile))


def convergence_experiment(
    model: BlackBoxModel,
    instances: np.ndarray,
    background: np.ndarray,
    config: ExperimentConfig,
) -> ConvergenceReport:
    """Measure each method's squared error against exact attributions.

    Within one (simulation, budget) cell, every method reuses the same
    coalition sample and therefore the same value-function evaluations;
    methods differ only in the system they solve.
    """
    instances = np.atleast_2d(np.asarray(instances, dtype=float))
    background = np.asarray(background, dtype=float)
    m = instances.shape[1]
    for budget in config.budgets:
        if not 2 <= budget <= (1 << m):
            raise BudgetError(
                f"budget {budget} outside [2, 2^{m}] = [2, {1 << m}]"
            )
    q = config.background_size or background.shape[0]
    q = min(q, background.shape[0])
    bg = BackgroundSet(samples=background, q=q, seed=config.seed)

    exact_phi = [
        explain_exact(model, x, bg, batch_size=config.batch_size).shap_values
        for x in instances
    ]

    sim_seeds = config.simulation_seeds()
    errors: dict[tuple[str, int], list[float]] = {
        (method, budget): []
        for method in config.methods
        for budget in config.budgets
    }
    for r, sim_seed in enumerate(sim_seeds):
        for b_idx, budget in enumerate(config.budgets):
            sample = sample_coalitions(m, budget, seed=sim_seed + b_idx)
            solvers = {}
            for method in config.methods:
                _, k = parse_method(method)
                solvers[method] = precompute_solver(
                    sample, m, k=k, big_weight=config.big_weight
                )
            per_method: dict[str, list[float]] = {mth: [] for mth in config.methods}
            for i, x in enumerate(instances):
                vf = build_value_function(
                    model, x, sample, bg, batch_size=config.batch_size
                )
                for method in config.methods:
                    _, k = parse_method(method)
                    if k is None:
                        result = explain_kernel_shap(
                            model, x, sample, bg,
                            big_weight=config.big_weight,
                            batch_size=config.batch_size,
                            solver=solvers[method],
                            value_function=vf,
                        )
                    else:
                        result = explain_kadd(
                            model, x, sample, bg, k=k,
                            big_weight=config.big_weight,
                            batch_size=config.batch_size,
                            solver=solvers[method],
                            value_function=vf,
                        )
                    per_method[method].append(
                        squared_error(exact_phi[i], result.shap_values)
                    )
            for method in config.methods:
                errors[(method, budget)].append(
                    float(np.mean(per_method[method]))
                )

    rows = []
    for method in config.methods:
        for budget in config.budgets:
            for p in config.percentiles:
                rows.append(
                    (method, budget, p,
                     nearest_rank_percentile(errors[(method, budget)], p))
                )
    metadata = {
        "model_id": config.model_id,
        "dataset_id": config.dataset_id,
        "methods": list(config.methods),
        "budgets": list(config.budgets),
        "simulations": config.simulations,
        "percentiles": list(config.percentiles),
        "seed": config.seed,
        "simulation_seeds": sim_seeds,
        "background_size": q,
        "big_weight": config.big_weight,
        "instances": int(instances.shape[0]),
        "tool_version": _tool_version,
    }
    return ConvergenceReport(rows=tuple(rows), metadata=metadata)


def _fmt(value: float) -> str:
    return repr(float(value))


def write_attribution_csv(path, feature_names, result, top: int | None = None):
    """Per-attribute attribution table sorted by descending magnitude."""
    order = np.argsort(-np.abs(result.shap_values), kind="stable")
    if top is not None:
        order = order[:top]
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["attribute", "shap_value"])
        for j in order:
            writer.writerow([feature_names[j], _fmt(result.shap_values[j])])


def write_interaction_csv(path, feature_names, interactions):
    """Symmetric pairwise interaction matrix; the diagonal stays empty."""
    matrix = interactions.pair_matrix()
    names = list(feature_names)
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([""] + names)
        for j, name in enumerate(names):
            row = [name]
            for jp in range(len(names)):
                row.append("" if j == jp else _fmt(matrix[j, jp]))
            writer.writerow(row)


def write_convergence_csv(path, report: ConvergenceReport):
    """Wide-form convergence table: one row per (method, budget)."""
    percentiles = sorted({row[2] for row in report.rows})
    headers = ["method", "n_coalitions"] + [
        f"q{int(round(p * 100))}" for p in percentiles
    ]
    cells: dict[tuple[str, int], dict[float, float]] = {}
    order: list[tuple[str, int]] = []
    for method, budget, p, value in report.rows:
        key = (method, budget)
        if key not in cells:
            cells[key] = {}
            order.append(key)
        cells[key][p] = value
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(headers)
        for method, budget in order:
            writer.writerow(
                [method, budget] + [_fmt(cells[(method, budget)][p]) for p in percentiles]
            )


def write_manifest(path, metadata: dict):
    """Run manifest with a fixed key order so reruns are byte-comparable.

    The manifest deliberately uses CLI option names for its keys, so the
    file written by one run can be passed back as ``--config`` to reproduce
    it.
    """
    key_order = [
        "tool_version", "model_id", "dataset_id", "model", "dataset", "target",
        "methods", "budgets", "simulations", "percentiles", "seed",
        "simulation_seeds", "background_size", "big_weight", "batch_size",
        "instances", "split_fraction", "split_seed", "binarize_threshold",
        "terms",
    ]
    ordered = {key: metadata[key] for key in key_order if key in metadata}
    for key in metadata:
        if key not in ordered:
            ordered[key] = metadata[key]
    Path(path).write_text(json.dumps(ordered, indent=2) + "\n", encoding="utf-8")


def emit_reports(
    out_dir,
    *,
    feature_names=None,
    attribution: ExplanationResult | None = None,
    top: int | None = None,
    convergence: ConvergenceReport | None = None,
    manifest: dict | None = None,
) -> list[Path]:
    """Write the requested report files into out_dir and list what was written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if attribution is not None:
        names = list(feature_names) if feature_names is not None else [
            f"x{j + 1}" for j in range(len(attribution.shap_values))
        ]
        path = out / "attributions.csv"
        write_attribution_csv(path, names, attribution, top=top)
        written.append(path)
        if attribution.interactions is not None and attribution.interactions.k >= 2:
            path = out / "interactions.csv"
            write_interaction_csv(path, names, attribution.interactions)
            written.append(path)
    if convergence is not None:
        path = out / "convergence.csv"
        write_convergence_csv(path, convergence)
        written.append(path)
        if manifest is None:
            manifest = convergence.metadata
    if manifest is not None:
        path = out / "run_manifest.json"
        write_manifest(path, manifest)
        written.append(path)
    return written
