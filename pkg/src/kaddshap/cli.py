"""Command-line surface.

Subcommands: ``explain`` (sampled estimators), ``exact`` (full enumeration),
``converge`` (error-vs-budget experiment), ``transform`` (payoffs <->
interaction indices) and ``serve-check`` (wire-protocol conformance).

A JSON config file can carry any long-option value (keys use underscores);
explicit flags win over the config file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .datasets import Dataset, load_csv_dataset
from .exceptions import ModelTransportError
from .experiments import (
    ConvergenceReport,
    ExperimentConfig,
    convergence_experiment,
    emit_reports,
    parse_method,
)
from .explainers import (
    BackgroundSet,
    explain_exact,
    explain_kadd,
    explain_kernel_shap,
    sample_coalitions,
    full_powerset_sample,
)
from .games import Game, InteractionVector, game_to_interactions, interactions_to_game
from .models import (
    LinearModel,
    RemoteModelClient,
    SyntheticInteractionModel,
    serve_check,
)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument("--model", help="linear | synthetic | exec:<cmd> | tcp:<addr>")
    parser.add_argument("--dataset", help="CSV file with a header row")
    parser.add_argument("--target", help="name of the target column")
    parser.add_argument("--split-fraction", type=float, dest="split_fraction")
    parser.add_argument("--split-seed", type=int, dest="split_seed")
    parser.add_argument("--binarize-threshold", type=float, dest="binarize_threshold",
                        help="turn the target into 1.0 where it exceeds this value")
    parser.add_argument("--terms", help="synthetic model terms as JSON [[coeff,[j,...]],...]")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--background-size", type=int, dest="background_size")
    parser.add_argument("--big-weight", type=float, dest="big_weight")
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--timeout", type=float)
    parser.add_argument("--out", help="directory for report files")


_DEFAULTS = {
    "split_fraction": 0.8,
    "split_seed": 0,
    "seed": 0,
    "big_weight": 1e6,
    "batch_size": 1024,
    "timeout": 30.0,
    "method": "kadd",
    "k": 3,
    "top": None,
    "instances": 5,
    "simulations": 101,
    "percentiles": [0.1, 0.5, 0.9],
    "m": None,
    "batches": 1000,
    "fuzz_batch_size": 8,
}


class _Options:
    """Flag values backed by a config file and defaults; flags win."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._config = {}
        config_path = self._args.get("config")
        if config_path:
            self._config = json.loads(Path(config_path).read_text(encoding="utf-8"))

    def get(self, key: str, default=None):
        value = self._args.get(key)
        if value is not None:
            return value
        if key in self._config:
            return self._config[key]
        if key in _DEFAULTS:
            return _DEFAULTS[key] if _DEFAULTS[key] is not None else default
        return default

    def require(self, key: str, flag: str):
        value = self.get(key)
        if value is None:
            raise SystemExit(f"error: {flag} is required for this command")
        return value


def _load_dataset(opts: _Options) -> Dataset | None:
    path = opts.get("dataset")
    if path is None:
        return None
    target = opts.get("target")
    if target is None:
        raise SystemExit("error: --target is required when --dataset is given")
    return load_csv_dataset(
        path,
        target=target,
        split_fraction=float(opts.get("split_fraction")),
        seed=int(opts.get("split_seed")),
        binarize_threshold=opts.get("binarize_threshold"),
    )


def _resolve_model(opts: _Options, dataset: Dataset | None, m: int):
    spec = opts.require("model", "--model")
    if spec == "linear":
        if dataset is None:
            raise SystemExit("error: --model linear needs --dataset/--target")
        return LinearModel.fit(dataset.X_train, dataset.y_train)
    if spec == "synthetic":
        terms = opts.get("terms")
        if terms is None:
            raise SystemExit("error: --model synthetic needs --terms")
        if isinstance(terms, str):
            terms = json.loads(terms)
        return SyntheticInteractionModel([(c, idx) for c, idx in terms])
    if spec.startswith("exec:"):
        return RemoteModelClient(m, command=spec[5:], timeout=float(opts.get("timeout")))
    if spec.startswith("tcp:"):
        return RemoteModelClient(m, address=spec[4:], timeout=float(opts.get("timeout")))
    raise SystemExit(f"error: unknown model reference {spec!r}")


def _resolve_instance(opts: _Options, dataset: Dataset | None) -> np.ndarray:
    raw = opts.require("instance", "--instance")
    if isinstance(raw, str) and raw.lstrip().startswith("["):
        return np.asarray(json.loads(raw), dtype=float)
    if isinstance(raw, list):
        return np.asarray(raw, dtype=float)
    if dataset is None:
        raise SystemExit("error: a row-index instance needs --dataset")
    index = int(raw)
    X_test = dataset.X_test
    if not 0 <= index < X_test.shape[0]:
        raise SystemExit(
            f"error: test row {index} out of range [0, {X_test.shape[0]})"
        )
    return X_test[index]


def _background(opts: _Options, dataset: Dataset | None, m: int) -> BackgroundSet:
    if dataset is not None:
        samples = dataset.X_train
    else:
        raise SystemExit("error: background data requires --dataset")
    q = opts.get("background_size") or samples.shape[0]
    q = min(int(q), samples.shape[0])
    return BackgroundSet(samples=samples, q=q, seed=int(opts.get("seed")))


def _print_result(result, feature_names):
    print(f"method: {result.method}")
    print(f"phi0 (mean prediction): {result.phi0!r}")
    print(f"reconstructed prediction: {result.prediction!r}")
    print(f"efficiency gap: {result.efficiency_gap!r}")
    print(f"budget: {result.budget}  model calls: {result.model_calls}")
    for note in result.warnings:
        print(f"warning: {note}", file=sys.stderr)
    order = np.argsort(-np.abs(result.shap_values), kind="stable")
    print("attribution:")
    for j in order:
        print(f"  {feature_names[j]:>24s}  {result.shap_values[j]:+.6g}")


def _names(dataset: Dataset | None, m: int):
    if dataset is not None:
        return list(dataset.feature_names)
    return [f"x{j + 1}" for j in range(m)]


def _emit_single(opts: _Options, result, names):
    out = opts.get("out")
    if out:
        top = opts.get("top")
        written = emit_reports(
            out, feature_names=names, attribution=result,
            top=int(top) if top is not None else None,
        )
        for path in written:
            print(f"wrote {path}")
    else:
        _print_result(result, names)


def _cmd_explain(opts: _Options) -> int:
    dataset = _load_dataset(opts)
    instance = _resolve_instance(opts, dataset)
    m = len(instance)
    background = _background(opts, dataset, m)
    model = _resolve_model(opts, dataset, m)
    budget = opts.get("budget")
    if budget is None:
        sample = full_powerset_sample(m)
    else:
        sample = sample_coalitions(m, int(budget), seed=int(opts.get("seed")))
    method, _ = parse_method(
        opts.get("method") if opts.get("method") != "kadd"
        else f"kadd({int(opts.get('k'))})"
    )
    try:
        if method == "kernel":
            result = explain_kernel_shap(
                model, instance, sample, background,
                big_weight=float(opts.get("big_weight")),
                batch_size=int(opts.get("batch_size")),
            )
        else:
            result = explain_kadd(
                model, instance, sample, background,
                k=int(opts.get("k")),
                big_weight=float(opts.get("big_weight")),
                batch_size=int(opts.get("batch_size")),
            )
    finally:
        if isinstance(model, RemoteModelClient):
            model.shutdown()
    _emit_single(opts, result, _names(dataset, m))
    return 0


def _cmd_exact(opts: _Options) -> int:
    dataset = _load_dataset(opts)
    instance = _resolve_instance(opts, dataset)
    m = len(instance)
    background = _background(opts, dataset, m)
    model = _resolve_model(opts, dataset, m)
    try:
        result = explain_exact(
            model, instance, background, batch_size=int(opts.get("batch_size"))
        )
    finally:
        if isinstance(model, RemoteModelClient):
            model.shutdown()
    _emit_single(opts, result, _names(dataset, m))
    return 0


def _cmd_converge(opts: _Options) -> int:
    dataset = _load_dataset(opts)
    if dataset is None:
        raise SystemExit("error: converge needs --dataset/--target")
    m = dataset.m
    model = _resolve_model(opts, dataset, m)
    methods = opts.get("methods")
    if methods is None:
        methods = ["kernel", f"kadd({int(opts.get('k'))})"]
    elif isinstance(methods, str):
        methods = [t.strip() for t in methods.split(",") if t.strip()]
    budgets = opts.get("budgets")
    if budgets is None:
        # default sweeps for the attribute counts the error figures use
        budgets = {10: [290, 590, 890], 11: [420, 1020, 1800]}.get(m)
        if budgets is None:
            raise SystemExit(
                f"error: --budgets is required (no default sweep for m={m})"
            )
    if isinstance(budgets, str):
        budgets = [int(t) for t in budgets.split(",") if t.strip()]
    percentiles = opts.get("percentiles")
    if isinstance(percentiles, str):
        percentiles = [float(t) for t in percentiles.split(",") if t.strip()]
    n_instances = int(opts.get("instances"))
    instances = dataset.X_test[:n_instances]
    explicit = opts.get("simulation_seeds")
    config = ExperimentConfig(
        methods=tuple(methods),
        budgets=tuple(int(b) for b in budgets),
        simulations=int(opts.get("simulations")),
        seed=int(opts.get("seed")),
        percentiles=tuple(float(p) for p in percentiles),
        background_size=opts.get("background_size"),
        big_weight=float(opts.get("big_weight")),
        batch_size=int(opts.get("batch_size")),
        model_id=str(opts.get("model")),
        dataset_id=str(opts.get("dataset")),
        explicit_seeds=tuple(int(s) for s in explicit) if explicit else None,
    )
    try:
        report = convergence_experiment(model, instances, dataset.X_train, config)
    finally:
        if isinstance(model, RemoteModelClient):
            model.shutdown()
    manifest = dict(report.metadata)
    manifest.update(
        model=str(opts.get("model")),
        dataset=str(opts.get("dataset")),
        target=str(opts.get("target")),
        split_fraction=float(opts.get("split_fraction")),
        split_seed=int(opts.get("split_seed")),
        batch_size=int(opts.get("batch_size")),
    )
    if opts.get("binarize_threshold") is not None:
        manifest["binarize_threshold"] = float(opts.get("binarize_threshold"))
    if opts.get("terms") is not None:
        terms = opts.get("terms")
        manifest["terms"] = json.loads(terms) if isinstance(terms, str) else terms
    out = opts.get("out")
    if out:
        for path in emit_reports(out, convergence=report, manifest=manifest):
            print(f"wrote {path}")
    else:
        for method, budget, p, value in report.rows:
            print(f"{method:>10s}  n={budget:<6d} q{int(round(p * 100)):<3d} {value!r}")
    return 0


def _cmd_transform(opts: _Options) -> int:
    raw = opts.require("input", "--input")
    payload = json.loads(Path(raw).read_text(encoding="utf-8"))
    m = int(payload["m"])
    if "payoffs" in payload:
        game = Game.dense(m, payload["payoffs"])
        k = min(int(opts.get("k") or m), m)
        vector = game_to_interactions(game, k=k)
        result = {
            "m": m,
            "k": k,
            "interactions": [float(v) for v in vector.values],
            "order": [
                [j + 1 for j in range(m) if mask >> j & 1] for mask in vector.masks()
            ],
        }
    elif "interactions" in payload:
        k = int(payload.get("k") or m)
        vector = InteractionVector(
            m=m, k=k, values=np.asarray(payload["interactions"], dtype=float)
        )
        game = interactions_to_game(vector)
        from .coalitions import enumerate_powerset

        order = enumerate_powerset(m)
        result = {
            "m": m,
            "payoffs": [float(v) for v in game.payoffs],
            "order": [[j + 1 for j in range(m) if mask >> j & 1] for mask in order.masks],
        }
    else:
        raise SystemExit("error: transform input needs 'payoffs' or 'interactions'")
    text = json.dumps(result, indent=2)
    out = opts.get("out")
    if out:
        path = Path(out)
        if path.suffix != ".json":
            path.mkdir(parents=True, exist_ok=True)
            path = path / "transform.json"
        path.write_text(text + "\n", encoding="utf-8")
        print(f"wrote {path}")
    else:
        print(text)
    return 0


def _cmd_serve_check(opts: _Options) -> int:
    spec = opts.require("model", "--model")
    m = opts.get("m")
    if m is None:
        raise SystemExit("error: serve-check needs --m")
    kwargs = {}
    if spec.startswith("exec:"):
        kwargs["command"] = spec[5:]
    elif spec.startswith("tcp:"):
        kwargs["address"] = spec[4:]
    else:
        raise SystemExit("error: serve-check needs an exec:/tcp: model")
    report = serve_check(
        int(m),
        batches=int(opts.get("batches")),
        batch_size=int(opts.get("fuzz_batch_size")),
        seed=int(opts.get("seed")),
        timeout=float(opts.get("timeout")),
        **kwargs,
    )
    print(f"batches completed: {report.batches}")
    if report.ok:
        print("protocol check: PASS")
        return 0
    for violation in report.violations:
        print(f"violation: {violation}", file=sys.stderr)
    print("protocol check: FAIL")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kaddshap",
        description="Shapley-value explanations with exact, kernel and "
                    "k-additive estimators",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="sampled estimation for one instance")
    _add_common(p)
    p.add_argument("--method", choices=["kernel", "kadd"])
    p.add_argument("--k", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--instance", help="test-row index or JSON vector")
    p.add_argument("--top", type=int, help="keep only the largest attributions")

    p = sub.add_parser("exact", help="exact attributions (2^m evaluations)")
    _add_common(p)
    p.add_argument("--instance", help="test-row index or JSON vector")
    p.add_argument("--top", type=int)

    p = sub.add_parser("converge", help="error-vs-budget experiment")
    _add_common(p)
    p.add_argument("--methods", help="comma list, e.g. kernel,kadd(3)")
    p.add_argument("--budgets", help="comma list of coalition budgets")
    p.add_argument("--simulations", type=int)
    p.add_argument("--percentiles", help="comma list in (0,1)")
    p.add_argument("--instances", type=int, help="number of test rows to explain")
    p.add_argument("--k", type=int)

    p = sub.add_parser("transform", help="payoffs <-> interaction indices")
    p.add_argument("--config")
    p.add_argument("--input", help="JSON file with m and payoffs|interactions")
    p.add_argument("--k", type=int)
    p.add_argument("--out")

    p = sub.add_parser("serve-check", help="wire-protocol conformance fuzz")
    p.add_argument("--config")
    p.add_argument("--model", help="exec:<cmd> or tcp:<addr>")
    p.add_argument("--m", type=int)
    p.add_argument("--batches", type=int)
    p.add_argument("--fuzz-batch-size", type=int, dest="fuzz_batch_size")
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout", type=float)

    return parser


_COMMANDS = {
    "explain": _cmd_explain,
    "exact": _cmd_exact,
    "converge": _cmd_converge,
    "transform": _cmd_transform,
    "serve-check": _cmd_serve_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = _Options(args)
    try:
        return _COMMANDS[args.command](opts)
    except ModelTransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
