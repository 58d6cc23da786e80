"""Train an example model on a numeric CSV and save a serving artifact.

Two wrappers are provided: a multilayer-perceptron regressor and a random
forest classifier served as probability of class 1. Artifacts are joblib
files and are meant to be produced locally, not shipped.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.neural_network import MLPRegressor

from .models import save_artifact


def read_numeric_csv(path, target: str):
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if target not in header:
            raise SystemExit(f"target {target!r} not among columns {header}")
        rows = [[float(cell) for cell in row] for row in reader]
    data = np.asarray(rows, dtype=float)
    target_idx = header.index(target)
    feature_idx = [i for i in range(len(header)) if i != target_idx]
    X = data[:, feature_idx]
    y = data[:, target_idx]
    features = [header[i] for i in feature_idx]
    return X, y, features


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shapbridge-train",
        description="Fit an example model and write a serving artifact",
    )
    parser.add_argument("--dataset", required=True, help="numeric CSV with header")
    parser.add_argument("--target", required=True)
    parser.add_argument(
        "--kind", choices=["regressor", "classifier"], default="regressor"
    )
    parser.add_argument(
        "--binarize-threshold", type=float, default=None,
        help="classifier targets: 1 where the score exceeds this value",
    )
    parser.add_argument("--out", required=True, help="artifact path (.joblib)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--hidden", type=int, default=16,
                        help="regressor hidden layer width")
    parser.add_argument("--trees", type=int, default=200,
                        help="classifier forest size")
    args = parser.parse_args(argv)

    X, y, features = read_numeric_csv(args.dataset, args.target)
    if args.kind == "classifier":
        if args.binarize_threshold is not None:
            y = (y > args.binarize_threshold).astype(float)
        classes = np.unique(y)
        if len(classes) != 2:
            raise SystemExit(
                f"classifier training needs two classes, got {classes}"
            )
        model = RandomForestClassifier(
            n_estimators=args.trees, random_state=args.seed
        )
    else:
        model = MLPRegressor(
            hidden_layer_sizes=(args.hidden,),
            max_iter=5000,
            random_state=args.seed,
        )
    model.fit(X, y)
    score = model.score(X, y)
    save_artifact(args.out, args.kind, model, X.shape[1], features)
    print(
        f"saved {args.kind} for m={X.shape[1]} to {args.out} "
        f"(training score {score:.4f})",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
