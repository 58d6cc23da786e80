"""Model loading: trained artifacts and inline demo models.

An artifact is a joblib file holding ``{"kind", "model", "m", "features"}``
where kind is "regressor" (served as the raw prediction) or "classifier"
(served as the probability of class 1). Inline specs avoid artifacts for
demos and tests: ``inline:echo0`` answers with feature 0, ``inline:mean``
with the row mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import joblib
import numpy as np


@dataclass(frozen=True)
class ModelBundle:
    kind: str
    m: int | None
    predict: object  # callable (n, m) -> (n,)

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        return np.asarray(self.predict(rows), dtype=float).reshape(-1)


def _echo0(rows: np.ndarray) -> np.ndarray:
    return rows[:, 0]


def _mean(rows: np.ndarray) -> np.ndarray:
    return rows.mean(axis=1)


_INLINE = {"echo0": _echo0, "mean": _mean}


def load_model(spec: str) -> ModelBundle:
    """Resolve a model spec: ``inline:<name>`` or a path to an artifact."""
    if spec.startswith("inline:"):
        name = spec[len("inline:"):]
        if name not in _INLINE:
            raise ValueError(
                f"unknown inline model {name!r}; have {sorted(_INLINE)}"
            )
        return ModelBundle(kind="inline", m=None, predict=_INLINE[name])
    path = Path(spec)
    payload = joblib.load(path)
    kind = payload["kind"]
    model = payload["model"]
    m = int(payload["m"])
    if kind == "regressor":
        predict = lambda rows: model.predict(rows)  # noqa: E731
    elif kind == "classifier":
        predict = lambda rows: model.predict_proba(rows)[:, 1]  # noqa: E731
    else:
        raise ValueError(f"artifact kind must be regressor/classifier, got {kind!r}")
    return ModelBundle(kind=kind, m=m, predict=predict)


def save_artifact(path, kind: str, model, m: int, features) -> None:
    joblib.dump(
        {"kind": kind, "model": model, "m": int(m), "features": list(features)},
        path,
    )
