"""CSV dataset ingestion with a deterministic train/test split.

Input is RFC-4180 CSV, UTF-8, header row, '.' decimal separator, fully
numeric. Positions in error messages are 1-based and count the header as
row 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import IngestionError


@dataclass(frozen=True, eq=False)
class Dataset:
    columns: tuple[str, ...]
    rows: np.ndarray
    target: str
    train_indices: np.ndarray
    test_indices: np.ndarray
    split_seed: int

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c for c in self.columns if c != self.target)

    @property
    def m(self) -> int:
        return len(self.feature_names)

    def _split(self, indices: np.ndarray):
        cols = [i for i, c in enumerate(self.columns) if c != self.target]
        target_col = self.columns.index(self.target)
        X = self.rows[np.ix_(indices, cols)]
        y = self.rows[indices, target_col]
        return X, y

    @property
    def X_train(self):
        return self._split(self.train_indices)[0]

    @property
    def y_train(self):
        return self._split(self.train_indices)[1]

    @property
    def X_test(self):
        return self._split(self.test_indices)[0]

    @property
    def y_test(self):
        return self._split(self.test_indices)[1]


def load_csv_dataset(
    path,
    target: str,
    split_fraction: float = 0.8,
    seed: int = 0,
    binarize_threshold: float | None = None,
) -> Dataset:
    """Load a numeric CSV and split it into train/test deterministically.

    ``binarize_threshold`` replaces the target with 1.0 where it is strictly
    greater than the threshold and 0.0 otherwise (class labels for
    score-style targets).
    """
    path = Path(path)
    if not 0.0 < split_fraction < 1.0:
        raise ValueError(f"split fraction must be in (0, 1), got {split_fraction}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: file is empty") from None
        columns = tuple(name.strip() for name in header)
        if target not in columns:
            raise IngestionError(
                f"{path}: target column {target!r} not among {list(columns)}"
            )
        data: list[list[float]] = []
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise IngestionError(
                    f"{path}: expected {len(columns)} cells, found {len(row)}",
                    row=row_number,
                )
            parsed = []
            for col_number, cell in enumerate(row, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"{path}: non-numeric cell {cell!r}",
                        row=row_number,
                        column=col_number,
                    ) from None
                if not math.isfinite(value):
                    raise IngestionError(
                        f"{path}: non-finite cell {cell!r}",
                        row=row_number,
                        column=col_number,
                    )
                parsed.append(value)
            data.append(parsed)
    if not data:
        raise IngestionError(f"{path}: no data rows after the header")

    rows = np.asarray(data, dtype=float)
    if binarize_threshold is not None:
        target_col = columns.index(target)
        rows[:, target_col] = (rows[:, target_col] > binarize_threshold).astype(float)

    n = rows.shape[0]
    n_train = int(math.floor(split_fraction * n))
    if n_train == 0 or n_train == n:
        raise IngestionError(
            f"{path}: split fraction {split_fraction} leaves an empty side "
            f"for {n} rows"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return Dataset(
        columns=columns,
        rows=rows,
        target=target,
        train_indices=np.sort(perm[:n_train]),
        test_indices=np.sort(perm[n_train:]),
        split_seed=seed,
    )
