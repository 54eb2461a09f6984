"""Fitting data: rows of input vectors with one target each.

Datasets are immutable after construction and safe to share across threads.
The CSV interchange format is one header row naming the variables then the
target column, followed by one data row per sample; floats are written with
``repr`` so a round trip is bit-exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """``X`` is (rows, variables) float64, ``y`` is (rows,) float64."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array of shape (rows, variables)")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one target per row of X")
        if X.shape[0] == 0:
            raise ValueError("a dataset must be non-empty")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]


def write_csv(dataset: Dataset, path: str | Path, var_names: list[str] | None = None) -> None:
    """Write ``dataset`` in the package CSV format (variables..., target)."""
    names = list(var_names) if var_names else [f"x{i}" for i in range(dataset.dimension)]
    if len(names) != dataset.dimension:
        raise ValueError("need one column name per variable")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["target"])
        for row, target in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])


def read_csv(path: str | Path) -> tuple[Dataset, list[str]]:
    """Read the package CSV format; returns the dataset and variable names."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        if len(header) < 2:
            raise ValueError(f"{path}: header must name at least one variable and the target")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows, dtype=np.float64)
    return Dataset(X=data[:, :-1], y=data[:, -1]), header[:-1]
