"""Ideal-sampling datasets: ordered ``(x, y)`` pairs and their CSV form."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise InputError("x and y differ in length")
        if x.size < 2:
            raise InputError("a dataset needs at least two points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InputError("dataset contains non-finite values")
        if np.any(np.diff(x) <= 0):
            raise InputError("x must be strictly increasing")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_unsorted(cls, x, y) -> Dataset:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        order = np.argsort(x, kind="stable")
        xs = x[order]
        dup = np.flatnonzero(np.diff(xs) == 0)
        if dup.size:
            raise InputError(f"duplicate x value {xs[dup[0]]!r}")
        return cls(xs, y[order])

    def __len__(self) -> int:
        return self.x.size

    @property
    def x_range(self) -> float:
        return float(self.x[-1] - self.x[0])

    @property
    def y_range(self) -> float:
        return float(np.ptp(self.y))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.x.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()[:16]


def load_dataset(path) -> Dataset:
    """Read a ``x,y`` CSV file. Rows are sorted by x; duplicate x is an error."""
    path = Path(path)
    xs, ys = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "y"]:
            raise InputError(f"{path}:1: expected header 'x,y'")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise InputError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError:
                raise InputError(f"{path}:{lineno}: cannot parse {','.join(row)!r}") from None
    return Dataset.from_unsorted(xs, ys)


def write_xy_csv(path, x, y, header=("x", "y")) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for a, b in zip(np.asarray(x, float), np.asarray(y, float)):
            fh.write(f"{float(a)!r},{float(b)!r}\n")


def save_dataset(data: Dataset, path) -> None:
    write_xy_csv(path, data.x, data.y)


def target_function(x):
    """Piecewise-smooth target: a sinusoid with a unit-half jump at 0.5."""
    x = np.asarray(x, dtype=float)
    return np.sin(6.0 * x) + 0.5 * (x > 0.5)


def generate(n: int = 8, seed: int = 0, noise: float = 0.1) -> Dataset:
    """Seeded synthetic dataset on [0, 1].

    Sites are stratified uniform draws (one per cell of width 1/n, kept
    away from cell edges) so that neighbouring samples never nearly coincide.
    """
    if n < 2:
        raise InputError("need at least two points")
    rng = np.random.default_rng(seed)
    x = (np.arange(n) + 0.5 + 0.35 * rng.uniform(-1.0, 1.0, n)) / n
    y = target_function(x) + noise * rng.standard_normal(n)
    return Dataset(x, y)
