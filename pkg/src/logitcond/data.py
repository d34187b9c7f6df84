"""Datasets, CSV ingestion, synthetic generators and discrete distributions.

Randomness: every generator uses numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=key)``.  Observation ``i`` of a generated
dataset owns the substream ``key = (0, i)``, so the first ``m`` rows of a
dataset of size ``n > m`` coincide with the dataset of size ``m``.
Auxiliary draws (such as a planted direction) use ``key = (1,)``.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BadLabel, NonFinite, ParseError

_U64 = (1 << 64) - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream ``key`` of ``seed`` (any integer seed)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & _U64, spawn_key=tuple(key))))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature rows ``X`` (n x p) with labels ``y`` in {-1, +1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("X must be a non-empty n x p matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per row of X")
        if not np.all(np.isfinite(X)):
            raise NonFinite("feature matrix has NaN or Inf entries")
        bad = np.flatnonzero((y != 1) & (y != -1))
        if bad.size:
            raise BadLabel(int(bad[0]) + 1, str(y[bad[0]]))
        y = y.astype(np.int8)
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def signed_rows(self) -> np.ndarray:
        """Rows ``y_i x_i`` (the matrix YX without forming Y)."""
        A = self.y[:, None] * self.X
        A.flags.writeable = False
        return A

    def scaled(self, gamma: float) -> "Dataset":
        return Dataset(gamma * self.X, self.y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    def __hash__(self):
        return hash((self.X.tobytes(), self.y.tobytes()))

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, p={self.p})"


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """A finitely supported data distribution: observation i has mass w_i."""

    dataset: Dataset
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.dataset.n
        w = np.full(n, 1.0 / n) if self.weights is None else np.array(self.weights, dtype=float)
        if w.shape != (n,) or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a nonnegative vector with one entry per observation")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, dataset: Dataset) -> "DiscreteDistribution":
        return cls(dataset, None)

    @cached_property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    @cached_property
    def second_moment(self) -> np.ndarray:
        X = self.dataset.X
        S = (X * self.weights[:, None]).T @ X
        return 0.5 * (S + S.T)

    @property
    def trace_sigma(self) -> float:
        X = self.dataset.X
        return float(np.sum(self.weights * np.sum(X * X, axis=1)))

    @property
    def radius_R(self) -> float:
        X = self.dataset.X
        return float(np.sqrt(np.max(np.sum(X * X, axis=1))))

    @cached_property
    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c

    def indices_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0,1) to observation indices (inverse CDF)."""
        if self.is_uniform:
            n = self.dataset.n
            return np.minimum((u * n).astype(np.int64), n - 1)
        return np.searchsorted(self.cumulative, u, side="right").clip(0, self.dataset.n - 1)


# ---------------------------------------------------------------- CSV

def fmt_float(x: float) -> str:
    """17-significant-digit rendering (exact round trip for doubles)."""
    return format(float(x), ".17g")


def _parse_label(text: str, row: int, zero_one: bool) -> int:
    try:
        v = float(text)
    except ValueError:
        raise BadLabel(row, text) from None
    allowed = (0.0, 1.0) if zero_one else (-1.0, 1.0)
    if v not in allowed:
        raise BadLabel(row, text)
    return 1 if v == 1.0 else -1


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def read_csv_text(text: str, label_column: int | str = -1, header: bool | None = None,
                  zero_one: bool = False) -> Dataset:
    """Parse CSV text; see :func:`load_csv`."""
    rows = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not rec or all(not c.strip() for c in rec) or rec[0].lstrip().startswith("#"):
            continue
        rows.append((lineno, [c.strip() for c in rec]))
    if not rows:
        raise ParseError(0, 0, "<empty file>")
    if header is None:
        header = isinstance(label_column, str) or not all(_is_number(c) for c in rows[0][1])
    names = None
    if header:
        names = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise ParseError(0, 0, "<no data rows>")
    width = len(rows[0][1])
    if isinstance(label_column, str):
        if names is None or label_column not in names:
            raise ValueError(f"label column {label_column!r} not found in header")
        lab = names.index(label_column)
    else:
        lab = int(label_column) % width
    X = np.empty((len(rows), width - 1))
    y = np.empty(len(rows), dtype=np.int8)
    for r, (lineno, rec) in enumerate(rows):
        if len(rec) != width:
            raise ParseError(lineno, min(len(rec), width) + 1, ",".join(rec))
        y[r] = _parse_label(rec[lab], lineno, zero_one)
        j = 0
        for c, cell in enumerate(rec):
            if c == lab:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(lineno, c + 1, cell) from None
            if not np.isfinite(v):
                raise ParseError(lineno, c + 1, cell)
            X[r, j] = v
            j += 1
    return Dataset(X, y)


def load_csv(path: str | os.PathLike, label_column: int | str = -1, header: bool | None = None,
             zero_one: bool = False) -> Dataset:
    """Read a comma-separated file into a Dataset.

    ``label_column`` is an index (negative counts from the end) or a header
    name.  ``header=None`` auto-detects a header from a non-numeric first
    row.  Lines starting with ``#`` are comments.  With ``zero_one`` the
    labels must be 0/1 and 0 maps to -1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return read_csv_text(fh.read(), label_column, header, zero_one)


def dataset_to_csv_text(dataset: Dataset, header: bool = True, comments: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for c in comments:
        out.write(f"# {c}\n")
    if header:
        out.write(",".join([f"x{j + 1}" for j in range(dataset.p)] + ["y"]) + "\n")
    for xi, yi in zip(dataset.X, dataset.y):
        out.write(",".join([fmt_float(v) for v in xi] + [str(int(yi))]) + "\n")
    return out.getvalue()


def write_csv(dataset: Dataset, path: str | os.PathLike, header: bool = True,
              comments: Sequence[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(dataset_to_csv_text(dataset, header, comments))


# ---------------------------------------------------------------- generators

def generate_logistic(n: int, p: int, beta_true, seed: int) -> Dataset:
    """Standard-normal features; P(y=+1 | x) = 1/(1+exp(-beta_true.x))."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    beta = np.broadcast_to(np.asarray(beta_true, dtype=float), (p,))
    X = np.empty((n, p))
    y = np.empty(n, dtype=np.int8)
    for i in range(n):
        rng = substream(seed, 0, i)
        X[i] = rng.standard_normal(p)
        u = rng.random()
        t = float(X[i] @ beta)
        # u < 1/(1+e^{-t}) written without overflow
        prob = 1.0 / (1.0 + np.exp(-t)) if t >= 0 else np.exp(t) / (1.0 + np.exp(t))
        y[i] = 1 if u < prob else -1
    return Dataset(X, y)


def planted_direction(p: int, seed: int) -> np.ndarray:
    """The unit vector planted by :func:`generate_planted_margin`."""
    rng = substream(seed, 1)
    b = rng.standard_normal(p)
    while not np.any(b):
        b = rng.standard_normal(p)
    return b / np.linalg.norm(b)


def generate_planted_margin(n: int, p: int, margin: float, seed: int, spread: float = 1.0,
                            slack_scale: float = 1.0) -> Dataset:
    """Separable data with ``min_i y_i b.x_i = margin`` for the planted unit b.

    Observation 0 attains the margin exactly; the others exceed it by
    ``slack_scale * |N(0,1)|``.  Orthogonal components are ``spread * N(0, I)``.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    b = planted_direction(p, seed)
    X = np.empty((n, p))
    y = np.empty(n, dtype=np.int8)
    for i in range(n):
        rng = substream(seed, 0, i)
        z = spread * rng.standard_normal(p)
        z -= (z @ b) * b
        yi = 1 if rng.random() < 0.5 else -1
        extra = 0.0 if i == 0 else slack_scale * abs(rng.standard_normal())
        X[i] = z + yi * (margin + extra) * b
        y[i] = yi
    return Dataset(X, y)


def ill_posed_fixture() -> Dataset:
    """Four points in R^3 where both condition numbers vanish."""
    X = [[1, 0, -1], [0, -1, 1], [-1, -2, 3], [2, 1, -3]]
    return Dataset(np.array(X, dtype=float), np.array([1, -1, 1, -1]))


def contradictory_pair() -> Dataset:
    """The 1-D pair {x=1, y=+1; x=1, y=-1}."""
    return Dataset(np.array([[1.0], [1.0]]), np.array([1, -1]))


def planted_pair() -> Dataset:
    """Rows (1,0) labelled +1 and (-1,0) labelled -1: max margin 1."""
    return Dataset(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1, -1]))
