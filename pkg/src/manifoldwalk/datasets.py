"""Synthetic manifold generators, tabular ingestion and the noise / label
masking protocol used by the transfer experiments.

Point clouds are plain ``(n, d)`` float arrays. Row order is node identity
everywhere in this package, so nothing here reorders rows unless the
function says so.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, EmptyDataError, InvalidArgument

NOISE_SIGMAS = (0.0, 0.078, 0.29, 0.64, 1.0)

SYNTHETIC = ("swiss_roll", "moons", "s_curve")


def as_cloud(X) -> np.ndarray:
    """Validate and return ``X`` as a 2-D float64 array with finite entries."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidArgument(f"point cloud must be a non-empty (n, d) matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidArgument("point cloud contains NaN or Inf")
    return X


@dataclass(frozen=True, eq=False)
class LabeledCloud:
    """Features ``X`` with contiguous integer labels ``y`` in ``[0, C)``.

    ``param`` optionally carries the generating manifold coordinate of each
    row (synthetic data only).
    """

    X: np.ndarray
    y: np.ndarray
    param: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        X = as_cloud(self.X)
        y = np.asarray(self.y)
        if y.ndim != 1 or len(y) != len(X):
            raise InvalidArgument(f"labels length {y.shape} does not match {len(X)} rows")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise InvalidArgument("labels must be integers")
        y = y.astype(np.int64)
        if y.min() < 0 or len(np.unique(y)) != y.max() + 1:
            raise InvalidArgument("labels must cover every class id in [0, C)")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.X)

    @property
    def n_classes(self) -> int:
        return int(self.y.max()) + 1

    def with_features(self, X) -> "LabeledCloud":
        return LabeledCloud(X, self.y, self.param)


@dataclass(frozen=True, eq=False)
class PartialCloud:
    """A cloud where only ``labeled_mask`` rows expose their label.

    ``truth`` holds every row's real class and exists only so experiments can
    score predictions; classifiers must read labels through ``known_labels``.
    """

    X: np.ndarray
    truth: np.ndarray = field(repr=False)
    labeled_mask: np.ndarray

    def __post_init__(self):
        X = as_cloud(self.X)
        mask = np.asarray(self.labeled_mask, dtype=bool)
        truth = np.asarray(self.truth, dtype=np.int64)
        if mask.shape != (len(X),) or truth.shape != (len(X),):
            raise InvalidArgument("labels and mask must have one entry per row")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "labeled_mask", mask)

    @property
    def n(self) -> int:
        return len(self.X)

    @property
    def n_classes(self) -> int:
        return int(self.truth.max()) + 1

    @property
    def labeled_idx(self) -> np.ndarray:
        return np.flatnonzero(self.labeled_mask)

    @property
    def unlabeled_idx(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)

    @property
    def known_labels(self) -> np.ndarray:
        """Labels of the labeled rows, in ``labeled_idx`` order."""
        return self.truth[self.labeled_mask]


@dataclass(frozen=True)
class NoiseSpec:
    level: int

    def __post_init__(self):
        if self.level not in range(len(NOISE_SIGMAS)):
            raise InvalidArgument(f"noise level must be in 0..{len(NOISE_SIGMAS) - 1}, got {self.level}")

    @property
    def sigma(self) -> float:
        return NOISE_SIGMAS[self.level]


# --------------------------------------------------------------------------
# generators


def _stratified_param(n, lo, hi, rng):
    # one draw per equal-width stratum, then shuffled so rows are not sorted by u
    u = lo + (np.arange(n) + rng.random(n)) / n * (hi - lo)
    return u[rng.permutation(n)]


def _quantize(u, lo, hi, classes):
    y = np.floor(classes * (u - lo) / (hi - lo)).astype(np.int64)
    return np.clip(y, 0, classes - 1)


def _check_counts(n, classes):
    if classes < 2:
        raise InvalidArgument(f"classes must be >= 2, got {classes}")
    if n < classes:
        raise InvalidArgument(f"n={n} is smaller than classes={classes}")


def gen_swiss_roll(n: int = 1000, classes: int = 4, seed=None) -> LabeledCloud:
    """3-D Swiss roll ``(u cos u, h, u sin u)`` with ``u`` in ``[1.5pi, 4.5pi]``
    and ``h`` in ``[0, 21]``. Classes are equal-width bins of ``u``."""
    _check_counts(n, classes)
    rng = np.random.default_rng(seed)
    lo, hi = 1.5 * np.pi, 4.5 * np.pi
    u = _stratified_param(n, lo, hi, rng)
    h = 21.0 * rng.random(n)
    X = np.column_stack([u * np.cos(u), h, u * np.sin(u)])
    return LabeledCloud(X, _quantize(u, lo, hi, classes), param=u)


def gen_s_curve(n: int = 1000, classes: int = 4, seed=None) -> LabeledCloud:
    """S-curve ``(sin u, h, sign(u)(cos u - 1))``, ``u`` in ``[-1.5pi, 1.5pi]``,
    ``h`` in ``[0, 2]``; classes are equal-width bins of ``u``."""
    _check_counts(n, classes)
    rng = np.random.default_rng(seed)
    lo, hi = -1.5 * np.pi, 1.5 * np.pi
    u = _stratified_param(n, lo, hi, rng)
    h = 2.0 * rng.random(n)
    X = np.column_stack([np.sin(u), h, np.sign(u) * (np.cos(u) - 1.0)])
    return LabeledCloud(X, _quantize(u, lo, hi, classes), param=u)


def gen_moons(n: int = 1000, seed=None) -> LabeledCloud:
    """Two interleaving half circles; class 0 gets ``ceil(n/2)`` points."""
    if n < 2:
        raise InvalidArgument(f"moons needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    n0 = (n + 1) // 2
    n1 = n - n0
    theta = np.pi * rng.random(n)
    t0, t1 = theta[:n0], theta[n0:]
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    X = np.vstack([upper, lower])
    y = np.concatenate([np.zeros(n0, np.int64), np.ones(n1, np.int64)])
    order = rng.permutation(n)
    return LabeledCloud(X[order], y[order], param=theta[order])


def generate(name: str, n: int = 1000, classes: int = 4, seed=None) -> LabeledCloud:
    if name == "swiss_roll":
        return gen_swiss_roll(n, classes, seed)
    if name == "s_curve":
        return gen_s_curve(n, classes, seed)
    if name == "moons":
        return gen_moons(n, seed)
    raise InvalidArgument(f"unknown synthetic dataset {name!r}; choose from {', '.join(SYNTHETIC)}")


# --------------------------------------------------------------------------
# transformations


def add_noise(X, spec, seed=None) -> np.ndarray:
    """Add i.i.d. ``N(0, sigma^2)`` noise to every entry of ``X``.

    ``spec`` is a :class:`NoiseSpec` or a bare level. Level 0 returns an
    exact copy.
    """
    X = as_cloud(X)
    if not isinstance(spec, NoiseSpec):
        spec = NoiseSpec(int(spec))
    if spec.sigma == 0.0:
        return X.copy()
    rng = np.random.default_rng(seed)
    return X + spec.sigma * rng.standard_normal(X.shape)


def minmax_scale(X) -> np.ndarray:
    """Map every feature affinely onto ``[0, 1]``; constant features become 0."""
    X = as_cloud(X)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    const = span == 0
    span[const] = 1.0
    out = (X - lo) / span
    out[:, const] = 0.0
    # guard against 1 + eps from rounding
    return np.clip(out, 0.0, 1.0)


def standardize(X) -> np.ndarray:
    """Zero-mean, unit-variance features (constant features become 0).

    The experiment protocol applies this to the base dataset before adding
    noise so that a noise level means the same thing on every dataset.
    """
    X = as_cloud(X)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - X.mean(axis=0)) / sd


def mask_labels(cloud: LabeledCloud, per_class: int, seed=None) -> PartialCloud:
    """Keep exactly ``per_class`` labels per class, sampled without replacement."""
    if per_class < 0:
        raise InvalidArgument("per_class must be non-negative")
    rng = np.random.default_rng(seed)
    mask = np.zeros(cloud.n, dtype=bool)
    for c in range(cloud.n_classes):
        members = np.flatnonzero(cloud.y == c)
        if len(members) < per_class:
            raise InvalidArgument(
                f"class {c} has {len(members)} members, fewer than per_class={per_class}"
            )
        mask[rng.choice(members, size=per_class, replace=False)] = True
    return PartialCloud(cloud.X, cloud.y, mask)


def _allocate(counts, n):
    """Largest-remainder allocation of ``n`` draws proportional to ``counts``."""
    total = counts.sum()
    exact = counts * n / total
    alloc = np.floor(exact).astype(np.int64)
    remainder = n - alloc.sum()
    # largest fractional part first, lower class id on ties
    order = np.lexsort((np.arange(len(counts)), -(exact - alloc)))
    alloc[order[:remainder]] += 1
    # keep every class represented when there is room for it
    if n >= len(counts):
        for c in np.flatnonzero(alloc == 0):
            donor = int(np.argmax(alloc))
            alloc[donor] -= 1
            alloc[c] += 1
    return alloc


def subsample(cloud: LabeledCloud, n: int, seed=None) -> LabeledCloud:
    """Class-stratified sample of ``n`` rows, returned in original row order."""
    if n > cloud.n:
        raise InvalidArgument(f"cannot subsample {n} rows from a cloud of {cloud.n}")
    if n < 1:
        raise InvalidArgument("subsample size must be >= 1")
    if n == cloud.n:
        return cloud
    rng = np.random.default_rng(seed)
    counts = np.bincount(cloud.y, minlength=cloud.n_classes)
    alloc = _allocate(counts, n)
    picked = [
        rng.choice(np.flatnonzero(cloud.y == c), size=int(a), replace=False)
        for c, a in enumerate(alloc)
        if a > 0
    ]
    idx = np.sort(np.concatenate(picked))
    y = cloud.y[idx]
    # re-encode in case a class vanished (only possible when n < C)
    _, y = np.unique(y, return_inverse=True)
    param = None if cloud.param is None else cloud.param[idx]
    return LabeledCloud(cloud.X[idx], y, param)


# --------------------------------------------------------------------------
# delimited text


def _parse_float(cell):
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _split_rows(path):
    text = Path(path).read_text(encoding="utf-8-sig")
    lines = [(i, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise EmptyDataError("file contains no data", path=path)
    if "," in lines[0][1]:
        reader = csv.reader([ln for _, ln in lines])
        rows = [[c.strip() for c in r] for r in reader]
    else:
        rows = [ln.split() for _, ln in lines]
    return [i for i, _ in lines], rows


def load_csv(path, label_column=-1) -> LabeledCloud:
    """Read a comma- or whitespace-separated table.

    ``label_column`` is a header name or a 0-based (possibly negative) index.
    A first row whose feature cells are not all numeric is treated as a
    header. Labels may be any strings; they are re-encoded to ``[0, C)`` in
    sorted order (numeric order when every label parses as a number).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    line_numbers, rows = _split_rows(path)
    width = len(rows[0])

    header = None
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        header = rows[0]
        if label_column not in header:
            raise DataFormatError(f"label column {label_column!r} not in header {header}", path=path, row=0)
        col = header.index(label_column)
    else:
        col = int(label_column)
        if not -width <= col < width:
            raise DataFormatError(f"label column index {col} out of range for {width} columns", path=path)
        col %= width
        feature_cells = [c for j, c in enumerate(rows[0]) if j != col]
        if not all(_parse_float(c) is not None for c in feature_cells):
            header = rows[0]
    body = rows[1:] if header is not None else rows
    body_lines = line_numbers[1:] if header is not None else line_numbers
    if not body:
        raise EmptyDataError("file has a header but no data rows", path=path)
    if width < 2:
        raise DataFormatError("need at least one feature column besides the label", path=path, row=0)

    features = np.empty((len(body), width - 1))
    raw_labels = []
    for r, (lineno, row) in enumerate(zip(body_lines, body)):
        if len(row) != width:
            raise DataFormatError(f"expected {width} cells, found {len(row)}", path=path, row=lineno)
        k = 0
        for j, cell in enumerate(row):
            if j == col:
                raw_labels.append(cell)
                continue
            value = _parse_float(cell)
            if value is None:
                raise DataFormatError(f"non-numeric feature value {cell!r}", path=path, row=lineno, column=j)
            features[r, k] = value
            k += 1

    numeric = [_parse_float(c) for c in raw_labels]
    if all(v is not None for v in numeric):
        keys = numeric
    else:
        keys = raw_labels
    classes = sorted(set(keys))
    lookup = {c: i for i, c in enumerate(classes)}
    y = np.array([lookup[k] for k in keys], dtype=np.int64)
    return LabeledCloud(features, y)

