"""Experiment drivers behind the command-line tools.

Every driver returns plain record dataclasses; CSV and Markdown renderers
consume the same records. Each cell draws its seed from
``derive_seed(master, *cell_key)``, so results do not depend on how cells
are scheduled across worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from . import baselines
from .datasets import NOISE_SIGMAS, SYNTHETIC, LabeledCloud, load_csv
from .errors import InvalidArgument
from .imaging import compare, raster, superpixel
from .similarity import cloud_distance
from .transfer import TransferConfig, derive_seed, prepare_trial, run_trial

REAL_FILES = {
    "banknotes": "data_banknote_authentication.txt",
    "pendigits": "pendigits.tra",
    "satimage": "sat.trn",
}
DATA_DIR_ENV = "MANIFOLDWALK_DATA_DIR"
FIGURE1_MEASURES = ("walk",) + tuple(m.value for m in baselines.MeasureKind)
PER_CLASS = (10, 20, 30, 40)
LEVELS = (1, 2, 3, 4)
STUDY_GRIDS = (10, 20, 30)


# --------------------------------------------------------------------------
# output helpers


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.6f}"
    return str(value)


def to_csv(records, record_type) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f.name for f in fields(record_type)])
    for rec in records:
        writer.writerow([format_value(v) for v in astuple(rec)])
    return buf.getvalue()


def to_markdown(records, record_type) -> str:
    names = [f.name for f in fields(record_type)]
    lines = ["| " + " | ".join(names) + " |", "|" + "---|" * len(names)]
    for rec in records:
        lines.append("| " + " | ".join(format_value(v) or "-" for v in astuple(rec)) + " |")
    return "\n".join(lines) + "\n"


def parallel_map(func, items, threads: int | None = None):
    """Ordered map, spread over ``threads`` worker processes when > 1."""
    items = list(items)
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(func, items))


# --------------------------------------------------------------------------
# datasets by name


def resolve_dataset(name: str, data_dir=None):
    """A synthetic generator name, or a loaded :class:`LabeledCloud`."""
    if name in SYNTHETIC:
        return name
    if name not in REAL_FILES:
        choices = ", ".join(SYNTHETIC + tuple(REAL_FILES))
        raise InvalidArgument(f"unknown dataset {name!r}; choose from {choices}")
    return load_csv(Path(require_data_dir(data_dir, [name])) / REAL_FILES[name])


def require_data_dir(data_dir, names):
    data_dir = data_dir or os.environ.get(DATA_DIR_ENV)
    needed = [REAL_FILES[n] for n in names if n in REAL_FILES]
    if data_dir is None:
        raise InvalidArgument(
            f"real datasets need --data-dir (or {DATA_DIR_ENV}) containing: " + ", ".join(needed))
    missing = [f for f in needed if not (Path(data_dir) / f).is_file()]
    if missing:
        raise InvalidArgument(f"missing data files in {data_dir}: " + ", ".join(missing))
    return data_dir


def expand_datasets(spec: str) -> list[str]:
    out = []
    for part in (p.strip() for p in spec.split(",")):
        if part == "synthetic":
            out.extend(SYNTHETIC)
        elif part == "real":
            out.extend(REAL_FILES)
        elif part:
            out.append(part)
    if not out:
        raise InvalidArgument("no datasets selected")
    return list(dict.fromkeys(out))


# --------------------------------------------------------------------------
# distance sweep over noise levels


@dataclass(frozen=True)
class Figure1Record:
    noise_level: int
    sigma: float
    measure: str
    mean_distance: float
    std: float
    seeds: int


def _figure1_cell(args):
    level, seed_index, master, n, k, cfg_kwargs = args
    seed = derive_seed(master, "figure1", seed_index)
    target, source = prepare_trial("swiss_roll", 1, level, seed, n=n)
    X1, X2 = target.X, source.X
    out = {"walk": cloud_distance(X1, X2, k=k, **cfg_kwargs).distance}
    for kind in baselines.MeasureKind:
        out[kind.value] = baselines.measure(kind, X1, X2)
    return out


def figure1(levels=(0,) + LEVELS, seeds: int = 20, seed: int = 0, n: int = 1000, k: int = 10,
            t=None, variant="rows", symmetrize=False, threads=None) -> list[Figure1Record]:
    """Distances between a standardised Swiss roll and its noisy copy.

    The noise draw for seed ``i`` is shared by all levels, so curves differ
    only through the noise scale.
    """
    cfg_kwargs = {"t": t, "variant": variant, "symmetrize": symmetrize}
    cells = [(lvl, i, seed, n, k, cfg_kwargs) for lvl in levels for i in range(seeds)]
    results = parallel_map(_figure1_cell, cells, threads)
    records = []
    for lvl in levels:
        per_level = [r for c, r in zip(cells, results) if c[0] == lvl]
        for name in FIGURE1_MEASURES:
            values = np.array([r[name] for r in per_level])
            records.append(Figure1Record(lvl, NOISE_SIGMAS[lvl], name,
                                         float(values.mean()), float(values.std()), len(values)))
    return records


# --------------------------------------------------------------------------
# transfer accuracy tables


@dataclass(frozen=True)
class CellResult:
    dataset: str
    per_class: int
    noise_level: int
    tl: tuple
    no_tl: tuple
    distances: tuple


@dataclass(frozen=True)
class TableRecord:
    dataset: str
    per_class: int
    noise_level: int
    sigma: float
    mean_acc_no_tl: float
    mean_acc_tl: float
    measured_distance: float
    gated_fraction: float
    iterations: int
    seed: int
    dt: float
    mean_acc_tl_ungated: float


def _table_cell(args):
    name, data, per_class, level, iterations, master, n, classes, cfg = args
    dataset = data if data is not None else name
    tl, base, dist = [], [], []
    for i in range(iterations):
        seed = derive_seed(master, name, per_class, i)
        tl_acc, base_acc, d, _ = run_trial(dataset, per_class, level, cfg, seed, n, classes)
        tl.append(tl_acc)
        base.append(base_acc)
        dist.append(d)
    return CellResult(name, per_class, level, tuple(tl), tuple(base), tuple(dist))


def run_cells(datasets, per_class=PER_CLASS, levels=LEVELS, iterations=20, seed=0, n=1000,
              classes=4, cfg: TransferConfig = TransferConfig(), data_dir=None,
              threads=None) -> list[CellResult]:
    """Ungated per-iteration results for every (dataset, per_class, level) cell.

    The seed of iteration ``i`` depends on (dataset, per_class, i) but not on
    the noise level: all levels see the same base cloud, mask and noise
    direction.
    """
    if iterations < 1:
        raise InvalidArgument("iterations must be >= 1")
    ungated = TransferConfig(**{**cfg.__dict__, "dt": math.inf})
    loaded = {}
    for name in datasets:
        value = resolve_dataset(name, data_dir)
        loaded[name] = value if isinstance(value, LabeledCloud) else None
    cells = [(name, loaded[name], pc, lvl, iterations, seed, n, classes, ungated)
             for name in datasets for pc in per_class for lvl in levels]
    return parallel_map(_table_cell, cells, threads)


def calibrate_dt(cells, level: int = 2) -> dict:
    """Largest level-``level`` distance of each (dataset, per_class) group."""
    out = {}
    for c in cells:
        if c.noise_level == level:
            out[(c.dataset, c.per_class)] = max(c.distances)
    return out


def _mean(values):
    return math.fsum(values) / len(values) if values else math.nan


def table_records(cells, dt="auto", seed: int = 0) -> list[TableRecord]:
    """Apply the gate and aggregate. ``dt`` is a number or ``"auto"``.

    Gated iterations are excluded from ``mean_acc_tl``, which is empty when
    every iteration is gated; ``mean_acc_tl_ungated`` always covers all of
    them.
    """
    thresholds = calibrate_dt(cells) if dt == "auto" else None
    records = []
    for c in cells:
        if thresholds is None:
            limit = float(dt)
        else:
            limit = thresholds.get((c.dataset, c.per_class), math.inf)
        kept = [a for a, d in zip(c.tl, c.distances) if d <= limit]
        gated = sum(d > limit for d in c.distances)
        records.append(TableRecord(
            dataset=c.dataset, per_class=c.per_class, noise_level=c.noise_level,
            sigma=NOISE_SIGMAS[c.noise_level], mean_acc_no_tl=_mean(c.no_tl),
            mean_acc_tl=_mean(kept), measured_distance=_mean(c.distances),
            gated_fraction=gated / len(c.distances), iterations=len(c.distances),
            seed=seed, dt=limit, mean_acc_tl_ungated=_mean(c.tl),
        ))
    return records


# --------------------------------------------------------------------------
# image studies


@dataclass(frozen=True)
class StudyRecord:
    grid_size: str
    n_segments: int
    distance: float


def superpixel_study(a, b, grids=STUDY_GRIDS, seed: int = 0, **distance_kwargs) -> list[StudyRecord]:
    """Distance between superpixel-centroid versions of an image pair for
    ``N = g * g`` segments per grid size ``g``, plus the unprocessed pair."""
    a, b = compare.prepare_pair(a, b, distance_kwargs.pop("max_pixels", compare.DEFAULT_MAX_PIXELS))
    records = [StudyRecord("original", a.shape[0] * a.shape[1],
                           compare.image_distance(a, b, max_pixels=None, **distance_kwargs).distance)]
    for g in grids:
        n_seg = g * g
        sa = superpixel.superpixel_centroid_image(a, n_seg, seed)
        sb = superpixel.superpixel_centroid_image(b, n_seg, seed)
        d = compare.image_distance(sa, sb, max_pixels=None, **distance_kwargs).distance
        records.append(StudyRecord(str(g), n_seg, d))
    return records


@dataclass(frozen=True)
class RankRecord:
    rank: int
    path: str
    distance: float


@dataclass(frozen=True)
class ClassRecord:
    label: str
    mean_distance: float
    count: int


def gallery_paths(directory) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise InvalidArgument(f"gallery {root} is not a directory")
    return sorted(p for p in root.rglob("*") if p.is_file() and raster.is_image_path(p))


def rank_gallery(reference, paths, n_segments=None, seed: int = 0, root=None,
                 **distance_kwargs) -> list[RankRecord]:
    """Gallery images ordered by distance to ``reference`` (ties by path).

    Gallery images are resized to the reference dimensions first; with
    ``n_segments`` both sides are superpixel-preprocessed.
    """
    if not paths:
        raise InvalidArgument("gallery contains no readable images (.png, .ppm)")
    ref = raster.as_image(reference)
    h, w = ref.shape[:2]
    if n_segments:
        ref = superpixel.superpixel_centroid_image(ref, n_segments, seed)
    scored = []
    for p in paths:
        img = raster.resize(raster.read_image(p), w, h)
        if n_segments:
            img = superpixel.superpixel_centroid_image(img, n_segments, seed)
        d = compare.image_distance(ref, img, **distance_kwargs).distance
        label = str(Path(p).relative_to(root)) if root is not None else str(p)
        scored.append((d, label))
    scored.sort()
    return [RankRecord(i + 1, label, d) for i, (d, label) in enumerate(scored)]


def class_averages(records) -> list[ClassRecord]:
    """Mean distance per first path component (subdirectory), ascending."""
    groups = {}
    for r in records:
        parts = Path(r.path).parts
        label = parts[0] if len(parts) > 1 else "."
        groups.setdefault(label, []).append(r.distance)
    out = [ClassRecord(label, _mean(v), len(v)) for label, v in groups.items()]
    return sorted(out, key=lambda c: (c.mean_distance, c.label))
