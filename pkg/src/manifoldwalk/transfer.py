"""Similarity-gated transfer learning with a k-neighbours vote over walk
embeddings, the plain k-NN baseline, and the repeated-trial experiment loop.

The classifier is transductive. Source rows, labeled target rows and
unlabeled target rows all become nodes of one k-NN graph. Its walk matrix
embeds every node. Each unlabeled target row then takes the majority label
of its ``k`` nearest training rows in that embedding.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from . import datasets as ds
from .datasets import LabeledCloud, PartialCloud
from .errors import DimensionMismatch, EmptyTrainingSet, InvalidArgument
from .graphs import k_smallest, knn_adjacency, spectral_radius
from .similarity import (
    DEFAULT_SAFETY,
    Variant,
    cloud_distance,
    embedding_distances,
    view,
    walk_matrix,
)


@dataclass(frozen=True)
class TransferConfig:
    """Knobs of the transfer classifier.

    ``k`` is shared by graph construction and the vote unless ``k_graph`` /
    ``k_vote`` override it. ``t=None`` derives the walk parameter from the
    spectral radius (``safety / rho``). ``dt`` is the gating threshold on
    the measured manifold distance; the default never gates.
    """

    k: int = 10
    t: float | None = None
    dt: float = math.inf
    variant: Variant = Variant.ROWS
    symmetrize: bool = False
    safety: float = DEFAULT_SAFETY
    joint_scale: bool = False
    k_graph: int | None = None
    k_vote: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.k < 1:
            raise InvalidArgument(f"k must be >= 1, got {self.k}")
        for name in ("k_graph", "k_vote"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InvalidArgument(f"{name} must be >= 1, got {value}")
        if not self.dt >= 0:
            raise InvalidArgument(f"dt must be >= 0, got {self.dt}")
        if self.t is not None and not (math.isfinite(self.t) and self.t > 0):
            raise InvalidArgument(f"t must be a positive number or None, got {self.t}")
        if not 0.0 < self.safety < 1.0:
            raise InvalidArgument(f"safety must lie in (0, 1), got {self.safety}")

    @property
    def graph_k(self) -> int:
        return self.k_graph or self.k

    @property
    def vote_k(self) -> int:
        return self.k_vote or self.k


@dataclass(frozen=True, eq=False)
class TransferOutcome:
    gated: bool
    predictions: np.ndarray | None
    measured_distance: float


@dataclass(frozen=True)
class AccuracyReport:
    mean_accuracy: float
    per_iteration: tuple
    iterations: int

    @classmethod
    def from_accuracies(cls, values) -> "AccuracyReport":
        values = tuple(float(v) for v in values)
        mean = math.fsum(values) / len(values) if values else math.nan
        return cls(mean_accuracy=mean, per_iteration=values, iterations=len(values))


def knn_vote(D, train_labels, k: int, n_classes: int | None = None) -> np.ndarray:
    """Majority label among the ``k`` smallest entries of each row of ``D``.

    Distance ties go to the lower column index, vote ties to the lower class.
    """
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if D.shape[1] == 0:
        raise EmptyTrainingSet("no training rows to vote with")
    k = min(k, D.shape[1])
    if n_classes is None:
        n_classes = int(train_labels.max()) + 1
    nearest = k_smallest(D, k)
    votes = train_labels[nearest]
    counts = np.zeros((len(D), n_classes), dtype=np.int64)
    for c in range(n_classes):
        counts[:, c] = (votes == c).sum(axis=1)
    return counts.argmax(axis=1)


def mean_accuracy(predictions, truth) -> float:
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape or predictions.ndim != 1:
        raise DimensionMismatch("prediction/truth lengths differ", predictions.shape, truth.shape)
    if len(truth) == 0:
        raise InvalidArgument("cannot score an empty prediction vector")
    return float(np.mean(predictions == truth))


def _scale_pair(source_X, target_X, joint):
    if not joint:
        return ds.minmax_scale(source_X), ds.minmax_scale(target_X)
    both = ds.minmax_scale(np.vstack([source_X, target_X]))
    return both[: len(source_X)], both[len(source_X):]


def gate_distance(target: PartialCloud, source: LabeledCloud, cfg: TransferConfig) -> float:
    """Manifold distance between the k-NN graphs of the two raw clouds."""
    result = cloud_distance(
        target.X, source.X, k=cfg.graph_k, t=cfg.t, variant=cfg.variant,
        symmetrize=cfg.symmetrize, safety=cfg.safety,
    )
    return result.distance


def _check_pair(target, source):
    if target.X.shape[1] != source.X.shape[1]:
        raise DimensionMismatch("feature dimensions differ", target.X.shape[1], source.X.shape[1])
    if target.n != source.n:
        raise DimensionMismatch("source and target row counts differ; subsample first", target.n, source.n)


def transfer_classify(target: PartialCloud, source: LabeledCloud,
                      cfg: TransferConfig = TransferConfig()) -> TransferOutcome:
    """Label the unlabeled target rows using the fully labeled ``source``.

    Returns a gated outcome without predictions when the measured distance
    between the two clouds exceeds ``cfg.dt``.
    """
    _check_pair(target, source)
    if source.n == 0 and not target.labeled_mask.any():
        raise EmptyTrainingSet("neither source rows nor labeled target rows available")

    distance = gate_distance(target, source, cfg)
    if distance > cfg.dt:
        return TransferOutcome(gated=True, predictions=None, measured_distance=distance)

    S, T = _scale_pair(source.X, target.X, cfg.joint_scale)
    union = np.vstack([S, T])
    n_src = source.n
    A = knn_adjacency(union, cfg.graph_k, cfg.symmetrize)
    rho = spectral_radius(A)
    t = cfg.t if cfg.t is not None else cfg.safety / max(rho, 1e-12)
    E = view(walk_matrix(A, t, rho=rho), cfg.variant)

    train = np.concatenate([np.arange(n_src), n_src + target.labeled_idx])
    train_y = np.concatenate([source.y, target.known_labels])
    query = n_src + target.unlabeled_idx
    n_classes = max(source.n_classes, target.n_classes)
    if len(query) == 0:
        predictions = np.empty(0, dtype=np.int64)
    else:
        D = embedding_distances(E, query, train)
        predictions = knn_vote(D, train_y, cfg.vote_k, n_classes)
    return TransferOutcome(gated=False, predictions=predictions, measured_distance=distance)


def baseline_classify(target: PartialCloud, k: int = 10) -> np.ndarray:
    """Euclidean k-NN on min-max scaled features, trained on labeled rows only."""
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    labeled = target.labeled_idx
    if len(labeled) == 0:
        raise EmptyTrainingSet("target has no labeled rows")
    X = ds.minmax_scale(target.X)
    unlabeled = target.unlabeled_idx
    if len(unlabeled) == 0:
        return np.empty(0, dtype=np.int64)
    D = cdist(X[unlabeled], X[labeled])
    return knn_vote(D, target.known_labels, k, target.n_classes)


# --------------------------------------------------------------------------
# experiment loop


class ExperimentOutcome(NamedTuple):
    tl: AccuracyReport
    no_tl: AccuracyReport
    distances: tuple
    gated: tuple


def derive_seed(master: int, *key) -> np.random.SeedSequence:
    """Deterministic child seed for a cell identified by ``key``.

    Strings are hashed with CRC-32 so the result is stable across processes
    and Python versions.
    """
    entropy = [int(master)]
    for part in key:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode("utf-8")))
        else:
            entropy.append(int(part))
    return np.random.SeedSequence(entropy)


def _as_seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        # rebuild so spawning never depends on earlier spawns of the caller's object
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    return np.random.SeedSequence(seed)


def prepare_trial(dataset, per_class: int, noise_level: int, seed, n: int = 1000, classes: int = 4):
    """Build one (target, source) pair following the noise protocol.

    The base cloud is drawn (or subsampled from real data) and standardised;
    the target is that cloud with all but ``per_class`` labels per class
    hidden, the source is a fully labeled copy with noise added.
    Independent child streams are used for the data, the noise and the
    mask, so changing ``noise_level`` alone only rescales the same noise.
    """
    data_ss, noise_ss, mask_ss = _as_seed_sequence(seed).spawn(3)
    if isinstance(dataset, LabeledCloud):
        base = ds.subsample(dataset, min(n, dataset.n), seed=data_ss)
    else:
        base = ds.generate(dataset, n=n, classes=classes, seed=data_ss)
    X = ds.standardize(base.X)
    source = LabeledCloud(ds.add_noise(X, ds.NoiseSpec(noise_level), seed=noise_ss), base.y)
    target = ds.mask_labels(LabeledCloud(X, base.y), per_class, seed=mask_ss)
    return target, source


def run_trial(dataset, per_class, noise_level, cfg, seed, n=1000, classes=4):
    """One iteration: returns ``(tl_accuracy or None, no_tl_accuracy, distance, gated)``."""
    target, source = prepare_trial(dataset, per_class, noise_level, seed, n, classes)
    truth = target.truth[target.unlabeled_idx]
    outcome = transfer_classify(target, source, cfg)
    base_acc = mean_accuracy(baseline_classify(target, cfg.vote_k), truth)
    tl_acc = None if outcome.gated else mean_accuracy(outcome.predictions, truth)
    return tl_acc, base_acc, outcome.measured_distance, outcome.gated


def run_experiment(dataset, per_class: int, noise_level: int, iterations: int = 20,
                   cfg: TransferConfig = TransferConfig(), seed=0, n: int = 1000,
                   classes: int = 4) -> ExperimentOutcome:
    """Repeat :func:`run_trial` with per-iteration seeds spawned from ``seed``.

    ``dataset`` is a synthetic generator name or a :class:`LabeledCloud`.
    Gated iterations contribute to the no-TL report only.
    """
    if iterations < 1:
        raise InvalidArgument("iterations must be >= 1")
    children = _as_seed_sequence(seed).spawn(iterations)
    tl, base, dist, gated = [], [], [], []
    for child in children:
        tl_acc, base_acc, d, g = run_trial(dataset, per_class, noise_level, cfg, child, n, classes)
        if tl_acc is not None:
            tl.append(tl_acc)
        base.append(base_acc)
        dist.append(d)
        gated.append(g)
    return ExperimentOutcome(
        tl=AccuracyReport.from_accuracies(tl),
        no_tl=AccuracyReport.from_accuracies(base),
        distances=tuple(dist),
        gated=tuple(gated),
    )
