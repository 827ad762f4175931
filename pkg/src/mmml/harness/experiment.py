"""Random gallery/probe evaluation, sweeps and report formatting.

Seeding
    Fold ``k`` of an experiment with seed ``s`` draws its partition from
    ``numpy.random.default_rng([s, k])``. Nothing else is random, so folds can
    run in any order or in parallel with identical results, and every point
    of a sweep sees the same partitions.

Report format (``format_report``)
    Line oriented. ``key=value`` lines for the resolved configuration
    (``config.*``) and the summary (``mean``, ``std``); CSV blocks introduced
    by a header line for per-fold results (``fold,accuracy,correct,total``)
    and the confusion counts (``confusion,true,predicted,count``). Floats use
    Python's shortest round-trip ``repr``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import MMMLError, PreconditionError, ProtocolError
from ..kernels import LOG_EUCLIDEAN, PROJECTION
from ..metric_learning import (DEFAULT_DZ, DEFAULT_EPS, DEFAULT_U, classify, fit)
from ..set_modeling import DEFAULT_ALPHA, DEFAULT_Q, ImageSet, model_set

MODEL_ALIASES = {"spd": LOG_EUCLIDEAN, "grassmann": PROJECTION,
                 LOG_EUCLIDEAN: LOG_EUCLIDEAN, PROJECTION: PROJECTION}
SWEEP_AXES = ("u2_given_u1", "u1_given_u2", "d_z", "q")
REPORT_VERSION = 1


@dataclass(frozen=True)
class SplitConfig:
    """How each fold splits every class into gallery and probe sets.

    ``gallery_per_class`` may be ``"one"`` (one gallery set per class);
    ``probe_per_class`` may be ``"rest"`` (every set not in the gallery).
    """

    gallery_per_class: Union[int, str] = 5
    probe_per_class: Union[int, str] = "rest"
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        g = self.gallery_per_class
        if g == "one":
            g = 1
        if not isinstance(g, (int, np.integer)) or g < 1:
            raise PreconditionError(f"gallery_per_class must be a positive integer or 'one', got {g!r}")
        p = self.probe_per_class
        if p != "rest" and (not isinstance(p, (int, np.integer)) or p < 1):
            raise PreconditionError(f"probe_per_class must be a positive integer or 'rest', got {p!r}")
        if self.folds < 1:
            raise PreconditionError(f"folds must be >= 1, got {self.folds}")
        if self.seed < 0:
            raise PreconditionError(f"seed must be non-negative, got {self.seed}")

    @property
    def n_gallery(self) -> int:
        return 1 if self.gallery_per_class == "one" else int(self.gallery_per_class)


@dataclass(frozen=True)
class Hyper:
    q: int = DEFAULT_Q
    alpha: float = DEFAULT_ALPHA
    u: Tuple[float, ...] = DEFAULT_U
    d_z: int = DEFAULT_DZ
    eps: float = DEFAULT_EPS
    models: Tuple[str, ...] = ("spd", "grassmann")
    normalize_kernels: bool = False

    @property
    def kinds(self) -> Tuple[str, ...]:
        try:
            return tuple(MODEL_ALIASES[m] for m in self.models)
        except KeyError as exc:
            raise PreconditionError(f"unknown model {exc.args[0]!r}; use 'spd' or 'grassmann'") from None

    def weights(self) -> Tuple[float, ...]:
        """Weights of the selected models (``u`` is indexed spd, grassmann)."""
        kinds = self.kinds
        if len(self.u) == 2:
            by_kind = dict(zip((LOG_EUCLIDEAN, PROJECTION), self.u))
        elif len(self.u) == len(kinds):
            by_kind = dict(zip(kinds, self.u))
        else:
            raise PreconditionError(f"{len(self.u)} weights for models {self.models}")
        return tuple(float(by_kind[k]) for k in kinds)


@dataclass
class ExperimentReport:
    per_fold_accuracy: List[float]
    per_fold_counts: List[Tuple[int, int]]
    mean: float
    std: float
    config_echo: Dict[str, str]
    confusion: Dict[Tuple[str, str], int] = field(default_factory=dict)


def summarize(accuracies: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample standard deviation (0.0 for a single fold)."""
    acc = np.asarray(accuracies, dtype=float)
    mean = float(np.mean(acc))
    std = float(np.std(acc, ddof=1)) if acc.size > 1 else 0.0
    return mean, std


def partition(labels: Sequence, split: SplitConfig, fold: int):
    """Gallery and probe indices for one fold.

    Classes are visited in sorted order; each class's members are permuted
    by the fold's generator and the first ``gallery_per_class`` go to the
    gallery, the next ``probe_per_class`` (or all remaining) to the probes.
    Both index lists are returned in ascending order.
    """
    rng = np.random.default_rng([split.seed, fold])
    labels = list(labels)
    gallery, probe = [], []
    n_gal = split.n_gallery
    for cls in sorted(set(labels), key=str):
        members = [i for i, lab in enumerate(labels) if lab == cls]
        n_probe = len(members) - n_gal if split.probe_per_class == "rest" else int(split.probe_per_class)
        if n_probe < 1 or n_gal + n_probe > len(members):
            raise ProtocolError(
                f"infeasible split for class {cls!r}: {len(members)} set(s) available, "
                f"{n_gal} gallery + {split.probe_per_class} probe requested"
            )
        perm = rng.permutation(len(members))
        gallery.extend(members[i] for i in perm[:n_gal])
        probe.extend(members[i] for i in perm[n_gal:n_gal + n_probe])
    return sorted(gallery), sorted(probe)


def model_all(sets: Sequence[ImageSet], q: int, alpha: float):
    """Model each set on both manifolds; errors name the offending set."""
    out = []
    for s in sets:
        try:
            out.append(model_set(s, q, alpha))
        except MMMLError as exc:
            raise type(exc)(f"set {s.set_id!r}: {exc}") from exc
    return out


def _run_fold(points, labels, split, hyper, fold):
    gallery, probe = partition(labels, split, fold)
    kinds = hyper.kinds
    try:
        model = fit(
            [points[i][0] for i in gallery], [points[i][1] for i in gallery],
            [labels[i] for i in gallery], hyper.weights(), hyper.d_z, hyper.eps,
            kinds=kinds, q=hyper.q, alpha=hyper.alpha, normalize=hyper.normalize_kernels,
        )
        predictions = [classify(model, points[i][0], points[i][1])[0] for i in probe]
    except MMMLError as exc:
        raise type(exc)(f"fold {fold}: {exc}") from exc
    truth = [labels[i] for i in probe]
    return truth, predictions


def config_echo(split: SplitConfig, hyper: Hyper, n_sets: int, n_classes: int) -> Dict[str, str]:
    return {
        "sets": str(n_sets),
        "classes": str(n_classes),
        "gallery_per_class": str(split.gallery_per_class),
        "probe_per_class": str(split.probe_per_class),
        "folds": str(split.folds),
        "seed": str(split.seed),
        "q": str(hyper.q),
        "alpha": repr(float(hyper.alpha)),
        "u": ",".join(repr(float(x)) for x in hyper.weights()),
        "d_z": str(hyper.d_z),
        "eps": repr(float(hyper.eps)),
        "models": ",".join(hyper.models),
        "normalize_kernels": str(bool(hyper.normalize_kernels)).lower(),
    }


def evaluate(points, labels: Sequence, split: SplitConfig, hyper: Hyper,
             jobs: int = 1) -> ExperimentReport:
    """Run every fold on already-modeled sets (see :func:`run_experiment`)."""
    labels = list(labels)

    def one(fold):
        return _run_fold(points, labels, split, hyper, fold)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(split.folds)))
    else:
        results = [one(k) for k in range(split.folds)]

    accuracies, counts = [], []
    confusion: Dict[Tuple[str, str], int] = {}
    for truth, pred in results:
        correct = sum(t == p for t, p in zip(truth, pred))
        counts.append((correct, len(truth)))
        accuracies.append(correct / len(truth))
        for t, p in zip(truth, pred):
            key = (str(t), str(p))
            confusion[key] = confusion.get(key, 0) + 1
    mean, std = summarize(accuracies)
    echo = config_echo(split, hyper, len(labels), len(set(labels)))
    return ExperimentReport(accuracies, counts, mean, std, echo, dict(sorted(confusion.items())))


def run_experiment(sets: Sequence[ImageSet], split: SplitConfig, hyper: Hyper = Hyper(),
                   jobs: int = 1) -> ExperimentReport:
    """Repeated random gallery/probe evaluation.

    Every set is modeled once; each fold then draws its partition, trains on
    the gallery and classifies every probe by nearest neighbor. Accuracy is
    the fraction of correctly labeled probes in the fold.
    """
    labels = [s.label for s in sets]
    for k in range(split.folds):
        partition(labels, split, k)
    points = model_all(sets, hyper.q, hyper.alpha)
    return evaluate(points, labels, split, hyper, jobs)


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean: float
    std: float


def sweep(sets: Sequence[ImageSet], split: SplitConfig, axis: str, grid: Sequence,
          hyper: Hyper = Hyper(), jobs: int = 1) -> List[SweepRow]:
    """Evaluate one hyperparameter over ``grid`` with identical fold seeds.

    ``u2_given_u1`` keeps ``hyper.u[0]`` and varies the Grassmann weight,
    ``u1_given_u2`` keeps ``hyper.u[1]`` and varies the SPD weight; ``d_z``
    and ``q`` vary the embedding and subspace dimensions.
    """
    if axis not in SWEEP_AXES:
        raise PreconditionError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if not len(grid):
        raise PreconditionError("sweep grid is empty")
    labels = [s.label for s in sets]
    points = None if axis == "q" else model_all(sets, hyper.q, hyper.alpha)
    rows = []
    for value in grid:
        if axis == "u2_given_u1":
            h = replace(hyper, u=(hyper.u[0], float(value)), models=("spd", "grassmann"))
        elif axis == "u1_given_u2":
            h = replace(hyper, u=(float(value), hyper.u[1]), models=("spd", "grassmann"))
        elif axis == "d_z":
            h = replace(hyper, d_z=int(value))
        else:
            h = replace(hyper, q=int(value))
        pts = points if points is not None else model_all(sets, h.q, h.alpha)
        report = evaluate(pts, labels, split, h, jobs)
        rows.append(SweepRow(float(value), report.mean, report.std))
    return rows


def format_report(report: ExperimentReport) -> str:
    lines = [f"# mmml report v{REPORT_VERSION}"]
    lines += [f"config.{k}={v}" for k, v in report.config_echo.items()]
    lines.append("fold,accuracy,correct,total")
    for k, (acc, (correct, total)) in enumerate(zip(report.per_fold_accuracy, report.per_fold_counts)):
        lines.append(f"{k},{acc!r},{correct},{total}")
    lines.append(f"mean={report.mean!r}")
    lines.append(f"std={report.std!r}")
    lines.append("confusion,true,predicted,count")
    for (t, p), n in report.confusion.items():
        lines.append(f"confusion,{t},{p},{n}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> ExperimentReport:
    """Inverse of :func:`format_report`."""
    config, accs, counts, confusion = {}, [], [], {}
    mean = std = math.nan
    section = None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        if line == "fold,accuracy,correct,total":
            section = "folds"
        elif line == "confusion,true,predicted,count":
            section = "confusion"
        elif line.startswith("config."):
            key, _, value = line[len("config."):].partition("=")
            config[key] = value
        elif line.startswith("mean="):
            mean = float(line[5:])
        elif line.startswith("std="):
            std = float(line[4:])
        elif section == "folds":
            _, acc, correct, total = line.split(",")
            accs.append(float(acc))
            counts.append((int(correct), int(total)))
        elif section == "confusion":
            _, t, p, n = line.split(",")
            confusion[(t, p)] = int(n)
    return ExperimentReport(accs, counts, mean, std, config, confusion)


def format_sweep(axis: str, rows: Sequence[SweepRow], echo: Optional[Dict[str, str]] = None) -> str:
    lines = [f"# mmml sweep v{REPORT_VERSION}", f"axis={axis}"]
    if echo:
        lines += [f"config.{k}={v}" for k, v in echo.items()]
    lines.append("value,mean,std")
    lines += [f"{r.value!r},{r.mean!r},{r.std!r}" for r in rows]
    return "\n".join(lines) + "\n"
