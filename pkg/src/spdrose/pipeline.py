"""End-to-end experiment pipeline and its on-disk formats.

A dataset manifest lists labeled entries that are either precomputed
matrix files or images to be expanded into grid covariance descriptors
at load time.  An experiment config holds the split rule (per-class
train count, repetitions, seed), hyperparameter candidates, and
classifier settings; its JSON file mirrors the dataclass field for
field.

Each repetition draws a fresh seeded per-class train/test split.  When
more than one (sigma, k policy, synthetic count) combination is
configured, a 20% per-class validation fold is carved out of the
training split, every combination is scored on it, and the winner is
retrained on the remaining training points; with a single combination
no fold is carved and the full training split is used.  Synthetic
points, when requested, are generated around the Karcher mean of the
hyperplane-construction set as one unlabeled pool; they enlarge that
set only and never reach the classifier, whose labeled training data is
untouched.  Runs with a zero synthetic count are tagged "ROSE" and
augmented runs "ROSES" in reports.

The degradation study reruns the same single-repetition pipeline for
every combination of excluded classes: hyperplanes are built without
the excluded classes' training points while the classifier still trains
on every class.  The augmented arm spends a constant synthetic budget
drawn from the surviving points, so its pool stays comparable as
classes disappear.  With zero exclusions each arm reproduces
``run_experiment`` for the matching synthetic count bit for bit.

Every stage draws randomness through the chain ``config.seed ->
repetition -> stage``, so reports are identical across runs and
machines once timing fields are stripped.  Accuracy values are
serialized as exact decimal strings to keep report bytes stable.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import classify
from .descriptors import (
    ColorImage,
    GrayImage,
    RegionSpec,
    box_downsample,
    color_feature_map,
    gabor_feature_map,
    grid_covariances,
    intensity_feature_map,
    region_covariance,
)
from .embedding import (
    EXPONENT_MODES,
    build_projection_model,
    embed_batch,
    jl_distortion_report,
)
from .errors import (
    ConfigError,
    DimensionInconsistency,
    EmptyData,
    ExclusionExceedsClasses,
    ParseError,
    SingleClass,
    SpdRoseError,
    StageFailure,
)
from .io import read_matrix, read_pgm, read_ppm, write_matrix
from .seeding import derive_seed
from .stein import KernelParams
from .synthesis import DIRECTION_MODES, SynthesisConfig, generate_synthetic

MANIFEST_FORMAT = "spdrose.dataset"
MANIFEST_FORMAT_VERSION = 1
REPORT_FORMAT = "spdrose.report"
DEGRADATION_FORMAT = "spdrose.degradation_report"
REPORT_FORMAT_VERSION = 1

ENTRY_KINDS = ("matrix", "gray-image", "color-image")
FEATURE_MODES = {
    "precomputed": ("matrix", None),
    "intensity5": ("gray-image", intensity_feature_map),
    "color11": ("color-image", color_feature_map),
    "gabor43": ("gray-image", gabor_feature_map),
}
K_POLICIES = {"n": 1, "2n": 2, "3n": 3}
SYNTH_TOKENS = ("n", "m")
MODE_PLAIN = "ROSE"
MODE_AUGMENTED = "ROSES"

_STAGE_SPLIT = 0
_STAGE_VALIDATION = 1
_STAGE_SYNTH = 2
_STAGE_EMBED = 3
_STAGE_CLASSIFIER = 4


@dataclass(frozen=True)
class ManifestEntry:
    """One data file: a matrix or an image, with its class label."""

    path: str
    label: int
    kind: str = "matrix"

    def __post_init__(self):
        if self.kind not in ENTRY_KINDS:
            raise ConfigError(f"unknown entry kind {self.kind!r}")
        if self.label < 0:
            raise ConfigError(f"labels must be nonnegative, got {self.label}")


@dataclass(frozen=True)
class DatasetManifest:
    """Labeled data files plus the descriptor recipe to apply to them.

    Labels must form a dense ``0..L-1`` set and every entry kind must
    match the feature mode (``precomputed`` reads matrices verbatim,
    the image modes extract grid covariance descriptors).
    """

    entries: tuple
    feature_mode: str = "precomputed"
    grid: Optional[tuple] = None
    downsample: int = 1

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(
                f"feature_mode must be one of {sorted(FEATURE_MODES)}, "
                f"got {self.feature_mode!r}"
            )
        if not self.entries:
            raise ConfigError("manifest lists no entries")
        needed_kind = FEATURE_MODES[self.feature_mode][0]
        for entry in self.entries:
            if entry.kind != needed_kind:
                raise ConfigError(
                    f"feature_mode {self.feature_mode!r} needs {needed_kind!r} "
                    f"entries, got {entry.kind!r} for {entry.path}"
                )
        labels = sorted({e.label for e in self.entries})
        if labels != list(range(len(labels))):
            raise ConfigError(f"labels must be dense 0..L-1, got {labels}")
        if self.grid is not None:
            grid = tuple(int(v) for v in self.grid)
            if len(grid) != 2 or min(grid) < 1:
                raise ConfigError(f"grid must be [rows, cols], got {self.grid}")
            object.__setattr__(self, "grid", grid)
        if self.feature_mode == "precomputed" and self.grid is not None:
            raise ConfigError("precomputed datasets take no grid")
        if int(self.downsample) < 1:
            raise ConfigError(
                f"downsample must be at least 1, got {self.downsample}"
            )
        object.__setattr__(self, "downsample", int(self.downsample))

    def labels(self) -> np.ndarray:
        return np.array([e.label for e in self.entries], dtype=np.int64)


def save_manifest(path, manifest: DatasetManifest) -> None:
    payload = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_FORMAT_VERSION,
        "feature_mode": manifest.feature_mode,
        "grid": list(manifest.grid) if manifest.grid else None,
        "downsample": manifest.downsample,
        "entries": [
            {"path": e.path, "label": e.label, "kind": e.kind}
            for e in manifest.entries
        ],
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> DatasetManifest:
    try:
        with open(path, "r", encoding="ascii") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if payload.get("format") != MANIFEST_FORMAT:
        raise ParseError(f"{path}: not a dataset manifest")
    if payload.get("version") != MANIFEST_FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported version {payload.get('version')}")
    try:
        entries = tuple(
            ManifestEntry(
                path=str(e["path"]),
                label=int(e["label"]),
                kind=str(e.get("kind", "matrix")),
            )
            for e in payload["entries"]
        )
        grid = payload.get("grid")
        return DatasetManifest(
            entries=entries,
            feature_mode=str(payload.get("feature_mode", "precomputed")),
            grid=tuple(grid) if grid else None,
            downsample=int(payload.get("downsample", 1)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed manifest: {exc}") from exc
    except ConfigError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_dataset(manifest_path):
    """Load (points, labels); image entries expand into grid descriptors.

    Ordering is manifest order, then grid row-major within an entry;
    every descriptor of an entry shares the entry's label.
    """
    manifest = load_manifest(manifest_path)
    root = os.path.dirname(os.path.abspath(manifest_path))
    feature_map = FEATURE_MODES[manifest.feature_mode][1]
    points, labels = [], []
    for entry in manifest.entries:
        full = os.path.join(root, entry.path)
        if entry.kind == "matrix":
            descriptors = [read_matrix(full)]
        else:
            if entry.kind == "gray-image":
                image = read_pgm(full)
                if manifest.downsample > 1:
                    image = GrayImage(box_downsample(image.pixels, manifest.downsample))
            else:
                image = read_ppm(full)
                if manifest.downsample > 1:
                    image = ColorImage(
                        box_downsample(image.pixels, manifest.downsample)
                    )
            features = feature_map(image)
            if manifest.grid is None:
                region = RegionSpec(0, 0, features.width - 1, features.height - 1)
                descriptors = [region_covariance(features, region)]
            else:
                descriptors = grid_covariances(
                    features, manifest.grid[0], manifest.grid[1]
                )
        points.extend(descriptors)
        labels.extend([entry.label] * len(descriptors))
    dims = {p.dim for p in points}
    if len(dims) > 1:
        raise DimensionInconsistency(
            f"{manifest_path}: mixed descriptor dimensions {sorted(dims)}"
        )
    return points, np.array(labels, dtype=np.int64)


def save_dataset(directory, points, labels, prefix: str = "point") -> str:
    """Write matrices plus a precomputed manifest; returns the manifest path."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(points) != labels.size:
        raise DimensionInconsistency(
            f"{len(points)} points but {labels.size} labels"
        )
    os.makedirs(directory, exist_ok=True)
    width = max(4, len(str(max(len(points) - 1, 0))))
    entries = []
    for i, (point, label) in enumerate(zip(points, labels)):
        name = f"{prefix}_{i:0{width}d}.txt"
        write_matrix(os.path.join(directory, name), point)
        entries.append(ManifestEntry(path=name, label=int(label)))
    manifest_path = os.path.join(directory, "manifest.json")
    save_manifest(manifest_path, DatasetManifest(entries=tuple(entries)))
    return manifest_path


@dataclass(frozen=True, eq=False)
class LabeledSplit:
    """Train/test partition of labeled SPD points."""

    train_points: tuple
    train_labels: np.ndarray
    test_points: tuple
    test_labels: np.ndarray

    def __post_init__(self):
        tr = np.asarray(self.train_labels, dtype=np.int64)
        te = np.asarray(self.test_labels, dtype=np.int64)
        if tr.size != len(self.train_points):
            raise DimensionInconsistency(
                f"{len(self.train_points)} train points but {tr.size} labels"
            )
        if te.size != len(self.test_points):
            raise DimensionInconsistency(
                f"{len(self.test_points)} test points but {te.size} labels"
            )
        tr.setflags(write=False)
        te.setflags(write=False)
        object.__setattr__(self, "train_points", tuple(self.train_points))
        object.__setattr__(self, "train_labels", tr)
        object.__setattr__(self, "test_points", tuple(self.test_points))
        object.__setattr__(self, "test_labels", te)

    @classmethod
    def from_benchmark(cls, benchmark) -> "LabeledSplit":
        return cls(
            train_points=benchmark.train_points,
            train_labels=benchmark.train_labels,
            test_points=benchmark.test_points,
            test_labels=benchmark.test_labels,
        )

    @property
    def classes(self) -> tuple:
        return tuple(sorted(set(self.train_labels.tolist())))


def _normalize_candidates(value, kind):
    if isinstance(value, (list, tuple)):
        items = tuple(value)
    else:
        items = (value,)
    if not items:
        raise ConfigError(f"{kind} candidate list must not be empty")
    return items


@dataclass(frozen=True)
class ExperimentConfig:
    """Split rule, hyperparameter candidates, and classifier settings.

    ``sigma``, ``k_policy``, and ``synthetic`` each accept a single
    value or a candidate list; with more than one combination in play,
    the winner is picked per repetition on a validation fold.
    Synthetic counts may be the symbols ``"n"`` (training split size)
    or ``"m"`` (per-class train count) besides plain numbers.
    """

    name: str = "experiment"
    seed: int = 0
    reps: int = 1
    train_per_class: int = 10
    sigma: tuple = (0.5,)
    k_policy: tuple = ("2n",)
    synthetic: tuple = (0,)
    exponent_mode: str = "whitening"
    psd_policy: str = "clamp"
    direction_mode: str = "tangent_gaussian"
    regularization: float = classify.DEFAULT_LAMBDA
    epochs: int = classify.DEFAULT_EPOCHS
    knn_neighbors: int = 1
    validation_fraction: float = 0.2

    def __post_init__(self):
        sigmas = _normalize_candidates(self.sigma, "sigma")
        try:
            sigmas = tuple(float(s) for s in sigmas)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sigma candidates must be numbers: {sigmas}") from exc
        if any(s <= 0.0 for s in sigmas):
            raise ConfigError(f"kernel widths must be positive, got {sigmas}")
        object.__setattr__(self, "sigma", sigmas)
        policies = _normalize_candidates(self.k_policy, "k_policy")
        for policy in policies:
            if policy not in K_POLICIES:
                raise ConfigError(
                    f"k_policy must be one of {sorted(K_POLICIES)}, got {policy!r}"
                )
        object.__setattr__(self, "k_policy", tuple(policies))
        synth = _normalize_candidates(self.synthetic, "synthetic")
        cleaned = []
        for value in synth:
            if isinstance(value, str):
                if value not in SYNTH_TOKENS:
                    raise ConfigError(
                        f"synthetic symbols are {SYNTH_TOKENS}, got {value!r}"
                    )
                cleaned.append(value)
            else:
                count = int(value)
                if count < 0:
                    raise ConfigError(
                        f"synthetic counts must be nonnegative, got {count}"
                    )
                cleaned.append(count)
        object.__setattr__(self, "synthetic", tuple(cleaned))
        if self.reps < 1:
            raise ConfigError(f"reps must be at least 1, got {self.reps}")
        if self.train_per_class < 2:
            raise ConfigError(
                f"train_per_class must be at least 2, got {self.train_per_class}"
            )
        if self.exponent_mode not in EXPONENT_MODES:
            raise ConfigError(f"unknown exponent_mode {self.exponent_mode!r}")
        if self.psd_policy not in ("clamp", "strict"):
            raise ConfigError(f"unknown psd_policy {self.psd_policy!r}")
        if self.direction_mode not in DIRECTION_MODES:
            raise ConfigError(f"unknown direction_mode {self.direction_mode!r}")
        if self.regularization <= 0.0:
            raise ConfigError(
                f"regularization must be positive, got {self.regularization}"
            )
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.knn_neighbors < 1:
            raise ConfigError(
                f"knn_neighbors must be at least 1, got {self.knn_neighbors}"
            )
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError(
                "validation_fraction must lie strictly between 0 and 1, "
                f"got {self.validation_fraction}"
            )


_CONFIG_FIELDS = set(ExperimentConfig.__dataclass_fields__)


def config_from_mapping(payload) -> ExperimentConfig:
    if not isinstance(payload, dict):
        raise ConfigError(
            f"config must be a JSON object, got {type(payload).__name__}"
        )
    unknown = sorted(set(payload) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return ExperimentConfig(**payload)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="ascii") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_mapping(payload)


def resolve_synthetic(value, n_classes: int, train_per_class: int) -> int:
    """Map a synthetic-count symbol to a number for a given split shape."""
    if value == "n":
        return n_classes * train_per_class
    if value == "m":
        return train_per_class
    return int(value)


@dataclass(frozen=True)
class RepRecord:
    """Outcome of one pipeline repetition."""

    rep: int
    rep_seed: int
    mode: str
    sigma: float
    k_policy: str
    synthetic: int
    k: int
    t: int
    pool_size: int
    accuracy: float
    clamped_mass: float
    class_labels: tuple
    confusion: tuple
    knn_accuracy: Optional[float] = None
    stage_seconds: tuple = ()

    def to_payload(self, include_timing: bool) -> dict:
        payload = {
            "rep": self.rep,
            "rep_seed": self.rep_seed,
            "mode": self.mode,
            "sigma": self.sigma,
            "k_policy": self.k_policy,
            "synthetic": self.synthetic,
            "k": self.k,
            "t": self.t,
            "pool_size": self.pool_size,
            "accuracy": repr(self.accuracy),
            "clamped_mass": self.clamped_mass,
            "class_labels": list(self.class_labels),
            "confusion": [list(row) for row in self.confusion],
        }
        if self.knn_accuracy is not None:
            payload["knn_accuracy"] = repr(self.knn_accuracy)
        if include_timing:
            payload["stage_seconds"] = {k: v for k, v in self.stage_seconds}
        return payload


@dataclass(frozen=True)
class Report:
    """Full-run record; serializes deterministically without timing.

    Accuracies are emitted as exact decimal strings (``repr`` of the
    64-bit float) so report bytes cannot drift across platforms.
    """

    config: ExperimentConfig
    records: tuple

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def accuracies(self) -> tuple:
        return tuple(r.accuracy for r in self.records)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def mean_knn_accuracy(self):
        values = [r.knn_accuracy for r in self.records if r.knn_accuracy is not None]
        return float(np.mean(values)) if values else None

    def to_payload(self, include_timing: bool = False) -> dict:
        mean_knn = self.mean_knn_accuracy
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_FORMAT_VERSION,
            "config": asdict(self.config),
            "records": [r.to_payload(include_timing) for r in self.records],
            "accuracies": [repr(a) for a in self.accuracies],
            "mean_accuracy": repr(self.mean_accuracy),
            "std_accuracy": repr(self.std_accuracy),
            "mean_knn_accuracy": None if mean_knn is None else repr(mean_knn),
        }

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_payload(include_timing), indent=1, sort_keys=True)


def save_report(path, report, include_timing: bool = False) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(report.to_json(include_timing))
        fh.write("\n")


def _class_groups(labels):
    groups = {}
    for cls in sorted(set(labels.tolist())):
        groups[int(cls)] = np.flatnonzero(labels == cls)
    return groups


def _split_per_class(points, labels, config, rep_seed):
    rng = np.random.default_rng(derive_seed(rep_seed, _STAGE_SPLIT))
    groups = _class_groups(labels)
    train_idx, test_idx = [], []
    for cls in sorted(groups):
        members = groups[cls]
        if members.size <= config.train_per_class:
            raise ConfigError(
                f"class {cls} has {members.size} points; "
                f"train_per_class={config.train_per_class} leaves no test data"
            )
        chosen = rng.choice(members, size=config.train_per_class, replace=False)
        chosen = set(chosen.tolist())
        train_idx.extend(i for i in members.tolist() if i in chosen)
        test_idx.extend(i for i in members.tolist() if i not in chosen)
    return LabeledSplit(
        train_points=[points[i] for i in train_idx],
        train_labels=labels[train_idx],
        test_points=[points[i] for i in test_idx],
        test_labels=labels[test_idx],
    )


def _carve_validation(split, config, rep_seed):
    rng = np.random.default_rng(derive_seed(rep_seed, _STAGE_VALIDATION))
    groups = _class_groups(split.train_labels)
    holdout = set()
    for cls in sorted(groups):
        members = groups[cls]
        if members.size < 2:
            continue
        count = max(1, int(config.validation_fraction * members.size))
        count = min(count, members.size - 1)
        holdout.update(rng.choice(members, size=count, replace=False).tolist())
    fit_idx = [i for i in range(len(split.train_points)) if i not in holdout]
    val_idx = [i for i in range(len(split.train_points)) if i in holdout]
    fit = LabeledSplit(
        train_points=[split.train_points[i] for i in fit_idx],
        train_labels=split.train_labels[fit_idx],
        test_points=[split.train_points[i] for i in val_idx],
        test_labels=split.train_labels[val_idx],
    )
    effective = LabeledSplit(
        train_points=fit.train_points,
        train_labels=fit.train_labels,
        test_points=split.test_points,
        test_labels=split.test_labels,
    )
    return fit, effective


def _stage(rep, name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SpdRoseError as exc:
        if isinstance(exc, StageFailure):
            raise
        raise StageFailure(
            f"repetition {rep}, stage {name}: {exc}", repetition=rep, stage=name
        ) from exc


def _run_single(split, config, rep, seed_root, sigma, k_policy, synth_count,
                included_classes=None, with_knn=False) -> RepRecord:
    classes = split.classes
    if included_classes is None:
        included_classes = classes
    included = tuple(sorted(included_classes))
    pool = [
        p
        for p, label in zip(split.train_points, split.train_labels)
        if int(label) in included
    ]
    timings = []
    started = time.perf_counter()
    if synth_count > 0:
        synth_config = SynthesisConfig(
            count=synth_count,
            seed=derive_seed(seed_root, _STAGE_SYNTH),
            direction_mode=config.direction_mode,
        )
        pool.extend(_stage(rep, "synthesize", generate_synthetic, pool, synth_config))
    timings.append(("synthesize", time.perf_counter() - started))
    started = time.perf_counter()
    k = K_POLICIES[k_policy] * len(split.train_points)
    params = KernelParams(sigma=sigma, psd_policy=config.psd_policy)
    model = _stage(
        rep, "build", build_projection_model,
        pool, k=k, params=params,
        exponent_mode=config.exponent_mode,
        seed=derive_seed(seed_root, _STAGE_EMBED),
    )
    timings.append(("build", time.perf_counter() - started))
    started = time.perf_counter()
    train_embedded = np.array(_stage(rep, "embed", embed_batch, model, split.train_points))
    test_embedded = np.array(_stage(rep, "embed", embed_batch, model, split.test_points))
    timings.append(("embed", time.perf_counter() - started))
    started = time.perf_counter()
    classifier = _stage(
        rep, "train", classify.train_ova_svm,
        train_embedded, split.train_labels,
        regularization=config.regularization,
        epochs=config.epochs,
        seed=derive_seed(seed_root, _STAGE_CLASSIFIER),
    )
    predictions = classify.predict(classifier, test_embedded)
    timings.append(("train", time.perf_counter() - started))
    evaluation = classify.evaluate_accuracy(
        split.test_labels, predictions, class_labels=classes
    )
    accuracy = evaluation.accuracy
    confusion = evaluation.confusion
    knn_accuracy = None
    if with_knn:
        knn_predictions = _stage(
            rep, "baseline", classify.knn_stein,
            split.train_points, split.train_labels, split.test_points,
            n_neighbors=config.knn_neighbors,
        )
        knn_accuracy = classify.evaluate_accuracy(
            split.test_labels, knn_predictions
        ).accuracy
    return RepRecord(
        rep=rep,
        rep_seed=seed_root,
        mode=MODE_PLAIN if synth_count == 0 else MODE_AUGMENTED,
        sigma=sigma,
        k_policy=k_policy,
        synthetic=synth_count,
        k=k,
        t=model.t,
        pool_size=model.p,
        accuracy=accuracy,
        clamped_mass=model.gram.clamped_mass,
        class_labels=classes,
        confusion=confusion,
        knn_accuracy=knn_accuracy,
        stage_seconds=tuple(timings),
    )


def _grid(config, synth_choices):
    return list(itertools.product(config.sigma, config.k_policy, synth_choices))


def _prepare_rep(points, labels, config, rep, synth_choices):
    """Split, then pick (sigma, k_policy, synthetic) on a validation fold.

    Returns the effective split (training minus any validation fold)
    and the chosen combination.  With a single combination the fold is
    skipped and the full training split is kept.
    """
    rep_seed = derive_seed(config.seed, rep)
    split = _split_per_class(points, labels, config, rep_seed)
    grid = _grid(config, synth_choices)
    if len(grid) == 1:
        return split, rep_seed, grid[0]
    fold, effective = _carve_validation(split, config, rep_seed)
    best = None
    best_accuracy = -1.0
    for tag, combo in enumerate(grid):
        tag_seed = derive_seed(rep_seed, _STAGE_VALIDATION, tag)
        record = _run_single(
            fold, config, rep, tag_seed, combo[0], combo[1], combo[2],
            with_knn=False,
        )
        if record.accuracy > best_accuracy:
            best_accuracy = record.accuracy
            best = combo
    return effective, rep_seed, best


def run_experiment(points, labels, config: ExperimentConfig) -> Report:
    """Run every repetition over seeded per-class splits."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(points) == 0:
        raise EmptyData("dataset holds no points")
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise SingleClass(f"dataset holds only class {classes}")
    records = []
    for rep in range(config.reps):
        synth_choices = tuple(
            resolve_synthetic(v, len(classes), config.train_per_class)
            for v in config.synthetic
        )
        effective, rep_seed, (sigma, k_policy, synth) = _prepare_rep(
            points, labels, config, rep, synth_choices
        )
        records.append(
            _run_single(
                effective, config, rep, rep_seed, sigma, k_policy, synth,
                with_knn=True,
            )
        )
    return Report(config=config, records=tuple(records))


@dataclass(frozen=True)
class DegradationRecord:
    """One arm of one exclusion pattern in one repetition."""

    excluded: tuple
    arm: str
    record: RepRecord

    def to_payload(self, include_timing: bool) -> dict:
        payload = {"excluded": list(self.excluded), "arm": self.arm}
        payload.update(self.record.to_payload(include_timing))
        return payload


@dataclass(frozen=True)
class DegradationReport:
    """Accuracies of both arms across class-exclusion patterns."""

    config: ExperimentConfig
    synthetic_budget: int
    excluded_class_counts: tuple
    records: tuple

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(
            self, "excluded_class_counts", tuple(self.excluded_class_counts)
        )

    def arm_means(self, arm: str):
        """Mean accuracy per exclusion count, in report count order."""
        means = []
        for count in self.excluded_class_counts:
            values = [
                r.record.accuracy
                for r in self.records
                if r.arm == arm and len(r.excluded) == count
            ]
            means.append(float(np.mean(values)))
        return means

    def to_payload(self, include_timing: bool = False) -> dict:
        return {
            "format": DEGRADATION_FORMAT,
            "version": REPORT_FORMAT_VERSION,
            "config": asdict(self.config),
            "synthetic_budget": self.synthetic_budget,
            "excluded_class_counts": list(self.excluded_class_counts),
            "records": [r.to_payload(include_timing) for r in self.records],
            "means": {
                arm: [repr(m) for m in self.arm_means(arm)]
                for arm in (MODE_PLAIN, MODE_AUGMENTED)
            },
        }

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_payload(include_timing), indent=1, sort_keys=True)


def degradation_study(
    points,
    labels,
    config: ExperimentConfig,
    excluded_class_counts=None,
    synthetic_budget=None,
) -> DegradationReport:
    """Score both arms under every class-exclusion combination.

    For each count ``c`` the study reruns the pipeline once per
    ``binomial(L, c)`` choice of excluded classes: their training
    points are withheld from hyperplane construction while the
    classifier still trains on all classes.  The plain arm uses no
    synthetic points; the augmented arm spends ``synthetic_budget``
    (default: the largest configured candidate) regardless of how many
    classes survive.  With ``c = 0`` each arm matches
    ``run_experiment`` for the corresponding synthetic count.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if len(points) == 0:
        raise EmptyData("dataset holds no points")
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise SingleClass(f"dataset holds only class {classes}")
    if excluded_class_counts is None:
        excluded_class_counts = tuple(range(len(classes)))
    excluded_class_counts = tuple(int(c) for c in excluded_class_counts)
    for count in excluded_class_counts:
        if not 0 <= count <= len(classes) - 1:
            raise ExclusionExceedsClasses(
                f"cannot exclude {count} of {len(classes)} classes"
            )
    if synthetic_budget is None:
        synthetic_budget = max(
            resolve_synthetic(v, len(classes), config.train_per_class)
            for v in config.synthetic
        )
    synthetic_budget = int(synthetic_budget)
    if synthetic_budget < 0:
        raise ConfigError(
            f"synthetic budget must be nonnegative, got {synthetic_budget}"
        )
    records = []
    for rep in range(config.reps):
        for arm, budget in ((MODE_PLAIN, 0), (MODE_AUGMENTED, synthetic_budget)):
            effective, rep_seed, (sigma, k_policy, synth) = _prepare_rep(
                points, labels, config, rep, (budget,)
            )
            for count in excluded_class_counts:
                for excluded in itertools.combinations(classes, count):
                    included = tuple(c for c in classes if c not in excluded)
                    record = _run_single(
                        effective, config, rep, rep_seed, sigma, k_policy, synth,
                        included_classes=included, with_knn=False,
                    )
                    records.append(
                        DegradationRecord(excluded=excluded, arm=arm, record=record)
                    )
    return DegradationReport(
        config=config,
        synthetic_budget=synthetic_budget,
        excluded_class_counts=excluded_class_counts,
        records=tuple(records),
    )


def jl_check(points, config: ExperimentConfig, k: int, epsilon: float):
    """Embedding fidelity report for a point pool at a given width."""
    params = KernelParams(sigma=config.sigma[0], psd_policy=config.psd_policy)
    model = build_projection_model(
        points,
        k=k,
        params=params,
        exponent_mode=config.exponent_mode,
        seed=derive_seed(config.seed, _STAGE_EMBED),
    )
    return jl_distortion_report(model, points, epsilon)
