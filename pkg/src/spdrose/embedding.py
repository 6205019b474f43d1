"""Random-projection embedding of SPD matrices through the Stein kernel.

A reference pool of ``p`` SPD matrices induces the kernel feature map
``kappa(X) = (K(ref_1, X), ..., K(ref_p, X))``.  Each embedding
coordinate is one random hyperplane in kernel space: hyperplane ``j``
draws ``t`` exemplar indices ``S_j`` without replacement and uses the
weight vector

    w_j = K^e ((1/t) e_{S_j} - (1/p) e)

where ``K`` is the reference Gram matrix and ``e`` the all-ones vector.
The exponent ``e`` is -1/2 in ``"whitening"`` mode (pseudo-inverse
square root, the default, which makes the hyperplane directions
approximately isotropic) or +1/2 in ``"paper_literal"`` mode.  A
constant factor ``sqrt(p * t)`` that a full derivation attaches to the
weights is deliberately dropped: it rescales every coordinate uniformly
and the classifier standardizes coordinates anyway.  Numeric
comparisons against externally scaled embeddings must account for it.

Hyperplane ``j`` is generated from a counter-based generator keyed by
``seed XOR j``, so growing ``k`` keeps all earlier hyperplanes
bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyInput, ParseError, TSampleTooLarge
from .manifold import SpdMatrix
from .seeding import keyed_generator
from .stein import (
    PSEUDO_INVERSE_RTOL,
    GramMatrix,
    KernelParams,
    gram_matrix,
    gram_power,
    stein_kernel_value,
)

EXPONENT_MODES = ("whitening", "paper_literal")

MODEL_FORMAT = "spdrose.projection_model"
MODEL_FORMAT_VERSION = 1


def default_exemplar_count(p: int) -> int:
    """Default exemplars per hyperplane: ``min(30, ceil(p / 4))``."""
    return min(30, -(-p // 4))


@dataclass(frozen=True, eq=False)
class ProjectionModel:
    """Frozen state of a fitted embedding.

    Holds the reference pool, its (repaired) Gram matrix, and the
    ``p x k`` weight matrix whose columns are the hyperplanes.
    """

    reference_points: tuple
    kernel_params: KernelParams
    gram: GramMatrix
    weights: np.ndarray
    t: int
    exponent_mode: str
    seed: int

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def p(self) -> int:
        return len(self.reference_points)

    @property
    def k(self) -> int:
        return self.weights.shape[1]

    @property
    def dim(self) -> int:
        return self.reference_points[0].dim

    @property
    def exponent(self) -> float:
        return -0.5 if self.exponent_mode == "whitening" else 0.5

    @property
    def clamped_mass(self) -> float:
        return self.gram.clamped_mass

    @cached_property
    def kernel_power(self) -> np.ndarray:
        """Gram matrix raised to the mode's exponent (shared by all hyperplanes)."""
        return gram_power(self.gram, self.exponent)


def build_projection_model(
    train_points,
    k: int,
    params: KernelParams,
    t: int | None = None,
    exponent_mode: str = "whitening",
    seed: int = 0,
) -> ProjectionModel:
    """Fit the embedding on a reference pool.

    Parameters
    ----------
    train_points : sequence of SpdMatrix
        Reference pool (at least two points, uniform dimension).
    k : int
        Number of hyperplanes / embedding coordinates.
    params : KernelParams
        Kernel scale and PSD policy for the Gram matrix.
    t : int, optional
        Exemplars per hyperplane; default ``min(30, ceil(p / 4))``.
    exponent_mode : {"whitening", "paper_literal"}
    seed : int
        Master seed; hyperplane ``j`` uses ``seed XOR j``.
    """
    points = tuple(train_points)
    if len(points) < 2:
        raise EmptyInput("build_projection_model needs at least two reference points")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if exponent_mode not in EXPONENT_MODES:
        raise ValueError(f"unknown exponent_mode {exponent_mode!r}")
    p = len(points)
    if t is None:
        t = default_exemplar_count(p)
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    if t > p:
        raise TSampleTooLarge(f"t={t} exceeds the reference pool size p={p}")

    gram = gram_matrix(points, params)
    model_stub = ProjectionModel(
        reference_points=points,
        kernel_params=params,
        gram=gram,
        weights=np.zeros((p, 1)),
        t=t,
        exponent_mode=exponent_mode,
        seed=seed,
    )
    powered = model_stub.kernel_power

    weights = np.empty((p, k))
    base = np.full(p, -1.0 / p)
    for j in range(k):
        rng = keyed_generator(seed ^ j)
        chosen = rng.choice(p, size=t, replace=False)
        alpha = base.copy()
        alpha[chosen] += 1.0 / t
        weights[:, j] = powered @ alpha

    model = ProjectionModel(
        reference_points=points,
        kernel_params=params,
        gram=gram,
        weights=weights,
        t=t,
        exponent_mode=exponent_mode,
        seed=seed,
    )
    model.__dict__["kernel_power"] = powered
    return model


def kernel_vector(model: ProjectionModel, x: SpdMatrix) -> np.ndarray:
    """Kernel values of ``x`` against the reference pool, length ``p``."""
    if x.dim != model.dim:
        raise DimensionMismatch(
            f"query dimension {x.dim} differs from model dimension {model.dim}"
        )
    return np.array(
        [stein_kernel_value(ref, x, model.kernel_params) for ref in model.reference_points]
    )


def project_kernel_vector(model: ProjectionModel, kappa: np.ndarray) -> np.ndarray:
    """Apply the hyperplanes to a precomputed kernel vector."""
    kappa = np.asarray(kappa, dtype=np.float64)
    if kappa.shape != (model.p,):
        raise DimensionMismatch(
            f"kernel vector has shape {kappa.shape}, expected ({model.p},)"
        )
    coords = model.weights.T @ kappa
    if not np.all(np.isfinite(coords)):
        raise ValueError("embedding produced non-finite coordinates")
    coords.setflags(write=False)
    return coords


def embed(model: ProjectionModel, x: SpdMatrix) -> np.ndarray:
    """Embed one SPD matrix into ``k`` coordinates."""
    return project_kernel_vector(model, kernel_vector(model, x))


def embed_batch(model: ProjectionModel, points):
    """Embed a sequence of points; equals the per-point loop bit-exactly."""
    return [embed(model, x) for x in points]


def binarize(coords: np.ndarray) -> np.ndarray:
    """Sign pattern of the coordinates as 0/1 bits (0.0 maps to 1)."""
    bits = (np.asarray(coords, dtype=np.float64) >= 0.0).astype(np.uint8)
    bits.setflags(write=False)
    return bits


def whitened_distance_sq(gram: GramMatrix, kappa_u, kappa_v) -> float:
    """Squared kernel-space distance after whitening by the reference pool.

    Whitening the feature map by the pool's (pseudo-inverted) second
    moment turns the squared distance between two points into
    ``p * (kappa_u - kappa_v)^T K^{+2} (kappa_u - kappa_v)``.
    """
    delta = np.asarray(kappa_u, dtype=np.float64) - np.asarray(kappa_v, dtype=np.float64)
    vals, vecs = np.linalg.eigh(gram.entries)
    cutoff = PSEUDO_INVERSE_RTOL * max(float(vals[-1]), 0.0)
    inverted = np.where(vals > cutoff, 1.0 / np.clip(vals, 1e-300, None), 0.0)
    rotated = vecs.T @ delta
    return gram.size * float(np.sum((inverted * rotated) ** 2))


def expected_distance_sq(model: ProjectionModel, kappa_u, kappa_v) -> float:
    """Exact expectation of the per-coordinate squared embedding gap.

    Every coordinate difference is ``alpha^T K^e (kappa_u - kappa_v)``
    with ``alpha`` the centered exemplar-selection vector.  Sampling
    ``t`` of ``p`` indices without replacement gives ``alpha`` the
    covariance ``(p - t) / (t p (p - 1)) * (I - J/p)``, so the mean of
    the squared gap over hyperplanes has this closed form.  It is the
    deterministic target that ``(1/k) * ||embed(u) - embed(v)||^2``
    converges to as ``k`` grows.
    """
    p, t = model.p, model.t
    if t >= p:
        return 0.0
    delta = np.asarray(kappa_u, dtype=np.float64) - np.asarray(kappa_v, dtype=np.float64)
    h = model.kernel_power @ delta
    centered = h - h.mean()
    factor = (p - t) / (t * p * (p - 1))
    return factor * float(np.dot(centered, centered))


@dataclass(frozen=True)
class JlReport:
    """Distortion summary of embedded pairwise distances."""

    pair_count: int
    fraction_within: float
    median_distortion: float
    epsilon: float
    k: int


def jl_distortion_report(model: ProjectionModel, points, epsilon: float) -> JlReport:
    """Check the two-sided distortion of embedded squared distances.

    For every pair the ``(1/k)``-scaled squared embedding distance is
    compared against :func:`expected_distance_sq`; a pair counts as
    "within" when the ratio lies in ``[1 - epsilon, 1 + epsilon]``.
    Pairs whose target distance is zero count as within exactly when
    the embedded distance is zero too (identical points embed
    identically, so a degenerate cloud reports fraction 1).
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    points = list(points)
    embeddings = [embed(model, x) for x in points]
    kappas = [kernel_vector(model, x) for x in points]
    k = model.k

    pair_count = 0
    within = 0
    ratios = []
    for u in range(len(points)):
        for v in range(u + 1, len(points)):
            pair_count += 1
            gap = embeddings[u] - embeddings[v]
            observed = float(np.dot(gap, gap)) / k
            target = expected_distance_sq(model, kappas[u], kappas[v])
            if target <= 0.0:
                if observed == 0.0:
                    within += 1
                continue
            ratio = observed / target
            ratios.append(ratio)
            if (1.0 - epsilon) <= ratio <= (1.0 + epsilon):
                within += 1

    fraction = within / pair_count if pair_count else 1.0
    median = float(np.median(ratios)) if ratios else 1.0
    return JlReport(pair_count, fraction, median, epsilon, k)


def save_projection_model(path, model: ProjectionModel) -> None:
    """Write the model as a self-describing JSON container."""
    payload = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "p": model.p,
        "k": model.k,
        "t": model.t,
        "sigma": model.kernel_params.sigma,
        "psd_policy": model.kernel_params.psd_policy,
        "exponent_mode": model.exponent_mode,
        "seed": model.seed,
        "clamped_mass": model.clamped_mass,
        "reference_points": [ref.array.tolist() for ref in model.reference_points],
        "weights": model.weights.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def load_projection_model(path) -> ProjectionModel:
    """Load a model saved by :func:`save_projection_model`.

    The Gram matrix is recomputed from the (exactly round-tripped)
    reference points, so embeddings after a load are bit-identical to
    the original model's.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: cannot read projection model ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ParseError(f"{path}: not a projection model container")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ParseError(
            f"{path}: unsupported format_version {payload.get('format_version')!r}"
        )
    try:
        params = KernelParams(payload["sigma"], payload["psd_policy"])
        refs = tuple(SpdMatrix(np.array(m, dtype=np.float64)) for m in payload["reference_points"])
        weights = np.array(payload["weights"], dtype=np.float64)
        t = int(payload["t"])
        exponent_mode = payload["exponent_mode"]
        seed = int(payload["seed"])
        expected_shape = (int(payload["p"]), int(payload["k"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed projection model ({exc})") from exc
    if weights.shape != expected_shape:
        raise ParseError(
            f"{path}: weights shape {weights.shape} does not match header {expected_shape}"
        )
    if exponent_mode not in EXPONENT_MODES:
        raise ParseError(f"{path}: unknown exponent_mode {exponent_mode!r}")
    gram = gram_matrix(refs, params)
    return ProjectionModel(
        reference_points=refs,
        kernel_params=params,
        gram=gram,
        weights=weights,
        t=t,
        exponent_mode=exponent_mode,
        seed=seed,
    )
