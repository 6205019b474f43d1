"""Intrinsic means, geodesic rescaling and synthetic point generation.

A set of SPD training points defines a ball: its center is the Karcher
(Frechet) mean under the affine-invariant metric and its radius is the
largest geodesic distance from the center to a training point.  New
unlabeled points are synthesized by picking a direction away from the
center, then rescaling along the connecting geodesic so the distance to
the center becomes ``delta * radius`` with ``delta`` uniform on [0, 1].
Every synthetic point therefore stays inside the training ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, DimensionMismatch, EmptyInput, NonConvergence
from .manifold import (
    SpdMatrix,
    TangentVector,
    airm_exp_map,
    airm_log_map,
    geodesic_distance,
    spd_power,
    symmetrize,
    validate_spd,
)
from .seeding import keyed_generator

DEGENERATE_DISTANCE = 1e-12
MAX_DIRECTION_RETRIES = 100

DIRECTION_MODES = ("tangent_gaussian", "training_point")


@dataclass(frozen=True)
class SynthesisConfig:
    """Controls for synthetic point generation.

    ``direction_mode`` picks how directions away from the mean are
    drawn: ``"training_point"`` reuses a uniformly chosen training
    point, ``"tangent_gaussian"`` (default) exponentiates a random
    unit-norm symmetric tangent at the mean, which cannot collide with
    the pole.
    """

    count: int = 0
    seed: int = 0
    direction_mode: str = "tangent_gaussian"
    karcher_tol: float = 1e-8
    karcher_max_iter: int = 100

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be nonnegative, got {self.count}")
        if self.direction_mode not in DIRECTION_MODES:
            raise ValueError(f"unknown direction_mode {self.direction_mode!r}")
        if not (self.karcher_tol > 0.0):
            raise ValueError("karcher_tol must be positive")
        if self.karcher_max_iter < 1:
            raise ValueError("karcher_max_iter must be at least 1")


@dataclass(frozen=True)
class ConvergenceRecord:
    converged: bool
    iterations: int
    residual: float


def karcher_mean_info(points, tol: float = 1e-8, max_iter: int = 100):
    """Karcher mean with its convergence record, never raising on a stall.

    Fixed-point iteration: map all points to the tangent space at the
    current estimate, average, and exponentiate back (unit step).  The
    start value is the arithmetic mean, which is already SPD.  Stops
    when the Frobenius norm of the mean tangent drops to
    ``tol * (1 + ||M||_F)``.

    Returns
    -------
    (SpdMatrix, ConvergenceRecord)
    """
    points = list(points)
    if not points:
        raise EmptyInput("karcher_mean needs at least one point")
    dim = points[0].dim
    for p in points[1:]:
        if p.dim != dim:
            raise DimensionMismatch(f"points mix dimensions {dim} and {p.dim}")

    current = validate_spd(sum(p.array for p in points) / len(points))
    iterations = 0
    while True:
        mean_tangent = sum(airm_log_map(current, p).value for p in points) / len(points)
        residual = float(np.linalg.norm(mean_tangent, "fro"))
        scale = 1.0 + float(np.linalg.norm(current.array, "fro"))
        if residual <= tol * scale:
            return current, ConvergenceRecord(True, iterations, residual)
        if iterations >= max_iter:
            return current, ConvergenceRecord(False, iterations, residual)
        current = airm_exp_map(TangentVector(current, mean_tangent))
        iterations += 1


def karcher_mean(points, tol: float = 1e-8, max_iter: int = 100) -> SpdMatrix:
    """Karcher mean under the affine-invariant metric.

    Raises
    ------
    NonConvergence
        When ``max_iter`` steps do not meet the stopping rule; the
        exception carries the last iterate and residual so the caller
        can decide whether to keep it.
    """
    mean, record = karcher_mean_info(points, tol=tol, max_iter=max_iter)
    if not record.converged:
        raise NonConvergence(
            f"Karcher mean residual {record.residual:.3e} after "
            f"{record.iterations} iterations (tol {tol:.1e})",
            iterate=mean,
            residual=record.residual,
            iterations=record.iterations,
        )
    return mean


@dataclass(frozen=True)
class TrainingBall:
    """Karcher mean plus the largest geodesic distance to a training point."""

    mean: SpdMatrix
    radius: float


def ball_around(mean: SpdMatrix, points) -> TrainingBall:
    """Ball with a given center; radius recomputed from the points."""
    radius = max(geodesic_distance(mean, p) for p in points)
    return TrainingBall(mean, radius)


def training_ball(points, config: SynthesisConfig = SynthesisConfig()) -> TrainingBall:
    """Karcher mean and covering radius of a training set."""
    points = list(points)
    mean = karcher_mean(
        points, tol=config.karcher_tol, max_iter=config.karcher_max_iter
    )
    return ball_around(mean, points)


def geodesic_rescale(x: SpdMatrix, pole: SpdMatrix, zeta: float) -> SpdMatrix:
    """Move ``x`` along its geodesic through ``pole`` to distance ``zeta``.

    Uses the closed form ``pole^{1/2} (pole^{-1/2} x pole^{-1/2})^c
    pole^{1/2}`` with ``c = zeta / d(pole, x)``, which rescales the
    geodesic parameter exactly.

    Raises
    ------
    DegenerateDirection
        When ``x`` is within ``DEGENERATE_DISTANCE`` of the pole, so no
        direction is defined.
    """
    if x.dim != pole.dim:
        raise DimensionMismatch(f"dimensions differ: {x.dim} vs {pole.dim}")
    zeta = float(zeta)
    if zeta < 0.0:
        raise ValueError(f"zeta must be nonnegative, got {zeta}")
    dist = geodesic_distance(pole, x)
    if dist <= DEGENERATE_DISTANCE:
        raise DegenerateDirection(
            f"direction point lies at distance {dist:.3e} from the pole"
        )
    c = zeta / dist
    isq = pole.inv_sqrt_array
    sq = pole.sqrt_array
    inner = SpdMatrix(symmetrize(isq @ x.array @ isq))
    powered = spd_power(inner, c)
    return validate_spd(sq @ powered.array @ sq)


def _draw_direction(rng, mean: SpdMatrix, training, mode: str) -> SpdMatrix:
    if mode == "training_point":
        return training[int(rng.integers(len(training)))]
    gauss = rng.standard_normal((mean.dim, mean.dim))
    tangent = symmetrize(gauss)
    isq = mean.inv_sqrt_array
    norm = float(np.linalg.norm(isq @ tangent @ isq, "fro"))
    if norm <= DEGENERATE_DISTANCE:
        raise DegenerateDirection("random tangent collapsed to zero")
    return airm_exp_map(TangentVector(mean, tangent / norm))


def generate_synthetic(training, config: SynthesisConfig):
    """Synthesize ``config.count`` unlabeled SPD points inside the training ball.

    Each output index gets its own counter-based generator keyed by
    ``(seed, index)``, so individual points are reproducible in
    isolation and the list is independent of generation order.  A draw
    whose direction degenerates is retried (fresh draw) up to
    ``MAX_DIRECTION_RETRIES`` times before the error propagates.

    Returns
    -------
    list[SpdMatrix]
    """
    training = list(training)
    if len(training) < 2:
        raise EmptyInput("generate_synthetic needs at least two training points")
    ball = training_ball(training, config)
    out = []
    for index in range(config.count):
        rng = keyed_generator(config.seed, index)
        for _ in range(MAX_DIRECTION_RETRIES):
            try:
                direction = _draw_direction(rng, ball.mean, training, config.direction_mode)
                delta = float(rng.uniform())
                out.append(geodesic_rescale(direction, ball.mean, delta * ball.radius))
                break
            except DegenerateDirection:
                continue
        else:
            raise DegenerateDirection(
                f"no usable direction after {MAX_DIRECTION_RETRIES} draws "
                f"for output index {index}"
            )
    return out
