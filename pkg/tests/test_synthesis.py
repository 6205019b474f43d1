"""Unit tests for Karcher means, training balls, and synthetic points."""

import numpy as np
import pytest
from scipy import stats

from spdrose import (
    DegenerateDirection,
    DimensionMismatch,
    EmptyInput,
    NonConvergence,
    SpdMatrix,
    SynthesisConfig,
    ball_around,
    generate_synthetic,
    geodesic_distance,
    geodesic_rescale,
    karcher_mean,
    karcher_mean_info,
    spd_power,
    symmetrize,
    training_ball,
)

from conftest import random_spd


def test_mean_of_single_point_is_the_point(rng):
    x = random_spd(rng, 3)
    mean = karcher_mean([x])
    assert np.allclose(mean.array, x.array, atol=1e-10)


def test_mean_of_commuting_family_is_geometric(rng):
    # Diagonal inputs commute, so the mean is the entrywise geometric
    # mean of the diagonals.
    diags = np.exp(rng.uniform(-1.5, 1.5, size=(6, 4)))
    points = [SpdMatrix(np.diag(d)) for d in diags]
    mean = karcher_mean(points)
    expected = np.exp(np.log(diags).mean(axis=0))
    assert np.allclose(mean.array, np.diag(expected), rtol=1e-7, atol=1e-9)


def test_mean_of_two_points_is_geodesic_midpoint(rng):
    for _ in range(10):
        x = random_spd(rng, 3)
        y = random_spd(rng, 3)
        isq = x.inv_sqrt_array
        inner = SpdMatrix(symmetrize(isq @ y.array @ isq))
        midpoint = x.sqrt_array @ spd_power(inner, 0.5).array @ x.sqrt_array
        mean = karcher_mean([x, y])
        assert np.allclose(mean.array, midpoint, rtol=1e-6, atol=1e-8)


def test_mean_congruence_equivariance(rng):
    points = [random_spd(rng, 3) for _ in range(5)]
    a = rng.standard_normal((3, 3)) + 2.0 * np.eye(3)
    moved = [SpdMatrix(symmetrize(a @ p.array @ a.T)) for p in points]
    lhs = karcher_mean(moved).array
    m = karcher_mean(points).array
    assert np.allclose(lhs, a @ m @ a.T, rtol=1e-5, atol=1e-7)


def test_mean_info_meets_stopping_rule(rng):
    points = [random_spd(rng, 4) for _ in range(8)]
    mean, record = karcher_mean_info(points, tol=1e-8, max_iter=100)
    assert record.converged
    assert record.iterations <= 100
    assert record.residual <= 1e-8 * (1.0 + np.linalg.norm(mean.array, "fro"))


def test_mean_nonconvergence_carries_state(rng):
    points = [random_spd(rng, 3) for _ in range(6)]
    with pytest.raises(NonConvergence) as info:
        karcher_mean(points, tol=1e-300, max_iter=3)
    err = info.value
    assert err.iterations == 3
    assert err.residual > 0.0
    assert isinstance(err.iterate, SpdMatrix)


def test_mean_input_validation(rng):
    with pytest.raises(EmptyInput):
        karcher_mean([])
    with pytest.raises(DimensionMismatch):
        karcher_mean([random_spd(rng, 2), random_spd(rng, 3)])


def test_training_ball_radius_covers_points(rng):
    points = [random_spd(rng, 3) for _ in range(10)]
    ball = training_ball(points)
    distances = [geodesic_distance(ball.mean, p) for p in points]
    assert ball.radius == pytest.approx(max(distances), rel=1e-12)
    assert all(d <= ball.radius + 1e-12 for d in distances)


def test_ball_around_uses_given_center(rng):
    points = [random_spd(rng, 3) for _ in range(4)]
    center = SpdMatrix(np.eye(3))
    ball = ball_around(center, points)
    assert ball.mean is center
    assert ball.radius == pytest.approx(
        max(geodesic_distance(center, p) for p in points), rel=1e-12
    )


def test_rescale_hits_requested_distance(rng):
    for _ in range(50):
        dim = int(rng.integers(2, 6))
        pole = random_spd(rng, dim)
        x = random_spd(rng, dim)
        zeta = float(rng.uniform(0.05, 3.0))
        moved = geodesic_rescale(x, pole, zeta)
        assert geodesic_distance(pole, moved) == pytest.approx(zeta, rel=1e-6)


def test_rescale_to_own_distance_recovers_point(rng):
    for _ in range(20):
        pole = random_spd(rng, 3)
        x = random_spd(rng, 3)
        moved = geodesic_rescale(x, pole, geodesic_distance(pole, x))
        scale = max(np.linalg.norm(x.array), 1.0)
        assert np.linalg.norm(moved.array - x.array) <= 1e-8 * scale


def test_rescale_zero_returns_pole(rng):
    pole = random_spd(rng, 3)
    x = random_spd(rng, 3)
    moved = geodesic_rescale(x, pole, 0.0)
    assert np.allclose(moved.array, pole.array, rtol=1e-10, atol=1e-12)


def test_rescale_stays_on_geodesic(rng):
    # For zeta below the full distance the moved point sits between pole
    # and x, so the two partial distances add up to the whole.
    for _ in range(10):
        pole = random_spd(rng, 3)
        x = random_spd(rng, 3)
        full = geodesic_distance(pole, x)
        zeta = 0.37 * full
        moved = geodesic_rescale(x, pole, zeta)
        assert geodesic_distance(pole, moved) + geodesic_distance(
            moved, x
        ) == pytest.approx(full, rel=1e-8)


def test_rescale_rejects_bad_inputs(rng):
    pole = random_spd(rng, 3)
    with pytest.raises(ValueError):
        geodesic_rescale(random_spd(rng, 3), pole, -0.5)
    with pytest.raises(DimensionMismatch):
        geodesic_rescale(random_spd(rng, 2), pole, 1.0)
    with pytest.raises(DegenerateDirection):
        geodesic_rescale(pole, pole, 1.0)


def test_synthetic_points_stay_in_ball(rng):
    training = [random_spd(rng, 3) for _ in range(8)]
    config = SynthesisConfig(count=200, seed=5)
    ball = training_ball(training, config)
    for point in generate_synthetic(training, config):
        assert geodesic_distance(ball.mean, point) <= ball.radius + 1e-8


def test_synthetic_deterministic_and_prefix_stable(rng):
    training = [random_spd(rng, 3) for _ in range(6)]
    short = generate_synthetic(training, SynthesisConfig(count=10, seed=42))
    again = generate_synthetic(training, SynthesisConfig(count=10, seed=42))
    longer = generate_synthetic(training, SynthesisConfig(count=25, seed=42))
    for a, b, c in zip(short, again, longer):
        assert np.array_equal(a.array, b.array)
        assert np.array_equal(a.array, c.array)
    other = generate_synthetic(training, SynthesisConfig(count=10, seed=43))
    assert not all(
        np.array_equal(a.array, b.array) for a, b in zip(short, other)
    )


def test_synthetic_count_zero_and_validation(rng):
    training = [random_spd(rng, 3) for _ in range(4)]
    assert generate_synthetic(training, SynthesisConfig(count=0)) == []
    with pytest.raises(EmptyInput):
        generate_synthetic(training[:1], SynthesisConfig(count=1))
    with pytest.raises(ValueError):
        SynthesisConfig(count=-1)
    with pytest.raises(ValueError):
        SynthesisConfig(direction_mode="bogus")


def test_training_point_mode_uses_training_directions(rng):
    # With two training points and the mean between them, every
    # synthetic point must lie on one of the two connecting geodesics:
    # partial distances along it add up exactly.
    x = random_spd(rng, 3)
    xinv = spd_power(x, -1.0)
    training = [x, xinv]
    config = SynthesisConfig(count=50, seed=9, direction_mode="training_point")
    ball = training_ball(training, config)
    for point in generate_synthetic(training, config):
        d_center = geodesic_distance(ball.mean, point)
        on_some_geodesic = any(
            d_center + geodesic_distance(point, t)
            <= geodesic_distance(ball.mean, t) + 1e-6
            for t in training
        )
        assert on_some_geodesic


def test_distance_fractions_are_uniform():
    # Training pair {X, inverse(X)} has its mean at the identity and
    # both points at the same radius, so the distance fraction of each
    # synthetic point reproduces the underlying uniform draw exactly.
    rng = np.random.default_rng(3)
    x = random_spd(rng, 3)
    training = [x, spd_power(x, -1.0)]
    config = SynthesisConfig(count=10000, seed=11, direction_mode="training_point")
    ball = training_ball(training, config)
    fractions = np.array(
        [
            geodesic_distance(ball.mean, p) / ball.radius
            for p in generate_synthetic(training, config)
        ]
    )
    statistic = stats.kstest(fractions, "uniform").statistic
    assert statistic <= 0.02
