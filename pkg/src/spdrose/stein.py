"""Stein divergence, the derived kernel, and Gram-matrix machinery.

The symmetric Stein (log-det) divergence between SPD matrices is

    J(X, Y) = logdet((X + Y) / 2) - (logdet(X) + logdet(Y)) / 2

and the kernel is ``K(X, Y) = exp(-sigma * J(X, Y))``.  The kernel is
guaranteed positive semidefinite only when ``2 * sigma`` is an integer
between 1 and ``d - 1``; other values are useful in practice, so Gram
assembly carries an explicit repair policy for indefinite spectra.

Log-determinants are always computed as sums of log-eigenvalues of
symmetric factors, never through raw determinants, so they stay finite
and accurate for the matrix sizes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, IndefiniteKernel
from .manifold import SpdMatrix, symmetrize

GRAM_PSD_RTOL = 1e-10
PSEUDO_INVERSE_RTOL = 1e-10


@dataclass(frozen=True)
class KernelParams:
    """Kernel scale and the policy for indefinite Gram spectra.

    ``psd_policy`` is ``"clamp"`` (zero out negative eigenvalues and
    record the removed mass) or ``"strict"`` (raise
    :class:`IndefiniteKernel` when a significantly negative eigenvalue
    appears).
    """

    sigma: float
    psd_policy: str = "clamp"

    def __post_init__(self):
        if not (float(self.sigma) > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if self.psd_policy not in ("clamp", "strict"):
            raise ValueError(f"unknown psd_policy {self.psd_policy!r}")


def sigma_guarantees_psd(sigma: float, dim: int) -> bool:
    """True when ``sigma`` lies on the half-integer grid {1/2, 1, ..., (d-1)/2}."""
    doubled = 2.0 * float(sigma)
    return doubled == round(doubled) and 1 <= round(doubled) <= dim - 1


def _logdet_symmetric(a: np.ndarray) -> float:
    return float(np.sum(np.log(np.linalg.eigvalsh(a))))


def stein_divergence(x: SpdMatrix, y: SpdMatrix) -> float:
    """Symmetric Stein divergence between two SPD matrices.

    Evaluated as an expression that is exactly symmetric in its
    arguments, clamped at zero against rounding.
    """
    if x.dim != y.dim:
        raise DimensionMismatch(f"dimensions differ: {x.dim} vs {y.dim}")
    mid = _logdet_symmetric((x.array + y.array) / 2.0)
    value = mid - 0.5 * (x.logdet + y.logdet)
    return max(value, 0.0)


def stein_kernel_value(x: SpdMatrix, y: SpdMatrix, params: KernelParams) -> float:
    """Kernel value ``exp(-sigma * J(x, y))``, in (0, 1]."""
    return float(np.exp(-params.sigma * stein_divergence(x, y)))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel Gram matrix after the PSD policy has been applied.

    ``clamped_mass`` is the total magnitude of eigenvalues removed by
    the clamp repair, zero when the assembled matrix was already PSD.
    """

    entries: np.ndarray
    clamped_mass: float = 0.0

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=np.float64)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def gram_matrix(points, params: KernelParams) -> GramMatrix:
    """Assemble the kernel Gram matrix over a list of SPD points.

    Only the upper triangle is evaluated and mirrored, so the result is
    exactly symmetric with a unit diagonal.  The spectrum is then
    checked: negative eigenvalues below ``-GRAM_PSD_RTOL * lambda_max``
    raise under the strict policy; under the clamp policy all negative
    eigenvalues are zeroed and their total magnitude recorded.
    """
    points = list(points)
    if not points:
        raise EmptyInput("gram_matrix needs at least one point")
    dim = points[0].dim
    for p in points[1:]:
        if p.dim != dim:
            raise DimensionMismatch(
                f"points mix dimensions {dim} and {p.dim}"
            )
    n = len(points)
    k = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            k[i, j] = k[j, i] = stein_kernel_value(points[i], points[j], params)

    vals, vecs = np.linalg.eigh(k)
    lo, hi = float(vals[0]), float(vals[-1])
    if lo >= 0.0:
        return GramMatrix(k, 0.0)
    if params.psd_policy == "strict" and lo < -GRAM_PSD_RTOL * hi:
        raise IndefiniteKernel(
            f"Gram matrix has eigenvalue {lo:.6e} (largest {hi:.6e}) at "
            f"sigma={params.sigma}; PSD holds only for 2*sigma in 1..d-1",
            smallest_eigenvalue=lo,
            sigma=params.sigma,
        )
    negative = vals[vals < 0.0]
    clamped = np.clip(vals, 0.0, None)
    repaired = symmetrize((vecs * clamped) @ vecs.T)
    return GramMatrix(repaired, float(-np.sum(negative)))


def gram_power(gram: GramMatrix, exponent: float) -> np.ndarray:
    """Symmetric power of a repaired Gram matrix, exponent +1/2 or -1/2.

    Both branches act on the numerical range of the Gram matrix:
    eigenvalues at or below ``PSEUDO_INVERSE_RTOL * lambda_max`` are
    treated as exact zeros.  The -1/2 branch is therefore a
    pseudo-inverse square root, the +1/2 branch a rank-truncated square
    root (without the truncation, roundoff-sized eigenvalues of a
    rank-deficient Gram would surface as sqrt-amplified noise), and
    their product is the projector onto that range.
    """
    if exponent not in (0.5, -0.5):
        raise ValueError(f"exponent must be +0.5 or -0.5, got {exponent!r}")
    vals, vecs = np.linalg.eigh(gram.entries)
    cutoff = PSEUDO_INVERSE_RTOL * max(float(vals[-1]), 0.0)
    if exponent == -0.5:
        powered = np.where(vals > cutoff, 1.0 / np.sqrt(np.clip(vals, 1e-300, None)), 0.0)
    else:
        powered = np.where(vals > cutoff, np.sqrt(np.clip(vals, 0.0, None)), 0.0)
    return symmetrize((vecs * powered) @ vecs.T)
