"""Covariance construction: initial estimate, anti-diagonal decoupling,
coarray vectorization and spatial smoothing.

For a symmetric layout, mirroring the covariance across its anti-diagonal
flips the sign of the range-dependent quadratic phase while preserving the
angle-dependent linear phase.  The Hadamard product of the matrix with its
mirror therefore cancels range out of every entry (self-spectrum) at the
cost of extra pairwise cross terms; the result lives on the difference
coarray and can be smoothed back to a full-rank angle-only covariance.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .channel import SnapshotSet
from .geometry import CoarrayLayout, SensorLayout, difference_coarray

__all__ = [
    "CovarianceBundle",
    "covariance_ls",
    "covariance_sample",
    "mirror_antidiagonal",
    "decouple",
    "vectorize_to_coarray",
    "spatial_smooth",
    "build_bundle",
]


def covariance_ls(snapshots: SnapshotSet) -> np.ndarray:
    """Covariance from per-snapshot least-squares steering estimates.

    Each snapshot gives the rank-one LS fit
    ``B_t = y(t) x(t)^H / (x(t)^H x(t))``; the estimate is the average of
    ``B_t B_t^H``, which reduces to the power-normalized outer product
    ``y y^H / (x^H x)`` per snapshot.  Requires the known source waveforms
    carried by the snapshot set.
    """
    y, x = snapshots.y, snapshots.x
    power = np.einsum("kt,kt->t", x.conj(), x).real
    if np.any(power == 0.0):
        raise ValueError("a snapshot has zero source power; LS fit undefined")
    z = y / np.sqrt(power)[None, :]
    return _hermitian_part(z @ z.conj().T / snapshots.n_snapshots)


def covariance_sample(snapshots: SnapshotSet) -> np.ndarray:
    """Plain sample covariance ``(1/T) sum_t y(t) y(t)^H``."""
    y = snapshots.y
    return _hermitian_part(y @ y.conj().T / snapshots.n_snapshots)


def _hermitian_part(matrix: np.ndarray) -> np.ndarray:
    # Gram products are Hermitian analytically but not bitwise under BLAS;
    # downstream code relies on exact Hermiticity.
    return 0.5 * (matrix + matrix.conj().T)


def mirror_antidiagonal(r_hat: np.ndarray) -> np.ndarray:
    """Mirror across the anti-diagonal: out[i, j] = in[mirror(j), mirror(i)]."""
    return r_hat.T[::-1, ::-1]


def decouple(
    r_hat: np.ndarray, layout: SensorLayout
) -> tuple[np.ndarray, np.ndarray]:
    """Anti-diagonal mirror and the decoupled (Hadamard) covariance.

    Returns ``(R_a, R_d)`` with ``R_d = R * R_a`` elementwise.  The identity
    that makes ``R_d`` range-free requires a symmetric layout.
    """
    u = layout.size
    if r_hat.shape != (u, u):
        raise ValueError(f"covariance shape {r_hat.shape} does not match U={u}")
    if not layout.is_symmetric:
        raise ValueError("decoupling requires a symmetric layout")
    r_a = mirror_antidiagonal(r_hat)
    return r_a, r_hat * r_a


@lru_cache(maxsize=64)
def _lag_pair_indices(layout: SensorLayout) -> dict[int, np.ndarray]:
    """Flat indices of covariance entries per coarray lag, row-major order."""
    g = np.asarray(layout.grid, dtype=int)
    lag_matrix = (g[:, None] - g[None, :]).ravel()
    order = np.argsort(lag_matrix, kind="stable")
    sorted_lags = lag_matrix[order]
    out: dict[int, np.ndarray] = {}
    start = 0
    while start < sorted_lags.size:
        stop = start
        while stop < sorted_lags.size and sorted_lags[stop] == sorted_lags[start]:
            stop += 1
        idx = np.sort(order[start:stop])
        out[int(sorted_lags[start])] = idx
        start = stop
    return out


def vectorize_to_coarray(
    r_d: np.ndarray,
    layout: SensorLayout,
    coarray: CoarrayLayout | None = None,
    mode: str = "average",
) -> np.ndarray:
    """Collapse a U x U matrix to one sample per coarray lag.

    Args:
        r_d: Decoupled covariance (or any U x U matrix to vectorize).
        layout: The physical layout that generated ``r_d``.
        coarray: Coarray whose ``smoothing_segment`` defines the output lags;
            computed from the layout when omitted.
        mode: ``"average"`` pools all redundant entries per lag (lower
            variance); ``"first"`` keeps the first entry in row-major order.

    Returns:
        Complex vector over the smoothing segment, ascending lag.
    """
    if mode not in ("average", "first"):
        raise ValueError(f"unknown redundancy mode {mode!r}")
    if coarray is None:
        coarray = difference_coarray(layout)
    pairs = _lag_pair_indices(layout)
    flat = r_d.ravel()
    out = np.empty(len(coarray.smoothing_segment), dtype=complex)
    for i, lag in enumerate(coarray.smoothing_segment):
        idx = pairs.get(lag)
        if idx is None:
            raise RuntimeError(
                f"lag {lag} missing from coarray; segment inconsistent with layout"
            )
        out[i] = flat[idx].mean() if mode == "average" else flat[idx[0]]
    return out


def spatial_smooth(r_tilde: np.ndarray) -> np.ndarray:
    """Rank-restoring smoothing of the coarray vector.

    A length 2W - 1 vector is split into W overlapping windows of W
    entries; the output is the average of the window outer products, a
    W x W Hermitian PSD matrix.
    """
    r = np.asarray(r_tilde)
    if r.ndim != 1 or r.size % 2 == 0:
        raise ValueError("coarray vector must be 1-D with odd length")
    w = (r.size + 1) // 2
    windows = sliding_window_view(r, w)
    return windows.T @ windows.conj() / w


@dataclass(frozen=True, eq=False)
class CovarianceBundle:
    """Every covariance stage of the pipeline, kept for diagnostics."""

    r_hat: np.ndarray
    r_a: np.ndarray
    r_d: np.ndarray
    r_tilde: np.ndarray
    r_v: np.ndarray
    estimator_kind: str


def build_bundle(
    snapshots: SnapshotSet,
    coarray: CoarrayLayout | None = None,
    estimator: str = "ls",
    lag_mode: str = "average",
) -> CovarianceBundle:
    """Run the full covariance chain on a snapshot set."""
    if estimator == "ls":
        r_hat = covariance_ls(snapshots)
    elif estimator == "sample":
        r_hat = covariance_sample(snapshots)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    layout = snapshots.layout
    if coarray is None:
        coarray = difference_coarray(layout)
    r_a, r_d = decouple(r_hat, layout)
    r_tilde = vectorize_to_coarray(r_d, layout, coarray, lag_mode)
    r_v = spatial_smooth(r_tilde)
    return CovarianceBundle(r_hat, r_a, r_d, r_tilde, r_v, estimator)
