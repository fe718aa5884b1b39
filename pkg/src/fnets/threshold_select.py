"""Data-driven hard-threshold selection via a CUSUM change point.

Estimated coefficient matrices are dense with many near-zero entries; a gap
separates genuine edges from noise. Scanning an exponentially growing grid of
candidate thresholds, the edge-to-non-edge ratio drops fast below the gap and
slowly above it, so the kink is located as a single change point in the
difference quotients of that ratio.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError


@dataclass(frozen=True)
class ThresholdSelection:
    """Grid, intermediate statistics and the selected threshold.

    Arrays follow the candidate grid: ``ratio[k]`` matches ``candidates[k]``;
    ``diff[k]`` and ``cusum[k]`` are the statistics whose defining index is
    k+1 in 1-based counting (they start at the second candidate).
    """

    candidates: np.ndarray  # (M,)
    ratio: np.ndarray  # (M,)
    diff: np.ndarray  # (M-1,)
    cusum: np.ndarray  # (M-2,)
    selected_index: int  # 1-based index k* into the candidate grid
    threshold: float
    denominator: int


def candidate_grid(mat: np.ndarray, grid_size: int = 100) -> np.ndarray:
    """Zero followed by a geometric sweep up to the largest modulus.

    The sweep starts at the smallest nonzero modulus but never more than two
    decades below the top. An unbounded start would make the first intervals
    arbitrarily narrow, and the difference quotients over them would dwarf
    the change point the scan is meant to find.
    """
    if grid_size < 4:
        raise DimensionError("threshold grid needs at least 4 candidates")
    mags = np.abs(np.asarray(mat, dtype=float))
    nonzero = mags[mags > 0.0]
    if nonzero.size == 0:
        raise DataError("cannot build a threshold grid for an all-zero matrix")
    hi = float(mags.max())
    lo = max(float(nonzero.min()), hi / 100.0)
    if hi / lo < 1.0 + 1e-12:
        lo = hi / 100.0
    grid = np.concatenate([[0.0], np.geomspace(lo, hi, grid_size - 1)])
    grid[-1] = hi
    return grid


def select_threshold(
    mat: np.ndarray, denominator: int, grid_size: int = 100
) -> ThresholdSelection:
    """Pick the adaptive threshold for ``mat`` with ``denominator`` candidate cells."""
    mat = np.asarray(mat, dtype=float)
    grid = candidate_grid(mat, grid_size)
    m_pts = grid.size
    mags = np.abs(mat).ravel()
    counts = (mags[None, :] > grid[:, None]).sum(axis=1)
    if denominator < counts[0]:
        raise DimensionError(
            f"denominator {denominator} smaller than the unthresholded support {counts[0]}"
        )
    ratio = counts / np.maximum(denominator - counts, 1)
    diff = np.diff(ratio) / np.diff(grid)
    # CUSUM over the difference quotients; in 1-based terms the left mean at k
    # sums quotients 2..k but divides by k, exactly as the statistic is defined.
    total = diff.sum()
    cum = np.cumsum(diff)
    ks = np.arange(2, m_pts)  # 1-based candidate indices 2..M-1
    left = cum[: m_pts - 2] / ks
    right = (total - cum[: m_pts - 2]) / (m_pts - ks)
    cusum = np.sqrt(ks * (m_pts - ks) / m_pts) * np.abs(left - right)
    k_star = int(2 + np.argmax(cusum))
    return ThresholdSelection(
        candidates=grid,
        ratio=ratio,
        diff=diff,
        cusum=cusum,
        selected_index=k_star,
        threshold=float(grid[k_star - 1]),
        denominator=denominator,
    )
