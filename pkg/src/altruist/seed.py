"""Coarse initial displacement via per-column dynamic programming.

Each A-line is aligned independently over integer axial lags with an absolute
amplitude stage cost and a lag-change transition cost, then the per-column lag
maps are median-filtered across columns.  Lateral components of the seed are
zero; the refinement stage supplies sub-sample and lateral corrections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError
from .field import DisplacementField, RfFrame


@dataclass(frozen=True)
class SeedParams:
    """Lag range, path smoothness weight and cross-column median window.

    The smoothness weight trades data fidelity against path roughness and is
    scale-relative to the RF amplitudes (the stage cost is a raw amplitude
    difference); the default suits unit-ish RF scales under realistic noise.
    """

    max_lag: int = 10
    smoothness_weight: float = 0.75
    median_window: int = 5

    def __post_init__(self):
        if self.max_lag < 1:
            raise InvalidArgumentError(f"max_lag must be >= 1, got {self.max_lag}")
        if not np.isfinite(self.smoothness_weight) or self.smoothness_weight < 0:
            raise InvalidArgumentError(
                f"smoothness_weight must be finite and nonnegative, got {self.smoothness_weight}"
            )
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise InvalidArgumentError(
                f"median_window must be an odd integer >= 1, got {self.median_window}"
            )


def _ordered_lags(max_lag: int) -> np.ndarray:
    # Ties resolve to the first index, so order candidates by (|k|, k): the
    # preferred lag is the smallest magnitude, negative before positive.
    return np.array(sorted(range(-max_lag, max_lag + 1), key=lambda k: (abs(k), k)))


def _stage_costs(f1: np.ndarray, f2: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """|f1[i, j] - f2[i+k, j]| per (row, column, lag); out-of-range rows read 0."""
    m, n = f1.shape
    costs = np.empty((m, n, lags.size))
    base = np.abs(f1)
    for idx, k in enumerate(lags):
        cost_k = base.copy()
        lo = max(0, -k)
        hi = min(m, m - k)
        if hi > lo:
            cost_k[lo:hi] = np.abs(f1[lo:hi] - f2[lo + k:hi + k])
        costs[:, :, idx] = cost_k
    return costs


def dp_seed(frame1: RfFrame, frame2: RfFrame, params: SeedParams) -> DisplacementField:
    """Integer-lag axial seed between two frames.

    The minimal-cost lag path per column is found by dynamic programming with
    stage cost |I1(i,j) - I2(i+k,j)| and transition cost w*|k - k_prev|, ties
    broken toward the smaller |k| then the smaller k.  The resulting lag maps
    are median-filtered across columns (replicated edges) and returned with
    zero lateral components.
    """
    if frame1.shape != frame2.shape:
        raise InvalidArgumentError(f"frame shapes differ: {frame1.shape} vs {frame2.shape}")
    m, n = frame1.shape
    if params.max_lag >= m / 2:
        raise InvalidArgumentError(f"max_lag {params.max_lag} must be < m/2 = {m / 2}")

    lags = _ordered_lags(params.max_lag)
    n_lags = lags.size
    stage = _stage_costs(frame1.samples, frame2.samples, lags)
    transition = params.smoothness_weight * np.abs(lags[:, None] - lags[None, :])

    total = stage[0].copy()                       # (n, n_lags)
    pointers = np.empty((m, n, n_lags), dtype=np.int32)
    for i in range(1, m):
        # candidate[c, k_prev, k] = total[c, k_prev] + transition[k_prev, k]
        candidate = total[:, :, None] + transition[None, :, :]
        pointers[i] = candidate.argmin(axis=1)
        total = stage[i] + candidate.min(axis=1)

    cols = np.arange(n)
    best = np.empty((m, n), dtype=np.int64)
    best[m - 1] = total.argmin(axis=1)
    for i in range(m - 1, 0, -1):
        best[i - 1] = pointers[i, cols, best[i]]

    lag_map = lags[best].astype(float)
    if params.median_window > 1:
        lag_map = ndimage.median_filter(lag_map, size=(1, params.median_window), mode="nearest")
    return DisplacementField.from_components(lag_map)
