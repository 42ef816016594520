"""Strain image-quality metrics and statistical comparison tools.

SNR and CNR follow the elastographic definitions (absolute window mean over
sample standard deviation; root of twice the squared mean difference over the
summed variances).  Degenerate windows (zero spread) report ``inf`` rather
than raising.  MSSIM uses the canonical 11x11 Gaussian-weighted window.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special
from skimage.metrics import structural_similarity

from .errors import InvalidArgumentError
from .field import StrainImage, _bilinear

# Metric-window extent used when deriving sizes from frame metadata.
WINDOW_EXTENT_M = 3.0e-3
DEFAULT_WINDOW_SHAPE = (32, 8)


@dataclass(frozen=True)
class WindowSpec:
    """Rectangular strain window; ``top_row``/``left_col`` are 0-based."""

    top_row: int
    left_col: int
    height: int
    width: int

    def __post_init__(self):
        if self.height < 2 or self.width < 2:
            raise InvalidArgumentError(f"window must be at least 2x2, got {self.height}x{self.width}")
        if self.top_row < 0 or self.left_col < 0:
            raise InvalidArgumentError("window origin must be nonnegative")

    def values(self, strain: StrainImage) -> np.ndarray:
        if self.top_row + self.height > strain.m or self.left_col + self.width > strain.n:
            raise InvalidArgumentError(
                f"window {self} exceeds the {strain.m}x{strain.n} strain image"
            )
        return strain.values[self.top_row:self.top_row + self.height,
                             self.left_col:self.left_col + self.width]


@dataclass
class MetricsReport:
    """Bundle of computed metrics; fields are None when not applicable."""

    snr: float | None = None
    cnr: float | None = None
    sr: float | None = None
    rmse: float | None = None
    mssim: float | None = None
    esf_width: float | None = None
    cnr_histogram: list | None = None
    window_shape: tuple | None = None

    def rows(self):
        for name in ("snr", "cnr", "sr", "rmse", "mssim", "esf_width"):
            value = getattr(self, name)
            if value is not None:
                yield name, value
        if self.cnr_histogram is not None:
            yield "cnr_histogram_mean", float(np.mean(self.cnr_histogram))
            yield "cnr_histogram_count", len(self.cnr_histogram)

    def to_csv(self, dest) -> None:
        buf = io.StringIO()
        buf.write("metric,value\n")
        for name, value in self.rows():
            buf.write(f"{name},{value:.17g}\n")
        _write_text(dest, buf.getvalue())

    def to_text(self, dest=None):
        lines = [f"{name:>20s}: {value:.6g}" for name, value in self.rows()]
        text = "\n".join(lines) + "\n"
        if dest is None:
            return text
        _write_text(dest, text)
        return text


def _write_text(dest, text: str) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)


def window_shape_from_meta(axial_spacing_m: float | None, lateral_spacing_m: float | None,
                           image_shape: tuple[int, int]) -> tuple[int, int]:
    """Samples covered by the metric window extent, clamped to fit the image.

    Falls back to the 32x8 default when spacing metadata is missing.
    """
    m, n = image_shape
    if not axial_spacing_m or not lateral_spacing_m:
        rows, cols = DEFAULT_WINDOW_SHAPE
    else:
        rows = int(round(WINDOW_EXTENT_M / axial_spacing_m))
        cols = int(round(WINDOW_EXTENT_M / lateral_spacing_m))
    rows = max(2, min(rows, m // 8))
    cols = max(2, min(cols, n // 8))
    return rows, cols


def snr(strain: StrainImage, background: WindowSpec) -> float:
    """Absolute window mean over sample standard deviation; inf when degenerate."""
    vals = background.values(strain)
    spread = float(vals.std(ddof=1))
    if spread == 0.0:
        return math.inf
    return float(np.abs(vals).mean()) / spread


def cnr(strain: StrainImage, target: WindowSpec, background: WindowSpec) -> float:
    """sqrt(2 (mu_b - mu_t)^2 / (var_b + var_t)); 0 for equal means, inf when degenerate."""
    t_vals = target.values(strain)
    b_vals = background.values(strain)
    contrast = float(b_vals.mean() - t_vals.mean())
    spread = float(b_vals.var(ddof=1) + t_vals.var(ddof=1))
    if spread == 0.0:
        return 0.0 if contrast == 0.0 else math.inf
    return math.sqrt(2.0 * contrast ** 2 / spread)


def strain_ratio(strain: StrainImage, target: WindowSpec, background: WindowSpec) -> float:
    """Target over background window mean; stiff targets score below 1."""
    b_mean = float(background.values(strain).mean())
    if b_mean == 0.0:
        raise InvalidArgumentError("background window mean is zero")
    return float(target.values(strain).mean()) / b_mean


def rmse(estimated: StrainImage, truth: StrainImage) -> float:
    """Root mean squared strain error over all samples."""
    if estimated.values.shape != truth.values.shape:
        raise InvalidArgumentError(
            f"shape mismatch: {estimated.values.shape} vs {truth.values.shape}"
        )
    diff = estimated.values - truth.values
    return math.sqrt(float(np.mean(diff ** 2)))


def mssim(estimated: StrainImage, truth: StrainImage) -> float:
    """Mean structural similarity with the canonical 11x11 Gaussian window.

    The dynamic range spans both images jointly (reducing to the truth range
    in the usual case of a wider-range reference, and keeping the metric
    symmetric); a flat pair has no defined range and raises.
    """
    if estimated.values.shape != truth.values.shape:
        raise InvalidArgumentError(
            f"shape mismatch: {estimated.values.shape} vs {truth.values.shape}"
        )
    if min(truth.values.shape) < 11:
        raise InvalidArgumentError("images must be at least 11 samples in each direction")
    dynamic_range = float(max(truth.values.max(), estimated.values.max())
                          - min(truth.values.min(), estimated.values.min()))
    if dynamic_range == 0.0:
        raise InvalidArgumentError("images have zero joint dynamic range")
    return float(structural_similarity(
        estimated.values, truth.values,
        win_size=11, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False, K1=0.01, K2=0.03,
        data_range=dynamic_range,
    ))


def cnr_histogram(strain: StrainImage, targets, backgrounds,
                  expected_counts: tuple[int, int] = (6, 20)) -> list[float]:
    """CNR for every (target, background) pair in row-major pair order."""
    targets = list(targets)
    backgrounds = list(backgrounds)
    if (len(targets), len(backgrounds)) != tuple(expected_counts):
        raise InvalidArgumentError(
            f"expected {expected_counts[0]} target and {expected_counts[1]} background windows, "
            f"got {len(targets)} and {len(backgrounds)}"
        )
    return [cnr(strain, t, b) for t in targets for b in backgrounds]


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    degenerate: bool = False

    def __iter__(self):
        return iter((self.statistic, self.p_value))


def paired_ttest(a, b) -> TTestResult:
    """Two-tailed paired t-test.

    Zero-spread differences are flagged degenerate: identical inputs report
    p = 1 by convention, a constant nonzero offset reports p = 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise InvalidArgumentError("inputs must be equal-length 1-D sequences of length >= 2")
    diff = a - b
    spread = float(diff.std(ddof=1))
    mean = float(diff.mean())
    if spread == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0, degenerate=True)
        return TTestResult(math.copysign(math.inf, mean), 0.0, degenerate=True)
    statistic = mean / (spread / math.sqrt(diff.size))
    dof = diff.size - 1
    p_value = float(2.0 * special.stdtr(dof, -abs(statistic)))
    return TTestResult(statistic, p_value)


def _isotonic_fit(y: np.ndarray) -> np.ndarray:
    """Nondecreasing least-squares fit by pool-adjacent-violators."""
    level = y.astype(float).copy()
    weight = np.ones_like(level)
    blocks = 0
    means = np.empty_like(level)
    counts = np.empty_like(weight)
    for value in level:
        means[blocks] = value
        counts[blocks] = 1.0
        blocks += 1
        while blocks > 1 and means[blocks - 2] >= means[blocks - 1]:
            total = counts[blocks - 2] + counts[blocks - 1]
            means[blocks - 2] = (means[blocks - 2] * counts[blocks - 2]
                                 + means[blocks - 1] * counts[blocks - 1]) / total
            counts[blocks - 2] = total
            blocks -= 1
    out = np.empty_like(level)
    pos = 0
    for idx in range(blocks):
        span = int(counts[idx])
        out[pos:pos + span] = means[idx]
        pos += span
    return out


@dataclass(frozen=True)
class EsfResult:
    """Sampled edge profile and its 10-90% transition width in samples."""

    profile: np.ndarray
    positions: np.ndarray
    width_10_90: float
    degenerate: bool = False


def _crossing(positions: np.ndarray, normalized: np.ndarray, level: float) -> float:
    above = np.nonzero(normalized >= level)[0]
    k = int(above[0])
    if k == 0:
        return float(positions[0])
    span = normalized[k] - normalized[k - 1]
    frac = (level - normalized[k - 1]) / span
    return float(positions[k - 1] + frac * (positions[k] - positions[k - 1]))


def esf(strain: StrainImage, line_start, line_end, num_samples: int = 101) -> EsfResult:
    """Edge-spread profile along a segment, with its 10-90% width.

    The strain is sampled bilinearly at ``num_samples`` points between the two
    1-based (row, col) endpoints; a monotone fit (better of nondecreasing /
    nonincreasing) defines the normalized transition whose 10% and 90%
    crossings bound the width.  Profiles with no transition in the monotone
    fit are flagged degenerate and returned with a NaN width.
    """
    if num_samples < 3:
        raise InvalidArgumentError("num_samples must be >= 3")
    y0, x0 = (float(v) for v in line_start)
    y1, x1 = (float(v) for v in line_end)
    m, n = strain.values.shape
    for y, x in ((y0, x0), (y1, x1)):
        if not (1 <= y <= m and 1 <= x <= n):
            raise InvalidArgumentError(f"endpoint ({y}, {x}) outside [1, {m}] x [1, {n}]")
    t = np.linspace(0.0, 1.0, num_samples)
    ys = y0 + t * (y1 - y0)
    xs = x0 + t * (x1 - x0)
    profile, _ = _bilinear(strain.values, ys, xs)
    positions = t * math.hypot(y1 - y0, x1 - x0)

    rising = _isotonic_fit(profile)
    falling = -_isotonic_fit(-profile)
    if np.sum((rising - profile) ** 2) <= np.sum((falling - profile) ** 2):
        fit, fit_positions = rising, positions
    else:
        # Reverse a falling transition so the crossing search always walks a
        # nondecreasing fit; the width is direction-independent.
        fit = falling[::-1]
        fit_positions = positions[-1] - positions[::-1]
    lo, hi = float(fit.min()), float(fit.max())
    if hi == lo:
        return EsfResult(profile, positions, math.nan, degenerate=True)
    normalized = (fit - lo) / (hi - lo)
    width = abs(_crossing(fit_positions, normalized, 0.9)
                - _crossing(fit_positions, normalized, 0.1))
    return EsfResult(profile, positions, width)
