"""Grid-domain types shared by the whole pipeline: RF frames, displacement
fields, strain images, regularization weights, plus the interpolation and
differentiation routines that operate on them.

Index convention
----------------
Sample (i, j) is 1-based, i being the axial (fast-time) row and j the lateral
A-line.  The flattened displacement layout interleaves the two motion
components: sample (i, j) sits at position p = (i-1)*n + (j-1) with its axial
value at index 2*p and its lateral value at 2*p+1 (0-based), i.e. row-major
over (i, j).  All coordinate-taking functions below use the same 1-based
(y, x) = (axial, lateral) convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

BIAS_MODES = ("zero", "mean-strain")

# Supplementary tuning table, keyed by dataset name.  Order within each tuple:
# (alpha1, alpha2, beta1, beta2, mf, gamma, zeta).
PRESET_WEIGHTS = {
    "layer": (0.015, 0.0012, 0.015, 0.0012, 100.0, 0.0001, 3000.0),
    "inclusion": (0.05, 0.00015, 0.025, 0.000075, 25.0, 0.0001, 8000.0),
    "breast": (0.09, 0.0006, 0.045, 0.0003, 25.0, 0.00001, 3000.0),
    "liver1": (0.03, 0.0005, 0.015, 0.00025, 45.0, 0.0, 20000.0),
    "liver2": (0.00018, 0.0000006, 0.00018, 0.0000002, 100.0, 0.0, 2200000.0),
    "liver3": (0.0075, 0.00005, 0.00375, 0.000025, 45.0, 0.0, 20000.0),
}


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RfFrame:
    """One RF echo frame: m axial samples by n A-lines plus acquisition metadata.

    ``samples`` is stored as a read-only float array so frames can be shared
    across concurrent estimations.
    """

    samples: np.ndarray
    sampling_rate: float = 0.0
    center_frequency: float = 0.0
    axial_spacing: float = 0.0
    lateral_spacing: float = 0.0

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 2:
            raise InvalidArgumentError(f"RF frame must be 2-D, got shape {samples.shape}")
        if samples.shape[0] < 4 or samples.shape[1] < 4:
            raise InvalidArgumentError(
                f"RF frame must be at least 4x4 (second-order stencils need the margin), got {samples.shape}"
            )
        if not np.isfinite(samples).all():
            raise InvalidArgumentError("RF frame contains non-finite amplitudes")
        object.__setattr__(self, "samples", samples)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape


@dataclass(frozen=True)
class DisplacementField:
    """Interleaved axial/lateral displacement per sample, in samples and lines.

    ``values`` has length 2*m*n; see the module docstring for the layout.
    """

    values: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.shape != (2 * self.m * self.n,):
            raise InvalidArgumentError(
                f"displacement vector must have length 2*m*n = {2 * self.m * self.n}, got {values.shape}"
            )
        if not np.isfinite(values).all():
            raise InvalidArgumentError("displacement field contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, m: int, n: int) -> "DisplacementField":
        return cls(np.zeros(2 * m * n), m, n)

    @classmethod
    def from_components(cls, axial, lateral=None) -> "DisplacementField":
        axial = np.asarray(axial, dtype=float)
        if axial.ndim != 2:
            raise InvalidArgumentError("axial component must be a 2-D grid")
        if lateral is None:
            lateral = np.zeros_like(axial)
        lateral = np.asarray(lateral, dtype=float)
        if lateral.shape != axial.shape:
            raise InvalidArgumentError("axial and lateral grids must have the same shape")
        m, n = axial.shape
        values = np.empty((m, n, 2))
        values[..., 0] = axial
        values[..., 1] = lateral
        return cls(values.ravel(), m, n)

    @property
    def axial(self) -> np.ndarray:
        return self.values.reshape(self.m, self.n, 2)[..., 0]

    @property
    def lateral(self) -> np.ndarray:
        return self.values.reshape(self.m, self.n, 2)[..., 1]

    def shifted_by(self, delta: np.ndarray) -> "DisplacementField":
        """New field with ``delta`` (length 2*m*n) added to the values."""
        return DisplacementField(self.values + np.asarray(delta, dtype=float), self.m, self.n)


@dataclass(frozen=True)
class StrainImage:
    """Dimensionless axial-strain raster plus the differentiation kernel used."""

    values: np.ndarray
    kernel_length: int

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 2:
            raise InvalidArgumentError("strain image must be 2-D")
        k = self.kernel_length
        if k < 3 or k % 2 == 0:
            raise InvalidArgumentError(f"kernel_length must be an odd integer >= 3, got {k}")
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RegParams:
    """Continuity weights, shrinkage weight and iteration budget for the solver.

    The first-order weights (alpha*, beta*) act on axial/lateral components of
    the axial and lateral first differences; theta*/lambda* are their
    second-order counterparts.  gamma anchors the first image row, zeta is the
    augmented-Lagrangian weight (also the inverse shrinkage threshold).
    """

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    theta1: float
    theta2: float
    lambda1: float
    lambda2: float
    gamma: float
    zeta: float
    mf: float | None = None
    iterations: int = 10
    bias_mode: str = "zero"

    def __post_init__(self):
        weights = {
            "alpha1": self.alpha1, "alpha2": self.alpha2,
            "beta1": self.beta1, "beta2": self.beta2,
            "theta1": self.theta1, "theta2": self.theta2,
            "lambda1": self.lambda1, "lambda2": self.lambda2,
            "gamma": self.gamma,
        }
        for name, value in weights.items():
            if not np.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be finite and nonnegative, got {value}")
        if not np.isfinite(self.zeta) or self.zeta <= 0:
            raise InvalidArgumentError(f"zeta must be positive, got {self.zeta}")
        if self.iterations < 1:
            raise InvalidArgumentError(f"iterations must be >= 1, got {self.iterations}")
        if self.bias_mode not in BIAS_MODES:
            raise InvalidArgumentError(f"bias_mode must be one of {BIAS_MODES}, got {self.bias_mode!r}")

    @classmethod
    def from_multiplier(cls, alpha1, alpha2, beta1, beta2, mf, gamma, zeta,
                        iterations: int = 10, bias_mode: str = "zero") -> "RegParams":
        """Second-order weights as ``mf`` times the first-order ones."""
        return cls(
            alpha1=alpha1, alpha2=alpha2, beta1=beta1, beta2=beta2,
            theta1=mf * alpha1, theta2=mf * alpha2,
            lambda1=mf * beta1, lambda2=mf * beta2,
            gamma=gamma, zeta=zeta, mf=mf,
            iterations=iterations, bias_mode=bias_mode,
        )

    @classmethod
    def preset(cls, name: str, iterations: int = 10, bias_mode: str = "zero") -> "RegParams":
        """Named parameter set from the per-dataset tuning table."""
        try:
            alpha1, alpha2, beta1, beta2, mf, gamma, zeta = PRESET_WEIGHTS[name]
        except KeyError:
            raise InvalidArgumentError(
                f"unknown preset {name!r}; available: {sorted(PRESET_WEIGHTS)}"
            ) from None
        return cls.from_multiplier(alpha1, alpha2, beta1, beta2, mf, gamma, zeta,
                                   iterations=iterations, bias_mode=bias_mode)


def _bilinear(array: np.ndarray, y, x):
    """Bilinear sampling of a 2-D array at fractional 1-based coordinates.

    Points outside [1, m] x [1, n] evaluate to 0 and are reported in the
    returned out-of-bounds mask.  Neighbors falling outside the grid
    contribute 0 (this only happens with weight 0 at the far boundary).
    """
    y_in = np.asarray(y, dtype=float)
    x_in = np.asarray(x, dtype=float)
    if not np.isfinite(y_in).all() or not np.isfinite(x_in).all():
        raise InvalidArgumentError("interpolation coordinates must be finite")
    yy, xx = np.broadcast_arrays(y_in, x_in)
    m, n = array.shape
    oob = (yy < 1.0) | (yy > m) | (xx < 1.0) | (xx > n)

    i0 = np.floor(yy).astype(int)
    j0 = np.floor(xx).astype(int)
    fy = yy - i0
    fx = xx - j0

    def corner(i, j):
        ok = (i >= 1) & (i <= m) & (j >= 1) & (j <= n)
        vals = array[np.clip(i, 1, m) - 1, np.clip(j, 1, n) - 1]
        return np.where(ok, vals, 0.0)

    out = ((1 - fy) * (1 - fx) * corner(i0, j0)
           + (1 - fy) * fx * corner(i0, j0 + 1)
           + fy * (1 - fx) * corner(i0 + 1, j0)
           + fy * fx * corner(i0 + 1, j0 + 1))
    out = np.where(oob, 0.0, out)
    if yy.ndim == 0:
        return float(out), bool(oob)
    return out, oob


def interp_bilinear(frame: RfFrame, y, x):
    """Sample ``frame`` at fractional 1-based (axial, lateral) coordinates.

    Returns ``(value, out_of_bounds)``; both are arrays when the inputs are.
    Out-of-bounds queries return 0 with the flag set.
    """
    return _bilinear(frame.samples, y, x)


def _warped_gradients(frame: RfFrame, warp: DisplacementField):
    """Central-difference gradients of the warped frame plus a stencil mask.

    The mask marks samples where any of the four half-sample stencil points
    leaves the frame; those gradients are untrustworthy for the data term.
    """
    if (frame.m, frame.n) != (warp.m, warp.n):
        raise InvalidArgumentError(
            f"warp grid {(warp.m, warp.n)} does not match frame {(frame.m, frame.n)}"
        )
    rows = np.arange(1, frame.m + 1, dtype=float)[:, None]
    cols = np.arange(1, frame.n + 1, dtype=float)[None, :]
    yy = rows + warp.axial
    xx = cols + warp.lateral
    up, oob_up = _bilinear(frame.samples, yy + 0.5, xx)
    down, oob_down = _bilinear(frame.samples, yy - 0.5, xx)
    right, oob_right = _bilinear(frame.samples, yy, xx + 0.5)
    left, oob_left = _bilinear(frame.samples, yy, xx - 0.5)
    stencil_oob = oob_up | oob_down | oob_right | oob_left
    return up - down, right - left, stencil_oob


def spatial_gradients(frame: RfFrame, warp: DisplacementField):
    """Axial and lateral derivatives of ``frame`` at the warped sample locations.

    grad_axial(i, j) = I(y+0.5, x) - I(y-0.5, x) with (y, x) = (i+a, j+l); the
    lateral gradient is the analogous half-sample difference in x.
    Out-of-bounds stencil points contribute 0.
    """
    grad_axial, grad_lateral, _ = _warped_gradients(frame, warp)
    return grad_axial, grad_lateral


def strain_from_displacement(disp: DisplacementField, kernel_length: int) -> StrainImage:
    """Axial strain as the least-squares slope of axial displacement per column.

    The fit window spans ``kernel_length`` rows centered on each sample and is
    truncated symmetrically at the image top/bottom (never below 2 points, so
    the edge rows fall back to a one-sided 2-point slope).  For length 3 the
    fit reduces to the central difference.
    """
    k = int(kernel_length)
    if k % 2 == 0 or k < 3:
        raise InvalidArgumentError(f"kernel_length must be an odd integer >= 3, got {kernel_length}")
    if k > disp.m:
        raise InvalidArgumentError(f"kernel_length {k} exceeds the {disp.m} available rows")
    axial = disp.axial
    m, n = axial.shape
    half = (k - 1) // 2
    out = np.empty((m, n))
    for i in range(m):
        reach = min(half, i, m - 1 - i)
        if reach == 0:
            lo, hi = (i, i + 1) if i == 0 else (i - 1, i)
            out[i] = axial[hi] - axial[lo]
        else:
            offsets = np.arange(-reach, reach + 1, dtype=float)[:, None]
            window = axial[i - reach:i + reach + 1]
            out[i] = (offsets * window).sum(axis=0) / (offsets ** 2).sum()
    return StrainImage(out, k)
