"""Sparse operator assembly for the linearized estimation problem.

Builds the data-residual vector, the per-sample gradient operator acting on
displacement increments, and the stacked regularization operator made of five
blocks (first-row anchor, first- and second-order differences in the axial and
lateral directions), each weighted per displacement component.  Matrices are
scipy CSR arrays over the interleaved field layout of :mod:`altruist.field`.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import InvalidArgumentError
from .field import BIAS_MODES, DisplacementField, RegParams, RfFrame, _bilinear, _warped_gradients


def _component_diag(n: int, axial_weight: float, lateral_weight: float):
    """diag(wa, wl, wa, wl, ...) over the 2n interleaved entries of one image row."""
    return sparse.diags_array(np.tile([float(axial_weight), float(lateral_weight)], n), format="csr")


def _kron(a, b):
    """Sparse Kronecker product without stored zeros (scipy's block path keeps them)."""
    out = sparse.kron(a, b, format="csr")
    out.eliminate_zeros()
    return out


def _first_difference(m: int):
    """m x m forward-looking difference: row i computes x_i - x_{i-1}; row 0 stays zero."""
    rows = np.repeat(np.arange(1, m), 2)
    cols = np.column_stack([np.arange(0, m - 1), np.arange(1, m)]).ravel()
    vals = np.tile([-1.0, 1.0], m - 1)
    return sparse.coo_array((vals, (rows, cols)), shape=(m, m)).tocsr()


def _second_difference(m: int):
    """m x m second difference with zero first and last rows."""
    rows = np.repeat(np.arange(1, m - 1), 3)
    cols = np.column_stack([np.arange(0, m - 2), np.arange(1, m - 1), np.arange(2, m)]).ravel()
    vals = np.tile([1.0, -2.0, 1.0], m - 2)
    return sparse.coo_array((vals, (rows, cols)), shape=(m, m)).tocsr()


def build_first_order_axial(m: int, n: int, alpha1: float, beta1: float):
    """Weighted axial first difference, 2mn x 2mn; first image row maps to zero."""
    if m < 2 or n < 1:
        raise InvalidArgumentError(f"axial first difference needs m >= 2, n >= 1, got ({m}, {n})")
    return _kron(_first_difference(m), _component_diag(n, alpha1, beta1))


def build_first_order_lateral(m: int, n: int, alpha2: float, beta2: float):
    """Weighted lateral first difference, block-diagonal over image rows."""
    if m < 1 or n < 2:
        raise InvalidArgumentError(f"lateral first difference needs m >= 1, n >= 2, got ({m}, {n})")
    within_row = _kron(_first_difference(n), _component_diag(1, alpha2, beta2))
    return _kron(sparse.eye_array(m), within_row)


def build_second_order_axial(m: int, n: int, theta1: float, lambda1: float):
    """Weighted axial second difference; first and last image rows map to zero."""
    if m < 3 or n < 1:
        raise InvalidArgumentError(f"axial second difference needs m >= 3, n >= 1, got ({m}, {n})")
    return _kron(_second_difference(m), _component_diag(n, theta1, lambda1))


def build_second_order_lateral(m: int, n: int, theta2: float, lambda2: float):
    """Weighted lateral second difference, block-diagonal over image rows."""
    if m < 1 or n < 3:
        raise InvalidArgumentError(f"lateral second difference needs m >= 1, n >= 3, got ({m}, {n})")
    within_row = _kron(_second_difference(n), _component_diag(1, theta2, lambda2))
    return _kron(sparse.eye_array(m), within_row)


def build_first_row_prior(m: int, n: int, gamma: float):
    """2n x 2mn anchor penalizing the axial displacement of the first image row."""
    if m < 1 or n < 1:
        raise InvalidArgumentError(f"first-row anchor needs m, n >= 1, got ({m}, {n})")
    if gamma == 0.0:
        return sparse.csr_array((2 * n, 2 * m * n))
    idx = 2 * np.arange(n)
    vals = np.full(n, float(gamma))
    return sparse.coo_array((vals, (idx, idx)), shape=(2 * n, 2 * m * n)).tocsr()


def build_xi(frame1: RfFrame, frame2: RfFrame, d: DisplacementField) -> np.ndarray:
    """Data residual per sample: frame1 minus frame2 sampled at the warped grid.

    Samples whose warped location leaves the frame are removed from the data
    term by zeroing their residual.
    """
    _check_dims(frame1, frame2, d)
    rows = np.arange(1, frame1.m + 1, dtype=float)[:, None]
    cols = np.arange(1, frame1.n + 1, dtype=float)[None, :]
    warped, oob = _bilinear(frame2.samples, rows + d.axial, cols + d.lateral)
    residual = np.where(oob, 0.0, frame1.samples - warped)
    return residual.ravel()


def build_d_prime(frame2: RfFrame, d: DisplacementField):
    """mn x 2mn gradient operator: row p holds the warped axial/lateral gradients.

    Rows whose half-sample gradient stencil leaves the frame are zeroed, which
    disables those samples in the data term.
    """
    grad_axial, grad_lateral, stencil_oob = _warped_gradients(frame2, d)
    m, n = frame2.shape
    p = np.arange(m * n)
    keep = ~stencil_oob.ravel()
    ga = grad_axial.ravel()
    gl = grad_lateral.ravel()
    mask_a = keep & (ga != 0.0)
    mask_l = keep & (gl != 0.0)
    rows = np.concatenate([p[mask_a], p[mask_l]])
    cols = np.concatenate([2 * p[mask_a], 2 * p[mask_l] + 1])
    vals = np.concatenate([ga[mask_a], gl[mask_l]])
    return sparse.coo_array((vals, (rows, cols)), shape=(m * n, 2 * m * n)).tocsr()


def build_bias(m: int, n: int, mode: str, seed_field: DisplacementField | None = None,
               alpha1: float = 0.0) -> np.ndarray:
    """Adaptive offset added inside the L1 penalty, length 8mn + 2n.

    Mode ``zero`` returns the all-zero vector.  Mode ``mean-strain`` fills the
    axial entries of the axial first-difference block with -alpha1 * median
    per-row axial increment of the seed, so the penalty measures deviation
    from the expected uniform strain instead of from zero.
    """
    if mode not in BIAS_MODES:
        raise InvalidArgumentError(f"bias mode must be one of {BIAS_MODES}, got {mode!r}")
    out = np.zeros(8 * m * n + 2 * n)
    if mode == "mean-strain":
        if seed_field is None:
            raise InvalidArgumentError("mean-strain bias needs a seed field")
        increments = np.diff(seed_field.axial, axis=0)
        typical = float(np.median(increments)) if increments.size else 0.0
        if typical != 0.0 and alpha1 != 0.0:
            axial_rows = 2 * n + np.arange(0, 2 * m * n, 2)
            out[axial_rows] = -alpha1 * typical
    return out


@dataclass(frozen=True)
class OperatorSet:
    """All operators for one linearization point, immutable after assembly."""

    m: int
    n: int
    d_prime: sparse.csr_array
    xi: np.ndarray
    d_r: sparse.csr_array
    bias: np.ndarray

    def __post_init__(self):
        mn = self.m * self.n
        if self.d_prime.shape != (mn, 2 * mn):
            raise InvalidArgumentError(f"d_prime must be {mn} x {2 * mn}, got {self.d_prime.shape}")
        if self.d_r.shape != (8 * mn + 2 * self.n, 2 * mn):
            raise InvalidArgumentError(
                f"d_r must be {8 * mn + 2 * self.n} x {2 * mn}, got {self.d_r.shape}"
            )
        if self.xi.shape != (mn,):
            raise InvalidArgumentError(f"xi must have length {mn}, got {self.xi.shape}")
        if self.bias.shape != (8 * mn + 2 * self.n,):
            raise InvalidArgumentError(f"bias must have length {8 * mn + 2 * self.n}")

    @property
    def block_offsets(self) -> tuple[int, ...]:
        """Row offsets of the five stacked blocks inside d_r (plus the end)."""
        mn2 = 2 * self.m * self.n
        start = 2 * self.n
        return (0, start, start + mn2, start + 2 * mn2, start + 3 * mn2, start + 4 * mn2)


def assemble(frame1: RfFrame, frame2: RfFrame, d: DisplacementField,
             params: RegParams) -> OperatorSet:
    """Build the full operator set at the linearization point ``d``."""
    _check_dims(frame1, frame2, d)
    m, n = frame1.shape
    blocks = [
        build_first_row_prior(m, n, params.gamma),
        build_first_order_axial(m, n, params.alpha1, params.beta1),
        build_first_order_lateral(m, n, params.alpha2, params.beta2),
        build_second_order_axial(m, n, params.theta1, params.lambda1),
        build_second_order_lateral(m, n, params.theta2, params.lambda2),
    ]
    d_r = sparse.vstack(blocks, format="csr")
    return OperatorSet(
        m=m,
        n=n,
        d_prime=build_d_prime(frame2, d),
        xi=build_xi(frame1, frame2, d),
        d_r=d_r,
        bias=build_bias(m, n, params.bias_mode, seed_field=d, alpha1=params.alpha1),
    )


def dump_coo(matrix, dest) -> None:
    """Write a sparse matrix as 'row col value' lines (0-based) for cross-checks."""
    coo = sparse.coo_array(matrix)
    lines = [f"{r} {c} {v:.17g}" for r, c, v in zip(coo.row, coo.col, coo.data)]
    payload = ("\n".join(lines) + ("\n" if lines else "")).encode()
    if hasattr(dest, "write"):
        text = payload.decode()
        dest.write(text)
    else:
        Path(dest).write_bytes(payload)


def _check_dims(frame1: RfFrame, frame2: RfFrame, d: DisplacementField) -> None:
    if frame1.shape != frame2.shape:
        raise InvalidArgumentError(f"frame shapes differ: {frame1.shape} vs {frame2.shape}")
    if (d.m, d.n) != frame1.shape:
        raise InvalidArgumentError(
            f"displacement grid {(d.m, d.n)} does not match frames {frame1.shape}"
        )
