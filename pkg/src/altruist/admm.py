"""Alternating-direction solver for the L2-data / L1-continuity cost.

Each iteration exactly minimizes the quadratic subproblem in the displacement
increment, soft-thresholds the split variable, and accumulates the scaled dual
variable.  A single quadratic solve with the split variable pinned at zero
serves as the L2-only comparison baseline.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import cg as sparse_cg, lsmr, splu

from .errors import ConvergenceError, InvalidArgumentError, SingularSystemError
from .field import DisplacementField, RegParams, RfFrame
from .operators import OperatorSet, assemble

SOLVER_MODES = ("altruist", "l2-baseline")
LINEAR_SOLVERS = ("auto", "direct", "conjugate-gradient")

# Direct factorization is the default up to this many grid samples; conjugate
# gradient takes over beyond it.
DIRECT_SOLVER_MAX_SAMPLES = 65536


@dataclass
class AdmmState:
    """Mutable iteration state: increment, split variable, scaled dual."""

    delta_d: np.ndarray
    nu: np.ndarray
    u: np.ndarray
    iteration: int = 0

    def check_finite(self) -> None:
        for name, vec in (("delta_d", self.delta_d), ("nu", self.nu), ("u", self.u)):
            if not np.isfinite(vec).all():
                raise ConvergenceError(f"{name} became non-finite at iteration {self.iteration}")


@dataclass
class ConvergenceTrace:
    """Per-iteration diagnostics of one solver run."""

    iterations: list = dataclass_field(default_factory=list)
    objective: list = dataclass_field(default_factory=list)
    primal_res: list = dataclass_field(default_factory=list)
    dual_res: list = dataclass_field(default_factory=list)
    data_res: list = dataclass_field(default_factory=list)
    # Quadratic-step objective before/after each solve; not part of the CSV.
    solvex_before: list = dataclass_field(default_factory=list)
    solvex_after: list = dataclass_field(default_factory=list)

    def record(self, iteration, objective, primal, dual, data,
               solvex_before=np.nan, solvex_after=np.nan) -> None:
        self.iterations.append(int(iteration))
        self.objective.append(float(objective))
        self.primal_res.append(float(primal))
        self.dual_res.append(float(dual))
        self.data_res.append(float(data))
        self.solvex_before.append(float(solvex_before))
        self.solvex_after.append(float(solvex_after))

    def __len__(self) -> int:
        return len(self.iterations)

    def to_csv(self, dest) -> None:
        buf = io.StringIO()
        buf.write("iter,objective,primal_res,dual_res,data_res\n")
        for row in zip(self.iterations, self.objective, self.primal_res,
                       self.dual_res, self.data_res):
            buf.write("%d,%.17g,%.17g,%.17g,%.17g\n" % row)
        if hasattr(dest, "write"):
            dest.write(buf.getvalue())
        else:
            Path(dest).write_text(buf.getvalue())


@dataclass(frozen=True)
class SolverConfig:
    """Solver mode, linear-solver choice and tolerances."""

    params: RegParams
    linear_solver: str = "auto"
    cg_tolerance: float = 1e-8
    cg_max_iters: int | None = None
    mode: str = "altruist"
    relinearizations: int = 0

    def __post_init__(self):
        if self.linear_solver not in LINEAR_SOLVERS:
            raise InvalidArgumentError(
                f"linear_solver must be one of {LINEAR_SOLVERS}, got {self.linear_solver!r}"
            )
        if self.mode not in SOLVER_MODES:
            raise InvalidArgumentError(f"mode must be one of {SOLVER_MODES}, got {self.mode!r}")
        if not 0.0 < self.cg_tolerance < 1.0:
            raise InvalidArgumentError(f"cg_tolerance must lie in (0, 1), got {self.cg_tolerance}")
        if self.cg_max_iters is not None and self.cg_max_iters < 1:
            raise InvalidArgumentError("cg_max_iters must be >= 1 when given")
        if self.relinearizations < 0:
            raise InvalidArgumentError("relinearizations must be >= 0")


def shrink(v, threshold: float):
    """Element-wise soft threshold: sign(v) * max(|v| - threshold, 0)."""
    if not np.isfinite(threshold) or threshold <= 0:
        raise InvalidArgumentError(f"shrinkage threshold must be positive, got {threshold}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


class _QuadraticSolver:
    """Repeated solves of the normal equations with a fixed system matrix."""

    def __init__(self, ops: OperatorSet, zeta: float, method: str,
                 cg_tolerance: float, cg_max_iters: int | None):
        if method == "auto":
            method = "direct" if ops.m * ops.n <= DIRECT_SOLVER_MAX_SAMPLES else "conjugate-gradient"
        self.method = method
        self.cg_tolerance = cg_tolerance
        size = 2 * ops.m * ops.n
        self.cg_max_iters = cg_max_iters if cg_max_iters is not None else 10 * size
        self.system = (ops.d_prime.T @ ops.d_prime + zeta * (ops.d_r.T @ ops.d_r)).tocsr()
        self._lu = None
        self._lu_failed = False
        self._warm = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        rhs_norm = float(np.linalg.norm(rhs))
        threshold = max(self.cg_tolerance * rhs_norm, 1e-10)
        if rhs_norm == 0.0:
            return np.zeros_like(rhs)
        if self.method == "direct":
            x = self._solve_direct(rhs)
        else:
            x = self._solve_cg(rhs)
        residual = float(np.linalg.norm(self.system @ x - rhs))
        if residual > threshold:
            if self.method == "direct":
                x = self._solve_minimum_norm(rhs, threshold)
            else:
                raise ConvergenceError(
                    f"conjugate gradient residual {residual:.3e} above {threshold:.3e}",
                    residual=residual,
                )
        self._warm = x
        return x

    def _solve_direct(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is None and not self._lu_failed:
            try:
                self._lu = splu(self.system.tocsc())
            except RuntimeError:
                self._lu_failed = True
        if self._lu_failed:
            return self._solve_minimum_norm(rhs, max(self.cg_tolerance * np.linalg.norm(rhs), 1e-10))
        x = self._lu.solve(rhs)
        if not np.isfinite(x).all():
            return self._solve_minimum_norm(rhs, max(self.cg_tolerance * np.linalg.norm(rhs), 1e-10))
        # One step of iterative refinement keeps the gradient-residual check
        # honest on ill-conditioned systems.
        correction = self._lu.solve(rhs - self.system @ x)
        if np.isfinite(correction).all():
            x = x + correction
        return x

    def _solve_cg(self, rhs: np.ndarray) -> np.ndarray:
        x, info = sparse_cg(self.system, rhs, x0=self._warm, rtol=self.cg_tolerance,
                            atol=0.0, maxiter=self.cg_max_iters)
        if info > 0:
            residual = float(np.linalg.norm(self.system @ x - rhs))
            raise ConvergenceError(
                f"conjugate gradient did not converge within {self.cg_max_iters} iterations",
                residual=residual,
            )
        return x

    def _solve_minimum_norm(self, rhs: np.ndarray, threshold: float) -> np.ndarray:
        # Singular system: accept the minimum-norm solution when consistent.
        x = lsmr(self.system, rhs, atol=1e-14, btol=1e-14,
                 maxiter=10 * rhs.size)[0]
        residual = float(np.linalg.norm(self.system @ x - rhs))
        if residual > threshold:
            raise SingularSystemError(
                f"normal equations are singular and inconsistent (residual {residual:.3e})"
            )
        return x


def _normal_rhs(ops: OperatorSet, d_values: np.ndarray, nu: np.ndarray,
                u: np.ndarray, zeta: float) -> np.ndarray:
    return ops.d_prime.T @ ops.xi - zeta * (ops.d_r.T @ (ops.d_r @ d_values + ops.bias - nu + u))


def solve_quadratic(ops: OperatorSet, d: DisplacementField, nu, u, zeta: float,
                    linear_solver: str = "auto", cg_tolerance: float = 1e-8,
                    cg_max_iters: int | None = None) -> np.ndarray:
    """Exact minimizer of the quadratic subproblem in the increment.

    Solves (D'^T D' + zeta D_R^T D_R) x = D'^T xi - zeta D_R^T (D_R d + bias - nu + u)
    by sparse factorization or conjugate gradient; singular but consistent
    systems yield the minimum-norm solution.
    """
    if not np.isfinite(zeta) or zeta <= 0:
        raise InvalidArgumentError(f"zeta must be positive, got {zeta}")
    nu = np.asarray(nu, dtype=float)
    u = np.asarray(u, dtype=float)
    rows = ops.d_r.shape[0]
    if nu.shape != (rows,) or u.shape != (rows,):
        raise InvalidArgumentError(f"nu and u must have length {rows}")
    solver = _QuadraticSolver(ops, zeta, linear_solver, cg_tolerance, cg_max_iters)
    return solver.solve(_normal_rhs(ops, d.values, nu, u, zeta))


def update_nu(ops: OperatorSet, d: DisplacementField, delta_d, u, zeta: float) -> np.ndarray:
    """Shrinkage step: soft-threshold the full continuity expression at 1/zeta."""
    if not np.isfinite(zeta) or zeta <= 0:
        raise InvalidArgumentError(f"zeta must be positive, got {zeta}")
    expr = ops.d_r @ (d.values + np.asarray(delta_d, dtype=float)) + ops.bias
    return shrink(expr + np.asarray(u, dtype=float), 1.0 / zeta)


def update_dual(u, ops: OperatorSet, d: DisplacementField, delta_d, nu) -> np.ndarray:
    """Scaled dual ascent: add the constraint residual to the multiplier."""
    expr = ops.d_r @ (d.values + np.asarray(delta_d, dtype=float)) + ops.bias
    return np.asarray(u, dtype=float) + expr - np.asarray(nu, dtype=float)


def _solvex_objective(ops: OperatorSet, reg_base: np.ndarray, delta: np.ndarray,
                      nu: np.ndarray, u: np.ndarray, zeta: float) -> float:
    data = ops.xi - ops.d_prime @ delta
    penalty = ops.d_r @ delta + reg_base - nu + u
    return 0.5 * float(data @ data) + 0.5 * zeta * float(penalty @ penalty)


def objective_value(ops: OperatorSet, d: DisplacementField, delta_d) -> float:
    """Full cost: half squared data residual plus L1 of the continuity expression."""
    delta = np.asarray(delta_d, dtype=float)
    data = ops.xi - ops.d_prime @ delta
    reg = ops.d_r @ (d.values + delta) + ops.bias
    return 0.5 * float(data @ data) + float(np.abs(reg).sum())


def run(frame1: RfFrame, frame2: RfFrame, seed: DisplacementField,
        config: SolverConfig) -> tuple[DisplacementField, ConvergenceTrace]:
    """Full estimation pass from a seed field.

    Operators are assembled once per linearization point (gradients are
    recomputed whenever the point moves); the increment, split variable and
    dual all start from zero.  Returns the total displacement (seed plus the
    accumulated increments) and the per-iteration trace.
    """
    if frame1.shape != frame2.shape or (seed.m, seed.n) != frame1.shape:
        raise InvalidArgumentError("frames and seed must share dimensions")
    params = config.params
    zeta = params.zeta
    trace = ConvergenceTrace()
    current = seed
    iteration = 0
    for _ in range(config.relinearizations + 1):
        ops = assemble(frame1, frame2, current, params)
        solver = _QuadraticSolver(ops, zeta, config.linear_solver,
                                  config.cg_tolerance, config.cg_max_iters)
        reg_base = ops.d_r @ current.values + ops.bias
        size = 2 * ops.m * ops.n
        state = AdmmState(np.zeros(size), np.zeros(ops.d_r.shape[0]),
                          np.zeros(ops.d_r.shape[0]))

        if config.mode == "l2-baseline":
            iteration += 1
            state.delta_d = solver.solve(_normal_rhs(ops, current.values, state.nu, state.u, zeta))
            state.iteration = iteration
            state.check_finite()
            expr = ops.d_r @ state.delta_d + reg_base
            trace.record(
                iteration,
                objective_value(ops, current, state.delta_d),
                np.linalg.norm(expr - state.nu),
                0.0,
                np.linalg.norm(ops.xi - ops.d_prime @ state.delta_d),
            )
        else:
            for _ in range(params.iterations):
                iteration += 1
                before = _solvex_objective(ops, reg_base, state.delta_d, state.nu, state.u, zeta)
                state.delta_d = solver.solve(
                    _normal_rhs(ops, current.values, state.nu, state.u, zeta))
                after = _solvex_objective(ops, reg_base, state.delta_d, state.nu, state.u, zeta)
                expr = ops.d_r @ state.delta_d + reg_base
                nu_prev = state.nu
                state.nu = shrink(expr + state.u, 1.0 / zeta)
                state.u = state.u + expr - state.nu
                state.iteration = iteration
                state.check_finite()
                trace.record(
                    iteration,
                    objective_value(ops, current, state.delta_d),
                    np.linalg.norm(expr - state.nu),
                    zeta * np.linalg.norm(ops.d_r.T @ (state.nu - nu_prev)),
                    np.linalg.norm(ops.xi - ops.d_prime @ state.delta_d),
                    solvex_before=before,
                    solvex_after=after,
                )
        current = current.shifted_by(state.delta_d)
    return current, trace
