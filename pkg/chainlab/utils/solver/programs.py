"""
Solver back-ends for programs of the form

    minimize   sum_i w_i x_i^p
    subject to A x >= b,  0 <= x <= upper

p = 1 goes to HiGHS through scipy.optimize.linprog; p > 1 goes to cvxpy
(Clarabel by default) or, from a caller-supplied start, to SLSQP.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import cvxpy as cp
import numpy as np
from scipy import sparse
from scipy.optimize import linprog, minimize, nnls

from chainlab.core.config import Settings
from chainlab.core.errors import NoAdmissibleDensity, SolverStall

logger = logging.getLogger(__name__)


@dataclass
class ProgramSolution:
    x: np.ndarray
    objective: float
    duals: Optional[np.ndarray] = None
    dual_bound: Optional[float] = None
    kkt_residual: Optional[float] = None
    solver_status: str = "optimal"


def max_violation(A, b: np.ndarray, x: np.ndarray) -> float:
    if b.size == 0:
        return 0.0
    return float(max(0.0, np.max(b - A @ x)))


def solve_linear(
    w: np.ndarray,
    A,
    b: np.ndarray,
    upper: Optional[np.ndarray],
    settings: Settings,
) -> ProgramSolution:
    """HiGHS dual simplex; the dual objective is reported as a lower bound."""
    n = w.size
    A = sparse.csr_matrix(A)
    bounds = [(0.0, None if upper is None or not np.isfinite(upper[i]) else float(upper[i])) for i in range(n)]
    res = linprog(
        c=w,
        A_ub=-A,
        b_ub=-b,
        bounds=bounds,
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": max(min(settings.FEAS_TOL, 1e-7), 1e-10),
            "dual_feasibility_tolerance": max(min(settings.FEAS_TOL, 1e-7), 1e-10),
        },
    )
    if res.status == 2:
        raise NoAdmissibleDensity("The constraint set is empty under the chosen class", {"solver": res.message})
    if res.status != 0:
        raise SolverStall(f"HiGHS stopped: {res.message}", {"status": int(res.status)})

    x = np.maximum(res.x, 0.0)
    duals = -np.asarray(res.ineqlin.marginals, dtype=float)
    dual_bound = float(duals @ b)
    if upper is not None:
        finite = np.isfinite(upper)
        dual_bound += float(np.asarray(res.upper.marginals)[finite] @ upper[finite])

    logger.debug("HiGHS solved %d rows x %d columns, objective %.12g", b.size, n, res.fun)
    return ProgramSolution(x=x, objective=float(w @ x), duals=duals, dual_bound=dual_bound)


def kkt_residual(w: np.ndarray, p: float, A, b: np.ndarray, x: np.ndarray, y: np.ndarray,
                 upper: Optional[np.ndarray] = None) -> float:
    """Scaled residual of stationarity, complementarity and primal feasibility."""
    grad = p * w * np.power(np.maximum(x, 0.0), p - 1.0)
    r = grad - A.T @ y
    stationarity_terms = np.abs(np.minimum(x, r))
    if upper is not None:
        at_cap = np.isfinite(upper) & (x >= upper - 1e-12)
        capped = np.where(x <= 1e-12, 0.0, np.maximum(r, 0.0))
        stationarity_terms = np.where(at_cap, capped, stationarity_terms)
    scale = max(1.0, float(np.max(np.abs(grad))) if grad.size else 1.0)
    stationarity = float(np.max(stationarity_terms)) if x.size else 0.0
    slack = A @ x - b
    complementarity = float(np.max(np.abs(y * slack))) if y.size else 0.0
    return max(stationarity, complementarity, max_violation(A, b, x)) / scale


def solve_convex(
    w: np.ndarray,
    p: float,
    A,
    b: np.ndarray,
    upper: Optional[np.ndarray],
    settings: Settings,
) -> ProgramSolution:
    """Interior point through cvxpy; duals of A x >= b come back nonnegative."""
    n = w.size
    A = sparse.csr_matrix(A)
    x = cp.Variable(n, nonneg=True)
    constraints = [A @ x >= b]
    if upper is not None and np.isfinite(upper).any():
        idx = np.flatnonzero(np.isfinite(upper))
        constraints.append(x[idx] <= upper[idx])

    problem = cp.Problem(cp.Minimize(w @ cp.power(x, p)), constraints)
    options = {}
    if settings.CONVEX_SOLVER.upper() == "CLARABEL":
        options = {"tol_gap_abs": 1e-11, "tol_gap_rel": 1e-11, "tol_feas": 1e-11}
    try:
        problem.solve(solver=settings.CONVEX_SOLVER, **options)
    except cp.error.SolverError as e:
        raise SolverStall(f"{settings.CONVEX_SOLVER} failed: {e}")

    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise NoAdmissibleDensity("The constraint set is empty under the chosen class")
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or x.value is None:
        raise SolverStall(f"{settings.CONVEX_SOLVER} returned status {problem.status}")

    values = np.maximum(np.asarray(x.value, dtype=float), 0.0)
    duals = np.maximum(np.asarray(constraints[0].dual_value, dtype=float).ravel(), 0.0)
    return ProgramSolution(
        x=values,
        objective=float(w @ np.power(values, p)),
        duals=duals,
        kkt_residual=kkt_residual(w, p, A, b, values, duals, upper),
        solver_status=str(problem.status),
    )


def solve_convex_from_start(
    w: np.ndarray,
    p: float,
    A,
    b: np.ndarray,
    start: np.ndarray,
    settings: Settings,
) -> ProgramSolution:
    """
    SLSQP from a given start, for small programs.

    Multipliers are recovered afterwards by nonnegative least squares on the
    rows that are active at the solution.
    """
    A = sparse.csr_matrix(A).toarray()
    n = w.size

    def objective(x):
        return float(w @ np.power(np.maximum(x, 0.0), p))

    def gradient(x):
        return p * w * np.power(np.maximum(x, 0.0), p - 1.0)

    res = minimize(
        objective,
        x0=np.asarray(start, dtype=float),
        jac=gradient,
        method="SLSQP",
        bounds=[(0.0, None)] * n,
        constraints=[{"type": "ineq", "fun": lambda x: A @ x - b, "jac": lambda x: A}],
        options={"ftol": 1e-15, "maxiter": 1000},
    )
    if not res.success and max_violation(A, b, res.x) > settings.FEAS_TOL:
        raise SolverStall(f"SLSQP stopped: {res.message}")

    x = np.maximum(res.x, 0.0)
    active = np.flatnonzero(np.abs(A @ x - b) <= 1e-8 * max(1.0, float(np.max(np.abs(b))) if b.size else 1.0))
    duals = np.zeros(b.size)
    if active.size:
        free = x > 1e-10
        if free.any():
            y_active, _ = nnls(A[active][:, free].T, gradient(x)[free])
            duals[active] = y_active
    return ProgramSolution(
        x=x,
        objective=objective(x),
        duals=duals,
        kkt_residual=kkt_residual(w, p, A, b, x, duals),
        solver_status="slsqp",
    )
