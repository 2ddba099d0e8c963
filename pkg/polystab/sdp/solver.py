import time
import logging
from typing import List, Optional

import cvxpy as cp
import numpy as np
from scipy import sparse

from polystab.config import get_solver_settings
from polystab.config.models import Solver
from polystab.models.types import SolveStatus
from polystab.sdp.program import ConicProgram, ConicSolution, feasibility_margin

logger = logging.getLogger(__name__)

_STATUS = {
    cp.OPTIMAL: SolveStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolveStatus.INACCURATE,
    cp.INFEASIBLE: SolveStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolveStatus.INFEASIBLE,
    cp.UNBOUNDED: SolveStatus.UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: SolveStatus.UNBOUNDED,
    cp.USER_LIMIT: SolveStatus.TIME_LIMIT,
}


def _solver_options(settings: Solver) -> dict:
    name = settings.name.upper()
    if name == 'CLARABEL':
        return {'max_iter': settings.max_iters, 'time_limit': settings.time_limit}
    if name == 'SCS':
        return {'max_iters': max(settings.max_iters, 20000), 'time_limit_secs': settings.time_limit,
                'eps': min(settings.feas_tol * 10, 1e-6)}
    return {}


def _vec_selector(program: ConicProgram) -> sparse.csr_matrix:
    """Map column-major ``vec`` of each block (then the free part) onto the variable vector."""
    rows, cols = [], []
    offset_var, offset_vec = 0, 0
    for block in program.blocks:
        n = block.size
        for i in range(n):
            for j in range(i, n):
                rows.append(offset_var)
                cols.append(offset_vec + i + j * n)
                offset_var += 1
        offset_vec += n * n
    for k in range(program.n_free):
        rows.append(offset_var + k)
        cols.append(offset_vec + k)
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(program.n_vars, offset_vec + program.n_free))


def solve(program: ConicProgram, settings: Optional[Solver] = None) -> ConicSolution:
    """Solve with cvxpy and re-check the answer independently.

    Solver breakdowns and limits are reported through the returned status
    and never raised. A solution whose recomputed residual or block
    eigenvalues miss ``settings.feas_tol`` / ``settings.psd_tol`` is
    downgraded to INACCURATE.
    """
    settings = settings or get_solver_settings()
    program.validate()
    started = time.perf_counter()

    blocks: List[cp.Variable] = [cp.Variable((b.size, b.size), symmetric=True) for b in program.blocks]
    free = cp.Variable(program.n_free) if program.n_free else None
    parts = [cp.vec(X, order='F') for X in blocks] + ([free] if free is not None else [])
    if not parts:
        return ConicSolution(SolveStatus.FAILED, message='program has no variables')
    stacked = cp.hstack(parts) if len(parts) > 1 else parts[0]

    select = _vec_selector(program)
    A = program.equality_matrix() @ select
    c = select.T @ program.objective_vector()

    constraints = [X >> 0 for X in blocks]
    if program.n_rows:
        constraints.append(A @ stacked == np.asarray(program.rhs))
    has_objective = bool(program.objective)
    problem = cp.Problem(cp.Minimize(c @ stacked if has_objective else 0), constraints)

    logger.info(f"Solving SDP: {len(program.blocks)} blocks (max size "
                f"{max((b.size for b in program.blocks), default=0)}), "
                f"{program.n_free} free vars, {program.n_rows} equalities with {settings.name}")
    try:
        problem.solve(solver=settings.name, verbose=settings.verbose, **_solver_options(settings))
    except cp.error.SolverError as e:
        logger.warning(f"Solver {settings.name} failed: {e}")
        return ConicSolution(SolveStatus.FAILED, solver=settings.name, message=str(e),
                             solve_time=time.perf_counter() - started)

    status = _STATUS.get(problem.status, SolveStatus.FAILED)
    if status is SolveStatus.OPTIMAL and not has_objective:
        status = SolveStatus.FEASIBLE
    stats = problem.solver_stats
    elapsed = time.perf_counter() - started
    if not status.has_values:
        logger.info(f"Solver finished with status {status} ({problem.status}) in {elapsed:.2f}s")
        return ConicSolution(status, solver=settings.name, message=str(problem.status),
                             iterations=getattr(stats, 'num_iters', None), solve_time=elapsed)

    values = [X.value for X in blocks]
    if any(v is None for v in values) or (free is not None and free.value is None):
        return ConicSolution(SolveStatus.FAILED, solver=settings.name, message='solver returned no values',
                             solve_time=elapsed)
    solution = ConicSolution(
        status=status,
        blocks=[(np.asarray(v) + np.asarray(v).T) / 2 for v in values],
        free=np.asarray(free.value, dtype=float).ravel() if free is not None else np.zeros(0),
        objective_value=float(problem.value) if has_objective else 0.0,
        iterations=getattr(stats, 'num_iters', None),
        solve_time=elapsed,
        solver=settings.name,
        message=str(problem.status),
    )

    margin = feasibility_margin(solution, program)
    if status is not SolveStatus.INACCURATE and not margin.passes(settings.feas_tol, settings.psd_tol):
        logger.warning(f"Solution misses tolerances (residual {margin.max_residual:.2e}, "
                       f"min eigenvalue {margin.min_eigenvalue:.2e}); marking INACCURATE")
        solution.status = SolveStatus.INACCURATE
    logger.info(f"Solver finished with status {solution.status} in {elapsed:.2f}s "
                f"(residual {margin.max_residual:.2e}, min eigenvalue {margin.min_eigenvalue:.2e})")
    return solution
