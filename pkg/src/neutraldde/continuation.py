"""Window-by-window continuation of the solution to its domain exit.

The march repeats: suggest a window from the contraction budget, solve it,
append the values, classify every new grid point against the admissible
domain.  The first non-interior point triggers bisection refinement of the
crossing time and ends the run with a boundary event; reaching the horizon
ends it there.  Membership is only sampled at grid resolution before the
bisection sharpens it, so an excursion of a non-monotone functional that
enters and leaves the boundary band strictly between grid points can be
missed at coarse dt; refine dt when the domain functional is oscillatory.  A window that will not converge is retried with half the
damping, then with repeatedly halved windows; only when the minimum window
still fails does the run stop with a solver-failure event.  That terminus is
deliberately distinct from a boundary hit: failure of the iteration is a
numerical statement, not a statement about the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInitialData, NumericalBlowup
from .history import SolutionPath, Segment, extend, segment_at, segment_on_grid
from .problem import NeutralProblem
from .solver import SolverConfig, WindowResult, heuristic_window, solve_window

#: Default bisection width for boundary-crossing refinement, in grid steps.
_REFINE_FRACTION = 1.0 / 256.0


@dataclass(frozen=True)
class TerminationEvent:
    """Why and when a continuation run stopped.

    kind "reached_horizon": the run covered the full time horizon.
    kind "boundary_hit":    the domain functional reached a boundary
                            component (detail: upper_mass / vanishing /
                            sup_band), at a time refined by bisection.
    kind "solver_failure":  no window converged at the minimum window
                            (detail: diverged / left_trust_region /
                            numerical_blowup).
    """

    kind: str
    time: float
    detail: str | None = None
    refinement_width: float = 0.0

    def label(self) -> str:
        if self.detail is None:
            return self.kind
        return f"{self.kind}:{self.detail}"


@dataclass
class Trajectory:
    """Computed path plus per-window diagnostics and the termination event."""

    path: SolutionPath
    windows: list[WindowResult] = field(default_factory=list)
    event: TerminationEvent | None = None
    tau: float = 0.0


def refine_boundary_time(prob: NeutralProblem, path: SolutionPath, t_inside: float,
                         t_outside: float, tol_t: float,
                         boundary_tol: float | None = None) -> float:
    """Bisect the interpolated path between an interior and an exterior time.

    Returns the midpoint of the final bracket; the bracket width is at most
    ``tol_t`` (or the initial width, if already smaller).
    """
    a, b = _refine_bracket(prob, path, t_inside, t_outside, tol_t, boundary_tol)
    return 0.5 * (a + b)


def _refine_bracket(prob, path, t_inside, t_outside, tol_t, boundary_tol):
    if tol_t <= 0.0:
        raise ValueError(f"tol_t must be positive, got {tol_t}")
    if not t_inside < t_outside:
        raise ValueError(f"invalid bracket: need t_inside < t_outside, got [{t_inside}, {t_outside}]")
    if t_outside - t_inside > path.dt * (1.0 + 1e-6):
        raise ValueError("invalid bracket: endpoints must be adjacent grid times")

    def classify(t: float):
        seg = segment_at(path, t, prob.h)
        return prob.membership(t, seg, boundary_tol)

    if not classify(t_inside).is_inside:
        raise ValueError(f"invalid bracket: t_inside={t_inside} does not classify as interior")
    if classify(t_outside).is_inside:
        raise ValueError(f"invalid bracket: t_outside={t_outside} classifies as interior")
    a, b = t_inside, t_outside
    while b - a > tol_t:
        mid = 0.5 * (a + b)
        if classify(mid).is_inside:
            a = mid
        else:
            b = mid
    return a, b


def _attempt_window(prob, init_seg, t0, cfg, m_cells, remaining_cells):
    """Solve one window, shrinking on failure.  Returns (result or None, failure detail)."""
    min_cells = max(1, int(round(cfg.effective_min_window() / cfg.dt)))
    m_try = min(m_cells, remaining_cells)
    damping = cfg.damping
    last_detail = None
    while True:
        attempt_cfg = SolverConfig(
            dt=cfg.dt, window=m_try * cfg.dt, tol=cfg.tol, max_iter=cfg.max_iter,
            trust_radius=cfg.trust_radius, min_window=None, damping=damping,
            boundary_tol=cfg.boundary_tol,
        )
        try:
            result = solve_window(prob, init_seg, t0, attempt_cfg)
        except NumericalBlowup:
            result = None
            last_detail = "numerical_blowup"
        if result is not None:
            if result.converged:
                return result, None
            last_detail = result.status
        if damping > 0.5:
            damping = 0.5
            continue
        m_next = max(min_cells, m_try // 2)
        if m_next == m_try:
            return None, last_detail
        m_try = m_next


def continue_solution(prob: NeutralProblem, init_seg: Segment, t0: float,
                      cfg: SolverConfig) -> Trajectory:
    """Advance from (t0, init_seg) until the trajectory leaves the domain.

    The initial history must cover [t0 - h, t0] and classify as interior.
    The horizon must be reachable on the grid: dt divides both the delay
    span and T - t0.
    """
    cfg.validate_delay(prob.h)
    ratio = (prob.T - t0) / cfg.dt
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError(f"dt={cfg.dt} must divide the horizon span {prob.T - t0}")
    start = prob.membership(t0, init_seg, cfg.boundary_tol)
    if not start.is_inside:
        raise InvalidInitialData(
            f"initial history classifies as {start.state}"
            + (f" ({start.kind})" if start.kind else "")
        )

    hist = segment_on_grid(init_seg, cfg.dt)
    path = SolutionPath(t0 - prob.h, cfg.dt, hist)
    horizon_cells = int(round((prob.T - t0) / cfg.dt))
    n_h = hist.shape[0] - 1
    traj = Trajectory(path=path)
    refine_tol = cfg.dt * _REFINE_FRACTION

    while True:
        done_cells = traj.path.n_times - 1 - n_h
        remaining = horizon_cells - done_cells
        t = t0 + done_cells * cfg.dt
        if remaining <= 0:
            traj.event = TerminationEvent("reached_horizon", prob.T)
            break
        w = heuristic_window(prob, cfg)
        m = max(1, int(w / cfg.dt + 1e-9))
        seg = segment_at(traj.path, t, prob.h)
        result, failure = _attempt_window(prob, seg, t, cfg, m, remaining)
        if result is None:
            traj.event = TerminationEvent("solver_failure", t, failure)
            break
        traj.windows.append(result)
        running_sup = max(float(np.linalg.norm(traj.path.values, axis=1).max()), 1e-12)
        new_path = extend(traj.path, result.values, tol=1e-9 * running_sup)
        m_done = result.values.shape[0] - 1

        event = None
        scan = range(1, m_done + 1)
        if prob.domain.kind == "time_only":
            # no state constraint: only the horizon (handled by the outer
            # loop) can end the run, so skip the per-point classification
            scan = ()
        for i in scan:
            t_i = t + i * cfg.dt
            seg_i = segment_at(new_path, t_i, prob.h)
            mem = prob.membership(t_i, seg_i, cfg.boundary_tol)
            if mem.is_inside:
                continue
            if mem.kind == "horizon":
                event = TerminationEvent("reached_horizon", prob.T)
            else:
                a, b = _refine_bracket(prob, new_path, t_i - cfg.dt, t_i,
                                       refine_tol, cfg.boundary_tol)
                event = TerminationEvent("boundary_hit", 0.5 * (a + b), mem.kind, b - a)
            # keep the path through the first non-interior grid point
            keep = new_path.index_of(t_i) + 1
            traj.path = SolutionPath(new_path.t_start, cfg.dt, new_path.values[:keep])
            break
        if event is not None:
            traj.event = event
            break
        traj.path = new_path

    traj.tau = traj.event.time
    return traj
