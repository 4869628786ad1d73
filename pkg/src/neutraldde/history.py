"""Solution paths on a uniform time grid and sliding delay segments.

A path stores coefficient vectors at times t_start + i*dt.  A segment is the
slice theta -> u(t + theta) for theta in [-h, 0]: the piece of history a
delay functional sees at time t.  The delay span h is kept an exact integer
multiple of dt by configuration, so segment queries land on grid points and
off-grid times use linear interpolation without drift.
"""

from __future__ import annotations

import numpy as np

from .errors import StitchingError

#: Relative slack when matching times to grid indices.
_GRID_EPS = 1e-9


class SolutionPath:
    """Coefficient trajectory on the uniform grid t_start + i*dt, i = 0..n-1."""

    def __init__(self, t_start: float, dt: float, values):
        values = np.asarray(values, dtype=float)
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        if values.ndim != 2 or values.shape[0] < 2:
            raise ValueError("values must be a (n_times >= 2, n_modes) array")
        self.t_start = float(t_start)
        self.dt = float(dt)
        self.values = values

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n_times - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_times)

    def index_of(self, t: float) -> int:
        """Exact grid index of t; raises if t is off-grid."""
        pos = (t - self.t_start) / self.dt
        i = int(round(pos))
        if abs(pos - i) > _GRID_EPS or not 0 <= i < self.n_times:
            raise ValueError(f"time {t} is not a grid point of this path")
        return i

    def value_at(self, t: float) -> np.ndarray:
        """Linear interpolation between neighbouring grid values."""
        pos = (t - self.t_start) / self.dt
        if pos < -_GRID_EPS or pos > self.n_times - 1 + _GRID_EPS:
            raise ValueError(f"time {t} outside path range [{self.t_start}, {self.t_end}]")
        pos = min(max(pos, 0.0), float(self.n_times - 1))
        i = min(int(pos), self.n_times - 2)
        w = pos - i
        if w <= _GRID_EPS:
            return self.values[i].copy()
        if w >= 1.0 - _GRID_EPS:
            return self.values[i + 1].copy()
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]


class Segment:
    """History slice theta -> u(t + theta) on theta in [-h, 0].

    ``thetas`` is strictly increasing with thetas[0] = -h and thetas[-1] = 0;
    ``values`` holds one coefficient vector per theta node.
    """

    def __init__(self, h: float, thetas, values):
        thetas = np.asarray(thetas, dtype=float)
        values = np.asarray(values, dtype=float)
        if h <= 0.0:
            raise ValueError(f"delay span must be positive, got {h}")
        if thetas.ndim != 1 or thetas.size < 2:
            raise ValueError("need at least the two endpoint theta nodes")
        if values.shape[0] != thetas.size:
            raise ValueError("one value row per theta node required")
        if abs(thetas[0] + h) > _GRID_EPS * max(1.0, h) or abs(thetas[-1]) > _GRID_EPS * max(1.0, h):
            raise ValueError("theta nodes must cover exactly [-h, 0]")
        if np.any(np.diff(thetas) <= 0.0):
            raise ValueError("theta nodes must be strictly increasing")
        self.h = float(h)
        self.thetas = thetas
        self.values = values

    @classmethod
    def _trusted(cls, h: float, thetas, values) -> "Segment":
        # Solver-internal constructor: nodes already known to satisfy the
        # invariants, skip re-validation in hot loops.
        obj = object.__new__(cls)
        obj.h = h
        obj.thetas = thetas
        obj.values = values
        return obj

    @property
    def n_modes(self) -> int:
        return self.values.shape[1]

    def value_at(self, theta: float) -> np.ndarray:
        """Linear interpolation in theta."""
        lo, hi = self.thetas[0], self.thetas[-1]
        eps = _GRID_EPS * max(1.0, self.h)
        if theta < lo - eps or theta > hi + eps:
            raise ValueError(f"theta {theta} outside [-{self.h}, 0]")
        theta = min(max(theta, lo), hi)
        i = int(np.searchsorted(self.thetas, theta, side="right")) - 1
        i = min(max(i, 0), self.thetas.size - 2)
        span = self.thetas[i + 1] - self.thetas[i]
        w = (theta - self.thetas[i]) / span
        if w <= _GRID_EPS:
            return self.values[i].copy()
        if w >= 1.0 - _GRID_EPS:
            return self.values[i + 1].copy()
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def node_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def scaled(self, c: float) -> "Segment":
        return Segment(self.h, self.thetas, c * self.values)


def sup_norm(seg: Segment) -> float:
    """Max over theta nodes of the coefficient norm (exact on piecewise-linear data)."""
    return float(seg.node_norms().max())


def integral_norm_functional(seg: Segment) -> float:
    """Trapezoid quadrature of theta -> ||seg(theta)|| over [-h, 0]."""
    return float(np.trapezoid(seg.node_norms(), seg.thetas))


def max_norm_functional(seg: Segment, lo: float, hi: float) -> float:
    """Max of ||seg(theta)|| over the window [lo, hi], endpoints interpolated.

    The window is given in segment coordinates and must sit inside [-h, 0].
    """
    eps = _GRID_EPS * max(1.0, seg.h)
    if lo > hi:
        raise ValueError(f"window must satisfy lo <= hi, got [{lo}, {hi}]")
    if lo < -seg.h - eps or hi > eps:
        raise ValueError(f"window [{lo}, {hi}] outside [-{seg.h}, 0]")
    lo = max(lo, -seg.h)
    hi = min(hi, 0.0)
    best = max(
        float(np.linalg.norm(seg.value_at(lo))),
        float(np.linalg.norm(seg.value_at(hi))),
    )
    inside = (seg.thetas > lo) & (seg.thetas < hi)
    if np.any(inside):
        best = max(best, float(seg.node_norms()[inside].max()))
    return best


def segment_at(path: SolutionPath, t: float, h: float, n_theta: int | None = None) -> Segment:
    """Sample the history slice u(t + theta) from the path.

    ``n_theta`` intervals over [-h, 0] (default h/dt, the grid-aligned
    choice); values off the path grid are linearly interpolated.  The whole
    window [t - h, t] must be covered by the path.
    """
    if h <= 0.0:
        raise ValueError(f"delay span must be positive, got {h}")
    eps = _GRID_EPS * max(1.0, abs(t), h)
    if t - h < path.t_start - eps or t > path.t_end + eps:
        raise ValueError(
            f"segment window [{t - h}, {t}] outside path range [{path.t_start}, {path.t_end}]"
        )
    if n_theta is None:
        n_theta = max(1, int(round(h / path.dt)))
    if n_theta < 1:
        raise ValueError(f"n_theta must be >= 1, got {n_theta}")
    thetas = np.linspace(-h, 0.0, n_theta + 1)
    pos = np.clip((t - path.t_start + thetas) / path.dt, 0.0, path.n_times - 1.0)
    base = np.minimum(pos.astype(int), path.n_times - 2)
    w = pos - base
    w[w <= _GRID_EPS] = 0.0
    w[w >= 1.0 - _GRID_EPS] = 1.0
    values = (1.0 - w)[:, None] * path.values[base] + w[:, None] * path.values[base + 1]
    return Segment(h, thetas, values)


def segment_on_grid(seg: Segment, dt: float) -> np.ndarray:
    """Segment values resampled onto the uniform theta grid -h..0 with step dt."""
    n_h = int(round(seg.h / dt))
    thetas = -seg.h + dt * np.arange(n_h + 1)
    if seg.thetas.size == n_h + 1 and np.allclose(seg.thetas, thetas, atol=1e-12 * max(1.0, seg.h)):
        return np.array(seg.values, dtype=float)
    return np.vstack([seg.value_at(th) for th in thetas])


def extend(path: SolutionPath, new_values, tol: float = 1e-8) -> SolutionPath:
    """Append window values whose first row overlaps the current endpoint.

    The overlap row replaces the stored endpoint; a mismatch beyond ``tol``
    means the window was solved from a different state and is refused.
    """
    new_values = np.asarray(new_values, dtype=float)
    if new_values.ndim != 2 or new_values.shape[1] != path.values.shape[1]:
        raise StitchingError("new values must be (n, n_modes) matching the path")
    jump = float(np.linalg.norm(new_values[0] - path.values[-1]))
    if jump > tol:
        raise StitchingError(f"overlap mismatch {jump:.3e} exceeds stitching tolerance {tol:.3e}")
    merged = np.vstack([path.values[:-1], new_values])
    return SolutionPath(path.t_start, path.dt, merged)
