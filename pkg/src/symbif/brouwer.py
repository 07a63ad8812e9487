"""Brouwer degree of continuous maps on intervals, planar regions, and 3-D
boxes/balls.

The 1-D degree is an endpoint-sign formula, the 2-D degree is a certified
winding number (adaptive boundary subdivision until consecutive image points
subtend less than pi/2), and the 3-D degree counts Jacobian-sign preimages of
random regular values near zero, repeated three times for agreement.
Inconclusive outcomes raise; they are never silently reported as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AdmissibilityError",
    "InconclusiveDegreeError",
    "Interval",
    "Box",
    "BallRegion",
    "degree_1d",
    "degree_2d",
    "degree_nd",
]


class AdmissibilityError(ValueError):
    """The map vanishes on (or too close to) the region boundary."""


class InconclusiveDegreeError(RuntimeError):
    """The degree could not be certified at the allowed resolution."""


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("interval must have positive length")


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box corner dimensions differ")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("box must have positive extent")

    @property
    def dim(self):
        return len(self.lo)


@dataclass(frozen=True)
class BallRegion:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return len(self.center)


def degree_1d(f, interval: Interval) -> int:
    """Degree of a scalar map on [a, b]: (sign f(b) - sign f(a)) / 2."""
    fa = float(f(interval.a))
    fb = float(f(interval.b))
    if fa == 0.0 or fb == 0.0:
        raise AdmissibilityError("map vanishes at an interval endpoint")
    sa = 1 if fa > 0 else -1
    sb = 1 if fb > 0 else -1
    return (sb - sa) // 2


# --------------------------------------------------------------------------
# 2-D winding number


def _boundary_point(region, s):
    """Positively oriented boundary parameterization over s in [0, 1)."""
    if isinstance(region, BallRegion):
        ang = 2.0 * math.pi * s
        cx, cy = region.center
        return np.array([cx + region.radius * math.cos(ang), cy + region.radius * math.sin(ang)])
    lo, hi = region.lo, region.hi
    wx = hi[0] - lo[0]
    wy = hi[1] - lo[1]
    per = 2.0 * (wx + wy)
    d = (s % 1.0) * per
    if d < wx:
        return np.array([lo[0] + d, lo[1]])
    d -= wx
    if d < wy:
        return np.array([hi[0], lo[1] + d])
    d -= wy
    if d < wx:
        return np.array([hi[0] - d, hi[1]])
    d -= wx
    return np.array([lo[0], hi[1] - d])


def degree_2d(f, region, boundary_resolution: int = 64, max_points: int = 1 << 16) -> int:
    """Winding number of f along the positively oriented region boundary."""
    if isinstance(region, Box) and region.dim != 2:
        raise ValueError("degree_2d needs a two-dimensional region")
    if isinstance(region, BallRegion) and region.dim != 2:
        raise ValueError("degree_2d needs a two-dimensional region")
    if boundary_resolution < 4:
        raise ValueError("boundary_resolution must be at least 4")

    params = list(np.linspace(0.0, 1.0, boundary_resolution, endpoint=False))
    angles = {}

    def angle_at(s):
        if s not in angles:
            v = np.asarray(f(_boundary_point(region, s)), float)
            n = math.hypot(v[0], v[1])
            if n == 0.0:
                raise AdmissibilityError(f"map vanishes on the boundary (s={s})")
            angles[s] = math.atan2(v[1], v[0])
        return angles[s]

    for s in params:
        angle_at(s)

    while True:
        refined = []
        ok = True
        for i, s in enumerate(params):
            s_next = params[(i + 1) % len(params)]
            refined.append(s)
            d = _wrap_angle(angle_at(s_next) - angle_at(s))
            if abs(d) >= 0.5 * math.pi:
                mid = s + (((s_next - s) % 1.0) / 2.0)
                refined.append(mid % 1.0)
                ok = False
        if ok:
            break
        if len(refined) > max_points:
            raise InconclusiveDegreeError(
                "boundary angle condition not certified at maximum refinement"
            )
        params = refined

    total = 0.0
    for i, s in enumerate(params):
        s_next = params[(i + 1) % len(params)]
        total += _wrap_angle(angle_at(s_next) - angle_at(s))
    winding = total / (2.0 * math.pi)
    nearest = round(winding)
    if abs(winding - nearest) > 1e-6:
        raise InconclusiveDegreeError(f"winding number {winding} is not close to an integer")
    return int(nearest)


def _wrap_angle(d):
    while d > math.pi:
        d -= 2.0 * math.pi
    while d <= -math.pi:
        d += 2.0 * math.pi
    return d


# --------------------------------------------------------------------------
# 3-D degree via regular-value preimage counting


def _boundary_samples(region, res):
    if isinstance(region, Box):
        lo = np.asarray(region.lo, float)
        hi = np.asarray(region.hi, float)
        axes = [np.linspace(lo[i], hi[i], res) for i in range(3)]
        pts = []
        for fixed in range(3):
            others = [i for i in range(3) if i != fixed]
            g1, g2 = np.meshgrid(axes[others[0]], axes[others[1]], indexing="ij")
            for val in (lo[fixed], hi[fixed]):
                block = np.empty((g1.size, 3))
                block[:, fixed] = val
                block[:, others[0]] = g1.ravel()
                block[:, others[1]] = g2.ravel()
                pts.append(block)
        return np.vstack(pts)
    c = np.asarray(region.center, float)
    th = np.linspace(0.0, math.pi, res)
    ph = np.linspace(0.0, 2.0 * math.pi, 2 * res, endpoint=False)
    tg, pg = np.meshgrid(th, ph, indexing="ij")
    xs = np.sin(tg) * np.cos(pg)
    ys = np.sin(tg) * np.sin(pg)
    zs = np.cos(tg)
    return c + region.radius * np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)


def _interior_starts(region, res):
    if isinstance(region, Box):
        lo = np.asarray(region.lo, float)
        hi = np.asarray(region.hi, float)
        axes = [np.linspace(lo[i], hi[i], res + 2)[1:-1] for i in range(3)]
        g = np.meshgrid(*axes, indexing="ij")
        return np.stack([a.ravel() for a in g], axis=1)
    c = np.asarray(region.center, float)
    side = np.linspace(-region.radius, region.radius, res + 2)[1:-1]
    g = np.meshgrid(side, side, side, indexing="ij")
    pts = np.stack([a.ravel() for a in g], axis=1)
    keep = np.linalg.norm(pts, axis=1) < 0.95 * region.radius
    return c + pts[keep]


def _inside(region, x, slack=1e-9):
    if isinstance(region, Box):
        lo = np.asarray(region.lo, float)
        hi = np.asarray(region.hi, float)
        return bool(np.all(x >= lo - slack) and np.all(x <= hi + slack))
    return bool(np.linalg.norm(x - np.asarray(region.center, float)) <= region.radius + slack)


def _fd_jacobian(f, x, scale):
    n = len(x)
    J = np.empty((n, n))
    h = 1e-6 * scale
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (np.asarray(f(x + e), float) - np.asarray(f(x - e), float)) / (2.0 * h)
    return J


def degree_nd(f, region, grid_resolution: int = 6, rng=None, repeats: int = 3) -> int:
    """Degree of a 3-D map: signed count of preimages of random regular values.

    Preimages of a random value near zero are located by multistart Newton from
    an interior grid; the computation is repeated with `repeats` independent
    values and all results must agree.
    """
    if not isinstance(region, (Box, BallRegion)):
        raise ValueError("degree_nd needs a box or ball region")
    if region.dim != 3:
        raise ValueError("degree_nd supports dimension 3 only")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    if rng is None:
        rng = np.random.default_rng(0)

    boundary = _boundary_samples(region, 4 * grid_resolution)
    bvals = np.array([np.linalg.norm(np.asarray(f(x), float)) for x in boundary])
    rho = float(bvals.min())
    if rho < 1e-14:
        raise AdmissibilityError("map vanishes on the sampled boundary")

    if isinstance(region, Box):
        diam = float(np.linalg.norm(np.asarray(region.hi) - np.asarray(region.lo)))
    else:
        diam = 2.0 * region.radius
    starts = _interior_starts(region, grid_resolution)

    results = []
    for _ in range(repeats):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        y = (0.25 * rho * rng.uniform(0.2, 1.0)) * direction
        roots = []
        for x0 in starts:
            root = _newton_root(f, x0, y, region, diam)
            if root is None:
                continue
            if not any(np.linalg.norm(root - r) < 1e-6 * diam for r in roots):
                roots.append(root)
        total = 0
        for root in roots:
            J = _fd_jacobian(f, root, diam)
            svals = np.linalg.svd(J, compute_uv=False)
            if svals[0] == 0.0 or svals[-1] / svals[0] < 1e-10:
                raise InconclusiveDegreeError(
                    "ill-conditioned Jacobian at a preimage; value not certifiably regular"
                )
            det = float(np.linalg.det(J))
            total += 1 if det > 0 else -1
        results.append(total)
    if len(set(results)) != 1:
        raise InconclusiveDegreeError(f"regular-value repetitions disagree: {results}")
    return results[0]


def _newton_root(f, x0, y, region, diam, maxit=40, tol=1e-11):
    x = np.asarray(x0, float).copy()
    for _ in range(maxit):
        r = np.asarray(f(x), float) - y
        if np.linalg.norm(r) <= tol * (1.0 + np.linalg.norm(y)):
            return x if _inside(region, x) else None
        J = _fd_jacobian(f, x, diam)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        nstep = np.linalg.norm(step)
        if nstep > 0.5 * diam:
            step *= 0.5 * diam / nstep
        x = x + step
        if not _inside(region, x, slack=0.5 * diam):
            return None
    return None
