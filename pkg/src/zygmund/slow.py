"""
Slow points: incremental quotients of f and vertical rays of grad F.

A slow point is one where ``|f(x+h) - f(x)| / |h|`` stays bounded as
``h -> 0``; for harmonic extensions this corresponds to boundedness of the
tangential gradient along the vertical ray.  Everything here is a
finite-scale profile: no limit is ever claimed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .harmonic import Y_FLOOR, evaluate_jets
from .qr import zygmund_seminorm
from .trig import sphere_points


@dataclass
class RayProfile:
    """|grad F| and |grad_x F| along ``{x} x y_grid`` (``y_grid`` decreasing)."""

    x: np.ndarray
    y_grid: np.ndarray
    gradients: np.ndarray

    @property
    def grad_norms(self):
        return np.linalg.norm(self.gradients, axis=1)

    @property
    def tangential_norms(self):
        return np.linalg.norm(self.gradients[:, :-1], axis=1)

    def rows(self):
        for y, g, t in zip(self.y_grid, self.grad_norms, self.tangential_norms):
            yield [*map(float, self.x), float(y), float(g), float(t)]


def log_grid(y_max, y_min, points_per_decade):
    """Decreasing log-spaced grid from ``y_max`` to ``y_min`` inclusive."""
    n = max(2, int(math.ceil(math.log10(y_max / y_min) * points_per_decade)) + 1)
    return np.geomspace(y_max, y_min, n)


def ray_profile(F, x, y_min, y_max=1.0, points_per_decade=10):
    """Evaluate grad F on the vertical ray above ``x``.

    Parameters
    ----------
    F : FieldHandle
    x : array_like, shape (d,)
    y_min, y_max : float
        ``Y_FLOOR <= y_min < y_max <= 1``.
    points_per_decade : int
    """
    if y_min < Y_FLOOR:
        raise ValueError(f"y_min below the floor {Y_FLOOR}")
    if not y_min < y_max <= 1:
        raise ValueError("need y_min < y_max <= 1")
    x = np.asarray(x, dtype=float).reshape(F.d)
    y = log_grid(y_max, y_min, points_per_decade)
    g = evaluate_jets(F, np.broadcast_to(x, (y.size, F.d)), y).gradient
    return RayProfile(x, y, g)


@dataclass
class SlowScore:
    """Max first-difference quotient per dyadic scale, and its trend.

    ``trend`` is the least-squares slope of the quotients against log(1/h).
    """

    x: np.ndarray
    h_grid: np.ndarray
    quotients: np.ndarray
    trend: float


def dyadic_scales(h_min, h_max):
    """h_max, h_max/2, ... down to the last value >= h_min."""
    if not 0 < h_min < h_max:
        raise ValueError("need 0 < h_min < h_max")
    n = int(math.floor(math.log2(h_max / h_min))) + 1
    return h_max * 2.0 ** -np.arange(n)


def slow_score(f, x, h_min, h_max, directions_per_scale=8, seed=0):
    """Quotients ``max_e |f(x + h e) - f(x)| / h`` over dyadic ``h``.

    Parameters
    ----------
    f : callable
        Vectorized on (n, d) arrays.
    x : array_like, shape (d,)
    directions_per_scale : int
        Number of low-discrepancy unit directions (prefix-stable in ``seed``).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    d = x.size
    h = dyadic_scales(h_min, h_max)
    e = sphere_points(d, max(directions_per_scale, 2 if d == 1 else 1), seed)
    pts = x + (h[:, None, None] * e[None, :, :]).reshape(-1, d)
    f0 = float(np.asarray(f(x[None, :])).reshape(-1)[0])
    vals = np.asarray(f(pts)).reshape(h.size, -1)
    q = np.abs(vals - f0).max(axis=1) / h
    trend = float(np.polyfit(np.log(1 / h), q, 1)[0]) if h.size > 1 else 0.0
    return SlowScore(x, h, q, trend)


@dataclass
class Prop23Report:
    """Residuals ``(f(x+h) - f(x) - h . grad_x F(x, |h|)) / |h|``.

    ``normalized`` is the largest magnitude divided by the Zygmund estimate.
    """

    signed: np.ndarray
    zygmund: float
    normalized: float

    @property
    def max_residual(self):
        return float(np.abs(self.signed).max()) if self.signed.size else 0.0


def check_prop23(f, F, x, h, zygmund=None, zygmund_samples=100_000, seed=0):
    """Tangential-gradient approximation of increments.

    Parameters
    ----------
    f : callable
        Boundary function, vectorized on (n, d).
    F : FieldHandle
        Harmonic extension of ``f``.
    x, h : array_like, shape (n, d)
        Sample points and increments with ``0 < |h| <= 1``.
    zygmund : float, optional
        Zygmund seminorm; estimated with :func:`zygmund_seminorm` when omitted.
    """
    d = F.d
    x = np.asarray(x, dtype=float).reshape(-1, d)
    h = np.asarray(h, dtype=float).reshape(-1, d)
    r = np.linalg.norm(h, axis=1)
    if np.any(r <= 0) or np.any(r > 1):
        raise ValueError("need 0 < |h| <= 1")
    if zygmund is None:
        zygmund = zygmund_seminorm(f, d, (max(float(r.min()), 1e-12), 1.0),
                                   zygmund_samples, seed).value
    gx = evaluate_jets(F, x, r).gradient[:, :-1]
    signed = (f(x + h) - f(x) - (h * gx).sum(axis=1)) / r
    worst = float(np.abs(signed).max()) if signed.size else 0.0
    if worst == 0:
        normalized = 0.0
    elif zygmund == 0:
        normalized = math.inf
    else:
        normalized = worst / zygmund
    return Prop23Report(signed, float(zygmund), normalized)


@dataclass
class Prop21Report:
    """Oscillation of grad F between pairs of points against the hyperbolic
    distance bound ``factor * B * (|b-a|/max(t,s) + |log(t/s)|)``."""

    violations: int
    max_ratio: float
    bloch: float
    factor: float
    pairs: int


def check_prop21(F, p, q, bloch, factor=None):
    """Check the Bloch oscillation bound on pairs ``p = (a, s)``, ``q = (b, t)``.

    ``bloch`` is the entrywise Bloch estimate; the default ``factor`` is
    ``d + 1``, which bounds the operator norm of HF by its largest entry.
    """
    d = F.d
    p = np.asarray(p, dtype=float).reshape(-1, d + 1)
    q = np.asarray(q, dtype=float).reshape(-1, d + 1)
    factor = float(d + 1) if factor is None else float(factor)
    ga = evaluate_jets(F, p[:, :d], p[:, d]).gradient
    gb = evaluate_jets(F, q[:, :d], q[:, d]).gradient
    lhs = np.linalg.norm(gb - ga, axis=1)
    s, t = p[:, d], q[:, d]
    dist = np.linalg.norm(q[:, :d] - p[:, :d], axis=1) / np.maximum(s, t) + np.abs(np.log(t / s))
    rhs = factor * bloch * dist
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    return Prop21Report(int(np.count_nonzero(lhs > rhs * (1 + 1e-12))),
                        float(ratio.max()) if ratio.size else 0.0, float(bloch), factor, p.shape[0])


@dataclass
class DivergenceSurvey:
    """Running sups of ``|D_e F|`` along vertical rays, by floor.

    ``sups[i, j]`` is the sup over the ray segment ``[floors[j], y_top]``
    above ``x[i]``; ``exceedance[k, j]`` is the fraction of points whose sup
    exceeds ``thresholds[k]`` at floor ``j``.
    """

    x: np.ndarray
    floors: np.ndarray
    sups: np.ndarray
    thresholds: np.ndarray
    exceedance: np.ndarray

    def summary(self):
        return [
            {"threshold": float(th), "floor": float(fl), "exceedance_fraction": float(ex)}
            for th, row in zip(self.thresholds, self.exceedance)
            for fl, ex in zip(self.floors, row)
        ]


def directional_divergence_survey(F, e, x_samples, y_floors, thresholds=None,
                                  y_top=1.0, points_per_octave=4):
    """Survey ``sup |D_e F(x, y)|`` over shrinking ray segments.

    The height grid is one fixed geometric sequence from ``y_top`` down to
    the smallest floor, so each segment's samples contain the previous
    segment's and the running sups are nondecreasing as the floor drops.

    Parameters
    ----------
    F : FieldHandle
    e : array_like, shape (d,)
        Unit tangential direction.
    x_samples : array_like, shape (n, d)
    y_floors : sequence of float
        Strictly decreasing floors in [Y_FLOOR, y_top).
    thresholds : sequence of float, optional
        Defaults to 2, 4 and 8 times the median sup at the first floor.
    """
    d = F.d
    e = np.asarray(e, dtype=float).reshape(d)
    if abs(np.linalg.norm(e) - 1) > 1e-12:
        raise ValueError("e must be a unit vector")
    floors = np.asarray(y_floors, dtype=float)
    if floors.size == 0 or np.any(np.diff(floors) >= 0) or floors[-1] < Y_FLOOR or floors[0] >= y_top:
        raise ValueError("floors must be strictly decreasing within [Y_FLOOR, y_top)")
    x = np.asarray(x_samples, dtype=float).reshape(-1, d)
    octaves = math.log2(y_top / floors[-1])
    n_y = int(math.ceil(octaves * points_per_octave)) + 1
    grid = np.geomspace(y_top, floors[-1], n_y)
    # make sure every floor is itself a grid point
    grid = np.unique(np.concatenate([grid, floors]))[::-1]
    g = evaluate_jets(F, np.repeat(x, grid.size, axis=0), np.tile(grid, x.shape[0])).gradient
    de = np.abs(np.einsum("ni,i->n", g[:, :d], e)).reshape(x.shape[0], grid.size)
    running = np.maximum.accumulate(de, axis=1)
    cols = np.searchsorted(-grid, -floors)
    sups = running[:, cols]
    if thresholds is None:
        base = float(np.median(sups[:, 0])) if x.shape[0] else 0.0
        thresholds = [2 * base, 4 * base, 8 * base]
    thresholds = np.asarray(thresholds, dtype=float)
    if x.shape[0]:
        exceed = (sups[None, :, :] > thresholds[:, None, None]).mean(axis=1)
    else:
        exceed = np.zeros((thresholds.size, floors.size))
    return DivergenceSurvey(x, floors, sups, thresholds, exceed)
