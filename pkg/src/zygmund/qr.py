"""
Weak quasi-regularity of harmonic gradients and seminorm estimators.

For a symmetric Hessian H the pointwise extremes of ``|He|`` over unit
vectors are the extreme absolute eigenvalues, and for any fixed direction
``int |He|^2 = e^T (int H^2) e``.  The directional max/min in the weak QR
ratio are therefore computed exactly; quadrature is the only error source.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .harmonic import Y_FLOOR, evaluate_jets
from .lattice import CarlesonBox
from .trig import sphere_points

JACOBI_TOL = 1e-12
DEGENERATE_TOL = 1e-12


def jacobi_eigvalsh(A, tol=JACOBI_TOL, max_sweeps=60):
    """Eigenvalues of symmetric matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like, shape (..., n, n)
        Symmetric matrices; a batch is rotated in lockstep.
    tol : float
        Sweeps stop once every off-diagonal Frobenius norm is at most
        ``tol`` times the matrix Frobenius norm.

    Returns
    -------
    ndarray, shape (..., n)
        Eigenvalues in ascending order.
    """
    A = np.array(A, dtype=float)
    shape = A.shape
    n = shape[-1]
    A = A.reshape(-1, n, n)
    scale = np.sqrt((A**2).sum(axis=(1, 2)))
    off = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.all(np.sqrt((A[:, off] ** 2).sum(axis=1)) <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                nz = apq != 0
                theta = np.where(nz, (A[:, q, q] - A[:, p, p]) / (2 * np.where(nz, apq, 1.0)), 0.0)
                t = np.where(nz, np.copysign(1.0, theta) / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
                c = 1 / np.sqrt(t**2 + 1)
                s = t * c
                rp, rq = A[:, p, :].copy(), A[:, q, :].copy()
                A[:, p, :] = c[:, None] * rp - s[:, None] * rq
                A[:, q, :] = s[:, None] * rp + c[:, None] * rq
                cp, cq = A[:, :, p].copy(), A[:, :, q].copy()
                A[:, :, p] = c[:, None] * cp - s[:, None] * cq
                A[:, :, q] = s[:, None] * cp + c[:, None] * cq
    return np.sort(np.diagonal(A, axis1=1, axis2=2), axis=-1).reshape(shape[:-1])


def spectral_radius(H):
    """max_{|e|=1} |He| for symmetric H (batched)."""
    return np.abs(jacobi_eigvalsh(H)).max(axis=-1)


def _square(H):
    # H @ H without BLAS so that summation order is fixed
    return np.einsum("...ij,...jk->...ik", H, H)


@dataclass
class QRReport:
    """Weak QR data on the box ``C_{1/N}(Q)``.

    ``gram`` is the box integral of HF^2, ``denominator`` its smallest
    eigenvalue and ``numerator`` the integral of the squared spectral radius.
    """

    address: str
    N: int
    numerator: float
    gram: np.ndarray
    denominator: float
    gamma_sq: float
    flagged: bool

    @property
    def gram_eigenvalues(self):
        return jacobi_eigvalsh(self.gram)

    def as_row(self):
        return {
            "cube_address": self.address,
            "N": self.N,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "gamma_sq": self.gamma_sq,
            "flagged": self.flagged,
        }


def _report(address, N, numerator, gram):
    lam = jacobi_eigvalsh(gram)
    denominator = float(lam[0])
    trace = float(np.trace(gram))
    flagged = denominator <= DEGENERATE_TOL * trace
    gamma_sq = math.inf if flagged else numerator / denominator
    return QRReport(address, N, float(numerator), gram, denominator, gamma_sq, bool(flagged))


def weak_qr_sweep(F, cubes, N=None, m=16):
    """:func:`weak_qr_ratio` for many cubes through one batched jet evaluation."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if not cubes:
        return []
    boxes = [CarlesonBox(q, 1.0 / (N or q.N)) for q in cubes]
    xs, ys, ws = zip(*(b.nodes(m) for b in boxes))
    per = xs[0].shape[0]
    H = evaluate_jets(F, np.concatenate(xs), np.concatenate(ys)).hessian
    rho2 = spectral_radius(H) ** 2
    H2 = _square(H)
    d1 = F.d + 1
    out = []
    for i, (q, w) in enumerate(zip(cubes, ws)):
        sl = slice(i * per, (i + 1) * per)
        numerator = w * rho2[sl].sum()
        gram = w * H2[sl].reshape(per, d1, d1).sum(axis=0)
        out.append(_report(q.address, N or q.N, numerator, gram))
    return out


def weak_qr_ratio(F, Q, N=None, m=16):
    """Weak QR ratio gamma^2 on ``C_{1/N}(Q)`` with an m^{d+1} midpoint rule.

    Parameters
    ----------
    F : FieldHandle
    Q : NadicCube
    N : int, optional
        Box parameter; defaults to the lattice factor of ``Q``.
    m : int
        Nodes per axis.

    Returns
    -------
    QRReport
        ``gamma_sq`` is ``inf`` (and ``flagged`` set) when the smallest
        eigenvalue of the Gram matrix is at most 1e-12 of its trace, i.e.
        some direction is annihilated by HF throughout the box.
    """
    return weak_qr_sweep(F, [Q], N, m)[0]


@dataclass
class HessianScan:
    value: float
    direction: np.ndarray
    per_direction: np.ndarray


def hessian_lower_scan(F, Q, delta, e_samples, grid=8):
    """min over sampled e of max over C_delta(Q) of y |(HF) e|.

    Parameters
    ----------
    F : FieldHandle
    Q : NadicCube
    delta : float
        Box parameter in (0, 1).
    e_samples : array_like, shape (n, d+1)
        Unit directions.
    grid : int
        Midpoint nodes per axis of the box.
    """
    e = np.atleast_2d(np.asarray(e_samples, dtype=float))
    if e.shape[0] == 0 or e.shape[1] != F.d + 1:
        raise ValueError("need a nonempty set of directions in R^{d+1}")
    if np.any(np.abs(np.linalg.norm(e, axis=1) - 1) > 1e-12):
        raise ValueError("directions must be unit vectors")
    x, y, _ = CarlesonBox(Q, delta).nodes(grid)
    H = evaluate_jets(F, x, y).hessian
    He = np.einsum("nij,kj->nki", H, e)
    best = (y[:, None] * np.sqrt((He**2).sum(axis=-1))).max(axis=0)
    i = int(np.argmin(best))
    return HessianScan(float(best[i]), e[i], best)


@dataclass
class SeminormEstimate:
    """Sampled lower estimate of a seminorm.

    Estimates use prefixes of a fixed low-discrepancy sequence, so adding
    samples can only increase ``value``.
    """

    kind: str
    value: float
    samples: int
    scale_range: tuple
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "samples": self.samples,
            "scale_range": list(self.scale_range),
            **self.extra,
        }


def _halton(dim, n, seed):
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(n)


def _box(x_box, d):
    if x_box is None:
        return np.zeros(d), np.ones(d)
    if hasattr(x_box, "corner"):
        return x_box.corner, x_box.corner + x_box.side
    lo, hi = x_box
    return np.broadcast_to(np.asarray(lo, float), (d,)), np.broadcast_to(np.asarray(hi, float), (d,))


def bloch_seminorm(F, y_range=(1e-3, 1.0), x_box=None, samples=4096, seed=0):
    """Sampled sup of y max_ij |d^2F/dx_i dx_j| (entrywise Bloch seminorm).

    Heights are log-uniform in ``y_range``.  The report records the factor
    sqrt(d+1) bounding the operator-norm version by the entrywise one.
    """
    y_lo, y_hi = y_range
    if not (Y_FLOOR <= y_lo < y_hi <= 1):
        raise ValueError("y_range must lie within (0, 1] and be increasing")
    d = F.d
    lo, hi = _box(x_box, d)
    u = _halton(d + 1, samples, seed)
    x = lo + (hi - lo) * u[:, :d]
    y = y_lo * (y_hi / y_lo) ** u[:, d]
    H = evaluate_jets(F, x, y).hessian
    vals = y * np.abs(H).max(axis=(1, 2))
    i = int(np.argmax(vals))
    return SeminormEstimate(
        "bloch", float(vals[i]), samples, (y_lo, y_hi),
        {"operator_factor": math.sqrt(d + 1), "seed": seed,
         "argmax": [*map(float, x[i]), float(y[i])]},
    )


def zygmund_seminorm(f, d, h_range=(1e-6, 1.0), samples=4096, seed=0, x_box=None):
    """Sampled sup of |f(x+h) + f(x-h) - 2 f(x)| / |h|.

    Parameters
    ----------
    f : callable
        Vectorized, maps (n, d) points to (n,) values.
    d : int
    h_range : (float, float)
        Range of |h|, sampled log-uniformly, within (0, 1].
    """
    h_lo, h_hi = h_range
    if not (0 < h_lo < h_hi <= 1):
        raise ValueError("h_range must lie within (0, 1] and be increasing")
    lo, hi = _box(x_box, d)
    u = _halton(2 * d + 1, samples, seed)
    x = lo + (hi - lo) * u[:, :d]
    r = h_lo * (h_hi / h_lo) ** u[:, d]
    h = r[:, None] * _directions(u[:, d + 1:])
    q = np.abs(f(x + h) + f(x - h) - 2 * f(x)) / r
    i = int(np.argmax(q))
    return SeminormEstimate(
        "zygmund", float(q[i]), samples, (h_lo, h_hi),
        {"seed": seed, "argmax_x": list(map(float, x[i])), "argmax_h": float(r[i])},
    )


def _directions(u):
    """Map uniform samples in [0,1)^d to unit vectors in R^d."""
    if u.shape[1] == 1:
        return np.where(u >= 0.5, 1.0, -1.0)
    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def direction_samples(d1, n, seed=0):
    """``n`` unit vectors in R^{d1}: coordinate axes first, then sphere points."""
    axes = np.eye(d1)
    if n <= d1:
        return axes[:n]
    return np.vstack([axes, sphere_points(d1, n - d1, seed)])
