"""
Harmonic extensions to the upper half-space R^{d+1}_+.

The bounded harmonic extension of a trigonometric polynomial is exact:
every mode ``c_k e^{2 pi i k.x}`` extends to ``c_k e^{-2 pi |k| y} e^{2 pi i k.x}``.
The Weierstrass-type function

    f(x) = sum_n b^{-n} phi(b^n x)

then extends termwise to F(x, y) = sum_n b^{-n} Phi(b^n x, b^n y), whose
jets are summed until a certified tail bound drops below ``tail_tol``.

Coordinates: points of the half-space are ``(x, y)`` with ``x`` of shape
(..., d) and ``y > 0``; gradients and Hessians put the y-derivative last.
"""

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _parallel
from .trig import TWO_PI, TrigPolynomial, phases
from .trig import evaluate as eval_phi

#: Operations refuse heights below this floor (the series length grows like log_b(1/y)).
Y_FLOOR = 1e-12


@dataclass
class HarmonicJet:
    """Value, (d+1)-gradient and (d+1)x(d+1) Hessian of a harmonic function.

    Arrays may carry leading batch dimensions.
    """

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray

    @property
    def trace(self):
        return np.trace(self.hessian, axis1=-2, axis2=-1)

    @property
    def hessian_norm(self):
        """Frobenius norm, sum of squared second derivatives."""
        return np.sqrt((self.hessian**2).sum(axis=(-2, -1)))

    @property
    def tangential(self):
        return self.gradient[..., :-1]

    @staticmethod
    def concat(jets):
        return HarmonicJet(
            np.concatenate([j.value for j in jets]),
            np.concatenate([j.gradient for j in jets]),
            np.concatenate([j.hessian for j in jets]),
        )


class FieldHandle(Protocol):
    """Anything with a dimension ``d`` and a batched ``jet(x, y)`` method."""

    d: int

    def jet(self, x, y) -> HarmonicJet: ...


def _prepare(x, y, d):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 0 and x.size == d
    if x.ndim == 0:
        x = x.reshape(1)
    if d == 1 and x.ndim == 1 and not single:
        x = x.reshape(-1, 1)
    if x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}, got {x.shape}")
    x = x.reshape(-1, d)
    y = np.broadcast_to(y.reshape(-1), (x.shape[0],)) if y.size == 1 else y.reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ValueError("x and y batch sizes differ")
    if np.any(~(y > 0)):
        raise ValueError("the half-space requires y > 0")
    return x, np.ascontiguousarray(y), single


def _finish(jet, single):
    if single:
        return HarmonicJet(jet.value[0], jet.gradient[0], jet.hessian[0])
    return jet


def evaluate_jets(F, x, y):
    """Batched ``F.jet`` split into fixed chunks (thread-parallel, order-stable)."""
    x, y, single = _prepare(x, y, F.d)
    parts = _parallel.chunked_map(lambda a, b: F.jet(x[a:b], y[a:b]), x.shape[0])
    if not parts:
        d1 = F.d + 1
        return HarmonicJet(np.zeros(0), np.zeros((0, d1)), np.zeros((0, d1, d1)))
    return _finish(HarmonicJet.concat(parts), single)


def _mode_jet(phi, X, Y):
    """Jet of Phi - mean at batched points (no constant term)."""
    k, kabs, a, b = phi.modes
    n, d = X.shape
    th = phases(k, X)
    decay = np.exp(-TWO_PI * Y[:, None] * kabs)
    cs = decay * (a * np.cos(th) - b * np.sin(th))
    sn = decay * (a * np.sin(th) + b * np.cos(th))
    grad = np.empty((n, d + 1))
    hess = np.empty((n, d + 1, d + 1))
    grad[:, :d] = -TWO_PI * (sn[:, :, None] * k).sum(axis=1)
    grad[:, d] = -TWO_PI * (cs * kabs).sum(axis=1)
    kk = k[:, :, None] * k[:, None, :]
    hess[:, :d, :d] = -(TWO_PI**2) * (cs[:, :, None, None] * kk).sum(axis=1)
    hxy = TWO_PI**2 * (sn[:, :, None] * (kabs[:, None] * k)).sum(axis=1)
    hess[:, :d, d] = hxy
    hess[:, d, :d] = hxy
    hess[:, d, d] = TWO_PI**2 * (cs * kabs**2).sum(axis=1)
    return cs.sum(axis=1), grad, hess


def phi_extension_jet(phi, x, y):
    """Jet of the bounded harmonic extension Phi of ``phi`` at (x, y), y > 0.

    Exact: Phi(x, y) = sum_k c_k e^{-2 pi |k| y} e^{2 pi i k.x}.
    """
    x, y, single = _prepare(x, y, phi.d)
    v, g, h = _mode_jet(phi, x, y)
    return _finish(HarmonicJet(v + phi.mean, g, h), single)


class PoissonField:
    """Field handle for the extension Phi of a trigonometric polynomial."""

    def __init__(self, phi):
        self.phi = phi
        self.d = phi.d

    def jet(self, x, y):
        return phi_extension_jet(self.phi, x, y)


@dataclass(frozen=True, eq=False)
class WeierstrassField:
    """The Weierstrass-type function f(x) = sum_n b^{-n} phi(b^n x) and its
    harmonic extension F.

    Parameters
    ----------
    base : TrigPolynomial
        The 1-periodic base function phi.
    b : float
        Lacunarity, b > 1.  Integer b keeps f 1-periodic.
    tail_tol : float
        Certified bound on the truncation tail of each jet component
        (value, gradient norm, Frobenius norm of the Hessian).
    """

    base: TrigPolynomial
    b: float = 2.0
    tail_tol: float = 1e-12

    def __post_init__(self):
        if not self.b > 1:
            raise ValueError(f"b must exceed 1, got {self.b}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}")
        full = [(math.sqrt(sum(v * v for v in k)), abs(c)) for k, c in self.base.terms.items()]
        full = [(kn, c) for kn, c in full if kn > 0]
        kabs = np.array([kn for kn, _ in full])
        cabs = np.array([c for _, c in full])
        object.__setattr__(self, "_kabs", kabs)
        object.__setattr__(self, "_cabs", cabs)

    @property
    def d(self):
        return self.base.d

    @property
    def constant_part(self):
        """Contribution of the mean of phi to f and F: mean * b / (b - 1)."""
        return self.base.mean * self.b / (self.b - 1)

    def boundary_terms(self):
        """Index of the last term summed on the boundary y = 0."""
        s = float(self._cabs.sum())
        if s == 0:
            return -1
        return max(0, math.ceil(math.log(s / (self.tail_tol * (self.b - 1)), self.b)))

    def truncation_index(self, y):
        """Last summed index N(y) per height so that every jet tail is below tail_tol.

        With T_m(n) = b^{n(m-1)} sum_k |c_k| (2 pi |k|)^m exp(-2 pi |k| b^n y)
        bounding term n of the order-m derivative, successive ratios are at
        most r_m(n) = b^{m-1} exp(-2 pi k_min (b-1) b^n y), which decreases in
        n; hence sum_{n > N} T_m(n) <= T_m(N+1) / (1 - r_m(N+1)).
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self._kabs.size == 0:
            return np.full(y.shape, -1, dtype=int)
        b, tol = self.b, self.tail_tol
        kmin = self._kabs.min()
        weights = [self._cabs * (TWO_PI * self._kabs) ** m for m in range(3)]
        out = np.full(y.shape, -1, dtype=int)
        todo = np.ones(y.shape, dtype=bool)
        n = 0
        while todo.any():
            u = b ** (n + 1) * y[todo]
            ok = np.ones(u.shape, dtype=bool)
            for m in range(3):
                t = b ** ((n + 1) * (m - 1)) * (weights[m] * np.exp(-TWO_PI * np.outer(u, self._kabs))).sum(axis=1)
                r = b ** (m - 1) * np.exp(-TWO_PI * kmin * (b - 1) * u)
                with np.errstate(divide="ignore", invalid="ignore"):
                    ok &= (t == 0) | ((r < 1) & (t / (1 - r) <= tol))
            idx = np.flatnonzero(todo)[ok]
            out[idx] = n
            todo[idx] = False
            n += 1
            if n > 10_000:
                raise RuntimeError("truncation search did not terminate")
        return out

    def jet(self, x, y):
        """Jet of F at (x, y); see :func:`field_jet`."""
        x, y, single = _prepare(x, y, self.d)
        if np.any(y < Y_FLOOR):
            raise ValueError(f"y below the floor {Y_FLOOR}")
        n_pts, d = x.shape
        last = self.truncation_index(y)
        value = np.zeros(n_pts)
        grad = np.zeros((n_pts, d + 1))
        hess = np.zeros((n_pts, d + 1, d + 1))
        for n in range(int(last.max()) + 1 if n_pts else 0):
            idx = np.flatnonzero(last >= n)
            s = self.b**n
            v, g, h = _mode_jet(self.base, s * x[idx], s * y[idx])
            value[idx] += v / s
            grad[idx] += g
            hess[idx] += h * s
        value += self.constant_part
        return _finish(HarmonicJet(value, grad, hess), single)

    def __call__(self, x):
        return weierstrass_eval(self, x)


def weierstrass_eval(W, x):
    """f(x) = sum_{n <= N} b^{-n} phi(b^n x) with tail ||phi - mean||_1 b^{-N}/(b-1) <= tail_tol."""
    x = np.asarray(x, dtype=float)
    if W.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    out = np.full(x.shape[:-1], W.constant_part)
    mean = W.base.mean
    for n in range(W.boundary_terms() + 1):
        s = W.b**n
        out = out + (eval_phi(W.base, s * x) - mean) / s
    return out


def field_jet(W, x, y):
    """Jet of the harmonic extension F of the Weierstrass function at (x, y)."""
    return W.jet(x, y)


# -- synthetic harmonic fields -------------------------------------------------


class LinearField:
    """F(x, y) = g . (x, y) + c; constant gradient ``g`` in R^{d+1}."""

    def __init__(self, d, g=None, c=0.0):
        self.d = d
        self.g = np.eye(d + 1)[0] if g is None else np.asarray(g, dtype=float)
        self.c = c

    def jet(self, x, y):
        x, y, single = _prepare(x, y, self.d)
        n = x.shape[0]
        value = x @ self.g[:-1] + y * self.g[-1] + self.c
        grad = np.broadcast_to(self.g, (n, self.d + 1)).copy()
        hess = np.zeros((n, self.d + 1, self.d + 1))
        return _finish(HarmonicJet(value, grad, hess), single)

    def boundary(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.d)
        return x @ self.g[:-1] + self.c


class SaddleField:
    """F(x, y) = x_1^2 - y^2; its Hessian diag(2, 0, ..., 0, -2) annihilates
    every direction except x_1 and y."""

    def __init__(self, d):
        self.d = d

    def jet(self, x, y):
        x, y, single = _prepare(x, y, self.d)
        n, d = x.shape
        grad = np.zeros((n, d + 1))
        grad[:, 0] = 2 * x[:, 0]
        grad[:, d] = -2 * y
        hess = np.zeros((n, d + 1, d + 1))
        hess[:, 0, 0] = 2.0
        hess[:, d, d] = -2.0
        return _finish(HarmonicJet(x[:, 0] ** 2 - y**2, grad, hess), single)


class KinkField:
    """Harmonic F with dF/dx_1 = pi/2 - atan2(y, x_1 - x0) and dF/dy = -log r.

    F = Re G for G(z) = i (z log z - z) + pi z / 2, z = (x_1 - x0) + i y.
    The tangential derivative jumps by pi across x_1 = x0 at the boundary.
    """

    def __init__(self, d, x0=0.5):
        self.d = d
        self.x0 = x0

    def jet(self, x, y):
        x, y, single = _prepare(x, y, self.d)
        n, d = x.shape
        u = x[:, 0] - self.x0
        r2 = u * u + y * y
        ang = np.arctan2(y, u)
        lr = 0.5 * np.log(r2)
        value = -(u * ang + y * lr) + y + 0.5 * np.pi * u
        grad = np.zeros((n, d + 1))
        grad[:, 0] = 0.5 * np.pi - ang
        grad[:, d] = -lr
        hess = np.zeros((n, d + 1, d + 1))
        hess[:, 0, 0] = y / r2
        hess[:, d, d] = -y / r2
        hess[:, 0, d] = hess[:, d, 0] = -u / r2
        return _finish(HarmonicJet(value, grad, hess), single)


class ScaledField:
    """c * F."""

    def __init__(self, F, c):
        self.F, self.c, self.d = F, c, F.d

    def jet(self, x, y):
        j = self.F.jet(x, y)
        return HarmonicJet(self.c * j.value, self.c * j.gradient, self.c * j.hessian)


class SumField:
    """F + G for two handles of the same dimension."""

    def __init__(self, F, G):
        if F.d != G.d:
            raise ValueError("dimension mismatch")
        self.F, self.G, self.d = F, G, F.d

    def jet(self, x, y):
        a, b = self.F.jet(x, y), self.G.jet(x, y)
        return HarmonicJet(a.value + b.value, a.gradient + b.gradient, a.hessian + b.hessian)


# -- identity checks -----------------------------------------------------------


@dataclass(frozen=True)
class FunctionalEquationResiduals:
    """Max relative residuals of F(bx,by) = bF - b Phi and its two derivatives."""

    value: float
    gradient: float
    hessian: float

    def max(self):
        return max(self.value, self.gradient, self.hessian)


def _rel(diff, scale):
    diff = np.asarray(diff, dtype=float)
    scale = np.asarray(scale, dtype=float)
    out = np.zeros_like(diff)
    nz = scale > 0
    out[nz] = diff[nz] / scale[nz]
    out[~nz & (diff > 0)] = np.inf
    return float(out.max()) if out.size else 0.0


def check_functional_equations(W, x, y):
    """Residuals of the scaling identities of F on a sample set.

    Each residual is |lhs - rhs| divided by the size of the summands on the
    right (|bF| + |b Phi| for values, analogously for gradients and
    Hessians), so cancellation does not inflate it.
    """
    x, y, _ = _prepare(x, y, W.d)
    b = W.b
    J = evaluate_jets(W, x, y)
    Jb = evaluate_jets(W, b * x, b * y)
    P = phi_extension_jet(W.base, x, y)

    val = np.abs(Jb.value - (b * J.value - b * P.value))
    val_s = b * (np.abs(J.value) + np.abs(P.value))
    grad = np.linalg.norm(Jb.gradient - (J.gradient - P.gradient), axis=-1)
    grad_s = np.linalg.norm(J.gradient, axis=-1) + np.linalg.norm(P.gradient, axis=-1)
    hes = np.sqrt(((b * Jb.hessian - (J.hessian - P.hessian)) ** 2).sum(axis=(-2, -1)))
    hes_s = J.hessian_norm + P.hessian_norm
    return FunctionalEquationResiduals(_rel(val, val_s), _rel(grad, grad_s), _rel(hes, hes_s))


@dataclass(frozen=True)
class RepresentationCheck:
    residual: float
    boundary_value: float
    reconstructed: float
    integral: float
    quadrature_error: float
    remainder_bound: float
    nodes: int


def check_representation_identity(W, x, y, e, nodes_per_band=24, t0_factor=1e-8):
    """Compare f(x) with the ray representation

        f(x) = int_0^y t e^T HF(x + t e) e dt - y grad F(x + y e).e + F(x + y e)

    for a unit ``e`` in R^{d+1} with positive last coordinate.

    The integral is computed on [t0, y], t0 = t0_factor * y, with
    Gauss-Legendre rules on octave bands in log t (the integrand has O(1)
    features per octave); the estimate with ``2 * nodes_per_band`` is kept
    and the difference to the coarse rule is reported.  The omitted piece
    [0, t0] is bounded by C t0 with C the largest |t e^T HF e| seen.
    """
    e = np.asarray(e, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if e.shape[0] != W.d + 1 or x.shape[0] != W.d:
        raise ValueError("dimension mismatch")
    if abs(np.linalg.norm(e) - 1) > 1e-12:
        raise ValueError("e must be a unit vector")
    if not e[-1] > 0:
        raise ValueError("e must point into the half-space (positive last coordinate)")
    if not 0 < y <= 1:
        raise ValueError("y must lie in (0, 1]")

    t0 = t0_factor * y
    n_bands = max(1, math.ceil(math.log2(y / t0)))
    lo, hi = math.log(t0), math.log(y)
    edges = np.linspace(lo, hi, n_bands + 1)

    def integrate(q):
        z, w = leggauss(q)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        u = (mid[:, None] + half[:, None] * z).reshape(-1)
        wu = (half[:, None] * w).reshape(-1)
        t = np.exp(u)
        J = evaluate_jets(W, x + t[:, None] * e[:-1], t * e[-1])
        quad = np.einsum("i,nij,j->n", e, J.hessian, e)
        g = t * quad
        # dt = t du
        return float((wu * g * t).sum()), float(np.abs(g).max()), t.size

    coarse, _, _ = integrate(nodes_per_band)
    fine, cmax, n_nodes = integrate(2 * nodes_per_band)

    top = evaluate_jets(W, x + y * e[:-1], y * e[-1])
    rhs = fine - y * float(top.gradient @ e) + float(top.value)
    fx = float(weierstrass_eval(W, x))
    return RepresentationCheck(
        residual=abs(fx - rhs),
        boundary_value=fx,
        reconstructed=rhs,
        integral=fine,
        quadrature_error=abs(fine - coarse),
        remainder_bound=cmax * t0,
        nodes=n_nodes + n_bands * nodes_per_band,
    )
