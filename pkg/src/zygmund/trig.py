"""
Real trigonometric polynomials on R^d with integer frequencies.

A ``TrigPolynomial`` stores the complex Fourier coefficients ``c_k`` of a
real, 1-periodic function

    phi(x) = sum_k c_k exp(2 pi i k.x),     c_{-k} = conj(c_k),

and evaluates it together with exact first and second derivatives.  The
same mode data drives the harmonic extension in :mod:`zygmund.harmonic`.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

TWO_PI = 2.0 * np.pi

#: Relative asymmetry tolerated before a coefficient table is rejected.
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class SeminormBundle:
    """Upper bounds for the sup norms of phi and its first two derivatives.

    ``sup_hess`` bounds the Frobenius norm of the Hessian and
    ``hess_holder_alpha`` bounds the sum over all entries of the Hessian of
    their alpha-Hoelder seminorms.
    """

    sup_abs: float
    sup_grad: float
    sup_hess: float
    hess_holder_alpha: float
    alpha: float


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finite real Fourier series on R^d.

    Parameters
    ----------
    d : int
        Dimension of the ambient space.
    terms : dict
        Map from frequency tuples ``k`` (length ``d``) to complex
        coefficients.  Both ``k`` and ``-k`` must be present with conjugate
        coefficients (within ``HERMITIAN_TOL`` relative); use
        :meth:`from_terms` with ``symmetrize=True`` to repair small
        asymmetries.
    """

    d: int
    terms: dict = field(repr=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        clean = {}
        for k, c in self.terms.items():
            k = tuple(int(v) for v in k)
            if len(k) != self.d:
                raise ValueError(f"frequency {k} does not have length d={self.d}")
            c = complex(c)
            if c != 0:
                clean[k] = c
        scale = max((abs(c) for c in clean.values()), default=0.0)
        for k, c in clean.items():
            mk = tuple(-v for v in k)
            partner = clean.get(mk, 0.0)
            if abs(partner - c.conjugate()) > HERMITIAN_TOL * max(scale, 1e-300):
                raise ValueError(
                    f"coefficients are not Hermitian at k={k}: c_k={c}, c_-k={partner}"
                )
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_modes", _build_modes(self.d, clean))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_terms(cls, d, terms, symmetrize=False):
        """Build from a ``{k: c_k}`` map, optionally forcing Hermitian symmetry."""
        if not symmetrize:
            return cls(d, terms)
        raw = {tuple(int(v) for v in k): complex(c) for k, c in terms.items()}
        keys = set(raw) | {tuple(-v for v in k) for k in raw}
        sym = {}
        worst = 0.0
        for k in keys:
            mk = tuple(-v for v in k)
            ck, cmk = raw.get(k, 0j), raw.get(mk, 0j)
            worst = max(worst, abs(ck - cmk.conjugate()))
            sym[k] = 0.5 * (ck + cmk.conjugate())
        scale = max((abs(c) for c in raw.values()), default=0.0)
        if worst > HERMITIAN_TOL * max(scale, 1e-300):
            warnings.warn(
                f"coefficient table was not Hermitian (max asymmetry {worst:.3e}); "
                "symmetrized",
                stacklevel=2,
            )
        return cls(d, sym)

    @classmethod
    def from_real_modes(cls, d, modes):
        """Build from ``(k, a, b)`` triples meaning ``a cos(2 pi k.x) + b sin(2 pi k.x)``."""
        terms = {}
        for k, a, b in modes:
            k = tuple(int(v) for v in k)
            mk = tuple(-v for v in k)
            if k == mk:
                terms[k] = terms.get(k, 0j) + a
                continue
            terms[k] = terms.get(k, 0j) + 0.5 * complex(a, -b)
            terms[mk] = terms.get(mk, 0j) + 0.5 * complex(a, b)
        return cls(d, terms)

    @classmethod
    def cosine(cls, d, k=None, amplitude=1.0):
        """``amplitude * cos(2 pi k.x)``; ``k`` defaults to the first basis vector."""
        if k is None:
            k = (1,) + (0,) * (d - 1)
        return cls.from_real_modes(d, [(k, amplitude, 0.0)])

    @classmethod
    def sine(cls, d, k=None, amplitude=1.0):
        if k is None:
            k = (1,) + (0,) * (d - 1)
        return cls.from_real_modes(d, [(k, 0.0, amplitude)])

    @classmethod
    def cos_sum(cls, d):
        """``sum_i cos(2 pi x_i)``, the standard example satisfying condition H."""
        modes = []
        for i in range(d):
            k = [0] * d
            k[i] = 1
            modes.append((tuple(k), 1.0, 0.0))
        return cls.from_real_modes(d, modes)

    @classmethod
    def zero(cls, d):
        return cls(d, {})

    @classmethod
    def constant(cls, d, value):
        return cls(d, {(0,) * d: value})

    @classmethod
    def random(cls, d, n_modes, rng, max_freq=3):
        """Random real polynomial with ``n_modes`` nonzero frequency pairs."""
        available = ((2 * max_freq + 1) ** d - 1) // 2
        if n_modes > available:
            raise ValueError(f"only {available} frequency pairs with |k_i| <= {max_freq}")
        modes = []
        seen = set()
        while len(modes) < n_modes:
            k = tuple(int(v) for v in rng.integers(-max_freq, max_freq + 1, size=d))
            mk = tuple(-v for v in k)
            if all(v == 0 for v in k) or k in seen or mk in seen:
                continue
            seen.add(k)
            modes.append((k, rng.normal(), rng.normal()))
        return cls.from_real_modes(d, modes)

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        items = sorted(self.terms.items())
        return {
            "d": self.d,
            "terms": [{"k": list(k), "re": c.real, "im": c.imag} for k, c in items],
        }

    @classmethod
    def from_dict(cls, obj):
        if set(obj) - {"d", "terms"}:
            raise ValueError(f"unknown keys in polynomial: {sorted(set(obj) - {'d', 'terms'})}")
        d = int(obj["d"])
        terms = {}
        for t in obj["terms"]:
            if set(t) - {"k", "re", "im"}:
                raise ValueError(f"unknown keys in term: {sorted(t)}")
            k = tuple(int(v) for v in t["k"])
            terms[k] = terms.get(k, 0j) + complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
        return cls.from_terms(d, terms, symmetrize=True)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    # -- basic data ----------------------------------------------------------

    @property
    def mean(self):
        """The zero-frequency coefficient (average over the unit cube)."""
        return self.terms.get((0,) * self.d, 0j).real

    @property
    def max_frequency(self):
        """K = max |k| over the support."""
        return max((math.sqrt(sum(v * v for v in k)) for k in self.terms), default=0.0)

    @property
    def modes(self):
        """Half-spectrum arrays ``(k, |k|, a, b)`` of the nonconstant part.

        phi(x) - mean = sum_j a_j cos(2 pi k_j.x) - b_j sin(2 pi k_j.x)
        """
        return self._modes

    def l1_weight(self, order, nonconstant_only=False):
        """``sum |c_k| (2 pi |k|)^order`` over the support."""
        total = 0.0
        for k, c in self.terms.items():
            kn = math.sqrt(sum(v * v for v in k))
            if kn == 0 and (nonconstant_only or order > 0):
                continue
            total += abs(c) * (TWO_PI * kn) ** order
        return total

    def __call__(self, x):
        return evaluate(self, x)


def _build_modes(d, terms):
    half = []
    for k, c in terms.items():
        if all(v == 0 for v in k):
            continue
        # keep the lexicographically positive representative of each pair
        if k > tuple(-v for v in k):
            half.append((k, c))
    half.sort()
    if not half:
        empty = np.zeros((0, d))
        return empty, np.zeros(0), np.zeros(0), np.zeros(0)
    k = np.array([h[0] for h in half], dtype=float)
    c = np.array([h[1] for h in half], dtype=complex)
    kabs = np.sqrt((k * k).sum(axis=1))
    # c e^{it} + conj(c) e^{-it} = 2 Re c cos t - 2 Im c sin t
    return k, kabs, 2.0 * c.real, 2.0 * c.imag


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}, got shape {x.shape}")
    return x


def phases(k, x):
    """2 pi k.x for points ``x`` of shape (..., d) and modes ``k`` of shape (K, d)."""
    return TWO_PI * (x[..., None, :] * k).sum(axis=-1)


def evaluate(phi, x):
    """Evaluate phi at points of shape (..., d) (a scalar is accepted when d = 1)."""
    x = _as_points(x, phi.d)
    k, _, a, b = phi.modes
    th = phases(k, x)
    return phi.mean + (a * np.cos(th) - b * np.sin(th)).sum(axis=-1)


def imag_residue(phi, x):
    """Imaginary part of the full (two-sided) Fourier sum; zero for real phi."""
    x = _as_points(x, phi.d)
    ks = np.array(list(phi.terms), dtype=float).reshape(-1, phi.d)
    cs = np.array(list(phi.terms.values()), dtype=complex)
    th = phases(ks, x)
    return (cs.real * np.sin(th) + cs.imag * np.cos(th)).sum(axis=-1)


def direct_cosine_sum(phi, x):
    """Termwise sum of ``Re(c_k) cos - Im(c_k) sin`` over the full support.

    Kept independent of the half-spectrum tables used by :func:`evaluate`.
    """
    x = _as_points(x, phi.d)
    out = np.zeros(x.shape[:-1])
    for k, c in phi.terms.items():
        t = TWO_PI * sum(x[..., i] * k[i] for i in range(phi.d))
        out = out + c.real * np.cos(t) - c.imag * np.sin(t)
    return out


def jet2(phi, x):
    """Value, gradient and Hessian of phi by frequency multiplication.

    Returns arrays of shapes (...), (..., d) and (..., d, d).
    """
    x = _as_points(x, phi.d)
    k, _, a, b = phi.modes
    th = phases(k, x)
    cs = a * np.cos(th) - b * np.sin(th)
    sn = a * np.sin(th) + b * np.cos(th)
    value = phi.mean + cs.sum(axis=-1)
    grad = -TWO_PI * (sn[..., None] * k).sum(axis=-2)
    kk = k[:, :, None] * k[:, None, :]
    hess = -(TWO_PI**2) * (cs[..., None, None] * kk).sum(axis=-3)
    return value, grad, hess


def seminorm_bounds(phi, alpha):
    """Coefficient l1 bounds for sup|phi|, sup|grad phi|, sup||H phi|| and
    the alpha-Hoelder seminorm of the Hessian entries.

    The Hoelder bound uses |e^{is} - e^{it}| <= 2^{1-alpha} |s - t|^alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    holder = 0.0
    for k, c in phi.terms.items():
        kn = math.sqrt(sum(v * v for v in k))
        if kn == 0:
            continue
        k1 = sum(abs(v) for v in k)
        holder += abs(c) * TWO_PI**2 * k1 * k1 * 2.0 ** (1 - alpha) * (TWO_PI * kn) ** alpha
    return SeminormBundle(
        sup_abs=phi.l1_weight(0),
        sup_grad=phi.l1_weight(1),
        sup_hess=phi.l1_weight(2),
        hess_holder_alpha=holder,
        alpha=alpha,
    )


def directional_lipschitz(phi, e):
    """Bound on the Lipschitz constant of t -> phi(t e): sum |c_k| 2 pi |k.e|."""
    e = np.asarray(e, dtype=float)
    return sum(abs(c) * TWO_PI * abs(float(np.dot(k, e))) for k, c in phi.terms.items())


def default_directions(d, n_random=16, seed=0):
    """Coordinate axes, main diagonals and ``n_random`` Halton sphere points."""
    dirs = [np.eye(d)[i] for i in range(d)]
    if d > 1:
        for signs in np.ndindex(*(2,) * (d - 1)):
            v = np.array([1.0] + [1.0 if s == 0 else -1.0 for s in signs])
            dirs.append(v / np.linalg.norm(v))
    if n_random:
        dirs.extend(sphere_points(d, n_random, seed))
    return np.array(dirs)


def sphere_points(d, n, seed=0):
    """Low-discrepancy unit vectors in R^d (Halton points pushed through a
    Gaussian inverse CDF and normalized).  Prefixes are stable in ``n``."""
    if d == 1:
        return np.array([[1.0 if i % 2 == 0 else -1.0] for i in range(n)])
    u = qmc.Halton(d, scramble=True, seed=seed).random(n)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


HOLDS_DERIVATIVE = "holds_via_derivative"
HOLDS_EXTREMUM = "holds_via_extremum"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConditionHResult:
    direction: tuple
    verdict: str
    directional_derivative: float
    profile_max_excess: float
    profile_min_excess: float
    margin: float


def check_condition_H(phi, directions, t_window, grid_step):
    """Per-direction check of condition H on a sampled window.

    For each unit direction ``e`` the check reports ``holds_via_derivative``
    when D_e phi(0) is clearly nonzero, ``holds_via_extremum`` when the
    sampled profile t -> phi(t e) on [-T, T] is nonconstant and stays on one
    side of phi(0), ``fails`` when the profile is constant or crosses phi(0)
    by more than the Lipschitz sampling margin on both sides, and
    ``inconclusive`` otherwise.  Only the sampled directions are certified.
    """
    if t_window <= 0 or grid_step <= 0:
        raise ValueError("t_window and grid_step must be positive")
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if directions.shape[0] == 0:
        raise ValueError("at least one direction is required")
    if directions.shape[1] != phi.d:
        raise ValueError(f"directions must have length {phi.d}")
    norms = np.linalg.norm(directions, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValueError("directions must be unit vectors")

    bounds = seminorm_bounds(phi, 0.5)
    tol_deriv = 1e-9 * bounds.sup_grad
    tol_nonconst = 1e-9 * bounds.sup_abs
    n = int(math.ceil(t_window / grid_step))
    t = np.arange(-n, n + 1) * grid_step
    _, g0, _ = jet2(phi, np.zeros(phi.d))
    phi0 = float(evaluate(phi, np.zeros(phi.d)))

    results = []
    for e in directions:
        deriv = float(g0 @ e)
        prof = evaluate(phi, t[:, None] * e) - phi0
        up, down = float(prof.max()), float(-prof.min())
        margin = directional_lipschitz(phi, e) * grid_step / 2
        if abs(deriv) > tol_deriv:
            verdict = HOLDS_DERIVATIVE
        elif max(up, down) <= tol_nonconst:
            verdict = FAILS
        elif up <= tol_nonconst or down <= tol_nonconst:
            verdict = HOLDS_EXTREMUM
        elif up > margin and down > margin:
            verdict = FAILS
        else:
            verdict = INCONCLUSIVE
        results.append(ConditionHResult(tuple(float(v) for v in e), verdict, deriv, up, down, margin))
    return results
