"""
N-adic cubes, Carleson boxes and midpoint tensor quadrature over them.

A cube is addressed by its generation ``j`` and an integer index vector
relative to a root cube; its geometry is always recomputed from
``(root, j, index)`` so that deep generations do not accumulate rounding.
The textual address is ``"j:i1,i2,...,id"``.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .harmonic import evaluate_jets

DEFAULT_NODES = 8


@dataclass(frozen=True)
class NadicCube:
    """Generation-``j`` N-adic subcube of the root cube ``corner0 + [0, side0]^d``.

    Parameters
    ----------
    corner0 : tuple of float
        Lower corner of the root cube.
    side0 : float
        Root sidelength.
    N : int
        Subdivision factor, at least 2.
    j : int
        Generation, 0 for the root.
    index : tuple of int
        Position in ``{0, ..., N^j - 1}^d``.
    """

    corner0: tuple
    side0: float
    N: int
    j: int
    index: tuple

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.side0 <= 0:
            raise ValueError("root sidelength must be positive")
        if self.j < 0 or len(self.index) != len(self.corner0):
            raise ValueError("bad generation or index length")
        n = self.N**self.j
        if any(i < 0 or i >= n for i in self.index):
            raise ValueError(f"index {self.index} out of range for generation {self.j}")

    @classmethod
    def root(cls, d, N=2, corner=None, side=1.0):
        corner = (0.0,) * d if corner is None else tuple(float(c) for c in corner)
        return cls(corner, float(side), int(N), 0, (0,) * d)

    @property
    def d(self):
        return len(self.corner0)

    @property
    def side(self):
        return self.side0 / self.N**self.j

    @property
    def corner(self):
        return np.asarray(self.corner0) + np.asarray(self.index) * self.side

    @property
    def center(self):
        return self.corner + 0.5 * self.side

    @property
    def volume(self):
        return self.side**self.d

    @property
    def address(self):
        return f"{self.j}:" + ",".join(str(i) for i in self.index)

    def with_address(self, address):
        """Cube of the same root at ``address``."""
        j, _, idx = address.partition(":")
        index = tuple(int(s) for s in idx.split(",")) if idx else ()
        return NadicCube(self.corner0, self.side0, self.N, int(j), index)

    def children(self):
        """The N^d children in lexicographic index order."""
        base = [self.N * i for i in self.index]
        return [
            NadicCube(self.corner0, self.side0, self.N, self.j + 1,
                      tuple(b + o for b, o in zip(base, off)))
            for off in itertools.product(range(self.N), repeat=self.d)
        ]

    def parent(self):
        if self.j == 0:
            return None
        return NadicCube(self.corner0, self.side0, self.N, self.j - 1,
                         tuple(i // self.N for i in self.index))

    def ancestors(self):
        """Proper ancestors from the parent up to the root."""
        out, q = [], self.parent()
        while q is not None:
            out.append(q)
            q = q.parent()
        return out

    def contains(self, other):
        """True if ``other`` is this cube or one of its descendants."""
        if other.j < self.j:
            return False
        s = self.N ** (other.j - self.j)
        return all(i // s == k for i, k in zip(other.index, self.index))

    def midpoints(self, m):
        """Tensor midpoint nodes of the cube, shape (m^d, d), C order."""
        t = (np.arange(m) + 0.5) / m
        grids = np.meshgrid(*([t] * self.d), indexing="ij")
        return self.corner + self.side * np.stack([g.ravel() for g in grids], axis=-1)


def descendants(Q, generations):
    """All descendants of ``Q`` exactly ``generations`` levels below it."""
    cubes = [Q]
    for _ in range(generations):
        cubes = [c for q in cubes for c in q.children()]
    return cubes


@dataclass(frozen=True)
class CarlesonBox:
    """The box ``Q x [delta l(Q), l(Q)]`` above a cube."""

    base: NadicCube
    delta: float

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def y_range(self):
        side = self.base.side
        return self.delta * side, side

    @property
    def height(self):
        lo, hi = self.y_range
        return hi - lo

    @property
    def volume(self):
        return self.base.volume * self.height

    def nodes(self, m):
        """Midpoint nodes (x of shape (m^{d+1}, d), y) and the common weight."""
        xs = self.base.midpoints(m)
        lo, hi = self.y_range
        ys = lo + (np.arange(m) + 0.5) / m * (hi - lo)
        x = np.repeat(xs, m, axis=0)
        y = np.tile(ys, xs.shape[0])
        return x, y, self.volume / m ** (self.base.d + 1)


def box_quadrature(box, integrand, m=DEFAULT_NODES, estimate_error=False):
    """Tensor midpoint rule with m^{d+1} nodes.

    Parameters
    ----------
    box : CarlesonBox
    integrand : callable
        ``integrand(x, y)`` with ``x`` of shape (n, d) and ``y`` of shape (n,),
        returning an array whose leading axis has length n (scalar, vector or
        matrix values are all accepted).
    m : int
        Nodes per axis, at least 2.
    estimate_error : bool
        If True, also return ``|I_m - I_{2m}|`` and use the finer value.

    Returns
    -------
    value or (value, error)
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    x, y, w = box.nodes(m)
    value = w * np.sum(np.asarray(integrand(x, y), dtype=float), axis=0)
    if not estimate_error:
        return value
    fine = box_quadrature(box, integrand, 2 * m)
    return fine, float(np.max(np.abs(fine - value)))


def face_average_gradients(F, cubes, m=DEFAULT_NODES):
    """``(grad F)_Q`` for each cube: the mean of grad F(., l(Q)) over Q.

    All nodes of all cubes go through one batched jet evaluation.

    Returns
    -------
    ndarray of shape (len(cubes), d+1)
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if not cubes:
        return np.zeros((0, F.d + 1))
    per = m**F.d
    x = np.concatenate([q.midpoints(m) for q in cubes])
    y = np.repeat([q.side for q in cubes], per)
    g = evaluate_jets(F, x, y).gradient
    return g.reshape(len(cubes), per, F.d + 1).mean(axis=1)


def face_average_gradient(F, Q, m=DEFAULT_NODES):
    """``(grad F)_Q`` for a single cube, shape (d+1,)."""
    return face_average_gradients(F, [Q], m)[0]
