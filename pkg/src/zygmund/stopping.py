"""
Stopping-time families of N-adic cubes and the Cantor-tree construction.

``S_M(Q)`` collects the maximal subcubes whose face-average gradient
deviates from that of ``Q`` by more than ``M``.  Iterating the stopping
time with a cone filter produces nested generations ``G_0, G_1, ...`` whose
measured size ratio ``alpha`` and mass fraction ``beta`` feed a
Hausdorff-dimension lower bound.

The search runs level by level: all open cubes of one generation are
evaluated in a single batched jet call.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .harmonic import Y_FLOOR, evaluate_jets
from .lattice import CarlesonBox, DEFAULT_NODES, face_average_gradients

STOPPED = "stopped"
INTERIOR = "interior"
UNRESOLVED = "unresolved"

MAX_OPEN_CUBES = 2_000_000


@dataclass
class StoppingNode:
    """A visited cube with its face average and deviation from the reference.

    ``delta`` is ``avg_grad`` minus the face average of the cube the
    stopping time was started from (``parent``).
    """

    cube: object
    avg_grad: np.ndarray
    delta: np.ndarray
    status: str
    parent: str = ""

    @property
    def deviation(self):
        return float(np.linalg.norm(self.delta))

    @property
    def address(self):
        return self.cube.address

    def to_dict(self):
        return {
            "address": self.address,
            "avg_grad": [float(v) for v in self.avg_grad],
            "status": self.status,
            "deviation": self.deviation,
        }


@dataclass
class StoppingFamily:
    """Result of one stopping time started at ``root``."""

    root: object
    root_avg: np.ndarray
    M: float
    J_max: int
    stopped: list
    unresolved: list
    interior: list

    @property
    def stopped_fraction(self):
        return sum(n.cube.volume for n in self.stopped) / self.root.volume

    @property
    def unresolved_fraction(self):
        return sum(n.cube.volume for n in self.unresolved) / self.root.volume


def _position(cube):
    # lexicographic by lower corner, coarser cube first on ties
    return (tuple(float(c) for c in cube.corner), cube.j)


def _stop_many(F, roots, root_avgs, M, J_max, m):
    """Run the stopping time from several roots at once."""
    fams = [dict(stopped=[], unresolved=[], interior=[]) for _ in roots]
    open_ = [(i, q) for i, q in enumerate(roots)]
    for level in range(1, J_max + 1):
        kids = [(i, c) for i, q in open_ for c in q.children()]
        if len(kids) > MAX_OPEN_CUBES:
            raise RuntimeError(f"stopping search would visit {len(kids)} cubes at one level")
        if not kids:
            break
        avgs = face_average_gradients(F, [c for _, c in kids], m)
        open_ = []
        for (i, c), a in zip(kids, avgs):
            delta = a - root_avgs[i]
            if np.linalg.norm(delta) > M:
                status = STOPPED
            elif level == J_max:
                status = UNRESOLVED
            else:
                status = INTERIOR
                open_.append((i, c))
            fams[i][status].append(StoppingNode(c, a, delta, status, roots[i].address))
    out = []
    for q, a, fam in zip(roots, root_avgs, fams):
        lists = {k: sorted(v, key=lambda n: _position(n.cube)) for k, v in fam.items()}
        out.append(StoppingFamily(q, a, M, J_max, **lists))
    return out


def stopping_family(F, Q, M, J_max, m=DEFAULT_NODES, root_avg=None):
    """Maximal N-adic subcubes of ``Q`` whose face average leaves the ball of
    radius ``M`` around ``(grad F)_Q``.

    Parameters
    ----------
    F : FieldHandle
    Q : NadicCube
    M : float
        Threshold; a cube stops when its deviation is strictly above ``M``.
    J_max : int
        Depth cap below ``Q``.  Cubes still inside the ball at that depth
        are returned as unresolved.
    m : int
        Midpoint nodes per axis for face averages.
    root_avg : array_like, optional
        Precomputed ``(grad F)_Q``.

    Returns
    -------
    StoppingFamily
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if J_max < 1:
        raise ValueError("J_max must be at least 1")
    if root_avg is None:
        root_avg = face_average_gradients(F, [Q], m)[0]
    return _stop_many(F, [Q], [np.asarray(root_avg, float)], M, J_max, m)[0]


def angular_filter(family, ref, theta):
    """Nodes whose deviation satisfies ``(-delta) . ref > cos(theta) |delta|``.

    ``delta`` is the child average minus the reference cube's average, so
    this is the strict cone condition on ``(grad F)_Q - (grad F)_{Q'}``.
    With ``ref=None`` the family is returned unchanged.
    """
    nodes = list(family.stopped if isinstance(family, StoppingFamily) else family)
    if ref is None:
        return nodes
    ref = np.asarray(ref, dtype=float)
    if abs(np.linalg.norm(ref) - 1) > 1e-12:
        raise ValueError("reference direction must be a unit vector")
    c = math.cos(theta)
    return [n for n in nodes if -np.dot(n.delta, ref) > c * np.linalg.norm(n.delta)]


def cone_axis(avg, convention="cone"):
    """Reference direction for the angular filter at a cube with average ``avg``.

    ``"cone"`` returns ``avg/|avg|``: the filter then keeps children whose
    average lies in the cone of vertex ``avg`` opening towards the origin,
    which is what keeps ``|avg|`` bounded along the tree.  ``"literal"``
    returns ``-avg/|avg|`` (the opposite cone).  ``None`` when ``avg = 0``.
    """
    r = float(np.linalg.norm(avg))
    if r == 0:
        return None
    if convention == "cone":
        return np.asarray(avg) / r
    if convention == "literal":
        return -np.asarray(avg) / r
    raise ValueError(f"unknown cone convention {convention!r}")


@dataclass
class GenerationSummary:
    k: int
    count: int
    measured_alpha: float
    measured_beta: float
    unresolved_fraction: float
    dead_parents: int

    def to_dict(self):
        return {
            "k": self.k,
            "count": self.count,
            "measured_alpha": self.measured_alpha,
            "measured_beta": self.measured_beta,
            "unresolved_fraction": self.unresolved_fraction,
            "dead_parents": self.dead_parents,
        }


@dataclass
class CantorTree:
    """Generations ``G_0 .. G_K`` of the stopping/cone construction.

    ``families[k]`` maps each parent address of ``G_{k-1}`` to its full
    stopping family; ``axes`` records the cone reference used per parent.
    """

    root: object
    M: float
    theta: float
    K: int
    J_max: int
    m: int
    convention: str
    generations: list
    summaries: list
    families: list
    axes: dict
    terminated_at: int = None
    warnings: list = field(default_factory=list)

    @property
    def d(self):
        return self.root.d

    @property
    def N(self):
        return self.root.N

    @property
    def alpha(self):
        vals = [s.measured_alpha for s in self.summaries if s.count]
        return max(vals) if vals else math.nan

    @property
    def beta(self):
        if not self.summaries:
            return math.nan
        return min(s.measured_beta for s in self.summaries)

    @property
    def final(self):
        return self.generations[-1]

    def dim_bound(self):
        return hungerford_bound(self.alpha, self.beta, self.d)

    def to_dict(self):
        return {
            "root": self.root.address,
            "root_corner": [float(c) for c in self.root.corner0],
            "root_side": self.root.side0,
            "N": self.N,
            "M": self.M,
            "theta": self.theta,
            "K": self.K,
            "J_max": self.J_max,
            "m": self.m,
            "convention": self.convention,
            "terminated_at": self.terminated_at,
            "warnings": list(self.warnings),
            "generations": [
                {"summary": s.to_dict(), "nodes": [n.to_dict() | {"parent": n.parent} for n in g]}
                for s, g in zip(self.summaries, self.generations[1:])
            ],
        }


def cantor_build(F, Q0, M, theta, K, J_max, m=DEFAULT_NODES, convention="cone"):
    """Iterate the stopping time with the cone filter for ``K`` generations.

    ``G_1`` is the unfiltered family of ``Q0``; every later generation keeps
    only the cone-filtered stopped children of the previous one.

    Parameters
    ----------
    F : FieldHandle
    Q0 : NadicCube
    M : float
    theta : float
        Cone half-aperture in [pi/3, pi/2).
    K : int
        Number of generations.
    J_max : int
        Depth cap of each stopping stage.
    convention : {"cone", "literal"}
        Reference axis, see :func:`cone_axis`.

    Returns
    -------
    CantorTree
    """
    if not (math.pi / 3 - 1e-12 <= theta < math.pi / 2):
        raise ValueError("theta must lie in [pi/3, pi/2)")
    if K < 1:
        raise ValueError("K must be at least 1")
    if M <= 0:
        raise ValueError("M must be positive")
    root_avg = face_average_gradients(F, [Q0], m)[0]
    gens = [[StoppingNode(Q0, root_avg, np.zeros_like(root_avg), INTERIOR)]]
    summaries, families, axes, notes = [], [], {}, []
    terminated = None
    d = Q0.d
    for k in range(1, K + 1):
        parents = gens[-1]
        fams = _stop_many(F, [p.cube for p in parents], [p.avg_grad for p in parents], M, J_max, m)
        children, alphas, betas = [], [], []
        unresolved = 0.0
        for p, fam in zip(parents, fams):
            ref = None if k == 1 else cone_axis(p.avg_grad, convention)
            axes[p.address] = None if ref is None else [float(v) for v in ref]
            kept = angular_filter(fam, ref, theta)
            children.extend(kept)
            ls = [n.cube.side / p.cube.side for n in kept]
            alphas.extend(ls)
            betas.append(sum(r**d for r in ls))
            unresolved = max(unresolved, fam.unresolved_fraction)
        if unresolved > 0:
            notes.append(f"generation {k}: unresolved mass up to {unresolved:.3g} at depth cap {J_max}")
        families.append({p.address: fam for p, fam in zip(parents, fams)})
        summaries.append(GenerationSummary(
            k, len(children), max(alphas) if alphas else math.nan, min(betas),
            unresolved, sum(b == 0 for b in betas)))
        gens.append(sorted(children, key=lambda n: _position(n.cube)))
        if not children:
            terminated = k
            notes.append(f"generation {k} is empty; construction stopped")
            break
    for note in notes:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    return CantorTree(Q0, M, theta, K, J_max, m, convention, gens, summaries,
                      families, axes, terminated, notes)


# -- invariants ----------------------------------------------------------------


@dataclass
class InvariantReport:
    checked: int
    violations: list

    @property
    def ok(self):
        return not self.violations


def check_maximality(F, family, m=None):
    """Recompute every ancestor average between the root and each stopped cube.

    A stopped cube must deviate by more than ``M`` and all its proper
    ancestors strictly below the root by at most ``M``; interior and
    unresolved cubes must not deviate by more than ``M``.
    """
    m = m or DEFAULT_NODES
    root, ref, M = family.root, family.root_avg, family.M
    stopped = {n.address for n in family.stopped}
    chains = {}
    for n in family.stopped:
        chains[n.address] = [a for a in n.cube.ancestors() if a.j > root.j]
    unique = {a.address: a for ch in chains.values() for a in ch}
    cubes = list(unique.values()) + [n.cube for n in family.stopped]
    avgs = face_average_gradients(F, cubes, m) if cubes else np.zeros((0, root.d + 1))
    dev = {q.address: float(np.linalg.norm(a - ref)) for q, a in zip(cubes, avgs)}
    bad = []
    for n in family.stopped:
        if not dev[n.address] > M:
            bad.append(f"{n.address}: stopped with deviation {dev[n.address]:.6g} <= M")
        for a in chains[n.address]:
            if a.address in stopped:
                bad.append(f"{n.address}: ancestor {a.address} also stopped")
            if dev[a.address] > M:
                bad.append(f"{n.address}: ancestor {a.address} deviates {dev[a.address]:.6g} > M")
    for n in family.interior + family.unresolved:
        if n.deviation > M:
            bad.append(f"{n.address}: open cube deviates {n.deviation:.6g} > M")
    return InvariantReport(len(family.stopped), bad)


def check_disjointness(nodes):
    """No cube of ``nodes`` equals or contains another one."""
    addresses = {}
    bad = []
    for n in nodes:
        if n.address in addresses:
            bad.append(f"{n.address}: duplicated")
        addresses[n.address] = n
    for n in nodes:
        for a in n.cube.ancestors():
            if a.address in addresses:
                bad.append(f"{n.address}: inside {a.address}")
    return InvariantReport(len(nodes), bad)


def check_tree(F, tree, m=None):
    """Maximality of every stopping family, disjointness and nesting of every
    generation of a built tree."""
    bad, checked = [], 0
    for fams in tree.families:
        for fam in fams.values():
            r = check_maximality(F, fam, m or tree.m)
            bad += r.violations
            checked += r.checked
    for k, gen in enumerate(tree.generations[1:], start=1):
        r = check_disjointness(gen)
        bad += [f"G{k} {v}" for v in r.violations]
        parents = {p.address: p for p in tree.generations[k - 1]}
        for n in gen:
            p = parents.get(n.parent)
            if p is None or not p.cube.contains(n.cube) or p.address == n.address:
                bad.append(f"G{k} {n.address}: not nested in a generation {k - 1} cube")
    return InvariantReport(checked, bad)


def check_bounded_averages(tree, R):
    """Every node of every generation has ``|avg| <= R``."""
    bad = [
        f"G{k} {n.address}: |avg| = {np.linalg.norm(n.avg_grad):.6g} > R"
        for k, gen in enumerate(tree.generations)
        for n in gen
        if np.linalg.norm(n.avg_grad) > R
    ]
    return InvariantReport(sum(len(g) for g in tree.generations), bad)


# -- ray verification ----------------------------------------------------------


@dataclass
class RayReport:
    certified: bool
    reason: str
    R: float
    checked_points: int
    max_ratio: float
    violations: list
    y_floor: float

    def to_dict(self):
        return {
            "certified": self.certified,
            "reason": self.reason,
            "R": self.R,
            "checked_points": self.checked_points,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
            "y_floor": self.y_floor,
        }


def verify_bounded_ray(F, tree, R, y_floor=None, points_per_cube=3, points_per_decade=12):
    """Check ``sup |grad F(x, y)| <= 2R`` on vertical rays over the final generation.

    Sample points are midpoints of a ``points_per_cube`` subdivision of each
    final cube.  Heights are log-spaced from the floor up to ``l(Q0)``; by
    default the floor is each cube's own sidelength (the scale the
    construction has resolved).

    Returns
    -------
    RayReport
        Not certified, with a reason, if ``R < |(grad F)_{Q0}|`` or the tree
        was not built with ``M = R cos(theta)``.
    """
    Q0 = tree.root
    avg0 = float(np.linalg.norm(tree.generations[0][0].avg_grad))
    fail = None
    if R < avg0:
        fail = f"precondition failed: R = {R:.6g} < |(grad F)_Q0| = {avg0:.6g}"
    elif abs(tree.M - R * math.cos(tree.theta)) > 1e-9 * max(1.0, tree.M):
        fail = f"precondition failed: tree M = {tree.M:.6g} differs from R cos(theta)"
    if fail:
        return RayReport(False, fail, R, 0, math.nan, [], math.nan)
    xs, ys, owners = [], [], []
    floors = []
    for n in tree.final:
        q = n.cube
        lo = max(y_floor if y_floor is not None else q.side, Y_FLOOR)
        floors.append(lo)
        decades = max(math.log10(Q0.side / lo), 0.0)
        grid = np.geomspace(Q0.side, lo, max(2, int(math.ceil(decades * points_per_decade)) + 1))
        pts = q.midpoints(points_per_cube)
        xs.append(np.repeat(pts, grid.size, axis=0))
        ys.append(np.tile(grid, pts.shape[0]))
        owners += [n.address] * (pts.shape[0] * grid.size)
    if not xs:
        return RayReport(True, "final generation is empty", R, 0, 0.0, [], math.nan)
    x, y = np.concatenate(xs), np.concatenate(ys)
    g = np.linalg.norm(evaluate_jets(F, x, y).gradient, axis=1)
    ratio = g / (2 * R)
    bad = [
        {"address": owners[i], "x": [float(v) for v in x[i]], "y": float(y[i]), "norm": float(g[i])}
        for i in np.flatnonzero(ratio > 1)
    ]
    return RayReport(True, "ok" if not bad else "violations", R, int(x.shape[0]),
                     float(ratio.max()), bad, float(min(floors)))


# -- calibration ---------------------------------------------------------------


@dataclass
class Calibration:
    """Measured one-step variation of face averages and the derived ``C``.

    ``jump`` is the sup over parents P (generations below ``generations``)
    and children Q' of ``|(grad F)_P - (grad F)_{Q'}|``, and
    ``C_const = jump / bloch``.  ``oscillation`` is the larger sup of
    ``|grad F(x, y) - (grad F)_P|`` over the box ``C_{1/N}(P)``, kept as
    telemetry.
    """

    jump: float
    oscillation: float
    bloch: float
    C_const: float
    generations: int

    def to_dict(self):
        return {"jump": self.jump, "oscillation": self.oscillation, "bloch": self.bloch,
                "C_const": self.C_const, "generations": self.generations}


def calibrate_constant(F, Q0, generations, bloch, m=DEFAULT_NODES):
    """Measure parent-to-child jumps over all cubes of generation < ``generations``."""
    level = [Q0]
    avgs = face_average_gradients(F, level, m)
    jump = osc = 0.0
    for _ in range(generations):
        kids = [c for q in level for c in q.children()]
        kid_avgs = face_average_gradients(F, kids, m)
        per_parent = len(kids) // len(level)
        jumps = kid_avgs - np.repeat(avgs, per_parent, axis=0)
        jump = max(jump, float(np.linalg.norm(jumps, axis=1).max()))
        boxes = [CarlesonBox(q, 1.0 / q.N) for q in level]
        xs, ys, _ = zip(*(b.nodes(m) for b in boxes))
        g = evaluate_jets(F, np.concatenate(xs), np.concatenate(ys)).gradient
        diff = g.reshape(len(level), xs[0].shape[0], -1) - avgs[:, None, :]
        osc = max(osc, float(np.linalg.norm(diff, axis=-1).max()))
        level, avgs = kids, kid_avgs
    return Calibration(jump, osc, bloch, jump / bloch if bloch > 0 else math.inf, generations)


# -- dimension bounds and geometric lemmas -------------------------------------


@dataclass(frozen=True)
class DimBound:
    """Hausdorff-dimension lower bound ``log(beta/alpha^d)/log(1/alpha)``.

    ``valid`` is set only when ``0 < alpha < beta^{1/d} < 1``; otherwise
    ``bound`` is the formula's value (possibly a limit) and no claim is made.
    """

    alpha: float
    beta: float
    d: int
    bound: float
    valid: bool

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "d": self.d,
                "bound": self.bound, "valid": self.valid}


def hungerford_bound(alpha, beta, d):
    alpha, beta = float(alpha), float(beta)
    valid = bool(0 < alpha < beta ** (1.0 / d) < 1) if beta > 0 else False
    if 0 < alpha < 1 and beta > 0:
        # same as log(beta / alpha^d) / log(1/alpha), exact at beta = 1
        bound = d + math.log(beta) / math.log(1 / alpha)
    else:
        bound = math.nan
    return DimBound(alpha, beta, d, bound, valid)


def makarov_bound(d, C_const, bloch_norm, beta, R, theta, N):
    """``d - C B log(1/beta) / (R cos(theta) log N)``, clamped at 0."""
    if min(C_const, bloch_norm, R, N) <= 0 or not (0 < beta <= 1):
        raise ValueError("parameters must be positive and beta in (0, 1]")
    if not (math.pi / 3 - 1e-12 <= theta < math.pi / 2):
        raise ValueError("theta must lie in [pi/3, pi/2)")
    value = d - C_const * bloch_norm * math.log(1 / beta) / (R * math.cos(theta) * math.log(N))
    if value < 0:
        warnings.warn(f"dimension bound {value:.6g} is negative; reporting 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return value


def cone_bound_check(R, k, theta, trials, d1=2, seed=0):
    """Monte Carlo check of ``|a| <= R  =>  |b| <= sqrt(R^2 sin^2 theta + k^2)``.

    Samples ``a`` with ``|a| <= R`` and ``b = a - rho u`` where ``u`` lies in
    the cone of half-aperture ``theta`` around ``a/|a|`` and
    ``rho in [R cos(theta), R cos(theta) + k]``, so that ``b`` lies in the
    cone of vertex ``a`` opening towards the origin.

    Returns
    -------
    int
        Number of violations.
    """
    c = math.cos(theta)
    if not (math.pi / 3 - 1e-12 <= theta < math.pi / 2):
        raise ValueError("theta must lie in [pi/3, pi/2)")
    if k < 0 or R < k / c:
        raise ValueError("need k >= 0 and R >= k / cos(theta)")
    rng = np.random.default_rng(seed)
    bound = math.sqrt(R**2 * math.sin(theta) ** 2 + k**2)
    bad = 0
    chunk = 200_000
    for start in range(0, trials, chunk):
        n = min(chunk, trials - start)
        axis = rng.normal(size=(n, d1))
        axis /= np.linalg.norm(axis, axis=1, keepdims=True)
        a = axis * (R * rng.random(n) ** (1 / d1))[:, None]
        # direction at angle < theta from the axis, uniform in cos on the cap
        cosang = c + (1 - c) * rng.random(n)
        perp = rng.normal(size=(n, d1))
        perp -= (perp * axis).sum(axis=1, keepdims=True) * axis
        perp /= np.linalg.norm(perp, axis=1, keepdims=True)
        u = cosang[:, None] * axis + np.sqrt(1 - cosang**2)[:, None] * perp
        rho = R * c + k * rng.random(n)
        b = a - rho[:, None] * u
        bad += int(np.count_nonzero(np.linalg.norm(b, axis=1) > bound * (1 + 1e-12)))
    return bad


def radius_g(x):
    """g(x) = sqrt(x (x + 1))."""
    return math.sqrt(x * (x + 1))


def radius_recursion(k_seq, theta, R1):
    """R_{n+1} = max(g(k_{n+1}/cos theta), sqrt(R_n^2 sin^2 theta + k_n^2)).

    Returns
    -------
    ndarray
        ``R_1, ..., R_n`` for ``n = len(k_seq)``.
    """
    k = np.asarray(k_seq, dtype=float)
    if k.size == 0 or np.any(k <= 0):
        raise ValueError("k_seq must be a nonempty sequence of positive numbers")
    c, s2 = math.cos(theta), math.sin(theta) ** 2
    if R1 < radius_g(k[0] / c):
        raise ValueError("R1 must be at least g(k_1 / cos theta)")
    R = np.empty(k.size)
    R[0] = R1
    for n in range(k.size - 1):
        R[n + 1] = max(radius_g(k[n + 1] / c), math.sqrt(R[n] ** 2 * s2 + k[n] ** 2))
    return R
