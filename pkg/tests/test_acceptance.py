"""Acceptance criteria, one function per criterion.

Each ``criterion_N`` returns ``(passed, detail)``.  Under pytest every
criterion is one test and a PASS/FAIL line per criterion is printed in the
terminal summary; ``python tests/test_acceptance.py`` prints the same lines
without pytest.
"""

import json
import math
import os
import sys
import tempfile
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import central_gradient, central_jacobian, poisson_quadrature_1d  # noqa: E402
from zygmund import cli  # noqa: E402
from zygmund.harmonic import (  # noqa: E402
    SaddleField,
    WeierstrassField,
    check_functional_equations,
    evaluate_jets,
    field_jet,
    phi_extension_jet,
)
from zygmund.lattice import NadicCube, descendants, face_average_gradient  # noqa: E402
from zygmund.qr import bloch_seminorm, weak_qr_sweep  # noqa: E402
from zygmund.slow import check_prop23, directional_divergence_survey  # noqa: E402
from zygmund.stopping import (  # noqa: E402
    calibrate_constant,
    cantor_build,
    check_tree,
    cone_bound_check,
    hungerford_bound,
    makarov_bound,
    radius_g,
    radius_recursion,
    verify_bounded_ray,
)
from zygmund.trig import TrigPolynomial, check_condition_H, default_directions  # noqa: E402

CONFIGS = [(d, b) for d in (1, 2, 3) for b in (2.0, 3.0)]
RESULTS = {}


def _points(rng, n, d):
    return rng.random((n, d)), rng.uniform(0.01, 1.0, n)


def criterion_1():
    """Harmonicity |trace HF| <= 1e-9 (1 + ||HF||), 10^3 points, < 10 s."""
    t0 = time.perf_counter()
    worst = 0.0
    for d, b in CONFIGS:
        W = WeierstrassField(TrigPolynomial.cos_sum(d), b)
        x, y = _points(np.random.default_rng(d * 10 + int(b)), 1000, d)
        J = evaluate_jets(W, x, y)
        worst = max(worst, float((np.abs(J.trace) / (1 + J.hessian_norm)).max()))
    dt = time.perf_counter() - t0
    return worst <= 1e-9 and dt < 10, f"max |tr|/(1+|H|) = {worst:.2e}, {dt:.2f} s"


def criterion_2():
    """Functional equations, max relative residual <= 1e-9, < 10 s."""
    t0 = time.perf_counter()
    worst = 0.0
    for d, b in CONFIGS:
        W = WeierstrassField(TrigPolynomial.cos_sum(d), b)
        x, y = _points(np.random.default_rng(100 + d * 10 + int(b)), 1000, d)
        worst = max(worst, check_functional_equations(W, x, y).max())
    dt = time.perf_counter() - t0
    return worst <= 1e-9 and dt < 10, f"max relative residual = {worst:.2e}, {dt:.2f} s"


def criterion_3():
    """Jet vs central differences with h = 1e-4 y, relative error <= 1e-4 at 200 points."""
    worst_g = worst_h = 0.0
    n = 0
    for d in (1, 2, 3):
        W = WeierstrassField(TrigPolynomial.cos_sum(d), 2.0)
        rng = np.random.default_rng(200 + d)
        x, y = _points(rng, 200, d)
        for xi, yi in zip(x, y):
            p = np.append(xi, yi)
            h = 1e-4 * yi
            J = field_jet(W, xi, yi)
            val = lambda q: float(field_jet(W, q[:d], q[d]).value)
            grad = lambda q: field_jet(W, q[:d], q[d]).gradient
            g_fd = central_gradient(val, p, h)
            H_fd = central_jacobian(grad, p, h)
            worst_g = max(worst_g, np.linalg.norm(J.gradient - g_fd) / np.linalg.norm(J.gradient))
            worst_h = max(worst_h, np.linalg.norm(J.hessian - H_fd) / np.linalg.norm(J.hessian))
            n += 1
    ok = worst_g <= 1e-4 and worst_h <= 1e-4
    return ok, f"{n} points, gradient rel err {worst_g:.2e}, Hessian rel err {worst_h:.2e}"


def criterion_4():
    """Spectral extension vs Poisson-kernel quadrature, 20 points, y in [0.3, 1], rel err <= 1e-6."""
    phi = TrigPolynomial.from_real_modes(1, [((0,), 0.7, 0.0), ((1,), 1.0, 0.0), ((2,), 0.0, 0.5)])
    f = lambda s: float(phi(np.array([s])))
    tail = [(1, 1.0, 0.0), (2, 0.0, 0.5)]
    rng = np.random.default_rng(4)
    worst = 0.0
    for x, y in zip(rng.random(20), rng.uniform(0.3, 1.0, 20)):
        ref = poisson_quadrature_1d(f, 0.7, x, y, fourier_tail=tail)
        got = float(phi_extension_jet(phi, np.array([x]), y).value)
        worst = max(worst, abs(got - ref) / abs(ref))
    return worst <= 1e-6, f"max relative error {worst:.2e}"


def _qr_cubes():
    Q = NadicCube.root(1)
    return descendants(Q, 1) + descendants(Q, 4) + descendants(Q, 5)


def criterion_5():
    """d = 1 weak QR ratio within 2% of 1 at m = 16; error halves (or sits at rounding) at m = 32."""
    W = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
    cubes = _qr_cubes()
    r16 = weak_qr_sweep(W, cubes, m=16)
    r32 = weak_qr_sweep(W, cubes, m=32)
    e16 = np.array([abs(r.gamma_sq - 1) for r in r16])
    e32 = np.array([abs(r.gamma_sq - 1) for r in r32])
    within = all(1 - 1e-9 <= r.gamma_sq <= 1.02 and not r.flagged for r in r16)
    halving = bool(np.all(e32 <= np.maximum(e16 / 2, 1e-12)))
    ok = len(cubes) == 50 and within and halving
    return ok, f"{len(cubes)} cubes, max |g2-1| m=16: {e16.max():.1e}, m=32: {e32.max():.1e}"


def criterion_6():
    """F = x1^2 - y^2 in d = 2 is flagged (gamma^2 = inf) on every tested cube."""
    Q = NadicCube.root(2)
    cubes = [c for j in range(4) for c in descendants(Q, j)]
    reports = weak_qr_sweep(SaddleField(2), cubes, m=8)
    ok = all(r.flagged and r.gamma_sq == math.inf for r in reports)
    return ok, f"{sum(r.flagged for r in reports)}/{len(reports)} cubes flagged"


def criterion_7():
    """Hungerford bound: (d, alpha, beta) = (1, 1/4, 1/2) gives 0.5; beta = 1 gives d exactly."""
    b = hungerford_bound(0.25, 0.5, 1)
    exact = b.bound == 0.5 and b.valid
    full = all(hungerford_bound(a, 1.0, d).bound == d
               for d in (1, 2, 3) for a in (0.5, 0.25, 0.3, 0.1, 0.7))
    mk = all(makarov_bound(d, 1.3, 8.7, 1.0, 20.0, math.pi / 3, 2) == d for d in (1, 2, 3))
    return exact and full and mk, f"bound(1/4, 1/2, 1) = {b.bound!r}; beta = 1 gives d: {full and mk}"


def criterion_8():
    """10^6 Monte Carlo trials of the cone lemma (theta = pi/3, R = 1, k = 0.4): no violations, < 5 s."""
    t0 = time.perf_counter()
    bad = cone_bound_check(1.0, 0.4, math.pi / 3, 1_000_000, seed=8)
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 5, f"{bad} violations, {dt:.2f} s"


def criterion_9():
    """Radius recursion: constant k converges to g(k/cos theta) within 1e-9 in <= 200 steps;
    k_n = 1/n gives R_n/k_n > 10 by n = 10^4."""
    theta = math.pi / 3
    c = math.cos(theta)
    k = 0.4
    target = radius_g(k / c)
    R = radius_recursion([k] * 200, theta, 10.0)
    hits = np.flatnonzero(np.abs(R - target) <= 1e-9)
    steps = int(hits[0]) + 1 if hits.size else None
    n = np.arange(1, 10_001)
    kn = 1.0 / n
    Rn = radius_recursion(kn, theta, radius_g(kn[0] / c))
    ratio = Rn / kn
    first = int(np.flatnonzero(ratio > 10)[0]) + 1 if np.any(ratio > 10) else None
    ok = steps is not None and steps <= 200 and first is not None
    return ok, f"converged after {steps} steps; R_n/k_n > 10 first at n = {first}"


def criterion_10():
    """End-to-end Cantor run (d = 1, b = 2, phi = cos, N = 2, K = 3, J_max = 8)."""
    t0 = time.perf_counter()
    W = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
    Q0 = NadicCube.root(1, N=2)
    theta, m = math.pi / 3, 8
    bloch = bloch_seminorm(W, x_box=Q0, samples=4096).value
    cal = calibrate_constant(W, Q0, 8, bloch, m)
    avg0 = float(np.linalg.norm(face_average_gradient(W, Q0, m)))
    R = max(cal.jump / math.cos(theta), avg0)
    M = R * math.cos(theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tree = cantor_build(W, Q0, M, theta, 3, 8, m)
    inv = check_tree(W, tree)
    ray = verify_bounded_ray(W, tree, R)
    db = tree.dim_bound()
    dt = time.perf_counter() - t0
    bound_ok = db.valid and 0 < db.bound <= 1
    ray_ok = ray.certified and not ray.violations
    ok = inv.ok and ray_ok and bound_ok and dt < 300
    counts = [len(g) for g in tree.generations[1:]]
    detail = (f"invariants {'ok' if inv.ok else 'VIOLATED'} ({inv.checked} stopped cubes); "
              f"ray {len(ray.violations)} violations, max ratio {ray.max_ratio:.3f}, floor {ray.y_floor:.2e}; "
              f"generations {counts}; alpha = {db.alpha:.4g}, beta = {db.beta:.4g}, "
              f"bound valid = {db.valid}; {dt:.1f} s")
    return ok, detail


def criterion_11():
    """Increment residual normalized by the Zygmund estimate <= 4 * 1.1 over 10^4 samples."""
    W = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
    rng = np.random.default_rng(11)
    n = 10_000
    x = rng.random((n, 1))
    h = (10.0 ** rng.uniform(-8, 0, n) * rng.choice([-1.0, 1.0], n))[:, None]
    r = check_prop23(W, W, x, h, zygmund_samples=100_000, seed=11)
    return r.normalized <= 4 * 1.1, f"normalized residual {r.normalized:.3f} (Zygmund estimate {r.zygmund:.3f})"


def criterion_12():
    """d = 2, phi = cos x1 + cos x2: exceedance of sup |D_e F| nondecreasing over floors 2^-5 .. 2^-20."""
    phi = TrigPolynomial.cos_sum(2)
    holds = all(r.verdict.startswith("holds") for r in check_condition_H(phi, default_directions(2), 1.0, 1e-3))
    W = WeierstrassField(phi, 2.0)
    x = np.random.default_rng(12).random((1000, 2))
    floors = 2.0 ** -np.arange(5, 21)
    s = directional_divergence_survey(W, [1.0, 0.0], x, floors)
    mono = bool(np.all(np.diff(s.exceedance, axis=1) >= 0))
    ends = ", ".join(f"{row[0]:.3f}->{row[-1]:.3f}" for row in s.exceedance)
    return holds and mono, f"condition H holds: {holds}; exceedance per threshold {ends}"


DET_CONFIG = {
    "lattice": {"J_max": 6},
    "stopping": {"K": 2, "calibration_generations": 6, "bloch_samples": 1024},
    "qr": {"depth": 4},
    "ray": {"n_points": 4, "y_min": 1e-8},
    "survey": {"n_points": 500, "log2_floors": [5, 20]},
    "seminorms": {"samples": 4096},
}
DET_COMMANDS = ["eval", "cantor", "qr", "ray", "survey", "condh", "seminorms", "selftest"]


def _run_all(root, threads, cfg_path, pts_path):
    for cmd in DET_COMMANDS:
        extra = ["--points", pts_path] if cmd == "eval" else []
        rc = cli.main(["--config", cfg_path, "--out", str(root), "--threads", str(threads), "--seed", "7",
                       cmd, *extra])
        if rc != 0:
            return f"{cmd} exited {rc} at {threads} threads"
    return {p.name: p.read_bytes() for p in sorted(root.iterdir()) if p.name != "manifest.json"}


def criterion_13():
    """Byte-identical outputs for repeated runs at 1, 4 and max threads."""
    counts = sorted({1, 4, os.cpu_count() or 1})
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "cfg.json"
        cfg.write_text(json.dumps(DET_CONFIG))
        pts = tmp / "pts.txt"
        rng = np.random.default_rng(13)
        pts.write_text("\n".join(f"{x!r} {y!r}" for x, y in zip(rng.random(200).tolist(), rng.uniform(1e-6, 1, 200).tolist())))
        outputs = []
        for threads in counts:
            for rep in range(2):
                res = _run_all(tmp / f"t{threads}_{rep}", threads, str(cfg), str(pts))
                if isinstance(res, str):
                    return False, res
                outputs.append(res)
    same = all(o == outputs[0] for o in outputs[1:])
    return same, f"{len(outputs)} runs at threads {counts}, {len(outputs[0])} files each, identical: {same}"


CRITERIA = [globals()[f"criterion_{i}"] for i in range(1, 14)]


def _record(i):
    fn = CRITERIA[i - 1]
    passed, detail = fn()
    RESULTS[i] = (bool(passed), detail)
    return passed, detail


@pytest.mark.parametrize("i", range(1, 14))
def test_criterion(i):
    passed, detail = _record(i)
    assert passed, f"criterion {i}: {detail}"


def summary_lines():
    return [f"criterion {i:2d}: {'PASS' if RESULTS[i][0] else 'FAIL'}  {RESULTS[i][1]}" for i in sorted(RESULTS)]


if __name__ == "__main__":
    for i in range(1, 14):
        _record(i)
        print(summary_lines()[-1], flush=True)
    sys.exit(0 if all(p for p, _ in RESULTS.values()) else 1)
