"""
Command-line front end.

    zygmund [--config PATH] [--out DIR] [--seed S] [--threads N] COMMAND

Commands: eval, cantor, qr, ray, survey, condh, seminorms, selftest.
Exit codes: 0 success, 2 configuration or input error, 3 numeric validation
failure.  Every CSV starts with a ``# config_hash=<sha256>`` line followed
by the header row; every JSON report carries a ``config_hash`` key.
``manifest.json`` lists outputs and wall-clock timings and is the only file
whose content depends on the run rather than the configuration.
"""

import argparse
import copy
import csv
import hashlib
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, _parallel
from .harmonic import (
    KinkField,
    LinearField,
    SaddleField,
    WeierstrassField,
    check_functional_equations,
    evaluate_jets,
)
from .lattice import NadicCube, descendants, face_average_gradient
from .qr import bloch_seminorm, jacobi_eigvalsh, weak_qr_sweep, zygmund_seminorm
from .slow import directional_divergence_survey, ray_profile
from .stopping import (
    calibrate_constant,
    cantor_build,
    check_bounded_averages,
    check_tree,
    cone_bound_check,
    makarov_bound,
    verify_bounded_ray,
)
from .trig import TrigPolynomial, check_condition_H, default_directions, seminorm_bounds

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


class NumericFailure(Exception):
    pass


# -- configuration -------------------------------------------------------------

DEFAULTS = {
    "field": {"phi": None, "b": 2.0, "tail_tol": 1e-12, "synthetic": None, "d": None, "gradient": None},
    "lattice": {"N": 2, "root_corner": None, "root_side": 1.0, "J_max": 8, "m": 8},
    "stopping": {"theta": math.pi / 3, "K": 3, "M": None, "R": None, "M_factor": 1.0,
                 "calibration_generations": 8, "bloch_samples": 4096, "convention": "cone"},
    "qr": {"N": 2, "depth": 4, "m": 16},
    "ray": {"points": None, "n_points": 8, "y_min": 1e-6, "y_max": 1.0, "points_per_decade": 10},
    "survey": {"e": None, "n_points": 1000, "log2_floors": [5, 20], "thresholds": None,
               "points_per_octave": 4},
    "condh": {"directions": None, "n_random": 16, "t_window": 1.0, "grid_step": 1e-3},
    "seminorms": {"samples": 4096, "y_range": [1e-3, 1.0], "h_range": [1e-6, 1.0], "alpha": 0.5},
    "sampling": {"seed": 0},
    "threads": None,
}

SYNTHETIC = {"linear", "saddle", "kink"}


def _merge(defaults, given, path):
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)} in {path or 'config'}")
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(defaults[k], dict) and k != "phi":
            out[k] = _merge(defaults[k], v, f"{path}.{k}" if path else k)
        else:
            out[k] = v
    return out


def _num(value, name, lo=None, hi=None, integer=False, lo_open=False, hi_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number")
    if integer and int(value) != value:
        raise ConfigError(f"{name} must be an integer")
    if lo is not None and (value <= lo if lo_open else value < lo):
        raise ConfigError(f"{name} must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and (value >= hi if hi_open else value > hi):
        raise ConfigError(f"{name} must be {'<' if hi_open else '<='} {hi}")
    return int(value) if integer else float(value)


def load_config(path=None, seed=None):
    """Parse and validate a JSON config; returns the merged dict."""
    given = {}
    if path is not None:
        try:
            given = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    cfg = _merge(DEFAULTS, given, "")
    if seed is not None:
        cfg["sampling"]["seed"] = seed
    validate(cfg)
    return cfg


def validate(cfg):
    f = cfg["field"]
    if f["synthetic"] is not None:
        if f["synthetic"] not in SYNTHETIC:
            raise ConfigError(f"field.synthetic must be one of {sorted(SYNTHETIC)}")
        _num(f["d"], "field.d", 1, integer=True)
        g = f["gradient"]
        if g is not None and (not isinstance(g, list) or len(g) != f["d"] + 1):
            raise ConfigError("field.gradient must be a list of d+1 numbers")
    else:
        if f["phi"] is None:
            f["phi"] = TrigPolynomial.cosine(1).to_dict()
        try:
            TrigPolynomial.from_dict(f["phi"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field.phi: {exc}") from None
        _num(f["b"], "field.b", 1, lo_open=True)
        _num(f["tail_tol"], "field.tail_tol", 0, lo_open=True)
    lat = cfg["lattice"]
    _num(lat["N"], "lattice.N", 2, integer=True)
    _num(lat["root_side"], "lattice.root_side", 0, lo_open=True)
    _num(lat["J_max"], "lattice.J_max", 1, integer=True)
    _num(lat["m"], "lattice.m", 2, integer=True)
    st = cfg["stopping"]
    theta = _num(st["theta"], "stopping.theta")
    if not (math.pi / 3 - 1e-12 <= theta < math.pi / 2):
        raise ConfigError("stopping.theta must lie in [pi/3, pi/2)")
    _num(st["K"], "stopping.K", 1, integer=True)
    for key in ("M", "R"):
        if st[key] is not None:
            _num(st[key], f"stopping.{key}", 0, lo_open=True)
    if st["M"] is not None and st["R"] is not None:
        raise ConfigError("give at most one of stopping.M and stopping.R")
    _num(st["M_factor"], "stopping.M_factor", 0, lo_open=True)
    _num(st["calibration_generations"], "stopping.calibration_generations", 1, integer=True)
    _num(st["bloch_samples"], "stopping.bloch_samples", 1, integer=True)
    if st["convention"] not in ("cone", "literal"):
        raise ConfigError("stopping.convention must be 'cone' or 'literal'")
    q = cfg["qr"]
    _num(q["N"], "qr.N", 2, integer=True)
    _num(q["depth"], "qr.depth", 0, integer=True)
    _num(q["m"], "qr.m", 2, integer=True)
    r = cfg["ray"]
    y_min = _num(r["y_min"], "ray.y_min", 1e-12)
    if not y_min < _num(r["y_max"], "ray.y_max", hi=1.0):
        raise ConfigError("ray.y_min must be below ray.y_max")
    _num(r["n_points"], "ray.n_points", 1, integer=True)
    _num(r["points_per_decade"], "ray.points_per_decade", 1, integer=True)
    s = cfg["survey"]
    _num(s["n_points"], "survey.n_points", 1, integer=True)
    lf = s["log2_floors"]
    if not (isinstance(lf, list) and len(lf) == 2 and 0 < lf[0] < lf[1] <= 39):
        raise ConfigError("survey.log2_floors must be [first, last] with 0 < first < last <= 39")
    _num(s["points_per_octave"], "survey.points_per_octave", 1, integer=True)
    c = cfg["condh"]
    _num(c["t_window"], "condh.t_window", 0, lo_open=True)
    _num(c["grid_step"], "condh.grid_step", 0, lo_open=True)
    _num(c["n_random"], "condh.n_random", 0, integer=True)
    sn = cfg["seminorms"]
    _num(sn["samples"], "seminorms.samples", 1, integer=True)
    _num(sn["alpha"], "seminorms.alpha", 0, 1, lo_open=True, hi_open=True)
    seed = cfg["sampling"]["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("sampling.seed must be an unsigned 64-bit integer")
    if cfg["threads"] is not None:
        _num(cfg["threads"], "threads", 1, integer=True)


def config_hash(cfg):
    """sha256 of the canonical JSON of the config, thread count excluded."""
    body = {k: v for k, v in cfg.items() if k != "threads"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def build_field(cfg):
    f = cfg["field"]
    if f["synthetic"] == "linear":
        return LinearField(f["d"], f["gradient"])
    if f["synthetic"] == "saddle":
        return SaddleField(f["d"])
    if f["synthetic"] == "kink":
        return KinkField(f["d"])
    return WeierstrassField(TrigPolynomial.from_dict(f["phi"]), float(f["b"]), float(f["tail_tol"]))


def root_cube(cfg, d, N=None):
    lat = cfg["lattice"]
    return NadicCube.root(d, N or lat["N"], lat["root_corner"], lat["root_side"])


# -- output --------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


class Output:
    def __init__(self, out_dir, chash):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.hash = chash
        self.files = []

    def json(self, name, obj):
        body = {"config_hash": self.hash, **_clean(obj)}
        path = self.dir / name
        path.write_text(json.dumps(body, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
        self.files.append(name)
        return path

    def csv(self, name, header, rows):
        path = self.dir / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# config_hash={self.hash}\r\n")
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        self.files.append(name)
        return path


def write_manifest(out, command, seconds):
    path = out.dir / "manifest.json"
    manifest = {"artifact_version": __version__, "config_hash": out.hash, "commands": {}}
    if path.exists():
        try:
            old = json.loads(path.read_text())
            if old.get("config_hash") == out.hash:
                manifest["commands"] = old.get("commands", {})
        except json.JSONDecodeError:
            pass
    manifest["commands"][command] = {"files": out.files, "seconds": round(seconds, 6)}
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# -- commands ------------------------------------------------------------------


def read_points(path, d):
    """Rows of d+1 floats (x_1..x_d, y); '#' comments and blank lines skipped."""
    pts, errors = [], []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read points file {path}: {exc.strerror}") from None
    for i, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.replace(",", " ").split()
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            errors.append(f"line {i}: not a number")
            continue
        if len(vals) != d + 1:
            errors.append(f"line {i}: expected {d + 1} values, got {len(vals)}")
        elif not vals[-1] > 0:
            errors.append(f"line {i}: y must be positive")
        else:
            pts.append(vals)
    if errors:
        more = f"; and {len(errors) - 10} more" if len(errors) > 10 else ""
        raise ConfigError("points file: " + "; ".join(errors[:10]) + more)
    return np.array(pts, dtype=float).reshape(-1, d + 1)


def cmd_eval(cfg, out, args):
    F = build_field(cfg)
    d = F.d
    if args.points is None:
        raise ConfigError("eval needs --points FILE")
    pts = read_points(args.points, d)
    if pts.shape[0] and np.any(pts[:, -1] < 1e-12):
        raise ConfigError("points file: y below the floor 1e-12")
    iu = np.triu_indices(d + 1)
    header = [f"x{i + 1}" for i in range(d)] + ["y", "value"]
    header += [f"g{i + 1}" for i in range(d + 1)]
    header += [f"h{i + 1}{j + 1}" for i, j in zip(*iu)] + ["trace"]
    rows, bad = [], 0
    if pts.shape[0]:
        J = evaluate_jets(F, pts[:, :d], pts[:, d])
        tr = J.trace
        bad = int(np.count_nonzero(np.abs(tr) > 1e-9 * (1 + J.hessian_norm)))
        for p, v, g, h, t in zip(pts, J.value, J.gradient, J.hessian, tr):
            rows.append([*p, v, *g, *h[iu], t])
    out.csv("jets.csv", header, rows)
    if bad:
        raise NumericFailure(f"harmonicity check failed at {bad} point(s)")


def cmd_cantor(cfg, out, args):
    F = build_field(cfg)
    lat, st = cfg["lattice"], cfg["stopping"]
    Q0 = root_cube(cfg, F.d)
    theta = float(st["theta"])
    m = lat["m"]
    bloch = bloch_seminorm(F, samples=st["bloch_samples"], x_box=Q0, seed=cfg["sampling"]["seed"]).value
    cal = calibrate_constant(F, Q0, st["calibration_generations"], bloch, m)
    avg0 = float(np.linalg.norm(face_average_gradient(F, Q0, m)))
    if st["M"] is not None:
        R = st["M"] / math.cos(theta)
    elif st["R"] is not None:
        R = float(st["R"])
    else:
        R = max(st["M_factor"] * cal.jump / math.cos(theta), avg0)
    if not R > 0:
        raise ConfigError("calibrated R is zero; set stopping.M or stopping.R")
    M = R * math.cos(theta)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        tree = cantor_build(F, Q0, M, theta, st["K"], lat["J_max"], m, st["convention"])
    inv = check_tree(F, tree)
    bounded = check_bounded_averages(tree, R)
    ray = verify_bounded_ray(F, tree, R)
    escaped = bool(tree.generations[1])
    report = tree.to_dict()
    report.update({
        "R": R,
        "calibration": cal.to_dict(),
        "root_average_norm": avg0,
        "invariants": {"checked": inv.checked, "violations": inv.violations,
                       "bounded_averages_violations": bounded.violations},
        "status": "ok" if escaped else "no escape: first stopping family is empty",
    })
    out.json("cantor_tree.json", report)
    out.json("ray_check.json", ray.to_dict())
    if escaped:
        db = tree.dim_bound()
        body = db.to_dict()
        beta = db.beta
        if 0 < beta <= 1 and bloch > 0:
            body["makarov_bound"] = makarov_bound(F.d, cal.C_const, bloch, beta, R, theta, Q0.N)
        out.json("dim_bound.json", body)
        if not db.valid:
            print(f"warning: dimension bound invalid (alpha={db.alpha:.6g}, beta={db.beta:.6g}, d={db.d})",
                  file=sys.stderr)
    else:
        print("warning: no escape from the root cube; no dimension bound emitted", file=sys.stderr)
    if inv.violations:
        raise NumericFailure(f"tree invariants violated: {inv.violations[0]}")
    if ray.certified and ray.violations:
        raise NumericFailure(f"bounded-ray check: {len(ray.violations)} violation(s)")


def cmd_qr(cfg, out, args):
    F = build_field(cfg)
    q = cfg["qr"]
    Q0 = root_cube(cfg, F.d, q["N"])
    cubes = [c for j in range(q["depth"] + 1) for c in descendants(Q0, j)]
    reports = weak_qr_sweep(F, cubes, q["N"], q["m"])
    header = ["cube_address", "N", "numerator", "denominator", "gamma_sq", "flagged"]
    out.csv("qr_sweep.csv", header,
            [[r.address, r.N, r.numerator, r.denominator, r.gamma_sq, int(r.flagged)] for r in reports])
    for r in reports:
        lam = jacobi_eigvalsh(r.gram)
        if lam[0] < -1e-12 * np.trace(r.gram):
            raise NumericFailure(f"{r.address}: Gram matrix not positive semidefinite")


def _random_points(cfg, n, d, stream):
    rng = np.random.default_rng([cfg["sampling"]["seed"], stream])
    return rng.random((n, d))


def cmd_ray(cfg, out, args):
    F = build_field(cfg)
    r = cfg["ray"]
    pts = np.asarray(r["points"], dtype=float).reshape(-1, F.d) if r["points"] is not None \
        else _random_points(cfg, r["n_points"], F.d, 1)
    header = [f"x{i + 1}" for i in range(F.d)] + ["y", "grad_norm", "tangential_norm"]
    rows = []
    for x in pts:
        rows.extend(ray_profile(F, x, r["y_min"], r["y_max"], r["points_per_decade"]).rows())
    out.csv("ray_profiles.csv", header, rows)


def cmd_survey(cfg, out, args):
    F = build_field(cfg)
    s = cfg["survey"]
    e = np.eye(F.d)[0] if s["e"] is None else np.asarray(s["e"], dtype=float)
    if abs(np.linalg.norm(e) - 1) > 1e-12 or e.shape != (F.d,):
        raise ConfigError("survey.e must be a unit vector of length d")
    x = _random_points(cfg, s["n_points"], F.d, 2)
    lo, hi = s["log2_floors"]
    floors = 2.0 ** -np.arange(lo, hi + 1)
    res = directional_divergence_survey(F, e, x, floors, s["thresholds"], 1.0, s["points_per_octave"])
    header = [f"x{i + 1}" for i in range(F.d)] + ["floor", "sup_abs_DeF"]
    rows = [[*xi, fl, v] for xi, sups in zip(res.x, res.sups) for fl, v in zip(res.floors, sups)]
    out.csv("survey.csv", header, rows)
    out.json("survey_summary.json", {"direction": e, "n_points": int(x.shape[0]),
                                     "rows": res.summary()})


def _need_phi(cfg, command):
    if cfg["field"]["synthetic"] is not None:
        raise ConfigError(f"{command} needs a trigonometric base function (field.phi)")
    return TrigPolynomial.from_dict(cfg["field"]["phi"])


def cmd_condh(cfg, out, args):
    phi = _need_phi(cfg, "condh")
    c = cfg["condh"]
    dirs = default_directions(phi.d, c["n_random"], cfg["sampling"]["seed"]) if c["directions"] is None \
        else np.asarray(c["directions"], dtype=float).reshape(-1, phi.d)
    try:
        res = check_condition_H(phi, dirs, c["t_window"], c["grid_step"])
    except ValueError as exc:
        raise ConfigError(f"condh: {exc}") from None
    out.json("condh.json", {"results": [r.__dict__ for r in res],
                            "all_hold": all(r.verdict.startswith("holds") for r in res)})


def cmd_seminorms(cfg, out, args):
    F = build_field(cfg)
    sn = cfg["seminorms"]
    seed = cfg["sampling"]["seed"]
    bl = bloch_seminorm(F, tuple(sn["y_range"]), samples=sn["samples"], seed=seed)
    body = {"bloch": bl.to_dict()}
    if cfg["field"]["synthetic"] is None:
        zy = zygmund_seminorm(F, F.d, tuple(sn["h_range"]), sn["samples"], seed)
        body["zygmund"] = zy.to_dict()
        body["zygmund_over_bloch"] = zy.value / bl.value if bl.value > 0 else math.inf
        b = seminorm_bounds(F.base, sn["alpha"])
        body["phi_bounds"] = b.__dict__
    out.json("seminorms.json", body)


def cmd_selftest(cfg, out, args):
    rng = np.random.default_rng(cfg["sampling"]["seed"])
    checks = {}
    for d in (1, 2):
        W = WeierstrassField(TrigPolynomial.cos_sum(d), 2.0)
        x, y = rng.random((200, d)), rng.uniform(0.01, 1, 200)
        J = evaluate_jets(W, x, y)
        checks[f"harmonic_d{d}"] = float(np.max(np.abs(J.trace) / (1 + J.hessian_norm))) <= 1e-9
        checks[f"functional_equations_d{d}"] = check_functional_equations(W, x, y).max() <= 1e-9
    A = rng.normal(size=(50, 3, 3))
    A = A + A.transpose(0, 2, 1)
    checks["jacobi"] = float(np.abs(jacobi_eigvalsh(A) - np.linalg.eigvalsh(A)).max()) <= 1e-10
    checks["cone_lemma"] = cone_bound_check(1.0, 0.4, math.pi / 3, 100_000, seed=cfg["sampling"]["seed"]) == 0
    out.json("selftest.json", {"checks": checks, "passed": all(checks.values())})
    if not all(checks.values()):
        raise NumericFailure("selftest: " + ", ".join(k for k, v in checks.items() if not v))


COMMANDS = {
    "eval": cmd_eval,
    "cantor": cmd_cantor,
    "qr": cmd_qr,
    "ray": cmd_ray,
    "survey": cmd_survey,
    "condh": cmd_condh,
    "seminorms": cmd_seminorms,
    "selftest": cmd_selftest,
}


def build_parser():
    p = argparse.ArgumentParser(prog="zygmund", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, metavar="U64", help="override sampling.seed")
    p.add_argument("--threads", type=int, metavar="N", help="worker threads (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "eval":
            sp.add_argument("--points", metavar="FILE", help="rows of x_1 .. x_d y")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.seed)
        threads = args.threads if args.threads is not None else cfg["threads"]
        if threads is not None and threads < 1:
            raise ConfigError("threads must be at least 1")
        _parallel.set_threads(threads)
        out = Output(args.out, config_hash(cfg))
        start = time.perf_counter()
        COMMANDS[args.command](cfg, out, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        write_manifest(out, args.command, time.perf_counter() - start)
        print(f"error: numeric: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_manifest(out, args.command, time.perf_counter() - start)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
