"""Command-line front end: ``gsdecay {solve,envelope,kernel-checks,report}``.

A run is described by one JSON document (see :data:`DEFAULTS` for every key).
Unknown keys are rejected before any computation.  Output files are named
from the potential id and a hash of the validated config, and each embeds the
hash and the package version, so identical configs give identical bytes.

Exit codes: 0 ok, 2 invalid config, 3 solver failure, 4 a check failed.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, GsDecayError, InputError, SingularityError, SolverError
from .feynman_kac import (
    PathSamplerConfig,
    check_lower_sandwich,
    check_upper_sandwich,
    exit_time_bound_constant,
    exit_time_laplace,
    fk_kernel_estimate,
    mehler_kernel,
)
from .kernels import (
    bessel_asymptotic_ratio,
    dirichlet_interval_kernel,
    gauss_kernel,
    fit_dirichlet_constant,
    resolvent_half_kernel,
    resolvent_kernel,
    resolvent_kernel_quad,
)
from .potentials import PotentialSpec, from_config
from .spectral import GridSpec, ground_state_csv, solve_ground_state, solve_radial_ground_state
from .verify import VerificationConfig, config_hash, run_verification

log = logging.getLogger("gsdecay")

OUT_ENV = "GSDECAY_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4
U64 = 2 ** 64

DEFAULTS: Dict[str, object] = {
    "potential": {"kind": "power", "params": {}, "path": None},
    "grid": {"d": 1, "L": 10.0, "n": 2000, "radial": False},
    "solver": {"tol": 1e-8, "max_iter": 500},
    "envelopes": [{"side": s, "epsilon": e, "delta": dl}
                  for s in ("lower", "upper") for e in (0.1, 0.5) for dl in (0.1, 0.5)],
    "power_window": None,
    "fk": {"paths": 10000, "steps": 200, "seed": 0, "scheme": "bridge", "antithetic": False},
    "checks": {"fk_oracle": True, "sandwich": True, "resolvent": True, "dirichlet": True, "exit_time": False},
    "fk_oracle": {"t": 0.5, "x": [0.0], "y": [0.0]},
    "sandwich": {
        "lower": {"epsilon": 0.5, "delta": 1.0},
        "upper": {"epsilon": 0.5, "delta": 0.5},
        "samples": [{"x": [x], "y": [0.0], "t": t} for x in (3.0, 4.0) for t in (0.1, 0.5, 1.0)],
    },
    "resolvent": {"lambdas": [1.0, 4.0, 16.0], "radii": [0.5, 1.0, 2.0, 5.0], "dims": [1, 3]},
    "dirichlet": {"times": [0.1, 0.25, 0.5, 1.0, 2.0], "points": [-0.5, 0.0, 0.5], "r": 1.0, "c_min": 0.2},
    "exit_time": {"lambdas": [1.0, 4.0], "radii": [1.0, 2.0], "epsilon": 0.1},
    "out": "gsdecay-out",
}

# tolerances of the kernel checks
RESOLVENT_CLOSED_TOL = 1e-8
RESOLVENT_QUAD_TOL = 1e-6
RESOLVENT_RELATION_TOL = 1e-9
ASYMPTOTIC_SLACK = 1e-3
FK_SIGMAS = 3.0
EXIT_REL_TOL = 0.02


# -- config -----------------------------------------------------------------

def _merge(default, given, path: str):
    """Overlay ``given`` onto ``default``; unknown keys are errors."""
    if isinstance(default, dict) and default:
        if not isinstance(given, dict):
            raise ConfigError(f"{path or 'config'}: expected an object")
        out = copy.deepcopy(default)
        for k, v in given.items():
            if k not in default:
                raise ConfigError(f"{path + '.' if path else ''}{k}: unknown key")
            out[k] = _merge(default[k], v, f"{path + '.' if path else ''}{k}")
        return out
    return copy.deepcopy(given)


def _num(v, field: str, lo=None, hi=None, lo_open=False, hi_open=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{field}: expected a finite number")
    if integer and int(v) != v:
        raise ConfigError(f"{field}: expected an integer")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(f"{field}: must be {'>' if lo_open else '>='} {lo:g}, got {v}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ConfigError(f"{field}: must be {'<' if hi_open else '<='} {hi:g}, got {v}")
    return int(v) if integer else float(v)


def _nums(v, field: str, **kw) -> List[float]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{field}: expected a nonempty list")
    return [_num(e, f"{field}[{i}]", **kw) for i, e in enumerate(v)]


def _bool(v, field: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{field}: expected true or false")
    return v


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; ``data`` is the normalized JSON document."""

    data: dict
    base_dir: Path

    @property
    def hash(self) -> str:
        body = {k: v for k, v in self.data.items() if k != "out"}
        return config_hash(body)

    @property
    def grid(self) -> GridSpec:
        g = self.data["grid"]
        return GridSpec(g["d"], g["L"], g["n"], g["radial"])

    @property
    def fk(self) -> PathSamplerConfig:
        f = self.data["fk"]
        return PathSamplerConfig(f["paths"], f["steps"], f["seed"], f["scheme"], f["antithetic"])

    def potential(self) -> PotentialSpec:
        p = dict(self.data["potential"])
        if p.get("path"):
            path = Path(p["path"])
            p["path"] = str(path if path.is_absolute() else self.base_dir / path)
        try:
            return from_config(p, self.data["grid"]["d"])
        except (InputError, DomainError) as exc:
            raise ConfigError(f"potential: {exc}") from exc

    def verification(self) -> VerificationConfig:
        s = self.data["solver"]
        pw = self.data["power_window"]
        return VerificationConfig(
            grid=self.grid, tol=s["tol"], max_iter=s["max_iter"],
            envelopes=tuple((e["side"], e["epsilon"], e["delta"]) for e in self.data["envelopes"]),
            power_window=tuple(pw) if pw else None)


def validate_config(raw: dict, base_dir=".", seed: Optional[int] = None) -> RunConfig:
    """Merge ``raw`` onto the defaults and check every field."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    cfg = _merge(DEFAULTS, raw, "")
    if seed is not None:
        cfg["fk"]["seed"] = seed

    pot = cfg["potential"]
    if not isinstance(pot["kind"], str):
        raise ConfigError("potential.kind: expected a string")
    if not isinstance(pot["params"], dict):
        raise ConfigError("potential.params: expected an object")
    if pot["kind"] == "power" and not pot["params"]:
        pot["params"] = {"beta": 1.0}

    g = cfg["grid"]
    g["radial"] = _bool(g["radial"], "grid.radial")
    g["d"] = _num(g["d"], "grid.d", lo=1, hi=None if g["radial"] else 3, integer=True)
    g["L"] = _num(g["L"], "grid.L", lo=0, lo_open=True)
    g["n"] = _num(g["n"], "grid.n", lo=16, integer=True)

    s = cfg["solver"]
    s["tol"] = _num(s["tol"], "solver.tol", lo=0, lo_open=True)
    s["max_iter"] = _num(s["max_iter"], "solver.max_iter", lo=1, integer=True)

    if not isinstance(cfg["envelopes"], list):
        raise ConfigError("envelopes: expected a list")
    envs = []
    for i, e in enumerate(cfg["envelopes"]):
        e = _merge({"side": "lower", "epsilon": 0.1, "delta": 0.5}, e, f"envelopes[{i}]")
        if e["side"] not in ("lower", "upper"):
            raise ConfigError(f"envelopes[{i}].side: expected 'lower' or 'upper'")
        hi = 1 if e["side"] == "upper" else None
        e["epsilon"] = _num(e["epsilon"], f"envelopes[{i}].epsilon", lo=0, lo_open=True, hi=hi, hi_open=True)
        e["delta"] = _num(e["delta"], f"envelopes[{i}].delta", lo=0, hi=1, lo_open=True, hi_open=True)
        envs.append(e)
    cfg["envelopes"] = envs

    if cfg["power_window"] is not None:
        pw = _nums(cfg["power_window"], "power_window", lo=0)
        if len(pw) != 2 or not pw[0] < pw[1]:
            raise ConfigError("power_window: expected [r_lo, r_hi] with r_lo < r_hi")
        cfg["power_window"] = pw

    f = cfg["fk"]
    f["paths"] = _num(f["paths"], "fk.paths", lo=100, integer=True)
    f["steps"] = _num(f["steps"], "fk.steps", lo=10, integer=True)
    f["seed"] = _num(f["seed"], "fk.seed", lo=0, hi=U64 - 1, integer=True)
    if f["scheme"] not in ("bridge", "forward"):
        raise ConfigError("fk.scheme: expected 'bridge' or 'forward'")
    f["antithetic"] = _bool(f["antithetic"], "fk.antithetic")

    for k, v in cfg["checks"].items():
        _bool(v, f"checks.{k}")

    o = cfg["fk_oracle"]
    o["t"] = _num(o["t"], "fk_oracle.t", lo=0, lo_open=True)
    o["x"] = _nums(o["x"], "fk_oracle.x")
    o["y"] = _nums(o["y"], "fk_oracle.y")

    sw = cfg["sandwich"]
    for side, hi_eps in (("lower", None), ("upper", 1)):
        p = _merge(DEFAULTS["sandwich"][side], sw[side], f"sandwich.{side}")
        p["epsilon"] = _num(p["epsilon"], f"sandwich.{side}.epsilon", lo=0, lo_open=True, hi=hi_eps, hi_open=True)
        p["delta"] = _num(p["delta"], f"sandwich.{side}.delta", lo=0, lo_open=True,
                          hi=1 if side == "upper" else None, hi_open=True)
        sw[side] = p
    if not isinstance(sw["samples"], list) or not sw["samples"]:
        raise ConfigError("sandwich.samples: expected a nonempty list")
    samples = []
    for i, smp in enumerate(sw["samples"]):
        smp = _merge({"x": [0.0], "y": [0.0], "t": 1.0}, smp, f"sandwich.samples[{i}]")
        smp["x"] = _nums(smp["x"], f"sandwich.samples[{i}].x")
        smp["y"] = _nums(smp["y"], f"sandwich.samples[{i}].y")
        smp["t"] = _num(smp["t"], f"sandwich.samples[{i}].t", lo=0, lo_open=True)
        samples.append(smp)
    sw["samples"] = samples

    r = cfg["resolvent"]
    r["lambdas"] = _nums(r["lambdas"], "resolvent.lambdas", lo=0, lo_open=True)
    r["radii"] = _nums(r["radii"], "resolvent.radii", lo=0, lo_open=True)
    r["dims"] = [_num(v, f"resolvent.dims[{i}]", lo=1, integer=True) for i, v in enumerate(r["dims"])]

    dc = cfg["dirichlet"]
    dc["times"] = _nums(dc["times"], "dirichlet.times", lo=0, lo_open=True)
    dc["r"] = _num(dc["r"], "dirichlet.r", lo=0, lo_open=True)
    dc["points"] = _nums(dc["points"], "dirichlet.points", lo=-dc["r"], hi=dc["r"], lo_open=True, hi_open=True)
    dc["c_min"] = _num(dc["c_min"], "dirichlet.c_min", lo=0)

    et = cfg["exit_time"]
    et["lambdas"] = _nums(et["lambdas"], "exit_time.lambdas", lo=0, lo_open=True)
    et["radii"] = _nums(et["radii"], "exit_time.radii", lo=0, lo_open=True)
    et["epsilon"] = _num(et["epsilon"], "exit_time.epsilon", lo=0, hi=1, hi_open=True)

    if not isinstance(cfg["out"], str) or not cfg["out"]:
        raise ConfigError("out: expected a directory name")
    rc = RunConfig(cfg, Path(base_dir))
    rc.potential()
    return rc


def load_config(path: Optional[str], seed: Optional[int] = None) -> RunConfig:
    if path is None:
        return validate_config({}, ".", seed)
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(raw, Path(path).resolve().parent, seed)


# -- outputs ----------------------------------------------------------------

def _header(rc: RunConfig, pid: str) -> str:
    return f"# gsdecay_version: {__version__}\n# config_hash: {rc.hash}\n# potential: {pid}\n"


class Writer:
    def __init__(self, out_dir: Path, rc: RunConfig, pid: str, quiet: bool):
        self.dir = out_dir
        self.rc = rc
        self.pid = pid
        self.quiet = quiet
        self.files: List[Path] = []

    def write(self, suffix: str, body: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / f"{self.pid}-{self.rc.hash}-{suffix}"
        with open(path, "w", newline="") as fh:
            fh.write(_header(self.rc, self.pid) + body)
        self.files.append(path)
        if not self.quiet:
            print(f"wrote {path}")
        return path


def _csv(header: List[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------

def _solve(rc: RunConfig, pot: PotentialSpec):
    s = rc.data["solver"]
    if rc.grid.radial:
        return solve_radial_ground_state(pot, pot.dimension, rc.grid, s["tol"], s["max_iter"])
    return solve_ground_state(rc.grid, pot, s["tol"], s["max_iter"])


def cmd_solve(rc: RunConfig, w: Writer) -> int:
    pot = rc.potential()
    gs = _solve(rc, pot)
    w.write("groundstate.csv", ground_state_csv(gs))
    if not w.quiet:
        print(f"lambda0 = {gs.lambda0:.10g}  residual = {gs.residual:.2e}")
    return EXIT_OK


def cmd_envelope(rc: RunConfig, w: Writer) -> Tuple[int, List[str]]:
    pot = rc.potential()
    report = run_verification(pot, rc.verification(), gs=_solve(rc, pot))
    w.write("report.txt", report.to_text())
    w.write("ratio.csv", report.profile_csv())
    w.write("envelopes.csv", report.envelope_csv())
    lines = [f"envelope.{e.side}.eps{e.epsilon:g}.delta{e.delta:g}: {'pass' if e.passed else 'FAIL'}"
             for e in report.envelopes]
    if report.power_sharp is not None and report.power_sharp.in_regime:
        lines.append(f"power_sharp: {'pass' if report.power_sharp.passed else 'FAIL'}")
    return (EXIT_OK if report.passed else EXIT_CHECK), lines


def _fk_oracle(pot: PotentialSpec) -> Optional[Callable]:
    """Closed-form heat kernel for constant and unit harmonic potentials, else None."""
    if pot.kind == "constant-plus":
        c = float(pot.params["c"])
        return lambda t, x, y: math.exp(-c * t) * gauss_kernel(t, x, y, pot.dimension)
    if pot.kind == "power" and float(pot.params["beta"]) == 1.0:
        return mehler_kernel
    if pot.kind == "anisotropic-quadratic" and all(float(v) == 1.0 for v in pot.params["weights"]):
        return mehler_kernel
    return None


def _check_fk_oracle(rc: RunConfig, pot: PotentialSpec, results: dict) -> Optional[dict]:
    oracle = _fk_oracle(pot)
    if oracle is None:
        return None
    o = rc.data["fk_oracle"]
    est = fk_kernel_estimate(pot, o["t"], o["x"], o["y"], rc.fk)
    exact = oracle(o["t"], np.array(o["x"]), np.array(o["y"]))
    ok = abs(est.mean - exact) <= FK_SIGMAS * est.stderr
    results["fk_oracle"] = ok
    return {"t": o["t"], "mean": est.mean, "stderr": est.stderr, "exact": exact, "pass": ok}


def _check_sandwich(rc: RunConfig, pot: PotentialSpec, results: dict, w: Writer) -> List[str]:
    sw = rc.data["sandwich"]
    samples = [(s["x"], s["y"], s["t"]) for s in sw["samples"]]
    lo = check_lower_sandwich(pot, sw["lower"]["epsilon"], sw["lower"]["delta"], samples, rc.fk)
    up = check_upper_sandwich(pot, sw["upper"]["epsilon"], sw["upper"]["delta"], samples, rc.fk)
    rows = []
    for res in (lo, up):
        results[f"sandwich.{res.side}"] = res.passed
        for r in res.rows:
            rows.append([res.side, " ".join(f"{v:g}" for v in r["x"]), " ".join(f"{v:g}" for v in r["y"]),
                         r["t"], r["u"], r["stderr"], r["envelope"], r["ratio"], r["ratio_stderr"]])
    w.write("sandwich.csv", _csv(["side", "x", "y", "t", "u", "stderr", "envelope", "ratio", "ratio_stderr"], rows))
    return [f"sandwich.lower.c: {lo.c:.6g}", f"sandwich.lower.rejected: {len(lo.rejected)}",
            f"sandwich.lower.violations: {len(lo.violations)}",
            f"sandwich.upper.c: {up.c:.6g}", f"sandwich.upper.a: {up.a:.6g}",
            f"sandwich.upper.violations: {len(up.violations)}"]


def _closed_resolvent(lam: float, r: float, d: int) -> Optional[float]:
    s = math.sqrt(lam)
    if d == 1:
        return math.exp(-s * r) / (2 * s)
    if d == 3:
        return math.exp(-s * r) / (4 * math.pi * r)
    return None


def check_resolvent(lambdas, radii, dims) -> Tuple[bool, List[list]]:
    """Compare the Bessel route with closed forms, quadrature and the half-kernel relation."""
    rows, ok = [], True
    for d in dims:
        v = d / 2 - 1
        for lam in lambdas:
            for r in radii:
                bessel = resolvent_kernel(lam, r, d)
                quad = resolvent_kernel_quad(lam, r, d)
                closed = _closed_resolvent(lam, r, d)
                rel_q = abs(bessel - quad) / quad
                row_ok = rel_q <= RESOLVENT_QUAD_TOL
                rel_c = rel_rel = float("nan")
                if closed is not None:
                    rel_c = abs(bessel - closed) / closed
                    half = resolvent_half_kernel(lam, r, d)
                    twice = 2 * _closed_resolvent(2 * lam, r, d)
                    rel_rel = abs(half - twice) / twice
                    row_ok &= rel_c <= RESOLVENT_CLOSED_TOL and rel_rel <= RESOLVENT_RELATION_TOL
                z = math.sqrt(lam) * r
                asym = float("nan")
                if z >= 5:
                    asym = abs(float(bessel_asymptotic_ratio(v, z)) - 1)
                    row_ok &= asym <= abs(4 * v * v - 1) / (8 * z) + ASYMPTOTIC_SLACK
                ok &= bool(row_ok)
                rows.append([d, lam, r, bessel, quad, rel_q, rel_c, rel_rel, asym, "pass" if row_ok else "FAIL"])
    return ok, rows


def check_dirichlet(times, points, r: float, c_min: float) -> Tuple[bool, float, List[list]]:
    c = fit_dirichlet_constant(times, points, r)
    rows = [[t, x, y, dirichlet_interval_kernel(t, x, y, r)] for t in times for x in points for y in points]
    return bool(c >= c_min), c, rows


def check_exit_times(lambdas, radii, epsilon: float, cfg: PathSamplerConfig):
    """d = 1 exit-time Laplace transforms against ``1/cosh(r sqrt(lam))``.

    The consistency constant ``C`` of ``E_0 exp(-lam tau) <= C exp(-(1-eps) sqrt(lam) r)``
    is fitted on the estimates and must not exceed 2, the exact d = 1 constant.
    """
    rows, ok, ests = [], True, []
    for lam in lambdas:
        for r in radii:
            est = exit_time_laplace(lam, r, 1, cfg)
            exact = 1 / math.cosh(r * math.sqrt(lam))
            row_ok = (not est.bias_flag) and abs(est.mean - exact) <= max(3 * est.stderr, EXIT_REL_TOL * exact)
            ok &= row_ok
            ests.append(est)
            rows.append([lam, r, est.mean, est.stderr, exact, est.steps, str(est.bias_flag).lower(),
                         "pass" if row_ok else "FAIL"])
    c = exit_time_bound_constant(ests, epsilon)
    return bool(ok and c <= 2.0), c, rows


def cmd_kernel_checks(rc: RunConfig, w: Writer) -> Tuple[int, List[str]]:
    pot = rc.potential()
    checks = rc.data["checks"]
    results: Dict[str, bool] = {}
    summary: List[str] = []
    if checks["fk_oracle"]:
        o = _check_fk_oracle(rc, pot, results)
        if o is None:
            summary.append("fk_oracle: skipped (no closed-form kernel for this potential)")
        else:
            summary += [f"fk_oracle.mean: {o['mean']:.6g}", f"fk_oracle.stderr: {o['stderr']:.2e}",
                        f"fk_oracle.exact: {o['exact']:.6g}"]
    if checks["sandwich"]:
        summary += _check_sandwich(rc, pot, results, w)
    if checks["resolvent"]:
        r = rc.data["resolvent"]
        ok, rows = check_resolvent(r["lambdas"], r["radii"], r["dims"])
        results["resolvent"] = ok
        w.write("resolvent.csv", _csv(["d", "lambda", "r", "bessel", "quad", "rel_quad", "rel_closed",
                                       "rel_relation", "asym_dev", "verdict"], rows))
    if checks["dirichlet"]:
        dc = rc.data["dirichlet"]
        ok, c, rows = check_dirichlet(dc["times"], dc["points"], dc["r"], dc["c_min"])
        results["dirichlet"] = ok
        summary.append(f"dirichlet.c: {c:.6g}")
        w.write("dirichlet.csv", _csv(["t", "x", "y", "kernel"], rows))
    if checks["exit_time"]:
        et = rc.data["exit_time"]
        ok, c, rows = check_exit_times(et["lambdas"], et["radii"], et["epsilon"], rc.fk)
        results["exit_time"] = ok
        summary.append(f"exit_time.C: {c:.6g}")
        w.write("exit-time.csv", _csv(["lambda", "r", "mean", "stderr", "exact", "steps", "bias_flag",
                                       "verdict"], rows))
    lines = [f"{k}: {'pass' if v else 'FAIL'}" for k, v in results.items()]
    body = "\n".join([f"fk.seed: {rc.fk.seed}", f"fk.paths: {rc.fk.paths}", f"fk.steps: {rc.fk.steps}"]
                     + summary + lines) + "\n"
    w.write("kernel-checks.txt", body)
    return (EXIT_OK if all(results.values()) else EXIT_CHECK), lines


def cmd_report(rc: RunConfig, w: Writer) -> Tuple[int, List[str]]:
    cmd_solve(rc, w)
    code_e, lines_e = cmd_envelope(rc, w)
    code_k, lines_k = cmd_kernel_checks(rc, w)
    lines = lines_e + lines_k
    w.write("summary.txt", "\n".join(lines + [f"files: {len(w.files)}"]) + "\n")
    return max(code_e, code_k), lines


COMMANDS = {"solve": cmd_solve, "envelope": cmd_envelope, "kernel-checks": cmd_kernel_checks, "report": cmd_report}


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer")
    if not 0 <= v < U64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsdecay", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gsdecay {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration (defaults: harmonic oscillator in d=1)")
    p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    p.add_argument("--seed", type=_seed, help="Monte Carlo seed (overrides the config)")
    p.add_argument("--quiet", action="store_true", help="only report errors")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        rc = load_config(args.config, args.seed)
        out = Path(args.out or os.environ.get(OUT_ENV) or rc.data["out"])
        pid = rc.potential().id
        w = Writer(out, rc, pid, args.quiet)
        res = COMMANDS[args.command](rc, w)
        code, lines = res if isinstance(res, tuple) else (res, [])
    except SolverError as exc:
        print(f"solver error: {exc} {json.dumps(exc.diagnostics, sort_keys=True)}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, InputError, DomainError, SingularityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GsDecayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        for line in lines:
            print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
