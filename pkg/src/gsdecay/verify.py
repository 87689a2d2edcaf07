"""Windowed verification of the two-sided ground-state decay envelopes.

Constants in the decay estimates are existential, so they are fitted on the
tail window of a computed ground state and then checked for stability:

* lower side: ``phi0(x) >= c exp(-(1+eps) sqrt(V^delta(x)) |x|)``.  The fitted
  ``c`` must not collapse (drop by more than a factor 2) as the window's
  inner radius grows, and a constant fitted on the inner half of the window
  must hold on the outer half.
* upper side: ``phi0(x) <= c exp(-(1-eps) delta sqrt(V_delta(x)) |x|)``, with
  the mirrored conditions.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .potentials import (
    ConditionVerdict,
    PotentialSpec,
    check_condition_I,
    check_condition_II,
    lower_profile_values,
    upper_profile_values,
)
from .spectral import GridSpec, GroundState, solve_ground_state, solve_radial_ground_state

STABILITY_FACTOR = 2.0
LIM_BAND = (0.7, 1.3)
LIM_INTERCEPT_TOL = 0.15


def epsilon_prime(epsilon: float, side: str) -> float:
    """Inner tolerance used when chaining the kernel bounds into the envelopes.

    Lower side: ``(1 + eps')^(3/2) = 1 + eps``; upper side: ``(1 - eps')^2 = 1 - eps``.
    """
    if side == "lower":
        return (1 + epsilon) ** (2 / 3) - 1
    if side == "upper":
        return 1 - math.sqrt(1 - epsilon)
    raise ConfigError(f"unknown envelope side {side!r}")


@dataclass
class EnvelopeResult:
    side: str
    epsilon: float
    delta: float
    c: float
    log_c: float
    r: float
    r_outer: float
    stability: List[Tuple[float, float]]
    violations: List[Tuple[float, float]]
    n_points: int
    passed: bool
    epsilon_prime: float = 0.0

    @property
    def stable(self) -> bool:
        logs = [math.log(c) if c > 0 else -math.inf for _, c in self.stability]
        step = math.log(STABILITY_FACTOR)
        if self.side == "lower":
            return all(b >= a - step for a, b in zip(logs[:-1], logs[1:]))
        return all(b <= a + step for a, b in zip(logs[:-1], logs[1:]))


def _require_window(gs: GroundState, potential: PotentialSpec):
    if not isinstance(potential, PotentialSpec):
        raise ConfigError("envelope checks need a PotentialSpec")
    if not potential.confining:
        raise ConfigError(f"potential {potential.id} is not confining")
    window = gs.tail_window()
    if not window:
        raise ConfigError("tail window is empty; enlarge the domain or refine the grid")
    return window


def _window_points(gs: GroundState, potential: PotentialSpec):
    window = _require_window(gs, potential)
    pts = np.concatenate([w[1] for w in window])
    radii = np.concatenate([w[2] for w in window])
    vals = np.concatenate([w[3] for w in window])
    return pts, radii, vals


def _fit_envelope(side: str, epsilon: float, delta: float, radii: np.ndarray, log_ratio: np.ndarray,
                  n_radii: int = 4, rel_tol: float = 1e-9) -> EnvelopeResult:
    sense = np.min if side == "lower" else np.max
    log_c = float(sense(log_ratio))
    r_lo, r_hi = float(radii.min()), float(radii.max())
    r_mid = 0.5 * (r_lo + r_hi)
    stability = []
    for k in range(n_radii):
        r_k = r_lo + (r_mid - r_lo) * k / max(n_radii - 1, 1)
        sel = radii >= r_k
        stability.append((r_k, math.exp(float(sense(log_ratio[sel])))))
    inner = radii <= r_mid
    outer = ~inner
    violations = []
    if inner.any() and outer.any():
        c_in = float(sense(log_ratio[inner]))
        if side == "lower":
            bad = outer & (log_ratio < c_in - rel_tol)
        else:
            bad = outer & (log_ratio > c_in + rel_tol)
        violations = [(float(r), math.exp(float(v))) for r, v in zip(radii[bad], log_ratio[bad])]
    res = EnvelopeResult(side, float(epsilon), float(delta), math.exp(log_c), log_c, r_lo, r_hi, stability,
                         violations, int(len(radii)), False, epsilon_prime(epsilon, side))
    res.passed = bool(math.isfinite(log_c) and res.c > 0 and math.isfinite(res.c) and res.stable
                      and not violations)
    return res


def theorem_lower_envelope(gs: GroundState, potential: Optional[PotentialSpec] = None, epsilon: float = 0.1,
                           delta: float = 0.5) -> EnvelopeResult:
    """Fit ``c`` in ``phi0(x) >= c exp(-(1+eps) sqrt(V^delta(x)) |x|)`` on the tail window."""
    if not epsilon > 0 or not delta > 0:
        raise ConfigError("lower envelope needs epsilon > 0 and delta > 0")
    potential = potential or gs.potential
    pts, radii, vals = _window_points(gs, potential)
    w = upper_profile_values(potential, pts, delta)
    log_ratio = np.log(vals) + (1 + epsilon) * np.sqrt(w) * radii
    return _fit_envelope("lower", epsilon, delta, radii, log_ratio)


def theorem_upper_envelope(gs: GroundState, potential: Optional[PotentialSpec] = None, epsilon: float = 0.5,
                           delta: float = 0.5) -> EnvelopeResult:
    """Fit ``c`` in ``phi0(x) <= c exp(-(1-eps) delta sqrt(V_delta(x)) |x|)`` on the tail window."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ConfigError("upper envelope needs epsilon, delta in (0, 1)")
    potential = potential or gs.potential
    pts, radii, vals = _window_points(gs, potential)
    w = lower_profile_values(potential, pts, delta)
    log_ratio = np.log(vals) + (1 - epsilon) * delta * np.sqrt(w) * radii
    return _fit_envelope("upper", epsilon, delta, radii, log_ratio)


@dataclass
class DecayProfile:
    """Windowed ``-log phi0 / rho`` with a least-squares trend against ``1/|x|``."""

    radii: np.ndarray
    ratios: np.ndarray
    labels: List[str]
    slope: float
    intercept: float

    def within(self, lo: float, hi: float) -> bool:
        return bool(np.all((self.ratios >= lo) & (self.ratios <= hi)))


def default_rho(potential: PotentialSpec) -> Callable[[np.ndarray], np.ndarray]:
    """``rho(x) = sqrt(V(x)) |x|``."""
    return lambda pts: np.sqrt(potential.evaluate(pts)) * np.linalg.norm(pts, axis=-1)


def decay_ratio_profile(gs: GroundState, rho: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                        scale: float = 1.0) -> DecayProfile:
    """Profile of ``-log(scale * phi0(x)) / rho(x)`` over the tail window, per ray.

    ``rho`` maps points of shape ``(M, d)`` to positive values and defaults to
    ``sqrt(V(x)) |x|``.  The window is fixed by the unscaled ground state.
    """
    window = gs.tail_window()
    if not window:
        raise ConfigError("tail window is empty")
    if rho is None:
        rho = default_rho(gs.potential)
    radii, ratios, labels = [], [], []
    for lab, pts, r, v in window:
        rho_v = np.asarray(rho(pts), dtype=float)
        radii.append(r)
        ratios.append(-np.log(scale * v) / rho_v)
        labels += [lab] * len(r)
    radii = np.concatenate(radii)
    ratios = np.concatenate(ratios)
    order = np.argsort(radii, kind="stable")
    radii, ratios = radii[order], ratios[order]
    labels = [labels[i] for i in order]
    if len(radii) >= 2 and np.ptp(radii) > 0:
        slope, intercept = np.polyfit(1.0 / radii, ratios, 1)
    else:
        slope, intercept = 0.0, float(ratios.mean())
    return DecayProfile(radii, ratios, labels, float(slope), float(intercept))


@dataclass
class PowerSharpResult:
    beta: float
    radii: np.ndarray
    exponent_ratio: np.ndarray
    comparability: np.ndarray
    band: float
    in_regime: bool
    passed: bool
    warnings: List[str] = field(default_factory=list)


def power_sharp_check(gs: GroundState, beta: float, d: Optional[int] = None,
                      window: Optional[Tuple[float, float]] = None, band_max: float = 3.0) -> PowerSharpResult:
    """Compare ``phi0`` with ``|x|^(-beta/2 + (d-1)/2) exp(-|x|^(1+beta) / (1+beta))``.

    ``window=(r_lo, r_hi)`` selects grid radii explicitly; otherwise the tail
    window is used.  Passes when the comparability quantity stays inside a
    multiplicative band of width ``band_max``.
    """
    d = d or gs.grid.d
    warnings = []
    in_regime = beta > 1
    if not in_regime:
        warnings.append(f"beta = {beta:g} <= 1 is outside the regime of the sharp power asymptotics")
    if window is None:
        segs = [(r, v) for _, _, r, v in gs.tail_window()]
    else:
        lo, hi = window
        segs = []
        for _, _, r, v in gs.rays():
            keep = (r >= lo) & (r <= hi) & (v > 0)
            if keep.any():
                segs.append((r[keep], v[keep]))
    if not segs:
        raise ConfigError("no grid points in the power-sharp window")
    r = np.concatenate([s[0] for s in segs])
    v = np.concatenate([s[1] for s in segs])
    order = np.argsort(r, kind="stable")
    r, v = r[order], v[order]
    expo = r ** (1 + beta) / (1 + beta)
    log_q = np.log(v) + (beta / 2 - (d - 1) / 2) * np.log(r) + expo
    band = float(math.exp(np.ptp(log_q)))
    passed = band <= band_max
    return PowerSharpResult(float(beta), r, -np.log(v) / expo, np.exp(log_q - log_q.max()), band, in_regime,
                            bool(passed), warnings)


# -- orchestration ----------------------------------------------------------

@dataclass
class VerificationConfig:
    grid: GridSpec
    tol: float = 1e-8
    max_iter: int = 500
    envelopes: Sequence[Tuple[str, float, float]] = tuple(
        (side, e, dl) for side in ("lower", "upper") for e in (0.1, 0.5) for dl in (0.1, 0.5))
    condition_I_eps: Sequence[float] = (0.1, 0.5)
    condition_II_pairs: Sequence[Tuple[float, float]] = ((0.1, 0.9), (0.5, 0.5))
    power_window: Optional[Tuple[float, float]] = None


@dataclass
class VerificationReport:
    potential_id: str
    grid: Dict[str, object]
    lambda0: float
    lambda1: Optional[float]
    residual: float
    envelopes: List[EnvelopeResult]
    ratio_profile: DecayProfile
    conditions: Dict[str, ConditionVerdict]
    lim_check: Optional[Dict[str, object]]
    power_sharp: Optional[PowerSharpResult]
    tolerances: Dict[str, float]
    notes: List[str]
    passed: bool

    def summary_lines(self) -> List[str]:
        lines = [
            f"potential: {self.potential_id}",
            *(f"grid.{k}: {v}" for k, v in self.grid.items()),
            f"lambda0: {self.lambda0:.12g}",
            f"lambda1: {self.lambda1:.12g}" if self.lambda1 is not None else "lambda1: n/a",
            f"residual: {self.residual:.3e}",
        ]
        for e in self.envelopes:
            key = f"envelope.{e.side}.eps{e.epsilon:g}.delta{e.delta:g}"
            lines += [
                f"{key}.c: {e.c:.6g}",
                f"{key}.r: {e.r:.6g}",
                f"{key}.eps_prime: {e.epsilon_prime:.6g}",
                f"{key}.violations: {len(e.violations)}",
                f"{key}.stable: {str(e.stable).lower()}",
                f"{key}.pass: {str(e.passed).lower()}",
            ]
        p = self.ratio_profile
        lines += [f"ratio.min: {p.ratios.min():.6g}", f"ratio.max: {p.ratios.max():.6g}",
                  f"ratio.slope: {p.slope:.6g}", f"ratio.intercept: {p.intercept:.6g}"]
        for k, v in self.conditions.items():
            lines.append(f"condition.{k}: {'holds' if v.holds else 'fails'}")
            if v.note:
                lines.append(f"condition.{k}.note: {v.note}")
        if self.lim_check is not None:
            for k, v in self.lim_check.items():
                lines.append(f"lim.{k}: {v}")
        if self.power_sharp is not None:
            ps = self.power_sharp
            lines += [f"power_sharp.band: {ps.band:.6g}", f"power_sharp.in_regime: {str(ps.in_regime).lower()}",
                      f"power_sharp.pass: {str(ps.passed).lower()}"]
        lines += [f"tolerance.{k}: {v:g}" for k, v in self.tolerances.items()]
        lines += [f"note: {n}" for n in self.notes]
        lines.append(f"pass: {str(self.passed).lower()}")
        return lines

    def to_text(self) -> str:
        return "\n".join(self.summary_lines()) + "\n"

    def profile_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ray", "radius", "ratio"])
        p = self.ratio_profile
        for lab, r, q in zip(p.labels, p.radii, p.ratios):
            w.writerow([lab, f"{r:.17g}", f"{q:.17g}"])
        return buf.getvalue()

    def envelope_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["side", "epsilon", "delta", "epsilon_prime", "inner_radius", "c_at_inner_radius"])
        for e in self.envelopes:
            for r, c in e.stability:
                w.writerow([e.side, f"{e.epsilon:g}", f"{e.delta:g}", f"{e.epsilon_prime:.17g}",
                            f"{r:.17g}", f"{c:.17g}"])
        return buf.getvalue()


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _conditions(potential: PotentialSpec, cfg: VerificationConfig) -> Dict[str, ConditionVerdict]:
    prof = potential.profile if potential.radial else None
    if prof is None:
        return {}
    out = {}
    for e in cfg.condition_I_eps:
        out[f"I.eps{e:g}"] = check_condition_I(prof, e)
    for e, dl in cfg.condition_II_pairs:
        out[f"II.eps{e:g}.delta{dl:g}"] = check_condition_II(prof, e, dl)
    return out


def run_verification(potential: PotentialSpec, cfg: VerificationConfig,
                     gs: Optional[GroundState] = None) -> VerificationReport:
    """Solve for the ground state and run every applicable envelope and decay check."""
    if not potential.confining:
        raise ConfigError(f"potential {potential.id} is not confining")
    if gs is None:
        if cfg.grid.radial:
            gs = solve_radial_ground_state(potential, potential.dimension, cfg.grid, cfg.tol, cfg.max_iter)
        else:
            gs = solve_ground_state(cfg.grid, potential, cfg.tol, cfg.max_iter)
    envelopes = []
    for side, eps, dl in cfg.envelopes:
        fn = theorem_lower_envelope if side == "lower" else theorem_upper_envelope
        envelopes.append(fn(gs, potential, eps, dl))
    profile = decay_ratio_profile(gs)
    conditions = _conditions(potential, cfg)
    notes = list(gs.warnings)
    lim = None
    if conditions:
        both = all(v.holds for v in conditions.values())
        if both:
            lo, hi = LIM_BAND
            lim = {
                "band": f"[{lo:g}, {hi:g}]",
                "in_band": str(profile.within(lo, hi)).lower(),
                "intercept_ok": str(abs(profile.intercept - 1) <= LIM_INTERCEPT_TOL).lower(),
            }
            notes.append("the ratio band for the log-limit is an artifact convention, not a proven rate")
        notes += [v.note for v in conditions.values() if v.note]
    power = None
    if potential.kind == "power":
        beta = float(potential.params["beta"])
        power = power_sharp_check(gs, beta, potential.dimension, cfg.power_window)
        notes += power.warnings
    passed = all(e.passed for e in envelopes) and (power is None or not power.in_regime or power.passed)
    grid = {"d": cfg.grid.d, "L": cfg.grid.L, "n": cfg.grid.n, "radial": str(cfg.grid.radial).lower()}
    tolerances = {"solver": cfg.tol, "tail_floor": 1e-12, "tail_cap": 1e-3, "stability_factor": STABILITY_FACTOR}
    return VerificationReport(potential.id, grid, gs.lambda0, gs.lambda1, gs.residual, envelopes, profile,
                              conditions, lim, power, tolerances, notes, bool(passed))
