"""Monte Carlo for the Schrodinger heat kernel and exit-time Laplace transforms.

The driving process has generator ``Delta``: per-coordinate variance ``2 s``
at time ``s`` and transition density ``g_t``.  The heat kernel is estimated as

    u_t(x, y) = g_t(x, y) * E[ exp(-int_0^t V(Z_s) ds) ]

over bridges ``Z`` pinned at ``x`` (time 0) and ``y`` (time t); the time
integral uses the midpoint rule on ``m`` steps and the bridge is sampled
exactly at the midpoints.

Random streams are derived from ``(seed, batch index)`` and batches are
reduced in a fixed order, so identical configs give bit-identical output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InputError
from .kernels import gauss_kernel, principal_dirichlet_eigenvalue
from .potentials import PotentialSpec, lower_profile_values, upper_profile_values


@dataclass(frozen=True)
class PathSamplerConfig:
    paths: int = 10_000
    steps: int = 200
    seed: int = 0
    scheme: str = "bridge"
    antithetic: bool = False
    batch: int = 10_000

    def __post_init__(self):
        if self.paths < 100:
            raise InputError("need at least 100 paths")
        if self.steps < 10:
            raise InputError("need at least 10 time steps")
        if self.scheme not in ("bridge", "forward"):
            raise InputError(f"unknown path scheme {self.scheme!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be an unsigned 64-bit integer")
        if self.antithetic and self.paths % 2:
            raise InputError("antithetic sampling needs an even path count")


@dataclass
class KernelEstimate:
    t: float
    x: np.ndarray
    y: np.ndarray
    mean: float
    stderr: float
    n: int
    steps: int
    free: float
    warnings: List[str] = field(default_factory=list)

    @property
    def ratio_to_free(self) -> float:
        return self.mean / self.free


def _point(p, d: Optional[int] = None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if d is not None and p.shape != (d,):
        raise InputError(f"point has dimension {p.shape[-1]}, expected {d}")
    return p


def _rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(batch)]))


def _batches(cfg: PathSamplerConfig):
    """Yield ``(batch index, number of independent samples)``; pairs count once."""
    total = cfg.paths // 2 if cfg.antithetic else cfg.paths
    size = max(1, cfg.batch // 2 if cfg.antithetic else cfg.batch)
    b = 0
    done = 0
    while done < total:
        k = min(size, total - done)
        yield b, k
        done += k
        b += 1


def _mean_stderr(values: np.ndarray) -> Tuple[float, float]:
    n = len(values)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return mean, se


def _bridge_weights(potential: PotentialSpec, t: float, x: np.ndarray, y: np.ndarray, m: int,
                    rng: np.random.Generator, k: int, antithetic: bool) -> np.ndarray:
    d = len(x)
    dt = t / m
    times = np.concatenate([(np.arange(m) + 0.5) * dt, [t]])
    steps = np.diff(np.concatenate([[0.0], times]))
    inc = rng.standard_normal((k, m + 1, d)) * np.sqrt(2 * steps)[None, :, None]
    w = np.cumsum(inc, axis=1)
    frac = (times[:-1] / t)[None, :, None]
    fluct = w[:, :-1, :] - frac * w[:, -1:, :]
    drift = x[None, None, :] + frac * (y - x)[None, None, :]
    out = np.exp(-dt * np.sum(potential.evaluate(drift + fluct), axis=1))
    if antithetic:
        anti = np.exp(-dt * np.sum(potential.evaluate(drift - fluct), axis=1))
        out = 0.5 * (out + anti)
    return out


def _forward_weights(potential: PotentialSpec, t: float, x: np.ndarray, y: np.ndarray, m: int,
                     rng: np.random.Generator, k: int, antithetic: bool) -> np.ndarray:
    # E_x[exp(-int V) g_dt(X_{t-dt}, y)] / g_t(x, y); trapezoid rule on the path grid
    d = len(x)
    dt = t / m
    inc = rng.standard_normal((k, m - 1, d)) * math.sqrt(2 * dt)

    def weights(sign):
        path = x[None, None, :] + sign * np.cumsum(inc, axis=1)
        full = np.concatenate([np.broadcast_to(x, (k, 1, d)), path, np.broadcast_to(y, (k, 1, d))], axis=1)
        v = potential.evaluate(full)
        integral = dt * (np.sum(v, axis=1) - 0.5 * (v[:, 0] + v[:, -1]))
        return np.exp(-integral) * gauss_kernel(dt, path[:, -1, :], y, d)

    out = weights(1.0)
    if antithetic:
        out = 0.5 * (out + weights(-1.0))
    return out / gauss_kernel(t, x, y, d)


def _fk_once(potential: PotentialSpec, t: float, x: np.ndarray, y: np.ndarray, cfg: PathSamplerConfig):
    sampler = _bridge_weights if cfg.scheme == "bridge" else _forward_weights
    parts = [sampler(potential, t, x, y, cfg.steps, _rng(cfg.seed, b), k, cfg.antithetic)
             for b, k in _batches(cfg)]
    return _mean_stderr(np.concatenate(parts))


def fk_kernel_estimate(potential: PotentialSpec, t: float, x, y, cfg: PathSamplerConfig,
                       refine: bool = False, max_doublings: int = 4) -> KernelEstimate:
    """Feynman-Kac estimate of the Schrodinger heat kernel ``u_t(x, y)``.

    With ``refine=True`` the step count is doubled until the estimate moves
    by less than one standard error.
    """
    if not t > 0:
        raise InputError("time must be positive")
    d = potential.dimension
    x, y = _point(x, d), _point(y, d)
    free = gauss_kernel(t, x, y, d)
    mean, se = _fk_once(potential, t, x, y, cfg)
    steps = cfg.steps
    warnings = []
    if refine:
        for _ in range(max_doublings):
            cfg = replace(cfg, steps=cfg.steps * 2)
            m2, se2 = _fk_once(potential, t, x, y, cfg)
            shift = abs(m2 - mean)
            mean, se, steps = m2, se2, cfg.steps
            if shift < se2:
                break
        else:
            warnings.append("step refinement did not settle within one standard error")
    if mean > 0 and se / mean > 0.5:
        warnings.append("low precision: stderr/mean > 0.5")
    n = cfg.paths // 2 if cfg.antithetic else cfg.paths
    return KernelEstimate(float(t), x, y, mean * free, se * free, n, steps, free, warnings)


def fk_semigroup_apply(potential: PotentialSpec, f: Callable[[np.ndarray], np.ndarray], t: float, x,
                       cfg: PathSamplerConfig) -> Tuple[float, float]:
    """Monte Carlo ``(U_t f)(x) = E_x[exp(-int_0^t V(X_s) ds) f(X_t)]``; returns ``(mean, stderr)``.

    ``f`` maps points of shape ``(k, d)`` to values; the time integral uses
    the midpoint rule and the path is sampled exactly at the midpoints and at t.
    """
    if not t > 0:
        raise InputError("time must be positive")
    d = potential.dimension
    x = _point(x, d)
    m = cfg.steps
    dt = t / m
    times = np.concatenate([(np.arange(m) + 0.5) * dt, [t]])
    steps = np.sqrt(2 * np.diff(np.concatenate([[0.0], times])))
    parts = []
    for b, k in _batches(cfg):
        inc = _rng(cfg.seed, b).standard_normal((k, m + 1, d)) * steps[None, :, None]
        signs = (1.0, -1.0) if cfg.antithetic else (1.0,)
        vals = 0.0
        for s in signs:
            path = x + s * np.cumsum(inc, axis=1)
            vals = vals + np.exp(-dt * np.sum(potential.evaluate(path[:, :-1]), axis=1)) * f(path[:, -1])
        parts.append(vals / len(signs))
    return _mean_stderr(np.concatenate(parts))


def mehler_kernel(t: float, x, y) -> float:
    """Exact heat kernel of ``-Delta + |x|^2`` (product of 1-d Mehler kernels)."""
    x, y = _point(x), _point(y)
    s, c = math.sinh(2 * t), math.cosh(2 * t)
    val = 1.0
    for a, b in zip(x, y):
        val *= math.exp(-((a * a + b * b) * c - 2 * a * b) / (2 * s)) / math.sqrt(2 * math.pi * s)
    return val


# -- exit times -------------------------------------------------------------

@dataclass
class ExitTimeEstimate:
    lam: float
    r: float
    d: int
    mean: float
    stderr: float
    steps: int
    bias_flag: bool
    coarse_mean: float


def _crossing_probability(a: np.ndarray, b: np.ndarray, r: float, dt: float) -> np.ndarray:
    """Probability that a bridge between interior points a, b left the ball in one step.

    One dimension uses both interval ends; higher dimensions use the tangent
    half-space at the closer boundary point (variance 2 dt per coordinate).
    """
    if a.shape[-1] == 1:
        a1, b1 = a[:, 0], b[:, 0]
        up = np.exp(-np.maximum((r - a1) * (r - b1), 0) / dt)
        lo = np.exp(-np.maximum((r + a1) * (r + b1), 0) / dt)
        return 1 - (1 - up) * (1 - lo)
    da = r - np.linalg.norm(a, axis=1)
    db = r - np.linalg.norm(b, axis=1)
    return np.exp(-np.maximum(da * db, 0) / dt)


def _exit_batch(lam: float, r: float, d: int, dt: float, rng: np.random.Generator, k: int,
                antithetic: bool, cutoff: float = 1e-16, max_steps: int = 10_000_000) -> np.ndarray:
    signs = (1.0, -1.0) if antithetic else (1.0,)
    results = [np.zeros(k) for _ in signs]
    pos = [np.zeros((k, d)) for _ in signs]
    weight = [np.ones(k) for _ in signs]
    alive = [np.arange(k) for _ in signs]
    sd = math.sqrt(2 * dt)
    step = 0
    while any(len(a) for a in alive) and step < max_steps:
        step += 1
        t_mid = (step - 0.5) * dt
        disc = math.exp(-lam * t_mid)
        if antithetic:
            noise = rng.standard_normal((k, d)) * sd
        for j, sign in enumerate(signs):
            idx = alive[j]
            if not len(idx):
                continue
            a = pos[j][idx]
            step_noise = noise[idx] if antithetic else rng.standard_normal((len(idx), d)) * sd
            b = a + sign * step_noise
            w = weight[j][idx]
            out = np.linalg.norm(b, axis=1) >= r
            p = np.where(out, 1.0, _crossing_probability(a, b, r, dt))
            results[j][idx] += w * p * disc
            w = w * (1 - p)
            weight[j][idx] = w
            pos[j][idx] = b
            keep = (~out) & (w * disc > cutoff)
            alive[j] = idx[keep]
    return np.mean(results, axis=0)


def _exit_once(lam, r, d, cfg: PathSamplerConfig, steps: int):
    dt = r * r / steps
    parts = [_exit_batch(lam, r, d, dt, _rng(cfg.seed, b), k, cfg.antithetic) for b, k in _batches(cfg)]
    return _mean_stderr(np.concatenate(parts))


def exit_time_laplace(lam: float, r: float, d: int, cfg: PathSamplerConfig, refine: bool = True,
                      max_doublings: int = 4) -> ExitTimeEstimate:
    """Monte Carlo ``E_0[exp(-lam tau_r)]`` for the ball of radius ``r``.

    Each step has Gaussian increments of variance ``2 dt`` with
    ``dt = r^2 / cfg.steps``, and adds the probability that the bridge
    between consecutive positions crossed the boundary.  The estimate is
    repeated with half the step; ``bias_flag`` is set when the two differ by
    more than two standard errors.  With ``refine=True`` the step keeps
    halving until the flag clears.
    """
    if not lam >= 0 or not r > 0:
        raise InputError("lambda must be nonnegative and r positive")
    steps = cfg.steps
    mean, se = _exit_once(lam, r, d, cfg, steps)
    flag = True
    coarse = mean
    for _ in range(max_doublings if refine else 1):
        fine, se_f = _exit_once(lam, r, d, cfg, steps * 2)
        flag = abs(fine - mean) > 2 * max(se, se_f)
        coarse = mean
        mean, se, steps = fine, se_f, steps * 2
        if not flag:
            break
    return ExitTimeEstimate(float(lam), float(r), int(d), mean, se, steps, bool(flag), coarse)


def exit_time_bound_constant(estimates: Iterable[ExitTimeEstimate], epsilon: float) -> float:
    """Smallest ``C`` with ``E_0[exp(-lam tau_r)] <= C exp(-(1-eps) sqrt(lam) r)`` on the estimates."""
    return max(e.mean * math.exp((1 - epsilon) * math.sqrt(e.lam) * e.r) for e in estimates)


# -- kernel sandwich checks -------------------------------------------------

Sample = Tuple[Sequence[float], Sequence[float], float]
KernelFn = Callable[[float, np.ndarray, np.ndarray], float]


@dataclass
class SandwichCheckResult:
    side: str
    epsilon: float
    delta: float
    c: float
    rows: List[dict]
    rejected: List[Tuple[Sample, str]]
    violations: List[dict]
    stderr_budget: float
    passed: bool
    a: Optional[float] = None
    b: Optional[float] = None
    rho1: Optional[float] = None


def lower_rho1(potential: PotentialSpec, epsilon: float, delta: float, r_max: float = 1e3) -> float:
    """Smallest radius ``> 2`` beyond which ``mu0/(R+delta)^2 + 1/delta^2 <= eps V^delta`` along e1."""
    mu0 = principal_dirichlet_eigenvalue(potential.dimension)
    radii = 2.0 + np.geomspace(1e-3, r_max, 2000)
    e1 = np.zeros(potential.dimension)
    e1[0] = 1.0
    vs = upper_profile_values(potential, radii[:, None] * e1, delta)
    ok = mu0 / (radii + delta) ** 2 + 1 / delta ** 2 <= epsilon * vs
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return 2.0
    if bad[-1] == len(radii) - 1:
        return math.inf
    return float(radii[bad[-1] + 1])


def _estimate(potential, t, x, y, cfg, kernel, refine):
    if kernel is not None:
        return float(kernel(t, x, y)), 0.0
    est = fk_kernel_estimate(potential, t, x, y, cfg, refine=refine)
    return est.mean, est.stderr


def _refined(samples: List[Sample]) -> List[Sample]:
    groups = {}
    for x, y, t in samples:
        key = (tuple(np.atleast_1d(x)), tuple(np.atleast_1d(y)))
        groups.setdefault(key, []).append(float(t))
    out = []
    for (x, y), ts in groups.items():
        ts = sorted(set(ts))
        for a, b in zip(ts[:-1], ts[1:]):
            out.append((np.array(x), np.array(y), math.sqrt(a * b)))
    return out


def check_lower_sandwich(potential: PotentialSpec, epsilon: float, delta: float, samples: Sequence[Sample],
                         cfg: Optional[PathSamplerConfig] = None, kernel: Optional[KernelFn] = None,
                         enforce_preconditions: bool = True, refine: bool = True,
                         mc_refine: bool = False) -> SandwichCheckResult:
    """Fit ``c1`` in ``u_t(x,y) >= c1 exp(-(1+eps) V^delta(x) t) g_t(x,y)``.

    Samples need ``|y| < 1`` and ``x`` beyond the radius where
    ``mu0/(|x|+delta)^2 + 1/delta^2 <= eps V^delta(x)``.  ``c1`` is the
    smallest kernel/envelope ratio; a refined t-scan (geometric midpoints) must
    not fall below ``c1/2`` by more than three standard errors.
    """
    if not epsilon > 0 or not delta > 0:
        raise InputError("epsilon and delta must be positive")
    cfg = cfg or PathSamplerConfig()
    d = potential.dimension
    mu0 = principal_dirichlet_eigenvalue(d)
    rho1 = lower_rho1(potential, epsilon, delta) if enforce_preconditions else None
    accepted, rejected = [], []
    for s in samples:
        x, y, t = _point(s[0], d), _point(s[1], d), float(s[2])
        reason = None
        if not t > 0:
            reason = "t must be positive"
        elif np.linalg.norm(y) >= 1:
            reason = "y must lie in the unit ball"
        elif enforce_preconditions:
            vd = float(upper_profile_values(potential, x, delta)[0])
            nx = float(np.linalg.norm(x))
            if nx <= 2 or mu0 / (nx + delta) ** 2 + 1 / delta ** 2 > epsilon * vd:
                reason = f"|x| = {nx:g} is inside the admissible radius (rho1 = {rho1:g})"
        if reason:
            rejected.append((s, reason))
        else:
            accepted.append((x, y, t))
    if not accepted:
        raise ConfigError("no admissible samples for the lower sandwich check")

    def rows_for(pts):
        rows = []
        for x, y, t in pts:
            u, se = _estimate(potential, t, x, y, cfg, kernel, mc_refine)
            vd = float(upper_profile_values(potential, x, delta)[0])
            env = math.exp(-(1 + epsilon) * vd * t) * gauss_kernel(t, x, y, d)
            rows.append({"x": x.tolist(), "y": y.tolist(), "t": t, "u": u, "stderr": se, "profile": vd,
                         "envelope": env, "ratio": u / env, "ratio_stderr": se / env})
        return rows

    rows = rows_for(accepted)
    c1 = min(r["ratio"] for r in rows)
    extra = rows_for(_refined(accepted)) if refine else []
    violations = [r for r in rows + extra if r["ratio"] + 3 * r["ratio_stderr"] < 0.5 * c1]
    worst = min(rows, key=lambda r: r["ratio"])
    positive = worst["ratio"] - 3 * worst["ratio_stderr"] > 0
    budget = max((r["ratio_stderr"] / r["ratio"] for r in rows if r["ratio"] > 0), default=0.0)
    return SandwichCheckResult("lower", float(epsilon), float(delta), c1, rows + extra, rejected, violations,
                               budget, bool(c1 > 0 and positive and not violations), rho1=rho1)


def default_holder_exponent(epsilon: float) -> float:
    """``b = 2`` when ``(1-eps) sqrt(2) < 1``, else the midpoint of the admissible range."""
    if (1 - epsilon) * math.sqrt(2) < 1:
        return 2.0
    return 0.5 * (1 + 1 / (1 - epsilon) ** 2)


def check_upper_sandwich(potential: PotentialSpec, epsilon: float, delta: float, samples: Sequence[Sample],
                         cfg: Optional[PathSamplerConfig] = None, kernel: Optional[KernelFn] = None,
                         b: Optional[float] = None, refine: bool = True,
                         mc_refine: bool = False) -> SandwichCheckResult:
    """Fit ``c`` in ``u_t <= c exp(-(V_delta t / a) ^ ((1-eps) delta sqrt(V_delta) |x|)) g_{at}``.

    ``a = b/(b-1)`` for the Holder exponent ``b``, which must satisfy
    ``(1-eps) sqrt(b) < 1``.  ``c`` is the largest kernel/envelope ratio; a
    refined t-scan must not exceed ``2c`` by more than three standard errors.
    """
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise InputError("epsilon and delta must lie in (0, 1)")
    b = default_holder_exponent(epsilon) if b is None else float(b)
    if not (b > 1 and (1 - epsilon) * math.sqrt(b) < 1):
        raise ConfigError(f"Holder exponent b = {b:g} violates (1-eps) sqrt(b) < 1")
    a = b / (b - 1)
    cfg = cfg or PathSamplerConfig()
    d = potential.dimension
    accepted, rejected = [], []
    for s in samples:
        x, y, t = _point(s[0], d), _point(s[1], d), float(s[2])
        if not t > 0:
            rejected.append((s, "t must be positive"))
        elif np.linalg.norm(x) == 0:
            rejected.append((s, "x must be nonzero"))
        else:
            accepted.append((x, y, t))
    if not accepted:
        raise ConfigError("no admissible samples for the upper sandwich check")

    def rows_for(pts):
        rows = []
        for x, y, t in pts:
            u, se = _estimate(potential, t, x, y, cfg, kernel, mc_refine)
            vd = float(lower_profile_values(potential, x, delta)[0])
            expo = min(vd * t / a, (1 - epsilon) * delta * math.sqrt(vd) * float(np.linalg.norm(x)))
            env = math.exp(-expo) * gauss_kernel(a * t, x, y, d)
            rows.append({"x": x.tolist(), "y": y.tolist(), "t": t, "u": u, "stderr": se, "profile": vd,
                         "envelope": env, "ratio": u / env, "ratio_stderr": se / env})
        return rows

    rows = rows_for(accepted)
    c = max(r["ratio"] for r in rows)
    extra = rows_for(_refined(accepted)) if refine else []
    violations = [r for r in rows + extra if r["ratio"] - 3 * r["ratio_stderr"] > 2 * c]
    budget = max((r["ratio_stderr"] / r["ratio"] for r in rows if r["ratio"] > 0), default=0.0)
    return SandwichCheckResult("upper", float(epsilon), float(delta), c, rows + extra, rejected, violations,
                               budget, bool(math.isfinite(c) and not violations), a=a, b=b)
