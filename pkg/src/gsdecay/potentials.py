"""Catalog of confining potentials, ball profiles and slow-variation checks.

A potential is described by a :class:`PotentialSpec`.  Radial catalog kinds
carry a nondecreasing radial profile ``g`` so that ``V(x) = g(|x|)``; for those
the ball profiles

    V^delta(x) = sup { V(z) : |z| <= |x| + delta }
    V_delta(x) = inf { V(z) : |z - x| < delta |x| }

are evaluated exactly.  Everything else goes through a lattice scan of the
ball followed by local refinement around the best sample.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, InputError

KINDS = (
    "power",
    "affine-power",
    "log",
    "anisotropic-quadratic",
    "constant-plus",
    "exponential",
    "table",
)


@dataclass(frozen=True)
class RadialProfile:
    """Nondecreasing map ``g: [0, inf) -> [0, inf)`` with an optional log form.

    ``log_g`` lets the condition checkers scan windows where ``g`` itself
    overflows (exponential growth).
    """

    g: Callable[[np.ndarray], np.ndarray]
    log_g: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "g"

    def __call__(self, r):
        return self.g(np.asarray(r, dtype=float))

    def log(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.log_g is not None:
                return self.log_g(r)
            return np.log(self.g(r))


def as_profile(g) -> RadialProfile:
    if isinstance(g, RadialProfile):
        return g
    if not callable(g):
        raise InputError("radial profile must be callable")
    return RadialProfile(g=lambda r: np.asarray(g(r), dtype=float), name=getattr(g, "__name__", "g"))


@dataclass(frozen=True)
class TableData:
    """Potential samples on a rectilinear grid (one 1-d axis per dimension)."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        if len(self.axes) != self.values.ndim:
            raise InputError("table axes do not match value array rank")
        for ax, size in zip(self.axes, self.values.shape):
            if len(ax) != size or len(ax) < 2:
                raise InputError("table axis length mismatch")
            if np.any(np.diff(ax) <= 0):
                raise InputError("table axes must be strictly increasing")
        finite = self.values[np.isfinite(self.values)]
        if np.any(finite < 0):
            raise InputError("table potential must be nonnegative")

    @property
    def lower(self) -> np.ndarray:
        return np.array([ax[0] for ax in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([ax[-1] for ax in self.axes])


@dataclass(frozen=True)
class PotentialSpec:
    """A nonnegative, locally bounded potential on R^d.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    params : mapping
        Kind-specific parameters (``beta``; ``a, alpha, b``; ``weights``;
        ``c``; ``rate``).
    dimension : int
        Space dimension ``d``.
    table : TableData, optional
        Samples for ``kind="table"``; evaluated by multilinear interpolation
        and rejected outside the bounding box.
    """

    kind: str
    params: Mapping[str, object] = field(default_factory=dict)
    dimension: int = 1
    table: Optional[TableData] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown potential kind {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InputError("dimension must be a positive integer")
        p = self.params
        if self.kind == "power" and not float(p.get("beta", 0)) > 0:
            raise InputError("power potential needs beta > 0")
        if self.kind == "affine-power":
            if not (float(p.get("a", 0)) > 0 and float(p.get("alpha", 0)) > 0 and float(p.get("b", -1)) >= 0):
                raise InputError("affine-power needs a > 0, alpha > 0, b >= 0")
        if self.kind == "anisotropic-quadratic":
            w = np.asarray(p.get("weights", ()), dtype=float)
            if w.shape != (self.dimension,) or np.any(w < 0):
                raise InputError("anisotropic-quadratic needs one nonnegative weight per dimension")
        if self.kind == "constant-plus" and not float(p.get("c", -1)) >= 0:
            raise InputError("constant potential needs c >= 0")
        if self.kind == "exponential" and not float(p.get("rate", 1.0)) > 0:
            raise InputError("exponential potential needs rate > 0")
        if self.kind == "table":
            if self.table is None:
                raise InputError("table potential needs table data")
            if self.table.values.ndim != self.dimension:
                raise InputError("table rank does not match dimension")

    # -- identity -------------------------------------------------------
    @property
    def id(self) -> str:
        if self.kind == "table":
            return f"table-d{self.dimension}"
        items = []
        for k in sorted(self.params):
            v = self.params[k]
            if isinstance(v, (list, tuple, np.ndarray)):
                v = "x".join(f"{float(e):g}" for e in v)
            else:
                v = f"{float(v):g}"
            items.append(f"{k}{v}")
        return "-".join([self.kind, *items, f"d{self.dimension}"])

    @property
    def radial(self) -> bool:
        if self.kind == "anisotropic-quadratic":
            w = np.asarray(self.params["weights"], dtype=float)
            return bool(np.all(w == w[0]))
        return self.kind != "table"

    @property
    def confining(self) -> bool:
        if self.kind == "constant-plus":
            return False
        if self.kind == "anisotropic-quadratic":
            return bool(np.all(np.asarray(self.params["weights"], dtype=float) > 0))
        if self.kind == "table":
            return bool(self.params.get("confining", False))
        return True

    @property
    def profile(self) -> Optional[RadialProfile]:
        """Radial profile ``g`` with ``V(x) = g(|x|)``, or None."""
        p = self.params
        if self.kind == "power":
            beta = float(p["beta"])
            return RadialProfile(
                g=lambda r: np.abs(r) ** (2 * beta),
                log_g=lambda r: 2 * beta * np.log(np.abs(r)),
                name=f"r^{2 * beta:g}",
            )
        if self.kind == "affine-power":
            a, alpha, b = float(p["a"]), float(p["alpha"]), float(p["b"])
            return RadialProfile(g=lambda r: a * np.abs(r) ** alpha + b, name=f"{a:g}r^{alpha:g}+{b:g}")
        if self.kind == "log":
            return RadialProfile(
                g=lambda r: np.log(math.e + np.square(r)),
                log_g=lambda r: np.log(np.log(math.e + np.square(r))),
                name="log(e+r^2)",
            )
        if self.kind == "constant-plus":
            c = float(p["c"])
            return RadialProfile(g=lambda r: np.full(np.shape(r), c), name=f"{c:g}")
        if self.kind == "exponential":
            k = float(p.get("rate", 1.0))
            return RadialProfile(g=lambda r: np.exp(k * np.abs(r)), log_g=lambda r: k * np.abs(r), name=f"exp({k:g}r)")
        if self.kind == "anisotropic-quadratic" and self.radial:
            w0 = float(np.asarray(p["weights"], dtype=float)[0])
            return RadialProfile(g=lambda r: w0 * np.square(r), name=f"{w0:g}r^2")
        return None

    # -- evaluation -----------------------------------------------------
    def __call__(self, x):
        return eval_potential(self, x)

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate on an array of shape ``(..., d)`` without shape checks."""
        if self.kind == "anisotropic-quadratic":
            w = np.asarray(self.params["weights"], dtype=float)
            return np.square(pts) @ w
        if self.kind == "table":
            t = self.table
            flat = pts.reshape(-1, self.dimension)
            if np.any(flat < t.lower - 1e-12) or np.any(flat > t.upper + 1e-12):
                raise DomainError("point outside the table bounding box")
            interp = _table_interpolator(t)
            return interp(np.clip(flat, t.lower, t.upper)).reshape(pts.shape[:-1])
        r = np.sqrt(np.sum(np.square(pts), axis=-1))
        return self.profile(r)


_INTERP_CACHE: dict = {}


def _table_interpolator(t: TableData):
    key = id(t)
    hit = _INTERP_CACHE.get(key)
    if hit is None or hit[0] is not t:
        hit = (t, RegularGridInterpolator(t.axes, t.values, method="linear"))
        _INTERP_CACHE[key] = hit
    return hit[1]


def _as_points(spec: PotentialSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = spec.dimension
    if x.ndim == 0:
        if d != 1:
            raise InputError(f"scalar point given for a {d}-dimensional potential")
        return x.reshape(1)
    if x.shape[-1] != d:
        raise InputError(f"point has dimension {x.shape[-1]}, potential has dimension {d}")
    return x


def eval_potential(spec: PotentialSpec, x):
    """Return ``V(x)``; ``x`` is a point of shape ``(d,)`` or a batch ``(..., d)``.

    >>> eval_potential(power(2.0), 2.0)
    16.0
    """
    scalar = np.ndim(x) <= 1
    pts = _as_points(spec, x)
    v = spec.evaluate(pts)
    return float(v) if scalar else v


# -- catalog constructors ---------------------------------------------------

def power(beta: float, d: int = 1) -> PotentialSpec:
    """``V(x) = |x|^(2 beta)``."""
    return PotentialSpec("power", {"beta": float(beta)}, d)


def affine_power(a: float, alpha: float, b: float, d: int = 1) -> PotentialSpec:
    """``V(x) = a |x|^alpha + b``."""
    return PotentialSpec("affine-power", {"a": float(a), "alpha": float(alpha), "b": float(b)}, d)


def log_potential(d: int = 1) -> PotentialSpec:
    """Slowly varying ``V(x) = log(e + |x|^2)``."""
    return PotentialSpec("log", {}, d)


def anisotropic_quadratic(weights: Sequence[float]) -> PotentialSpec:
    """``V(z) = sum_i w_i z_i^2``."""
    w = [float(v) for v in weights]
    return PotentialSpec("anisotropic-quadratic", {"weights": tuple(w)}, len(w))


def constant(c: float, d: int = 1) -> PotentialSpec:
    return PotentialSpec("constant-plus", {"c": float(c)}, d)


def exponential(rate: float = 1.0, d: int = 1) -> PotentialSpec:
    """``V(x) = exp(rate |x|)``; fails the slow-variation condition (I)."""
    return PotentialSpec("exponential", {"rate": float(rate)}, d)


def from_table(axes: Sequence[Sequence[float]], values, confining: bool = False) -> PotentialSpec:
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    data = TableData(axes, np.asarray(values, dtype=float))
    return PotentialSpec("table", {"confining": bool(confining)}, len(axes), data)


def load_table_csv(path, confining: bool = False) -> PotentialSpec:
    """Read a custom potential from CSV rows ``x1, ..., xd, value``.

    Rows must cover a full rectilinear grid; a non-numeric first row is
    treated as a header.
    """
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if i == 0:
                    continue
                raise InputError(f"non-numeric entry in table row {i + 1}")
    if not rows:
        raise InputError("empty potential table")
    arr = np.array(rows)
    d = arr.shape[1] - 1
    if d < 1:
        raise InputError("table rows need at least one coordinate and a value")
    axes = [np.unique(arr[:, k]) for k in range(d)]
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != len(arr):
        raise InputError("table rows do not form a complete rectilinear grid")
    values = np.full(shape, np.nan)
    idx = tuple(np.searchsorted(axes[k], arr[:, k]) for k in range(d))
    values[idx] = arr[:, -1]
    if np.isnan(values).any():
        raise InputError("table rows do not form a complete rectilinear grid")
    return from_table(axes, values, confining=confining)


def from_config(cfg: Mapping, d: int) -> PotentialSpec:
    """Build a catalog potential from ``{"kind": ..., "params": {...}}``."""
    kind = cfg.get("kind")
    params = dict(cfg.get("params", {}))
    if kind == "table":
        path = cfg.get("path")
        if not path:
            raise InputError("table potential needs a 'path'")
        spec = load_table_csv(path, confining=bool(params.get("confining", False)))
        if spec.dimension != d:
            raise InputError(f"table dimension {spec.dimension} does not match grid dimension {d}")
        return spec
    if kind == "anisotropic-quadratic":
        params["weights"] = tuple(float(v) for v in params.get("weights", ()))
    else:
        params = {k: float(v) for k, v in params.items()}
    return PotentialSpec(kind, params, d)


# -- ball profiles ----------------------------------------------------------

@dataclass(frozen=True)
class ProfilePoint:
    """Value of a ball profile at ``x``.

    ``tolerance`` bounds the gap between ``value`` and the true sup/inf; it is
    zero when the profile was computed in closed form.
    """

    x: np.ndarray
    delta: float
    value: float
    extremizer: np.ndarray
    kind: str
    tolerance: float = 0.0


def _direction(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x)
    if n == 0:
        e = np.zeros_like(x)
        e[0] = 1.0
        return e
    return x / n


def _coarse_count(d: int) -> int:
    return {1: 401, 2: 81, 3: 25}.get(d, 9)


def _sphere_points(d: int, m: int) -> np.ndarray:
    if d == 1:
        return np.array([[-1.0], [1.0]])
    if d == 2:
        a = np.linspace(0, 2 * np.pi, m, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    # fixed-seed Gaussian directions keep extremizers reproducible
    g = np.random.default_rng(12345).standard_normal((m * d, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _ball_extremum(spec: PotentialSpec, center, radius: float, sense: str, refine_rounds: int = 12):
    """Lattice scan of the closed ball, then local lattice refinement.

    Returns ``(value, point, tolerance)``; ``sense`` is "max" or "min".
    """
    d = spec.dimension
    center = np.asarray(center, dtype=float)
    k = _coarse_count(d)
    axis = np.linspace(-radius, radius, k)
    h = axis[1] - axis[0]
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    vals_grid = spec.evaluate(center + mesh)
    if not np.all(np.isfinite(vals_grid[np.linalg.norm(mesh, axis=-1) <= radius])):
        raise DomainError("potential is not finite on the ball (not locally bounded)")
    # Lipschitz estimate from axis-neighbour differences on the coarse lattice
    lip = 0.0
    for ax in range(d):
        dv = np.abs(np.diff(vals_grid, axis=ax))
        lip = max(lip, float(np.nanmax(dv)) / h)
    inside = np.linalg.norm(mesh, axis=-1) <= radius
    pts = mesh[inside]
    shell = radius * _sphere_points(d, 256)
    pts = np.concatenate([pts, shell])
    vals = spec.evaluate(center + pts)
    sign = 1.0 if sense == "max" else -1.0
    best = int(np.argmax(sign * vals))
    p, v = pts[best], float(vals[best])
    step = h
    offsets = np.stack(np.meshgrid(*([np.linspace(-1, 1, 5)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    for _ in range(refine_rounds):
        cand = p + step * offsets
        norms = np.linalg.norm(cand, axis=1)
        over = norms > radius
        cand[over] *= (radius / norms[over])[:, None]
        cv = spec.evaluate(center + cand)
        j = int(np.argmax(sign * cv))
        if sign * cv[j] > sign * v:
            p, v = cand[j], float(cv[j])
        step /= 4.0
    tol = lip * step * 4.0 * math.sqrt(d)
    return v, center + p, tol


def profile_sup(spec: PotentialSpec, x, delta: float) -> ProfilePoint:
    """Upper profile ``V^delta(x)``: sup of V over the origin ball of radius ``|x| + delta``."""
    x = _as_points(spec, x).astype(float)
    if x.ndim != 1:
        raise InputError("profile_sup takes a single point")
    if not delta > 0:
        raise InputError("delta must be positive")
    radius = float(np.linalg.norm(x)) + float(delta)
    if spec.kind == "table":
        t = spec.table
        if np.any(-radius < t.lower) or np.any(radius > t.upper):
            raise DomainError("profile ball leaves the table bounding box")
    prof = spec.profile if spec.radial else None
    if prof is not None:
        ext = radius * _direction(x)
        return ProfilePoint(x, float(delta), float(prof(radius)), ext, "sup")
    v, ext, tol = _ball_extremum(spec, np.zeros(spec.dimension), radius, "max")
    return ProfilePoint(x, float(delta), v, ext, "sup", tol)


def profile_inf(spec: PotentialSpec, x, delta: float) -> ProfilePoint:
    """Lower profile ``V_delta(x)``: inf of V over the ball of radius ``delta |x|`` around x."""
    x = _as_points(spec, x).astype(float)
    if x.ndim != 1:
        raise InputError("profile_inf takes a single point")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    nx = float(np.linalg.norm(x))
    if nx == 0:
        raise InputError("profile_inf is undefined at x = 0 (the ball degenerates)")
    radius = delta * nx
    if spec.kind == "table":
        t = spec.table
        if np.any(x - radius < t.lower) or np.any(x + radius > t.upper):
            raise DomainError("profile ball leaves the table bounding box")
    prof = spec.profile if spec.radial else None
    if prof is not None:
        return ProfilePoint(x, float(delta), float(prof((1 - delta) * nx)), (1 - delta) * x, "inf")
    v, ext, tol = _ball_extremum(spec, x, radius, "min")
    return ProfilePoint(x, float(delta), v, ext, "inf", tol)


def upper_profile_values(spec: PotentialSpec, pts: np.ndarray, delta: float) -> np.ndarray:
    """``V^delta`` at each row of ``pts``."""
    pts = np.asarray(pts, dtype=float).reshape(-1, spec.dimension)
    prof = spec.profile if spec.radial else None
    if prof is not None:
        return prof(np.linalg.norm(pts, axis=1) + delta)
    return np.array([profile_sup(spec, p, delta).value for p in pts])


def lower_profile_values(spec: PotentialSpec, pts: np.ndarray, delta: float) -> np.ndarray:
    """``V_delta`` at each row of ``pts``."""
    pts = np.asarray(pts, dtype=float).reshape(-1, spec.dimension)
    prof = spec.profile if spec.radial else None
    if prof is not None:
        if not 0 < delta < 1:
            raise InputError("delta must lie in (0, 1)")
        return prof((1 - delta) * np.linalg.norm(pts, axis=1))
    return np.array([profile_inf(spec, p, delta).value for p in pts])


# -- slow-variation conditions ---------------------------------------------

@dataclass(frozen=True)
class ConditionVerdict:
    """Windowed verdict of a growth condition on ``(t_min, t_max]``.

    ``holds`` is a numerical statement about the scanned window only.
    """

    holds: bool
    epsilon: float
    delta: Optional[float]
    t0: Optional[float]
    t_max: float
    note: str = ""


DEFAULT_T_MAX = 1e15
DELTA_GRID = tuple(0.5 * 0.5 ** k for k in range(13))  # 0.5 ... 1.22e-4


def _scan(t_min: float, t_max: float, n: int) -> np.ndarray:
    return np.geomspace(t_min, t_max, n)


def _check_monotone(logg: np.ndarray) -> None:
    fin = np.where(np.isneginf(logg), -1e300, logg)
    with np.errstate(invalid="ignore"):
        steps = np.diff(fin)
    if np.any(np.isnan(fin)) or np.any(steps < -1e-12 * np.maximum(1.0, np.abs(fin[1:]))):
        raise InputError("radial profile is not nondecreasing on the scanned samples")


def _window_t0(t: np.ndarray, ok: np.ndarray, t_max: float, tail: float):
    bad = np.flatnonzero(~ok)
    t0 = 0.0 if bad.size == 0 else float(t[bad[-1]])
    return t0, bad.size == 0 or (bad[-1] < len(t) - 1 and t0 <= tail * t_max)


def _log_ratio_ok(hi: np.ndarray, lo: np.ndarray, bound: float, sense: str) -> np.ndarray:
    both_zero = np.isneginf(hi) & np.isneginf(lo)
    with np.errstate(invalid="ignore"):
        diff = hi - lo
        if sense == "le":
            ok = diff <= bound + 1e-12
        else:
            ok = diff >= bound - 1e-12
    return np.where(both_zero, True, ok & np.isfinite(diff))


def _growth_exponent(prof: RadialProfile, t_max: float) -> float:
    t = np.array([t_max / 10, t_max])
    lg = prof.log(t)
    return float((lg[1] - lg[0]) / math.log(10))


def check_condition_I(g, epsilon: float, t_max: float = DEFAULT_T_MAX, n_scan: int = 3000,
                      t_min: float = 1e-3, tail: float = 0.1) -> ConditionVerdict:
    """Search for ``delta`` with ``g((1+delta) t) <= (1+eps) g(t)`` for all scanned ``t > t0``.

    The delta grid is 0.5, 0.25, ... down to about 1e-4 and the first delta
    that works is reported.  A verdict "holds" requires the clean tail to span
    at least ``(tail * t_max, t_max]``.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    prof = as_profile(g)
    t = _scan(t_min, t_max, n_scan)
    lg = prof.log(t)
    _check_monotone(lg)
    bound = math.log1p(epsilon)
    for delta in DELTA_GRID:
        ok = _log_ratio_ok(prof.log((1 + delta) * t), lg, bound, "le")
        t0, holds = _window_t0(t, ok, t_max, tail)
        if holds:
            note = ""
            if _growth_exponent(prof, t_max) > 1 + 1e-6:
                note = ("condition (I) holds numerically although the profile grows faster than "
                        "linearly; the usual example quotes at most linear growth")
            return ConditionVerdict(True, float(epsilon), delta, t0, float(t_max), note)
    return ConditionVerdict(False, float(epsilon), None, None, float(t_max),
                            "no delta on the grid satisfies the inequality on the window tail")


def check_condition_II(g, epsilon: float, delta: float, t_max: float = DEFAULT_T_MAX,
                       n_scan: int = 3000, t_min: float = 1e-3, tail: float = 0.1) -> ConditionVerdict:
    """Check ``g((1-delta) t) >= (1-eps) g(t)`` for all scanned ``t > t0``."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise InputError("epsilon and delta must lie in (0, 1)")
    prof = as_profile(g)
    t = _scan(t_min, t_max, n_scan)
    lg = prof.log(t)
    _check_monotone(lg)
    ok = _log_ratio_ok(prof.log((1 - delta) * t), lg, math.log1p(-epsilon), "ge")
    t0, holds = _window_t0(t, ok, t_max, tail)
    if holds:
        return ConditionVerdict(True, float(epsilon), float(delta), t0, float(t_max))
    return ConditionVerdict(False, float(epsilon), float(delta), None, float(t_max),
                            "inequality fails on the window tail")

