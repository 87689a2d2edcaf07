"""Closed-form kernels: Gauss-Weierstrass, Bessel K, resolvent, Dirichlet balls.

All kernels refer to the process with generator ``Delta`` (not ``Delta/2``),
so the free transition density is

    g_t(x, y) = (4 pi t)^(-d/2) exp(-|y - x|^2 / (4 t)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import InputError, SingularityError

# Taylor coefficients of 1/Gamma(1+z) = sum_k _RGAMMA[k] z^k (A&S 6.1.34, shifted)
_RGAMMA = (
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
)

_EPS = 1e-16
_SERIES_CUTOFF = 2.0


def gauss_kernel(t, x, y, d: int | None = None):
    """Gauss-Weierstrass kernel ``g_t(x, y)``; broadcasts over leading axes.

    Points have shape ``(..., d)``; scalars are read as 1-d points.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InputError("time must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if d is None:
        d = 1 if x.ndim == 0 else x.shape[-1]
    diff = y - x
    r2 = np.square(diff) if diff.ndim == 0 else np.sum(np.square(diff), axis=-1)
    if diff.ndim > 0 and diff.shape[-1] != d:
        raise InputError("point dimension does not match d")
    out = (4 * np.pi * t) ** (-d / 2) * np.exp(-r2 / (4 * t))
    return float(out) if np.ndim(out) == 0 else out


def _gamma_terms(mu: float):
    """``(gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu))`` for |mu| <= 1/2, cancellation-free."""
    odd = 0.0
    even = 0.0
    for k in range(len(_RGAMMA) - 1, -1, -1):
        if k % 2:
            odd = odd * mu * mu + _RGAMMA[k]
        else:
            even = even * mu * mu + _RGAMMA[k]
    # 1/Gamma(1 +- mu) = even(mu) +- mu * odd(mu)
    gam1 = -odd
    gam2 = even
    return gam1, gam2, even + mu * odd, even - mu * odd


def _k_temme(mu: float, x: float):
    """``(K_mu(x), K_{mu+1}(x), log_scale)`` for |mu| <= 1/2.

    For ``x >= 2`` the pair is returned scaled by ``exp(x)`` and
    ``log_scale = x``; otherwise unscaled with ``log_scale = 0``.
    """
    if x < _SERIES_CUTOFF:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
        dd = -math.log(x2)
        e = mu * dd
        fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _gamma_terms(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * dd)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        dd = x2 * x2
        total1 = p
        i = 0
        while True:
            i += 1
            ff = (i * ff + p + q) / (i * i - mu * mu)
            c *= dd / i
            p /= i - mu
            q /= i + mu
            term = c * ff
            total += term
            total1 += c * (p - i * ff)
            if abs(term) < abs(total) * _EPS or i > 500:
                break
        return total, total1 * 2.0 / x, 0.0
    # Steed's continued fraction (Temme's CF2), exp-scaled
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 100000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1, x


def _half_integer_k(n: int, x: float, scaled: bool) -> float:
    """``K_{n+1/2}(x)`` from the terminating Hankel sum."""
    total = 0.0
    for k in range(n + 1):
        total += math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k)) / (2 * x) ** k
    val = math.sqrt(math.pi / (2 * x)) * total
    return val if scaled else val * math.exp(-x)


def _bessel_k_scalar(v: float, x: float, scaled: bool) -> float:
    if not x > 0:
        raise InputError("Bessel K needs a positive argument")
    v = abs(v)
    twice = 2 * v
    if abs(twice - round(twice)) < 1e-14 and round(twice) % 2 == 1:
        return _half_integer_k(int(round(v - 0.5)), x, scaled)
    nl = int(v + 0.5)
    mu = v - nl
    kmu, k1, log_scale = _k_temme(mu, x)
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * (2.0 / x) * k1 + kmu
    if scaled:
        return kmu * math.exp(x - log_scale)
    return kmu * math.exp(-log_scale)


def bessel_k(v, r, scaled: bool = False):
    """Modified Bessel function of the second kind ``K_v(r)`` for real ``v``, ``r > 0``.

    Uses Temme's series below ``r = 2`` and Steed's continued fraction above,
    with upward recurrence in the order; half-integer orders use the
    terminating closed form.  ``scaled=True`` returns ``exp(r) K_v(r)``.
    """
    v_arr, r_arr = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(r, dtype=float))
    if np.any(r_arr <= 0):
        raise InputError("Bessel K needs a positive argument")
    out = np.array([_bessel_k_scalar(float(a), float(b), scaled) for a, b in zip(v_arr.ravel(), r_arr.ravel())])
    out = out.reshape(v_arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_k_integral(v: float, r: float) -> float:
    """``K_v(r) = int_0^inf exp(-r cosh s) cosh(v s) ds`` by adaptive quadrature."""
    upper = math.acosh(max(2.0, (800.0 + abs(v) * 50) / r))
    val, _ = integrate.quad(lambda s: math.exp(-r * math.cosh(s)) * math.cosh(v * s), 0, upper,
                            epsabs=0, epsrel=1e-13, limit=400)
    return val


def bessel_asymptotic_ratio(v: float, r) -> np.ndarray:
    """``sqrt(2r/pi) K_v(r) e^r``, which tends to 1 as ``r -> inf``."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(2 * r / np.pi) * bessel_k(v, r, scaled=True)


# -- resolvent --------------------------------------------------------------

@dataclass(frozen=True)
class ResolventQuery:
    lam: float
    y: np.ndarray
    d: int

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError("lambda must be positive")
        if self.d < 1:
            raise InputError("dimension must be positive")


def _norm(y, d: int) -> float:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size == 1 and d > 1:
        return abs(float(y[0]))
    if y.shape[-1] != d:
        raise InputError("displacement dimension does not match d")
    return float(np.linalg.norm(y))


def resolvent_half_kernel(lam: float, y, d: int) -> float:
    """Resolvent kernel of ``Delta/2``: ``pi^(-d/2) (sqrt(2 lam)/(2|y|))^(d/2-1) K_{d/2-1}(sqrt(2 lam)|y|)``.

    ``y`` may be a vector or a scalar distance.
    """
    if not lam > 0:
        raise InputError("lambda must be positive")
    ry = _norm(y, d)
    s = math.sqrt(2 * lam)
    if ry == 0:
        if d == 1:
            return 1.0 / s
        raise SingularityError("resolvent kernel diverges at y = 0 for d >= 2")
    v = d / 2 - 1
    return math.pi ** (-d / 2) * (s / (2 * ry)) ** v * bessel_k(v, s * ry)


def resolvent_kernel(q: ResolventQuery | float, y=None, d: int | None = None) -> float:
    """``r_lam(y) = int_0^inf exp(-lam t) g_t(y) dt`` via ``r_lam = r~_{lam/2} / 2``.

    Accepts a :class:`ResolventQuery` or ``(lam, y, d)``.
    """
    if not isinstance(q, ResolventQuery):
        q = ResolventQuery(float(q), np.atleast_1d(np.asarray(y, dtype=float)), int(d))
    return 0.5 * resolvent_half_kernel(q.lam / 2, q.y, q.d)


def resolvent_kernel_quad(lam: float, y, d: int) -> float:
    """Resolvent kernel by quadrature of the Laplace integral, with ``t = s^2``."""
    ry = _norm(y, d)
    if ry == 0 and d >= 2:
        raise SingularityError("resolvent kernel diverges at y = 0 for d >= 2")

    def f(s):
        if s == 0:
            return 0.0
        t = s * s
        return 2 * s * math.exp(-lam * t - ry * ry / (4 * t)) * (4 * math.pi * t) ** (-d / 2)

    # integrand peaks near t* = |y|/(2 sqrt(lam)); split there for robustness
    peak = math.sqrt(max(ry / (2 * math.sqrt(lam)), 1e-12))
    a, _ = integrate.quad(f, 0, peak, epsabs=0, epsrel=1e-12, limit=400)
    b, _ = integrate.quad(f, peak, np.inf, epsabs=0, epsrel=1e-12, limit=400)
    return a + b


@dataclass(frozen=True)
class ResolventWitness:
    """Window witness for ``r_lam(y) >= c exp(-(1+eps) sqrt(lam) |y|)``."""

    epsilon: float
    d: int
    rho: float
    c: float
    lam_max: float
    y_max: float
    holds: bool
    min_margin: float


def resolvent_lower_bound_witness(epsilon: float, d: int, lam_max: float = 64.0, y_max: float = 20.0,
                                  n_lam: int = 25, n_y: int = 120, asym_tol: float = 0.5) -> ResolventWitness:
    """Find ``(rho, c)`` on the window ``lam in [1, lam_max]``, ``|y| in [rho, y_max]``.

    ``rho`` is the first radius beyond which the Bessel asymptotic ratio stays
    within ``asym_tol`` of 1; ``c`` is the smallest ratio of the kernel to the
    exponential envelope over the grid.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    v = d / 2 - 1
    rs = np.geomspace(0.05, y_max * math.sqrt(lam_max), 400)
    dev = np.abs(bessel_asymptotic_ratio(v, rs) - 1)
    bad = np.flatnonzero(dev > asym_tol)
    rho = max(1.0, float(rs[bad[-1] + 1]) if bad.size else 1.0)
    lams = np.geomspace(1.0, lam_max, n_lam)
    ys = np.geomspace(rho, y_max, n_y)
    ratios = np.empty((n_lam, n_y))
    for i, lam in enumerate(lams):
        sl = math.sqrt(lam)
        for j, ry in enumerate(ys):
            # exp-scaled evaluation avoids underflow deep in the tail
            k = bessel_k(v, sl * ry, scaled=True)
            kern = 0.5 * math.pi ** (-d / 2) * (sl / (2 * ry)) ** v * k
            ratios[i, j] = kern * math.exp(epsilon * sl * ry)
    c = float(ratios.min())
    margin = float((ratios - c).min())
    return ResolventWitness(float(epsilon), int(d), rho, c, float(lam_max), float(y_max),
                            bool(c > 0 and margin >= 0), margin)


# -- Dirichlet balls --------------------------------------------------------

def principal_dirichlet_eigenvalue(d: int) -> float:
    """First eigenvalue of ``-Delta`` on the unit ball with Dirichlet data.

    Closed forms for d = 1, 3; otherwise the square of the first positive
    zero of ``J_{d/2-1}``, found by bracketing and Brent's method.
    """
    if d < 1:
        raise InputError("dimension must be positive")
    if d == 1:
        return (math.pi / 2) ** 2
    if d == 3:
        return math.pi ** 2
    nu = d / 2 - 1
    f = lambda z: special.jv(nu, z)
    # first zero lies in (nu, nu + 2 sqrt(nu + 1) + 2.5)
    lo = max(nu, 0.5)
    step = 0.05
    z = lo
    while f(z) * f(z + step) > 0:
        z += step
    root = optimize.brentq(f, z, z + step, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return root * root


@dataclass(frozen=True)
class DirichletBallBoundQuery:
    t: float
    x: np.ndarray
    y: np.ndarray
    r: float
    mu0: float
    c: float = 1.0

    def __post_init__(self):
        if not self.t > 0 or not self.r > 0:
            raise InputError("t and r must be positive")
        if not 0 < self.c <= 1:
            raise InputError("c must lie in (0, 1]")


def dirichlet_ball_lower_bound(q: DirichletBallBoundQuery) -> float:
    """Right-hand side of the two-sided Dirichlet-ball heat kernel lower bound.

    ``c [1 ^ (r-|x|)(r-|y|)/t] / (1 ^ r^2/t)^((d+2)/2) exp(-mu0 t / r^2) g_t(x, y)``
    """
    x = np.atleast_1d(np.asarray(q.x, dtype=float))
    y = np.atleast_1d(np.asarray(q.y, dtype=float))
    if x.shape != y.shape:
        raise InputError("x and y must have the same dimension")
    d = x.shape[-1]
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    if nx > q.r or ny > q.r:
        raise InputError("points must lie in the closed ball")
    boundary = min(1.0, (q.r - nx) * (q.r - ny) / q.t)
    scale = min(1.0, q.r * q.r / q.t) ** ((d + 2) / 2)
    return q.c * boundary / scale * math.exp(-q.mu0 * q.t / q.r ** 2) * gauss_kernel(q.t, x, y, d)


def dirichlet_interval_kernel(t: float, x: float, y: float, r: float = 1.0, tol: float = 1e-17) -> float:
    """Heat kernel of ``Delta`` on ``(-r, r)`` killed at the ends, by eigen-series."""
    if not t > 0:
        raise InputError("time must be positive")
    if abs(x) >= r or abs(y) >= r:
        return 0.0
    total = 0.0
    k = 1
    while True:
        lam = (k * math.pi / (2 * r)) ** 2
        w = math.exp(-lam * t)
        total += w / r * math.sin(k * math.pi * (x + r) / (2 * r)) * math.sin(k * math.pi * (y + r) / (2 * r))
        if w < tol * max(abs(total), 1e-300) and k > 2:
            break
        k += 1
    return total


def fit_dirichlet_constant(times, points, r: float = 1.0) -> float:
    """Largest ``c`` with the d = 1 ball bound below the exact interval kernel on all samples."""
    mu0 = principal_dirichlet_eigenvalue(1)
    best = math.inf
    for t in times:
        for x in points:
            for y in points:
                bound = dirichlet_ball_lower_bound(DirichletBallBoundQuery(t, np.array([x]), np.array([y]), r, mu0, 1.0))
                if bound > 0:
                    best = min(best, dirichlet_interval_kernel(t, x, y, r) / bound)
    return best
