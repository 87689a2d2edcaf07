import math

import numpy as np
import pytest
from scipy import integrate

from gsdecay import potentials as P
from gsdecay.errors import ConfigError, InputError
from gsdecay.feynman_kac import (
    PathSamplerConfig,
    check_lower_sandwich,
    check_upper_sandwich,
    default_holder_exponent,
    exit_time_bound_constant,
    exit_time_laplace,
    fk_kernel_estimate,
    lower_rho1,
    mehler_kernel,
)
from gsdecay.kernels import gauss_kernel


def trotter_kernel(t, x, y, n=400, half=8.0, steps=64):
    """Symmetric Trotter product e^{-tV/2m} e^{t Delta/m} e^{-tV/2m} on a quadrature grid."""
    z = np.linspace(-half, half, n)
    dz = z[1] - z[0]
    tau = t / steps
    free = gauss_kernel(tau, z[:, None, None], z[None, :, None], 1) * dz
    half_v = np.exp(-0.5 * tau * z ** 2)
    step = half_v[:, None] * free * half_v[None, :]
    mat = np.linalg.matrix_power(step, steps) / dz
    return float(np.interp(y, z, np.array([np.interp(x, z, col) for col in mat.T])))


def test_mehler_value_and_trotter_oracle():
    assert mehler_kernel(0.5, [0.0], [0.0]) == pytest.approx((2 * math.pi * math.sinh(1)) ** -0.5, rel=1e-14)
    assert mehler_kernel(0.5, [0.0], [0.0]) == pytest.approx(trotter_kernel(0.5, 0.0, 0.0), rel=1e-3)
    assert mehler_kernel(0.5, [0.4], [-0.3]) == pytest.approx(trotter_kernel(0.5, 0.4, -0.3), rel=1e-3)


def test_config_validation():
    with pytest.raises(InputError):
        PathSamplerConfig(paths=50)
    with pytest.raises(InputError):
        PathSamplerConfig(steps=5)
    with pytest.raises(InputError):
        PathSamplerConfig(seed=-1)
    with pytest.raises(InputError):
        PathSamplerConfig(scheme="euler")


def test_free_ratio_exactly_one():
    est = fk_kernel_estimate(P.constant(0.0, 1), 0.7, [0.2], [1.0], PathSamplerConfig(paths=500))
    assert est.ratio_to_free == 1.0 and est.stderr == 0.0


@pytest.mark.parametrize("scheme", ["bridge", "forward"])
def test_constant_potential_factor(scheme):
    cfg = PathSamplerConfig(paths=20000, steps=50, scheme=scheme)
    est = fk_kernel_estimate(P.constant(3.0, 1), 0.5, [0.0], [0.3], cfg)
    target = math.exp(-1.5)
    assert abs(est.ratio_to_free - target) <= 3 * est.stderr / est.free + 1e-12
    if scheme == "bridge":
        assert est.ratio_to_free == pytest.approx(0.22313016, rel=1e-7)


def test_rejects_nonpositive_time():
    with pytest.raises(InputError):
        fk_kernel_estimate(P.power(1, 1), 0.0, [0.0], [0.0], PathSamplerConfig())


def test_harmonic_against_mehler():
    cfg = PathSamplerConfig(paths=100_000, steps=200, seed=5)
    est = fk_kernel_estimate(P.power(1, 1), 0.5, [0.0], [0.0], cfg)
    assert abs(est.mean - 0.3680052) <= 3 * est.stderr


def test_antithetic_and_forward_consistent():
    pot = P.power(1, 1)
    ref = mehler_kernel(0.4, [0.5], [-0.2])
    for cfg in (PathSamplerConfig(paths=20000, steps=100, antithetic=True),
                PathSamplerConfig(paths=20000, steps=100, scheme="forward")):
        est = fk_kernel_estimate(pot, 0.4, [0.5], [-0.2], cfg)
        assert abs(est.mean - ref) <= 3 * est.stderr + 1e-3 * ref


def test_step_refinement_settles():
    est = fk_kernel_estimate(P.power(2, 1), 0.5, [1.0], [0.5], PathSamplerConfig(paths=5000, steps=10), refine=True)
    assert est.steps >= 20


def _plan(d, n=20, seed=4):
    rng = np.random.default_rng(seed)
    return [(rng.uniform(-1.5, 1.5, d), rng.uniform(-1.5, 1.5, d), float(rng.uniform(0.1, 1.0))) for _ in range(n)]


@pytest.mark.parametrize("pot", [P.power(1, 1), P.anisotropic_quadratic([1.0, 3.0])])
def test_domination_and_symmetry(pot):
    # independent streams so the combined standard error applies
    cfg_a = PathSamplerConfig(paths=4000, steps=40, seed=9)
    cfg_b = PathSamplerConfig(paths=4000, steps=40, seed=10)
    for x, y, t in _plan(pot.dimension):
        a = fk_kernel_estimate(pot, t, x, y, cfg_a)
        b = fk_kernel_estimate(pot, t, y, x, cfg_b)
        assert a.mean <= a.free + 3 * a.stderr
        assert abs(a.mean - b.mean) <= 3 * math.hypot(a.stderr, b.stderr) + 1e-15


def test_chapman_kolmogorov_monte_carlo():
    pot = P.power(1, 1)
    cfg = PathSamplerConfig(paths=3000, steps=40, seed=2)
    t, x, y = 0.6, 0.3, -0.4
    z = np.linspace(-4, 4, 41)
    dz = z[1] - z[0]
    left = [fk_kernel_estimate(pot, t / 2, [x], [zi], cfg) for zi in z]
    right = [fk_kernel_estimate(pot, t / 2, [zi], [y], cfg) for zi in z]
    total = sum(a.mean * b.mean for a, b in zip(left, right)) * dz
    var = sum((a.stderr * b.mean) ** 2 + (a.mean * b.stderr) ** 2 for a, b in zip(left, right)) * dz * dz
    direct = fk_kernel_estimate(pot, t, [x], [y], PathSamplerConfig(paths=20000, steps=80, seed=3))
    assert abs(total - direct.mean) <= 3 * math.sqrt(var + direct.stderr ** 2) + 2e-3 * direct.mean


def test_reproducible_bits():
    cfg = PathSamplerConfig(paths=3000, steps=30, seed=123, batch=1000)
    a = fk_kernel_estimate(P.power(1, 2), 0.5, [0.1, 0.2], [0.0, -0.3], cfg)
    b = fk_kernel_estimate(P.power(1, 2), 0.5, [0.1, 0.2], [0.0, -0.3], cfg)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)


# -- exit times -------------------------------------------------------------

def test_exit_time_closed_form():
    est = exit_time_laplace(1.0, 1.0, 1, PathSamplerConfig(paths=20000, steps=100, seed=1))
    assert not est.bias_flag
    assert abs(est.mean - 1 / math.cosh(1)) <= max(3 * est.stderr, 0.02 / math.cosh(1))


def test_exit_time_zero_lambda():
    est = exit_time_laplace(0.0, 1.0, 1, PathSamplerConfig(paths=2000, steps=50), refine=False)
    assert est.mean == pytest.approx(1.0, abs=1e-9)


def test_exit_time_monotone_in_lambda():
    cfg = PathSamplerConfig(paths=3000, steps=50, seed=8)
    vals = [exit_time_laplace(lam, 1.0, 2, cfg, refine=False).mean for lam in (0.5, 1.0, 2.0, 4.0, 8.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_exit_time_higher_dimension_against_series():
    # d = 3, r = 1: E_0 exp(-lam tau) = sqrt(lam) / sinh(sqrt(lam)) for generator Delta
    est = exit_time_laplace(1.0, 1.0, 3, PathSamplerConfig(paths=20000, steps=100, seed=2))
    exact = 1 / math.sinh(1)
    assert abs(est.mean - exact) <= max(3 * est.stderr, 0.02 * exact)


def test_exit_bound_consistency_arithmetic():
    exact = 1 / math.cosh(4)
    assert exact == pytest.approx(0.0366, abs=1e-4)
    assert exact <= 2 * math.exp(-0.9 * 2 * 2)


def test_exit_bound_constant():
    class E:
        def __init__(self, lam, r, mean):
            self.lam, self.r, self.mean = lam, r, mean
    ests = [E(lam, r, 1 / math.cosh(r * math.sqrt(lam))) for lam in (1, 4) for r in (1, 2)]
    c = exit_time_bound_constant(ests, 0.1)
    assert 1 <= c <= 2
    for e in ests:
        assert e.mean <= c * math.exp(-0.9 * math.sqrt(e.lam) * e.r) * (1 + 1e-12)


# -- sandwich checks --------------------------------------------------------

SAMPLES = [([x], [0.0], t) for x in (3.0, 4.0) for t in (0.1, 0.5, 1.0)]


def test_lower_sandwich_harmonic_mehler():
    res = check_lower_sandwich(P.power(1, 1), 0.5, 1.0, SAMPLES, kernel=mehler_kernel)
    assert res.passed and res.c > 0 and not res.violations and not res.rejected


def test_lower_sandwich_harmonic_monte_carlo():
    res = check_lower_sandwich(P.power(1, 1), 0.5, 1.0, SAMPLES, PathSamplerConfig(paths=20000, steps=100))
    assert res.passed


def test_lower_sandwich_free_edge():
    res = check_lower_sandwich(P.constant(0.0, 1), 0.5, 0.5, SAMPLES, PathSamplerConfig(paths=200),
                               enforce_preconditions=False)
    assert res.c == 1.0 and res.passed


def test_lower_sandwich_rejects_inadmissible():
    rho1 = lower_rho1(P.power(1, 1), 0.1, 0.5)
    assert rho1 > 4
    with pytest.raises(ConfigError):
        check_lower_sandwich(P.power(1, 1), 0.1, 0.5, SAMPLES, kernel=mehler_kernel)
    res = check_lower_sandwich(P.power(1, 1), 0.1, 0.5, SAMPLES + [([8.0], [0.0], 0.5), ([8.0], [1.5], 0.5)],
                               kernel=mehler_kernel)
    assert len(res.rejected) == 7 and len(res.rows) == 1


def test_quartic_profile_feeds_lower_sandwich():
    res = check_lower_sandwich(P.power(2, 1), 0.5, 0.5, [([3.0], [0.0], 0.1)], PathSamplerConfig(paths=500),
                               refine=False)
    assert res.rows[0]["profile"] == pytest.approx(150.0625)


def test_upper_sandwich_harmonic():
    res = check_upper_sandwich(P.power(1, 1), 0.5, 0.5, [([3.0], [0.0], 0.5)], kernel=mehler_kernel)
    assert res.passed and math.isfinite(res.c) and res.a == pytest.approx(2.0)
    mc = check_upper_sandwich(P.power(1, 1), 0.5, 0.5, SAMPLES, PathSamplerConfig(paths=10000, steps=100))
    assert mc.passed


def test_upper_sandwich_free_edge():
    res = check_upper_sandwich(P.constant(0.0, 1), 0.5, 0.5, SAMPLES, PathSamplerConfig(paths=200))
    # u_t = g_t <= sqrt(a) g_{at} because |y-x|^2/(4at) <= |y-x|^2/(4t)
    assert res.passed and res.c <= math.sqrt(res.a)


def test_upper_sandwich_quartic_profile():
    res = check_upper_sandwich(P.power(2, 1), 0.5, 0.5, [([2.5], [0.0], 0.2)], PathSamplerConfig(paths=500),
                               refine=False)
    assert res.rows[0]["profile"] == pytest.approx(1.25 ** 4)


def test_holder_exponent_validation():
    assert default_holder_exponent(0.5) == 2.0
    b = default_holder_exponent(0.1)
    assert 1 < b and 0.9 * math.sqrt(b) < 1
    with pytest.raises(ConfigError):
        check_upper_sandwich(P.power(1, 1), 0.1, 0.5, SAMPLES, kernel=mehler_kernel, b=2.0)
