"""Ground-state decay of Schrodinger operators ``-Delta + V`` with confining ``V``.

The package computes ground states on grids, fits the two-sided decay
envelopes built from the ball profiles ``V^delta`` and ``V_delta``, and checks
the kernel estimates behind them (Feynman-Kac Monte Carlo, resolvent kernels,
Dirichlet-ball bounds, exit-time Laplace transforms).
"""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, GsDecayError, InputError, SingularityError, SolverError
from .potentials import (
    PotentialSpec,
    ProfilePoint,
    check_condition_I,
    check_condition_II,
    eval_potential,
    profile_inf,
    profile_sup,
)
from .spectral import GridSpec, GroundState, solve_ground_state, solve_radial_ground_state
from .kernels import bessel_k, gauss_kernel, resolvent_kernel
from .feynman_kac import PathSamplerConfig, exit_time_laplace, fk_kernel_estimate
from .verify import (
    decay_ratio_profile,
    power_sharp_check,
    run_verification,
    theorem_lower_envelope,
    theorem_upper_envelope,
)

__all__ = [
    "__version__",
    "ConfigError", "DomainError", "GsDecayError", "InputError", "SingularityError", "SolverError",
    "PotentialSpec", "ProfilePoint", "check_condition_I", "check_condition_II", "eval_potential",
    "profile_inf", "profile_sup",
    "GridSpec", "GroundState", "solve_ground_state", "solve_radial_ground_state",
    "bessel_k", "gauss_kernel", "resolvent_kernel",
    "PathSamplerConfig", "exit_time_laplace", "fk_kernel_estimate",
    "decay_ratio_profile", "power_sharp_check", "run_verification", "theorem_lower_envelope",
    "theorem_upper_envelope",
]
