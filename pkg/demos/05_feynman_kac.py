"""Monte Carlo Feynman-Kac kernels and exit-time Laplace transforms."""
import math

from gsdecay import PathSamplerConfig, exit_time_laplace, fk_kernel_estimate, potentials as P
from gsdecay.feynman_kac import mehler_kernel

cfg = PathSamplerConfig(paths=100_000, steps=200, seed=1)
est = fk_kernel_estimate(P.power(1, 1), 0.5, [0.0], [0.3], cfg)
print(f"harmonic kernel t=0.5: MC {est.mean:.5f} +- {est.stderr:.1e}, Mehler {mehler_kernel(0.5, [0.0], [0.3]):.5f}")

for lam, r in ((1.0, 1.0), (4.0, 2.0)):
    e = exit_time_laplace(lam, r, 1, PathSamplerConfig(paths=20_000, steps=100, seed=2))
    print(f"E exp(-{lam:g} tau_{r:g}): MC {e.mean:.4f} +- {e.stderr:.1e}, exact {1 / math.cosh(r * math.sqrt(lam)):.4f}")
