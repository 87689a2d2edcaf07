"""Resolvent kernels of -Delta + lambda and the Dirichlet heat kernel on an interval."""
import math

from gsdecay.kernels import fit_dirichlet_constant, resolvent_kernel, resolvent_kernel_quad

for d in (1, 2, 3):
    for r in (0.5, 2.0):
        print(f"d={d} r={r}: Bessel {resolvent_kernel(1.0, r, d):.10f}  quadrature {resolvent_kernel_quad(1.0, r, d):.10f}")
print(f"d=3 closed form at r=1: {math.exp(-1) / (4 * math.pi):.10f}")

c = fit_dirichlet_constant([0.1, 0.25, 0.5, 1.0, 2.0], [-0.5, 0.0, 0.5], 1.0)
print(f"largest c with p_t^(-1,1) >= c exp(-mu0 t) g_t on the sample plan: {c:.4f}")
