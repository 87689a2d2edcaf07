"""Ground state of the harmonic oscillator on a grid, compared with exp(-x^2/2)."""
import numpy as np

from gsdecay import GridSpec, potentials as P, solve_ground_state

gs = solve_ground_state(GridSpec(1, 10.0, 2000), P.power(1, 1))
x = gs.grid.axis()
exact = np.pi ** -0.25 * np.exp(-x ** 2 / 2)
print(f"lambda0 = {gs.lambda0:.8f}  (exact 1)")
print(f"sup |phi0 - exact| on |x| <= 5: {np.max(np.abs(gs.phi0 - exact)[np.abs(x) <= 5]):.2e}")

# quartic oscillator: lambda0 is the known 1.0603620905 for -d^2/dx^2 + x^4
gs4 = solve_ground_state(GridSpec(1, 8.0, 4000), P.power(2, 1))
print(f"quartic lambda0 = {gs4.lambda0:.8f}")
