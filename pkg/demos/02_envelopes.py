"""Two-sided decay envelopes for a few confining potentials.

The lower envelope uses the ball supremum V^delta and the upper one the ball
infimum V_delta; each fit reports its constant, whether it is stable as the
fit window shrinks, and any hold-out violations.
"""
from gsdecay import GridSpec, potentials as P, solve_ground_state, theorem_lower_envelope, theorem_upper_envelope

cases = [
    ("x^2", P.power(1, 1), GridSpec(1, 10.0, 2000)),
    ("x^4", P.power(2, 1), GridSpec(1, 8.0, 4000)),
    ("log(e+x^2)", P.log_potential(1), GridSpec(1, 30.0, 4000)),
]
for name, pot, grid in cases:
    gs = solve_ground_state(grid, pot)
    for eps, delta in ((0.1, 0.5), (0.5, 0.5)):
        lo = theorem_lower_envelope(gs, pot, eps, delta)
        up = theorem_upper_envelope(gs, pot, eps, delta)
        print(f"{name:>11} eps={eps} delta={delta}: lower c={lo.c:.3e} stable={lo.stable} "
              f"upper c={up.c:.3e} stable={up.stable}")
