"""The ratio -log phi0(x) / (sqrt(V(x)) |x|) along the tail.

For x^2 it sits near 1/2.  For log(e+x^2) it drifts upward only like
1 - O(1/log|x|), so a window cut off at phi0 = 1e-12 never gets close to 1.
"""
from gsdecay import GridSpec, decay_ratio_profile, potentials as P, power_sharp_check, solve_ground_state

for name, pot, grid in (("x^2", P.power(1, 1), GridSpec(1, 10.0, 2000)),
                        ("log(e+x^2)", P.log_potential(1), GridSpec(1, 30.0, 4000))):
    prof = decay_ratio_profile(solve_ground_state(grid, pot))
    print(f"{name}: |x| in [{prof.radii.min():.2f}, {prof.radii.max():.2f}], ratio in "
          f"[{prof.ratios.min():.3f}, {prof.ratios.max():.3f}], fitted intercept {prof.intercept:.3f}")

# sharpness for |x|^4: phi0 is comparable to r^{-1} exp(-r^3/3)
gs = solve_ground_state(GridSpec(1, 8.0, 4000), P.power(2, 1))
res = power_sharp_check(gs, 2.0, 1, window=(3.0, 4.5))
print(f"|x|^4 sharpness band max/min = {res.band:.3f}")
