"""Product-measure solvers on a non-Gaussian target.

The target density is proportional to exp f with a coupled double well in two
coordinates. Coordinate ascent finds a mean-field fixed point; the product
JKO scheme follows the gradient flow toward the same kind of point with the
free energy falling at every step.
"""
import numpy as np

from meanfield_ip.variational import (
    Grid1D,
    JKOConfig,
    ProductGridMeasure,
    TabulatedPotential,
    cavi_solve,
    jko_trajectory,
    mean_field_residual,
)


def f(a, b):
    return -a ** 4 / 4 + a ** 2 / 2 - b ** 4 / 4 + b ** 2 / 2 + 0.3 * a * b


spec = TabulatedPotential(f, 2)
grid = Grid1D(-5.0, 5.0, 512)

# an off-centre start; both solvers still end near the symmetric point
mu0 = ProductGridMeasure.gaussian(grid, [0.4, 0.2], [0.5, 0.5])

res = cavi_solve(spec, mu0, max_sweeps=200, tol=1e-10)
print(f"CAVI converged={res.converged} after {res.sweeps} sweeps")
print("  free energy per sweep:", " ".join(f"{e:.6f}" for e in res.free_energies[:6]), "...")
print("  marginal means", [round(m.mean(), 4) for m in res.measure.marginals],
      "variances", [round(m.var(), 4) for m in res.measure.marginals])
print(f"  first-order residual {mean_field_residual(spec, res.measure):.2e}")

traj = jko_trajectory(spec, mu0, tau=0.2, t_end=4.0, cfg=JKOConfig(tau=0.2, levels=128))
print("\nJKO with tau = 0.2")
for t, mu, fe in zip(traj.times, traj.measures, traj.free_energies):
    if abs(t / 0.8 - round(t / 0.8)) < 1e-9:
        means = [m.mean() for m in mu.marginals]
        print(f"  t={t:4.1f}  free energy {fe:.6f}  means ({means[0]:+.4f}, {means[1]:+.4f})")
print("  free energy monotone:", bool(np.all(np.diff(traj.free_energies) <= 1e-10)))
