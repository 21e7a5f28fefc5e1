"""
Mixing on the 7-cycle
=====================

Starting from a vertex with a totally mixed coin, the position distribution
approaches uniform. The slowest decaying mode that the initial state excites
sets the asymptotic rate ``1 / log|lambda'|``.
"""

import numpy as np

from percowalk import (
    build_superoperator,
    evolve,
    hadamard,
    localized_initial_state,
    make_cycle,
    mixing_time_estimate,
    mixing_times,
    position_marginal,
    solve_attractors_spectral,
)
from percowalk.analysis import mixing_reference

g = make_cycle(7)
C = hadamard()
rho0 = localized_initial_state(g, 0, P=0.0)
phi = build_superoperator(g, C, None, 0.5)

eps = np.logspace(-3, -1, 7)
report = mixing_time_estimate(phi, rho0, eps)
basis = solve_attractors_spectral(phi)
traj = evolve(g, C, None, 0.5, rho0, 600, keep_states=False)
measured = mixing_times(position_marginal(traj.diagonals), eps, mixing_reference(basis, rho0))

print(f"lambda' = {report.lambda_prime:.6f}  |lambda'| = {abs(report.lambda_prime):.6f}  |O| = {abs(report.overlap):.4f}")
for m in report.skipped:
    print(f"skipped: |lambda| = {abs(m.eigenvalue):.6f} with overlap {abs(m.overlap):.1e}")
print("\n  epsilon   measured   estimate")
for e, tm, te in zip(eps, measured, report.t_estimated):
    print(f"  {e:.2e}  {tm:8d}  {te:9.1f}")

# Far below these thresholds the measured times track the estimate with the
# same slope, shifted by a roughly constant number of steps.
fine = np.logspace(-8, -4, 5)
traj = evolve(g, C, None, 0.5, rho0, 1500, keep_states=False)
tm = mixing_times(position_marginal(traj.diagonals), fine, mixing_reference(basis, rho0))
te = report.estimate(fine)
print("\n  epsilon   measured   estimate   difference")
for e, a, b in zip(fine, tm, te):
    print(f"  {e:.0e}  {a:8d}  {b:9.1f}  {a - b:9.1f}")
