"""
Stationary, periodic and quasi-periodic limits
==============================================

A walker starts on vertex 0 with a pure coin state. Depending on the graph
and the coin it relaxes to the maximally mixed state, to another fixed state,
into a limit cycle, or into a never-repeating orbit.
"""

import math

import numpy as np

from percowalk import (
    AlphaRational,
    asymptotic_state,
    build_superoperator,
    classify_asymptotics,
    coin_family,
    evolve,
    hadamard,
    localized_initial_state,
    make_cycle,
    make_line,
    maximally_mixed,
    solve_attractors_spectral,
    trace_distance,
)

half = AlphaRational(1, 2)
up = dict(theta=half, phi=AlphaRational(-1, 2))
down = dict(theta=AlphaRational(-1, 2), phi=AlphaRational(-1))

runs = {
    "7-cycle, Hadamard": (make_cycle(7), hadamard(), up),
    "8-cycle, Hadamard": (make_cycle(8), hadamard(), up),
    "7-line, Hadamard": (make_line(7), hadamard(), down),
    "8-cycle, beta=sqrt(2)": (make_cycle(8), coin_family(half, math.sqrt(2)), down),
}

for name, (g, C, init) in runs.items():
    rho0 = localized_initial_state(g, 0, **init)
    basis = solve_attractors_spectral(build_superoperator(g, C, None, 0.5))
    verdict = classify_asymptotics(basis, rho0)
    traj = evolve(g, C, None, 0.5, rho0, 400)
    err = trace_distance(traj.states[-1], asymptotic_state(basis, rho0, 400))
    mixed = trace_distance(asymptotic_state(basis, rho0, 0), maximally_mixed(g.dim))
    print(f"{name:24s} {str(verdict).split(';')[0]:16s} dim {basis.dimension}  "
          f"|rho(400) - limit| {err:.1e}  distance of limit to I/2N {mixed:.3f}")

# On the line the position distribution settles but the chirality keeps
# oscillating with period four.
g, C, init = runs["7-line, Hadamard"]
rho0 = localized_initial_state(g, 0, **init)
traj = evolve(g, C, None, 0.5, rho0, 408, keep_states=False)
print("\nline, total coin-0 population over the last 8 steps:")
print(np.round(traj.diagonals[-8:, 0::2].sum(axis=1), 6))
