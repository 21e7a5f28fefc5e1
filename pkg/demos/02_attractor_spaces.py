"""
Attractor spaces of lines and cycles
====================================

The long-time dynamics lives in the span of operators ``X`` that every
percolated step maps to ``lambda X`` with ``|lambda| = 1``. On cycles the size
of that space depends on whether ``alpha`` fits the cycle length.
"""

from percowalk import (
    AlphaRational,
    build_superoperator,
    catalog_1d,
    coin_family,
    cycle_case,
    make_cycle,
    make_line,
    solve_attractors_spectral,
    solve_attractors_twostep,
)
from percowalk.attractors import max_basis_angle

beta = AlphaRational(1, 5)

# Lines always carry a five-dimensional attractor space with eigenvalues
# 1 (three times) and exp(+-2 i beta).
for N in (3, 6):
    basis = solve_attractors_spectral(build_superoperator(make_line(N), coin_family(AlphaRational(1, 3), beta), None, 0.5))
    print(f"line N={N}: dimension {basis.dimension}")

# Cycles dispatch on N and alpha = l pi / m.
print()
for N, alpha in [(7, AlphaRational(1, 2)), (8, AlphaRational(1, 2)), (5, AlphaRational(2, 5)),
                 (6, AlphaRational(1, 5)), (9, AlphaRational(1, 3))]:
    g = make_cycle(N)
    C = coin_family(alpha, beta)
    spec = solve_attractors_spectral(build_superoperator(g, C, None, 0.5))
    two = solve_attractors_twostep(g, C)
    cat = catalog_1d("cycle", N, alpha, beta)
    print(f"cycle N={N} alpha={alpha}: {cycle_case(N, alpha):20s} dimension {spec.dimension}  "
          f"two-step angle {max_basis_angle(spec, two):.1e}  closed form angle {max_basis_angle(spec, cat):.1e}")

# The eigenspaces do not move with p.
g = make_cycle(8)
C = coin_family(AlphaRational(1, 2), AlphaRational(1, 4))
a = solve_attractors_spectral(build_superoperator(g, C, None, 0.1))
b = solve_attractors_spectral(build_superoperator(g, C, None, 0.9))
print("\np=0.1 vs p=0.9 on the 8-cycle, largest principal angle:", max_basis_angle(a, b))
