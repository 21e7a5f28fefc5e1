"""
Averaging over percolated edges, locally
========================================

One step of the walk draws every edge independently with probability ``p``.
Averaging over all ``2^|E|`` configurations is exact but exponential. Each
matrix element only cares about the one or two edges that govern its slots,
so the same average can be taken edge by edge.
"""

import time

import numpy as np

from percowalk import apply_channel_bruteforce, apply_channel_local, coin_family, make_cycle

rng = np.random.default_rng(1)

# a random mixed state on the 5-cycle and a generic coin
g = make_cycle(5)
coin = coin_family(0.8, 0.6)
G = rng.normal(size=(g.dim, g.dim)) + 1j * rng.normal(size=(g.dim, g.dim))
rho = G @ G.conj().T
rho /= np.trace(rho)

local = apply_channel_local(g, coin, None, 0.3, rho)
brute = apply_channel_bruteforce(g, coin, None, 0.3, rho)
print("max |local - brute force| =", np.abs(local - brute).max())

# The brute-force sum grows like 2^N on a cycle, the local one like N^2.
for N in (6, 9, 12):
    g = make_cycle(N)
    rho = np.eye(g.dim, dtype=complex) / g.dim
    t0 = time.perf_counter()
    apply_channel_bruteforce(g, coin, None, 0.3, rho)
    t_brute = time.perf_counter() - t0
    t0 = time.perf_counter()
    apply_channel_local(g, coin, None, 0.3, rho)
    t_local = time.perf_counter() - t0
    print(f"N={N:2d}  brute force {t_brute * 1e3:8.1f} ms   local {t_local * 1e3:6.2f} ms")

# Past 20 edges enumeration is refused outright.
try:
    apply_channel_bruteforce(make_cycle(20), coin, None, 0.3, np.eye(40) / 40)
except Exception as exc:
    print(type(exc).__name__ + ":", exc)
