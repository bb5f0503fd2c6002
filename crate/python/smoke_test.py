"""Smoke test for the bipartite extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
(or `maturin develop -m crates/py/Cargo.toml`), then run this script.
"""

import math
import random

import bipartite


def main():
    grid = bipartite.Grid(-6.0, 6.0, 16)
    h = bipartite.Hamiltonian(grid, "harmonic_oscillator", {"omega": 1.0})
    matched, dev = bipartite.match_gaps(h.gaps_direct(), h.gaps_pairwise(), 1e-8)
    assert matched, dev
    print(f"gap identity at N=16: max deviation {dev:.2e}")

    fine = bipartite.Hamiltonian(bipartite.Grid(-10.0, 10.0, 400), "harmonic_oscillator")
    e = fine.energies(3)
    assert abs(e[1] - e[0] - 1.0) < 1e-3
    gap = fine.stationary_gap(1, 0, 0.01, 200, 10)
    assert abs(gap - (e[1] - e[0])) < 1e-6 * (e[1] - e[0])
    print(f"stationary gap {gap:.9f} vs eigensolve {e[1] - e[0]:.9f}")

    rng = random.Random(0)
    small = bipartite.Grid(-1.0, 1.0, 8)
    amps = [[complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(8)] for _ in range(8)]
    scale = math.sqrt(small.dx ** 2 * sum(abs(z) ** 2 for row in amps for z in row))
    amps = [[z / scale for z in row] for row in amps]
    mu = bipartite.schmidt_coefficients(small, amps, 0.0)
    assert abs(sum(m * m for m in mu) - 1.0) < 1e-10
    print(f"schmidt rank {len(mu)}, entropy {bipartite.entanglement_entropy(small, amps):.4f}")

    screen = bipartite.Grid(-20.0, 20.0, 300)
    slits = ((-4.0, 1.5, 2.0), (4.0, 1.5, -2.0))
    _, _, s_wave = bipartite.double_slit(screen, *slits, "wave", (-10.0, 10.0))
    density, _, s_particle = bipartite.double_slit(screen, *slits, "particle", (-10.0, 10.0))
    assert abs(s_wave) < 1e-10 and abs(s_particle - math.log(2)) < 1e-6
    assert abs(screen.dx * sum(density) - 1.0) < 1e-12
    print(f"double slit entropies: wave {s_wave:.2e}, particle {s_particle:.6f}")
    print("smoke test passed")


if __name__ == "__main__":
    main()
