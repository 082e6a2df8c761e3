#!/usr/bin/env python3
"""Walk basics: ballistic spreading, and how a small coin angle acts as mass.

A free walker with zero coin angle splits into two counter-propagating
fronts that move one site per step.  Tying the angle to a mass slows the
fronts and fills the interior, which is the hallmark of the massive
continuum limit.  Run with --plot to write walk_profiles.png.
"""

import argparse

import numpy as np

from gaugewalk import (
    GaugePhases,
    LatticeGeom,
    WalkParams1D,
    evolve,
    gaussian_packet,
    probability_density,
)


def spread(state):
    geom = state.geom
    x = (np.arange(geom.extent_x) - geom.extent_x / 2) * geom.spacing
    dens = probability_density(state)
    dens = np.roll(dens, geom.extent_x // 2 - int(np.argmax(dens)) if False else 0)
    mean = float(np.sum(x * dens))
    return float(np.sqrt(np.sum((x - mean) ** 2 * dens)))


def run(mass, n_steps, geom):
    params = WalkParams1D.continuum_family(mass=mass, charge=1.0, eps_m=geom.spacing)
    phases = GaugePhases.zeros(geom, n_steps)
    packet = gaussian_packet(
        geom,
        center=geom.extent_x * geom.spacing / 2,
        width=geom.spacing * 4,
        momentum=0.0,
        polarization=(1.0, 1j),
    )
    return evolve(packet, n_steps, phases, params, keep="last")[0]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--plot", action="store_true", help="write walk_profiles.png")
    args = parser.parse_args()

    geom = LatticeGeom(1, 256, spacing=0.1)
    n_steps = 100
    print(f"lattice: {geom.extent_x} sites, spacing {geom.spacing}, {n_steps} steps\n")
    print(f"{'mass':>6s} {'rms spread':>12s}")
    finals = {}
    for mass in (0.0, 1.0, 4.0):
        final = run(mass, n_steps, geom)
        finals[mass] = final
        print(f"{mass:6.1f} {spread(final):12.4f}")
    print("\nheavier walkers spread more slowly, as the continuum limit predicts")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        x = np.arange(geom.extent_x) * geom.spacing
        fig, ax = plt.subplots(figsize=(7, 4))
        for mass, final in finals.items():
            ax.plot(x, probability_density(final), label=f"mass = {mass:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("probability")
        ax.legend()
        fig.tight_layout()
        fig.savefig("walk_profiles.png", dpi=120)
        print("wrote walk_profiles.png")


if __name__ == "__main__":
    main()
