"""Seeded generators of smooth periodic fields for checks and studies."""

from __future__ import annotations

import numpy as np

from .gauge import PotentialSpec
from .lattice import LatticeGeom

__all__ = ["random_fourier_function", "random_potential", "random_gauge_function"]


def random_fourier_function(rng, lengths, amplitude=1.0, max_mode=2, n_terms=3):
    """A smooth periodic function of (t, x, y) from a few Fourier modes.

    Periodic in each spatial direction with the given lengths; smoothly
    oscillating in time.  Returns a closure that broadcasts over arrays.
    """
    lengths = tuple(lengths)
    terms = []
    for _ in range(n_terms):
        coeff = amplitude * rng.normal() / n_terms
        modes = tuple(int(rng.integers(-max_mode, max_mode + 1)) for _ in lengths)
        space_phase = rng.uniform(0, 2 * np.pi)
        omega = rng.uniform(0.0, 2.0)
        time_phase = rng.uniform(0, 2 * np.pi)
        terms.append((coeff, modes, space_phase, omega, time_phase))

    def f(t, x, y=0.0):
        coords = (x, y)[: len(lengths)]
        total = 0.0
        for coeff, modes, space_phase, omega, time_phase in terms:
            arg = space_phase
            for mode, coord, length in zip(modes, coords, lengths):
                arg = arg + 2 * np.pi * mode * np.asarray(coord) / length
            total = total + coeff * np.cos(arg) * np.cos(omega * np.asarray(t) + time_phase)
        return total

    return f


def _lengths(geom: LatticeGeom):
    if geom.dimension == 1:
        return (geom.extent_x * geom.spacing,)
    return (geom.extent_x * geom.spacing, geom.extent_y * geom.spacing)


def random_potential(rng, geom: LatticeGeom, charge: float, amplitude=1.0) -> PotentialSpec:
    """Random smooth periodic potential matched to the lattice periods."""
    lengths = _lengths(geom)
    return PotentialSpec(
        a0=random_fourier_function(rng, lengths, amplitude),
        a1=random_fourier_function(rng, lengths, amplitude),
        a2=random_fourier_function(rng, lengths, amplitude) if geom.dimension == 2 else None,
        charge=charge,
    )


def random_gauge_function(rng, geom: LatticeGeom, amplitude=1.0):
    """Random smooth periodic scalar for gauge transformations."""
    return random_fourier_function(rng, _lengths(geom), amplitude)
