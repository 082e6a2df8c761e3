"""Brute-force oracles shared by the test suite.

The dense assemblers build every step operator as an explicit matrix with
scalar loops, independently of the vectorized kernels they check.  Amplitude
flattening matches numpy C order: index = (p * Ny + iy) * 2 + coin.
"""

import numpy as np


def coin_2x2(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, 1j * s], [1j * s, c]])


def dense_coin(geom, theta):
    n = geom.n_sites
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    cm = coin_2x2(theta)
    for site in range(n):
        out[2 * site : 2 * site + 2, 2 * site : 2 * site + 2] = cm
    return out


def _flat_index(geom, p, iy, coin):
    return (p * geom.extent_y + iy) * 2 + coin


def dense_shift(geom, axis, beta_minus, beta_plus):
    """Dense gauged shift along an axis; right movers advance one site."""
    n = geom.n_sites
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    bm = np.asarray(beta_minus, dtype=float).reshape(geom.site_shape)
    bp = np.asarray(beta_plus, dtype=float).reshape(geom.site_shape)
    nx, ny = geom.extent_x, geom.extent_y
    for p in range(nx):
        for iy in range(ny):
            if axis == 1:
                src_m = ((p - 1) % nx, iy)
                src_p = ((p + 1) % nx, iy)
            else:
                src_m = (p, (iy - 1) % ny)
                src_p = (p, (iy + 1) % ny)
            bm_val = bm[src_m] if geom.dimension == 2 else bm[src_m[0]]
            bp_val = bp[p, iy] if geom.dimension == 2 else bp[p]
            out[_flat_index(geom, p, iy, 0), _flat_index(geom, *src_m, 0)] = np.exp(1j * bm_val)
            out[_flat_index(geom, p, iy, 1), _flat_index(geom, *src_p, 1)] = np.exp(-1j * bp_val)
    return out


def dense_step_matrix(geom, theta, beta_minus, beta_plus, axis=1):
    """Explicit matrix of one (sub)step: shift after coin."""
    return dense_shift(geom, axis, beta_minus, beta_plus) @ dense_coin(geom, theta)


def dense_apply(matrix, state_amp):
    return (matrix @ state_amp.reshape(-1)).reshape(state_amp.shape)


def random_state_amp(geom, rng):
    amp = rng.normal(size=geom.amp_shape) + 1j * rng.normal(size=geom.amp_shape)
    return amp / np.linalg.norm(amp.reshape(-1))
