"""Lattice geometry, walker states, and coin-space algebra.

The walker lives on a periodic 1D or 2D lattice and carries a two-dimensional
internal (coin) degree of freedom.  Amplitudes are stored site-major with the
coin index fastest-varying: shape ``(N, 2)`` in 1D and ``(Nx, Ny, 2)`` in 2D.
Coin component 0 is the right/up mover ``R`` = (1, 0)^T, component 1 the
left/down mover ``L`` = (0, 1)^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError

__all__ = [
    "COIN_R",
    "COIN_L",
    "LatticeGeom",
    "WalkerState",
    "CoinOperator",
    "coin_matrix",
    "apply_coin",
    "state_norm",
    "normalized",
    "gaussian_packet",
    "point_source",
]

COIN_R = 0
COIN_L = 1

_UNITARITY_TOL = 1e-13


@dataclass(frozen=True)
class LatticeGeom:
    """Periodic lattice geometry shared by walks and reference solvers.

    Parameters
    ----------
    dimension: int
        1 or 2.
    extent_x: int
        Number of sites along x (>= 2).
    extent_y: int
        Number of sites along y; must be 1 in 1D and >= 2 in 2D.
    spacing: float
        Lattice spacing, shared by space and time. Strictly positive.
    """

    dimension: int
    extent_x: int
    extent_y: int = 1
    spacing: float = 1.0

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValidationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.extent_x < 2:
            raise ValidationError(f"extent_x must be >= 2, got {self.extent_x}")
        if self.dimension == 1 and self.extent_y != 1:
            raise ValidationError("extent_y must be 1 for a 1D lattice")
        if self.dimension == 2 and self.extent_y < 2:
            raise ValidationError(f"extent_y must be >= 2 in 2D, got {self.extent_y}")
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise ValidationError(f"spacing must be positive and finite, got {self.spacing}")

    @property
    def site_shape(self) -> tuple[int, ...]:
        return (self.extent_x,) if self.dimension == 1 else (self.extent_x, self.extent_y)

    @property
    def amp_shape(self) -> tuple[int, ...]:
        return self.site_shape + (2,)

    @property
    def n_sites(self) -> int:
        return self.extent_x * self.extent_y

    @property
    def n_amplitudes(self) -> int:
        return 2 * self.n_sites

    def x_coords(self) -> NDArray[np.float64]:
        """Physical x coordinates, broadcastable over the site grid."""
        x = np.arange(self.extent_x) * self.spacing
        return x if self.dimension == 1 else x[:, None]

    def y_coords(self) -> NDArray[np.float64]:
        """Physical y coordinates (0.0 in 1D), broadcastable over the grid."""
        if self.dimension == 1:
            return np.zeros(1)
        return (np.arange(self.extent_y) * self.spacing)[None, :]


@dataclass(frozen=True)
class WalkerState:
    """Complex two-component amplitude field over a periodic lattice.

    The amplitude array is copied and frozen read-only so states have value
    semantics and can be shared between tasks.
    """

    geom: LatticeGeom
    amp: NDArray[np.complex128]
    time_index: int = 0

    def __post_init__(self):
        amp = np.array(self.amp, dtype=np.complex128, copy=True, order="C")
        if amp.shape != self.geom.amp_shape:
            raise ValidationError(
                f"amplitude shape {amp.shape} does not match lattice {self.geom.amp_shape}"
            )
        if self.time_index < 0:
            raise ValidationError(f"time_index must be >= 0, got {self.time_index}")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)

    def with_amp(self, amp: NDArray[np.complex128], time_index: int | None = None) -> "WalkerState":
        return WalkerState(self.geom, amp, self.time_index if time_index is None else time_index)


@dataclass(frozen=True)
class CoinOperator:
    """A 2x2 complex matrix acting on the coin space.

    The default constructor checks unitarity to 1e-13; use `unchecked` for
    non-unitary coin-space matrices (projectors, current stencil matrices).
    """

    m: NDArray[np.complex128]
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.m, dtype=np.complex128, copy=True)
        if m.shape != (2, 2):
            raise ValidationError(f"coin matrix must be 2x2, got shape {m.shape}")
        if self.validate:
            dev = np.max(np.abs(m.conj().T @ m - np.eye(2)))
            if dev > _UNITARITY_TOL:
                raise ValidationError(f"coin matrix is not unitary (deviation {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def unchecked(cls, m) -> "CoinOperator":
        return cls(m, validate=False)


def coin_matrix(theta: float) -> CoinOperator:
    """Coin rotation by angle `theta` about the first Pauli axis.

    Returns the unitary ``[[cos(theta/2), i sin(theta/2)],
    [i sin(theta/2), cos(theta/2)]]``.
    """
    if not math.isfinite(theta):
        raise ValidationError(f"coin angle must be finite, got {theta}")
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    return CoinOperator(np.array([[c, 1j * s], [1j * s, c]]))


def apply_coin(state: WalkerState, c: CoinOperator) -> WalkerState:
    """Apply a coin-space matrix at every site; does not advance time."""
    return state.with_amp(state.amp @ c.m.T)


def state_norm(state: WalkerState) -> float:
    """L2 norm of the amplitude field, summed in fixed site-major order."""
    flat = state.amp.reshape(-1)
    return float(np.sqrt(np.sum(flat.real**2 + flat.imag**2)))


def normalized(state: WalkerState) -> WalkerState:
    n = state_norm(state)
    if n == 0.0:
        raise ValidationError("cannot normalize a zero state")
    return state.with_amp(state.amp / n)


def _as_polarization(polarization) -> NDArray[np.complex128]:
    pol = np.asarray(polarization, dtype=np.complex128)
    if pol.shape != (2,):
        raise ValidationError(f"polarization must be a 2-vector, got shape {pol.shape}")
    n = np.linalg.norm(pol)
    if n == 0.0:
        raise ValidationError("polarization must be nonzero")
    return pol / n


def gaussian_packet(
    geom: LatticeGeom,
    center,
    width: float,
    momentum,
    polarization=(1.0, 0.0),
) -> WalkerState:
    """Normalized Gaussian wavepacket with mean quasimomentum.

    The envelope ``exp(-(r - center)^2 / (4 width^2)) exp(i k.r)`` is summed
    over the three nearest periodic images per axis so the sampled function is
    smooth on the torus, then normalized.

    Parameters
    ----------
    center, momentum:
        Scalars in 1D, length-2 sequences in 2D (physical units).
    width: float
        Probability standard deviation of the envelope.
    polarization:
        Coin-space amplitude pair, normalized internally.
    """
    if not (math.isfinite(width) and width > 0):
        raise ValidationError(f"width must be positive and finite, got {width}")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    momentum = np.atleast_1d(np.asarray(momentum, dtype=float))
    if center.shape != (geom.dimension,) or momentum.shape != (geom.dimension,):
        raise ValidationError("center and momentum must match the lattice dimension")
    pol = _as_polarization(polarization)

    def axis_envelope(coords, c0, length):
        env = np.zeros_like(coords)
        for image in (-1, 0, 1):
            d = coords - c0 + image * length
            env = env + np.exp(-(d**2) / (4 * width**2))
        return env

    x = np.arange(geom.extent_x) * geom.spacing
    lx = geom.extent_x * geom.spacing
    envelope = axis_envelope(x, center[0], lx)
    phase = momentum[0] * x
    if geom.dimension == 2:
        y = np.arange(geom.extent_y) * geom.spacing
        ly = geom.extent_y * geom.spacing
        envelope = envelope[:, None] * axis_envelope(y, center[1], ly)[None, :]
        phase = phase[:, None] + momentum[1] * y[None, :]
    scalar = envelope * np.exp(1j * phase)
    amp = scalar[..., None] * pol
    state = WalkerState(geom, amp)
    return normalized(state)


def point_source(geom: LatticeGeom, site, polarization=(1.0, 0.0)) -> WalkerState:
    """Normalized state supported on a single site."""
    site = np.atleast_1d(np.asarray(site, dtype=int))
    if site.shape != (geom.dimension,):
        raise ValidationError("site must match the lattice dimension")
    pol = _as_polarization(polarization)
    amp = np.zeros(geom.amp_shape, dtype=np.complex128)
    idx = (site[0] % geom.extent_x,)
    if geom.dimension == 2:
        idx = idx + (site[1] % geom.extent_y,)
    amp[idx] = pol
    return WalkerState(geom, amp)
