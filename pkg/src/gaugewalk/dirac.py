"""Reference continuum solver for the minimally coupled Dirac equation.

Used to verify the walks' continuum limits.  The Hamiltonian form is

    i d/dt psi = [ q A0 + G1 (-i d/dx - q A1) + G2 (-i d/dy - q A2) + m G0 ] psi

with coin-space matrices G0 = sigma1 and, in 1D, G1 = sigma3; in 2D,
G1 = -sigma2 and G2 = sigma3 (matching the walks' continuum limits in the
same basis, with the identity map between coin and spinor components).

Spatial derivatives are spectral on the periodic grid; time integration is
the classical fourth-order explicit scheme, so the reference error sits far
below the first-order walk error being measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import SolverInstabilityError, ValidationError
from .gauge import PotentialSpec
from .lattice import LatticeGeom

__all__ = [
    "gamma_set",
    "DiracConfig",
    "SpinorField",
    "dirac_step",
    "evolve_dirac",
    "continuum_current",
    "current_divergence",
    "ConvergenceCase",
    "ConvergenceResult",
    "convergence_study",
]

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)

_ABORT_DRIFT = 1e-6


def gamma_set(dimension: int) -> tuple[NDArray[np.complex128], ...]:
    """Gamma matrices with signature (+,-) / (+,-,-)."""
    if dimension == 1:
        return (SIGMA1, -1j * SIGMA2)
    if dimension == 2:
        return (SIGMA1, -1j * SIGMA3, -1j * SIGMA2)
    raise ValidationError("dimension must be 1 or 2")


def _pair_matrices(dimension: int):
    """Matrices gamma^0 gamma^i multiplying the kinetic terms."""
    if dimension == 1:
        return (SIGMA3,)
    return (-SIGMA2, SIGMA3)


@dataclass(frozen=True)
class SpinorField:
    """Two-component spinor samples on the spatial grid at a given time."""

    geom: LatticeGeom
    amp: NDArray[np.complex128]
    t: float = 0.0

    def __post_init__(self):
        amp = np.array(self.amp, dtype=np.complex128, copy=True)
        if amp.shape != self.geom.amp_shape:
            raise ValidationError(
                f"spinor shape {amp.shape} does not match lattice {self.geom.amp_shape}"
            )
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp.reshape(-1)))


@dataclass
class DiracConfig:
    """Solver configuration; `dt` must respect the spectral stability bound.

    For the fourth-order scheme with spectral derivatives the bound is about
    ``2.8 / k_max`` with ``k_max = pi * sqrt(dim) / spacing``; construction
    rejects dt beyond it.
    """

    geom: LatticeGeom
    mass: float
    charge: float
    dt: float
    potential: PotentialSpec | None = None
    _kx: NDArray = field(init=False, repr=False)
    _ky: NDArray | None = field(init=False, repr=False, default=None)
    _field_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError("dt must be positive and finite")
        k_max = math.pi / self.geom.spacing * math.sqrt(self.geom.dimension)
        bound = 2.8 / k_max
        if self.dt > bound:
            raise ValidationError(
                f"dt={self.dt} exceeds the stability bound {bound:.3e} for this grid"
            )
        kx = 2 * math.pi * np.fft.fftfreq(self.geom.extent_x, d=self.geom.spacing)
        self._kx = kx if self.geom.dimension == 1 else kx[:, None]
        if self.geom.dimension == 2:
            ky = 2 * math.pi * np.fft.fftfreq(self.geom.extent_y, d=self.geom.spacing)
            self._ky = ky[None, :]

    def fields_at(self, t: float):
        """Potential components on the grid at time t (None if no potential).

        Stage times repeat between consecutive steps, so a small cache pays.
        """
        if self.potential is None:
            return None
        key = round(t, 12)
        hit = self._field_cache.get(key)
        if hit is not None:
            return hit
        x, y = self.geom.x_coords(), self.geom.y_coords()
        shape = self.geom.site_shape
        a0 = np.broadcast_to(np.asarray(self.potential.a0(t, x, y), dtype=float), shape)
        a1 = np.broadcast_to(np.asarray(self.potential.a1(t, x, y), dtype=float), shape)
        a2 = None
        if self.geom.dimension == 2:
            a2 = np.broadcast_to(np.asarray(self.potential.a2(t, x, y), dtype=float), shape)
        if len(self._field_cache) > 16:
            self._field_cache.clear()
        self._field_cache[key] = (a0, a1, a2)
        return a0, a1, a2


def _spectral_derivative(amp: NDArray, k, axis: int) -> NDArray:
    spectrum = np.fft.fft(amp, axis=axis)
    return np.fft.ifft(1j * k[..., None] * spectrum, axis=axis)


def _apply_hamiltonian(amp: NDArray, t: float, cfg: DiracConfig) -> NDArray:
    geom = cfg.geom
    q = cfg.charge
    pairs = _pair_matrices(geom.dimension)
    fields = cfg.fields_at(t)

    out = np.zeros_like(amp)
    kin_x = -1j * _spectral_derivative(amp, cfg._kx, axis=0)
    if fields is not None:
        a0, a1, a2 = fields
        out += (q * a0)[..., None] * amp
        kin_x = kin_x - (q * a1)[..., None] * amp
    out += kin_x @ pairs[0].T
    if geom.dimension == 2:
        kin_y = -1j * _spectral_derivative(amp, cfg._ky, axis=1)
        if fields is not None:
            kin_y = kin_y - (q * fields[2])[..., None] * amp
        out += kin_y @ pairs[1].T
    if cfg.mass != 0.0:
        out += cfg.mass * (amp @ SIGMA1.T)
    return out


def dirac_step(spinor: SpinorField, cfg: DiracConfig) -> SpinorField:
    """One fourth-order explicit step of i d/dt psi = H(t) psi."""
    amp = spinor.amp
    t = spinor.t
    dt = cfg.dt

    def rhs(a, tau):
        return -1j * _apply_hamiltonian(a, tau, cfg)

    k1 = rhs(amp, t)
    k2 = rhs(amp + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(amp + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(amp + dt * k3, t + dt)
    new_amp = amp + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return SpinorField(spinor.geom, new_amp, t + dt)


def evolve_dirac(spinor: SpinorField, cfg: DiracConfig, n_steps: int) -> SpinorField:
    """Evolve `n_steps` steps, aborting if normalization drifts past 1e-6."""
    n0 = spinor.norm()
    current = spinor
    for _ in range(n_steps):
        current = dirac_step(current, cfg)
        drift = abs(current.norm() - n0)
        if drift > _ABORT_DRIFT:
            raise SolverInstabilityError(
                f"norm drift {drift:.3e} at t={current.t:.6g} (dt={cfg.dt:.3e}); "
                "reduce dt or check the potential"
            )
    return current


def continuum_current(spinor: SpinorField):
    """Current components (j0, jx[, jy]) = psi-bar gamma^mu psi."""
    amp = spinor.amp
    j0 = (amp.real**2 + amp.imag**2).sum(axis=-1)
    pairs = _pair_matrices(spinor.geom.dimension)
    out = [j0]
    for g in pairs:
        val = np.einsum("...c,cd,...d->...", amp.conj(), g, amp)
        out.append(val.real)
    return tuple(out)


def current_divergence(spinor: SpinorField, cfg: DiracConfig) -> NDArray[np.float64]:
    """Pointwise d_t j0 + div j, with d_t j0 taken from the equation of motion."""
    amp = spinor.amp
    h_amp = _apply_hamiltonian(amp, spinor.t, cfg)
    dj0_dt = 2.0 * np.einsum("...c,...c->...", amp.conj(), -1j * h_amp).real
    currents = continuum_current(spinor)
    div = _spectral_derivative(currents[1][..., None], cfg._kx, axis=0)[..., 0].real
    if spinor.geom.dimension == 2:
        div = div + _spectral_derivative(currents[2][..., None], cfg._ky, axis=1)[..., 0].real
    return dj0_dt + div


# ---------------------------------------------------------------------------
# walk-versus-reference convergence study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceCase:
    """A continuum problem plus wavepacket, discretized at several spacings.

    The domain has physical length ``domain`` per axis; each spacing ``eps``
    in the study uses ``domain / eps`` sites per axis and evolves to
    ``final_time`` (an integer multiple of every eps).
    """

    dimension: int
    domain: float
    final_time: float
    mass: float
    charge: float
    a0: object = None  # callables (t, x, y) -> float/array; None means zero
    a1: object = None
    a2: object = None
    packet_center: tuple = (0.5,)
    packet_width: float = 0.1
    packet_momentum: tuple = (0.0,)
    polarization: tuple = (1.0, 0.0)


@dataclass(frozen=True)
class ConvergenceResult:
    eps: NDArray[np.float64]
    errors: NDArray[np.float64]
    slope: float
    monotone: bool


def _zero_field(t, x, y):
    return np.zeros(np.broadcast(t, x, y).shape)


def _case_potential(case: ConvergenceCase, eps: float) -> PotentialSpec | None:
    if case.a0 is None and case.a1 is None and case.a2 is None:
        return None
    return PotentialSpec(
        a0=case.a0 or _zero_field,
        a1=case.a1 or _zero_field,
        a2=(case.a2 or _zero_field) if case.dimension == 2 else None,
        charge=case.charge,
        eps_a=eps,
    )


def _walk_error_at(case: ConvergenceCase, eps: float, dt_factor: float) -> float:
    from .evolution import WalkParams1D, WalkParams2D, evolve
    from .gauge import GaugePhases, sample_phases
    from .lattice import gaussian_packet

    n = case.domain / eps
    if abs(n - round(n)) > 1e-9:
        raise ValidationError(f"domain {case.domain} is not a multiple of eps {eps}")
    n = int(round(n))
    steps = case.final_time / eps
    if abs(steps - round(steps)) > 1e-9:
        raise ValidationError(f"final_time {case.final_time} is not a multiple of eps {eps}")
    steps = int(round(steps))

    geom = LatticeGeom(case.dimension, n, n if case.dimension == 2 else 1, eps)
    psi0 = gaussian_packet(
        geom, case.packet_center, case.packet_width, case.packet_momentum, case.polarization
    )
    spec = _case_potential(case, eps)
    n_sub = steps if case.dimension == 1 else 2 * steps
    if spec is None:
        phases = GaugePhases.zeros(geom, n_sub)
    else:
        phases = sample_phases(spec, geom, n_sub)
    if case.dimension == 1:
        params = WalkParams1D.continuum_family(case.mass, case.charge, eps_m=eps)
    else:
        params = WalkParams2D.continuum_family(case.mass, case.charge, eps_m=eps)
    final_walk = evolve(psi0, n_sub, phases, params, keep="last")[0]

    dt = eps * dt_factor
    n_dt = int(round(case.final_time / dt))
    cfg = DiracConfig(geom, case.mass, case.charge, dt, potential=spec)
    final_ref = evolve_dirac(SpinorField(geom, psi0.amp, 0.0), cfg, n_dt)
    return float(np.linalg.norm((final_walk.amp - final_ref.amp).reshape(-1)))


def convergence_study(
    case: ConvergenceCase, eps_list, dt_factor: float = 0.25
) -> ConvergenceResult:
    """L2 walk-versus-reference error per spacing, with fitted log-log slope.

    A non-monotone error sequence is flagged in the result, not fatal.
    """
    eps_arr = np.asarray(sorted(eps_list, reverse=True), dtype=float)
    if eps_arr.size < 2:
        raise ValidationError("need at least two spacings")
    errors = np.array([_walk_error_at(case, e, dt_factor) for e in eps_arr])
    slope = float(np.polyfit(np.log(eps_arr), np.log(np.maximum(errors, 1e-300)), 1)[0])
    monotone = bool(np.all(np.diff(errors) < 0))
    return ConvergenceResult(eps=eps_arr, errors=errors, slope=slope, monotone=monotone)
