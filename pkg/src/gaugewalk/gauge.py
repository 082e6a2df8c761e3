"""Gauge potentials, lattice phases, discrete derivatives, and the field tensor.

Conventions
-----------
Phases are stored per evolution step: ``alpha[s]`` is the temporal phase used
by the step that advances the walker from time index ``s`` to ``s + 1`` (the
step operator itself is conventionally labeled ``s + 1``).  Phase fields are
sampled at the step's arrival time: ``t = (s + 1) eps`` in 1D and
``t = (s + 1) eps / 2`` in 2D, where consecutive 2D steps alternate the x and
y axes starting with x.

The one-link operators ``Sigma`` (sum) and ``Delta`` (difference) act along a
spacetime axis; combined they form discrete derivatives ``d_mu`` for which a
local phase change ``psi -> exp(i q chi) psi`` is an exact symmetry of the
walk.  The normalization differs between cases because 2D steps advance half
a time unit and carry half the temporal phase:

* 1D, both axes:        ``d = Delta Sigma / (2 eps_a)``
* 2D, spatial axes:     ``d_i = Delta_i Sigma_0 / (2 eps_a)``
* 2D, temporal axis:    ``d_0^k = Delta_0 Sigma_k / eps_a`` with ``k`` the
  spatial axis of the step (x for even step index, y for odd).

All of these tend to the corresponding partial derivative for smooth fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError, SamplingError, ValidationError
from .lattice import LatticeGeom

__all__ = [
    "PotentialSpec",
    "GaugePhases",
    "GaugeFunction",
    "FieldTensor",
    "sample_phases",
    "sigma_delta",
    "discrete_derivative",
    "gauge_transform",
    "covariant_samples",
    "field_tensor",
    "field_tensor_from_samples",
    "tensor_invariance_deviation",
    "pure_gauge_deviation",
]

FieldFunction = Callable[..., object]  # f(t, x, y) -> float or ndarray


@dataclass(frozen=True)
class PotentialSpec:
    """Contravariant potential components and coupling constants.

    ``a0``, ``a1``, ``a2`` are callables of ``(t, x, y)`` returning floats or
    broadcasting numpy arrays; ``a2`` must be None in 1D.  ``eps_a`` defaults
    to the lattice spacing at sampling time.
    """

    a0: FieldFunction
    a1: FieldFunction
    a2: FieldFunction | None = None
    charge: float = 1.0
    eps_a: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.charge):
            raise ValidationError("charge must be finite")
        if self.eps_a is not None and not (math.isfinite(self.eps_a) and self.eps_a > 0):
            raise ValidationError("eps_a must be positive and finite")

    @classmethod
    def zero(cls, dimension: int, charge: float = 1.0, eps_a: float | None = None):
        z = lambda t, x, y: np.zeros(np.broadcast(t, x, y).shape)
        return cls(z, z, z if dimension == 2 else None, charge=charge, eps_a=eps_a)

    def effective_eps_a(self, geom: LatticeGeom) -> float:
        return geom.spacing if self.eps_a is None else self.eps_a


@dataclass(frozen=True)
class GaugePhases:
    """Sampled lattice phases per evolution step.

    ``alpha`` and ``xi1`` (and ``xi2`` in 2D) have shape ``(n_steps,) +
    geom.site_shape``.  ``substep_halving`` marks that each step applies half
    the temporal phase, which is the 2D convention.
    """

    geom: LatticeGeom
    alpha: NDArray[np.float64]
    xi1: NDArray[np.float64]
    xi2: NDArray[np.float64] | None = None
    substep_halving: bool = False

    def __post_init__(self):
        for name in ("alpha", "xi1", "xi2"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        expected = (self.n_steps,) + self.geom.site_shape
        for name, arr in (("alpha", self.alpha), ("xi1", self.xi1), ("xi2", self.xi2)):
            if name == "xi2" and arr is None:
                continue
            if arr.shape != expected:
                raise ValidationError(f"{name} has shape {arr.shape}, expected {expected}")
        if self.geom.dimension == 2 and self.xi2 is None:
            raise ValidationError("xi2 is required on a 2D lattice")
        if self.geom.dimension == 1 and self.xi2 is not None:
            raise ValidationError("xi2 must be None on a 1D lattice")
        if self.substep_halving != (self.geom.dimension == 2):
            raise ValidationError("substep_halving must be set exactly in 2D")

    @property
    def n_steps(self) -> int:
        return self.alpha.shape[0]

    def axis(self, s: int) -> int:
        """Spatial axis moved by step ``s``: 1 in 1D; x/y alternating in 2D."""
        if self.geom.dimension == 1:
            return 1
        return 1 if s % 2 == 0 else 2

    def xi(self, s: int) -> NDArray[np.float64]:
        return self.xi1[s] if self.axis(s) == 1 else self.xi2[s]

    def _alpha_weight(self) -> float:
        return 0.5 if self.substep_halving else 1.0

    def beta_minus(self, s: int) -> NDArray[np.float64]:
        """Phase on right-mover paths of step ``s`` (recomputed, never stored)."""
        return self.xi(s) - self._alpha_weight() * self.alpha[s]

    def beta_plus(self, s: int) -> NDArray[np.float64]:
        """Phase on left-mover paths of step ``s``."""
        return self.xi(s) + self._alpha_weight() * self.alpha[s]

    @classmethod
    def zeros(cls, geom: LatticeGeom, n_steps: int) -> "GaugePhases":
        shape = (n_steps,) + geom.site_shape
        return cls(
            geom,
            np.zeros(shape),
            np.zeros(shape),
            np.zeros(shape) if geom.dimension == 2 else None,
            substep_halving=geom.dimension == 2,
        )


def _phase_times(geom: LatticeGeom, n_steps: int) -> NDArray[np.float64]:
    """Arrival times of steps 0..n_steps-1 per the dimension's convention."""
    steps = np.arange(1, n_steps + 1, dtype=float)
    if geom.dimension == 1:
        return steps * geom.spacing
    return steps * geom.spacing / 2.0


def state_times(geom: LatticeGeom, n_times: int) -> NDArray[np.float64]:
    """Times of walker states with indices 0..n_times-1."""
    idx = np.arange(n_times, dtype=float)
    return idx * geom.spacing if geom.dimension == 1 else idx * geom.spacing / 2.0


def _sample_field(fn: FieldFunction, t: float, geom: LatticeGeom, label: str, step: int):
    x = geom.x_coords()
    y = geom.y_coords()
    try:
        value = np.broadcast_to(np.asarray(fn(t, x, y), dtype=float), geom.site_shape)
    except Exception:
        value = _sample_pointwise(fn, t, geom, label, step)
    if not np.all(np.isfinite(value)):
        bad = np.argwhere(~np.isfinite(np.asarray(value)))[0]
        site = tuple(bad) if geom.dimension == 2 else (int(bad[0]),)
        raise SamplingError(f"{label} is non-finite at step {step}, site {site}")
    return np.array(value)


def _sample_pointwise(fn, t, geom, label, step):
    # slow path for scalar-only callables; also names the offending site
    out = np.empty(geom.site_shape)
    for p in range(geom.extent_x):
        for iy in range(geom.extent_y):
            try:
                v = float(fn(t, p * geom.spacing, iy * geom.spacing))
            except Exception as exc:
                site = (p,) if geom.dimension == 1 else (p, iy)
                raise SamplingError(
                    f"{label} failed at step {step}, site {site}: {exc}"
                ) from exc
            if geom.dimension == 1:
                out[p] = v
            else:
                out[p, iy] = v
    return out


def sample_phases(spec: PotentialSpec, geom: LatticeGeom, n_steps: int) -> GaugePhases:
    """Sample potentials onto per-step lattice phases.

    ``alpha = eps_a * q * A0`` and ``xi_i = eps_a * q * A_i`` (contravariant
    components), evaluated at each step's arrival time.
    """
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")
    if geom.dimension == 2 and spec.a2 is None:
        raise ValidationError("2D sampling requires an a2 component")
    eps_a = spec.effective_eps_a(geom)
    scale = eps_a * spec.charge
    times = _phase_times(geom, n_steps)
    shape = (n_steps,) + geom.site_shape
    alpha = np.empty(shape)
    xi1 = np.empty(shape)
    xi2 = np.empty(shape) if geom.dimension == 2 else None
    for s, t in enumerate(times):
        alpha[s] = scale * _sample_field(spec.a0, t, geom, "A0", s)
        xi1[s] = scale * _sample_field(spec.a1, t, geom, "A1", s)
        if xi2 is not None:
            xi2[s] = scale * _sample_field(spec.a2, t, geom, "A2", s)
    return GaugePhases(geom, alpha, xi1, xi2, substep_halving=geom.dimension == 2)


@dataclass(frozen=True)
class GaugeFunction:
    """A scalar gauge function, either analytic or pre-sampled.

    Sampled form has shape ``(n_times,) + geom.site_shape`` over state times.
    """

    fn: FieldFunction | None = None
    samples: NDArray[np.float64] | None = None

    def __post_init__(self):
        if (self.fn is None) == (self.samples is None):
            raise ValidationError("provide exactly one of fn or samples")

    def sample(self, geom: LatticeGeom, n_times: int) -> NDArray[np.float64]:
        if self.samples is not None:
            if self.samples.shape[0] < n_times:
                raise DomainError(
                    f"gauge function has {self.samples.shape[0]} time slices, needs {n_times}"
                )
            if self.samples.shape[1:] != geom.site_shape:
                raise ValidationError("sampled gauge function does not match the lattice")
            return np.asarray(self.samples[:n_times], dtype=float)
        out = np.empty((n_times,) + geom.site_shape)
        for j, t in enumerate(state_times(geom, n_times)):
            out[j] = _sample_field(self.fn, t, geom, "chi", j)
        return out


# ---------------------------------------------------------------------------
# one-link stencils
# ---------------------------------------------------------------------------

def sigma_delta(field: NDArray, axis: int, kind: str) -> NDArray:
    """One-link sum (`"sigma"`) or difference (`"delta"`) along a spacetime axis.

    Axis 0 is time: the result is defined on slices ``[0, T-1)`` and requires
    at least two stored slices.  Spatial axes (1 = x, 2 = y) wrap periodically.
    """
    field = np.asarray(field)
    if kind not in ("sigma", "delta"):
        raise ValidationError(f"kind must be 'sigma' or 'delta', got {kind!r}")
    if axis not in (0, 1, 2) or axis >= field.ndim:
        raise ValidationError(f"axis {axis} invalid for field of ndim {field.ndim}")
    sign = 1.0 if kind == "sigma" else -1.0
    if axis == 0:
        if field.shape[0] < 2:
            raise DomainError("time-axis stencil needs at least 2 time slices")
        return field[1:] + sign * field[:-1]
    return np.roll(field, -1, axis=axis) + sign * field


def discrete_derivative(
    chi: NDArray,
    mu: int,
    eps_a: float,
    *,
    dimension: int,
    parity: str | None = None,
) -> NDArray:
    """Discrete derivative ``d_mu`` of a sampled scalar over spacetime.

    In 2D the temporal derivative pairs the time difference with a one-link
    spatial sum along the axis selected by ``parity``: ``"even"`` pairs with
    x, ``"odd"`` with y (matching which axis the step starting at that time
    index moves).  Output is defined on time slices ``[0, T-1)``.
    """
    chi = np.asarray(chi, dtype=float)
    if dimension not in (1, 2):
        raise ValidationError("dimension must be 1 or 2")
    if chi.ndim != dimension + 1:
        raise ValidationError(f"chi must have {dimension + 1} axes, got {chi.ndim}")
    if dimension == 1:
        if mu == 0:
            return sigma_delta(sigma_delta(chi, 1, "sigma"), 0, "delta") / (2 * eps_a)
        if mu == 1:
            return sigma_delta(sigma_delta(chi, 0, "sigma"), 1, "delta") / (2 * eps_a)
        raise ValidationError(f"axis {mu} invalid in 1D")
    if mu == 0:
        if parity not in ("even", "odd"):
            raise ValidationError("2D temporal derivative requires parity 'even' or 'odd'")
        k = 1 if parity == "even" else 2
        return sigma_delta(sigma_delta(chi, k, "sigma"), 0, "delta") / eps_a
    if mu in (1, 2):
        return sigma_delta(sigma_delta(chi, 0, "sigma"), mu, "delta") / (2 * eps_a)
    raise ValidationError(f"axis {mu} invalid in 2D")


# ---------------------------------------------------------------------------
# gauge transformation of phases
# ---------------------------------------------------------------------------

def gauge_transform(
    phases: GaugePhases,
    chi: GaugeFunction | NDArray,
    charge: float,
    *,
    half_factor: bool = True,
) -> GaugePhases:
    """Shift phases so the walk maps ``psi -> exp(i q chi) psi`` exactly.

    The stencil for step ``s`` straddles the temporal link from state index
    ``s`` to ``s + 1``, so ``chi`` must cover ``n_steps + 1`` state times.

    ``half_factor=False`` drops the one-half stencil normalization everywhere
    (doubling every shift).  That variant breaks the symmetry by design and
    exists only as a negative control for the equivariance checks.
    """
    geom = phases.geom
    S = phases.n_steps
    if isinstance(chi, GaugeFunction):
        chi_s = chi.sample(geom, S + 1)
    else:
        chi_s = np.asarray(chi, dtype=float)
        if chi_s.shape[0] < S + 1:
            raise DomainError(f"chi has {chi_s.shape[0]} time slices, needs {S + 1}")
        chi_s = chi_s[: S + 1]
        if chi_s.shape[1:] != geom.site_shape:
            raise ValidationError("chi samples do not match the lattice")
    q = charge
    scale = 1.0 if half_factor else 2.0

    sigma0 = chi_s[1:] + chi_s[:-1]  # (S, sites)
    if geom.dimension == 1:
        d1s0 = np.roll(sigma0, -1, axis=1) - sigma0
        sigma1 = np.roll(chi_s, -1, axis=1) + chi_s
        d0s1 = sigma1[1:] - sigma1[:-1]
        alpha = phases.alpha - scale * (q / 2) * d0s1
        xi1 = phases.xi1 + scale * (q / 2) * d1s0
        return GaugePhases(geom, alpha, xi1, None, substep_halving=False)

    xi1 = phases.xi1 + scale * (q / 2) * (np.roll(sigma0, -1, axis=1) - sigma0)
    xi2 = phases.xi2 + scale * (q / 2) * (np.roll(sigma0, -1, axis=2) - sigma0)
    sig_x = np.roll(chi_s, -1, axis=1) + chi_s
    sig_y = np.roll(chi_s, -1, axis=2) + chi_s
    d0sx = sig_x[1:] - sig_x[:-1]
    d0sy = sig_y[1:] - sig_y[:-1]
    alpha = phases.alpha.copy()
    # temporal shift carries no 1/2: each 2D step applies alpha/2 over half
    # a time unit, and the two factors cancel exactly.
    alpha[0::2] -= scale * q * d0sx[0::2]
    alpha[1::2] -= scale * q * d0sy[1::2]
    return GaugePhases(geom, alpha, xi1, xi2, substep_halving=True)


# ---------------------------------------------------------------------------
# lattice field tensor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldTensor:
    """Antisymmetric lattice field tensor on time slices ``[0, T-1)``.

    1D holds the electric component ``f01``; 2D adds ``f02`` and the
    out-of-plane magnetic component ``f12``.
    """

    dimension: int
    f01: NDArray[np.float64]
    f02: NDArray[np.float64] | None = None
    f12: NDArray[np.float64] | None = None

    def component(self, mu: int, nu: int) -> NDArray[np.float64]:
        """Signed lookup F_{mu nu}; antisymmetry is exact by construction."""
        if mu == nu:
            return np.zeros_like(self.f01)
        key = (min(mu, nu), max(mu, nu))
        stored = {(0, 1): self.f01, (0, 2): self.f02, (1, 2): self.f12}.get(key)
        if stored is None:
            raise ValidationError(f"component F[{mu},{nu}] undefined in {self.dimension}D")
        return stored if mu < nu else -stored


def covariant_samples(spec: PotentialSpec, geom: LatticeGeom, n_times: int):
    """Covariant components (A_0, A_1[, A_2]) sampled at state times.

    The temporal component equals the contravariant one; spatial components
    flip sign.
    """
    times = state_times(geom, n_times)
    shape = (n_times,) + geom.site_shape
    a0 = np.empty(shape)
    a1 = np.empty(shape)
    a2 = np.empty(shape) if geom.dimension == 2 else None
    for j, t in enumerate(times):
        a0[j] = _sample_field(spec.a0, t, geom, "A0", j)
        a1[j] = -_sample_field(spec.a1, t, geom, "A1", j)
        if a2 is not None:
            a2[j] = -_sample_field(spec.a2, t, geom, "A2", j)
    return (a0, a1) if a2 is None else (a0, a1, a2)


def field_tensor_from_samples(cov, eps_a: float, dimension: int) -> FieldTensor:
    """Field tensor from covariant potential samples.

    In 2D the temporal derivative entering ``F_{0i}`` is matched to the
    spatial axis ``i``, so the two electric components use different
    temporal stencils.
    """
    if dimension == 1:
        a0, a1 = cov
        f01 = discrete_derivative(a1, 0, eps_a, dimension=1) - discrete_derivative(
            a0, 1, eps_a, dimension=1
        )
        return FieldTensor(1, f01)
    a0, a1, a2 = cov
    f01 = discrete_derivative(a1, 0, eps_a, dimension=2, parity="even") - discrete_derivative(
        a0, 1, eps_a, dimension=2
    )
    f02 = discrete_derivative(a2, 0, eps_a, dimension=2, parity="odd") - discrete_derivative(
        a0, 2, eps_a, dimension=2
    )
    f12 = discrete_derivative(a2, 1, eps_a, dimension=2) - discrete_derivative(
        a1, 2, eps_a, dimension=2
    )
    return FieldTensor(2, f01, f02, f12)


def field_tensor(spec: PotentialSpec, geom: LatticeGeom, n_times: int) -> FieldTensor:
    """Field tensor of a potential, sampled on the state-time grid."""
    cov = covariant_samples(spec, geom, n_times)
    return field_tensor_from_samples(cov, spec.effective_eps_a(geom), geom.dimension)


def _transform_covariant(cov, chi, eps_a, dimension, temporal_axis):
    """Covariant components shifted by -d chi, with the temporal derivative
    matched to the given spatial axis (the combination entering F_{0 axis})."""
    if dimension == 1:
        a0, a1 = cov
        d0 = discrete_derivative(chi, 0, eps_a, dimension=1)
        d1 = discrete_derivative(chi, 1, eps_a, dimension=1)
        return a0[:-1] - d0, a1[:-1] - d1
    a0 = cov[0]
    ai = cov[temporal_axis]
    parity = "even" if temporal_axis == 1 else "odd"
    d0 = discrete_derivative(chi, 0, eps_a, dimension=2, parity=parity)
    di = discrete_derivative(chi, temporal_axis, eps_a, dimension=2)
    return a0[:-1] - d0, ai[:-1] - di


def tensor_invariance_deviation(cov, chi, eps_a: float, dimension: int) -> float:
    """Max |F[A - d chi] - F[A]| over all components; exact up to rounding."""
    chi = np.asarray(chi, dtype=float)
    if dimension == 1:
        a0, a1 = cov
        base = field_tensor_from_samples((a0[:-1], a1[:-1]), eps_a, 1)
        a0t, a1t = _transform_covariant(cov, chi, eps_a, 1, 1)
        shifted = field_tensor_from_samples((a0t, a1t), eps_a, 1)
        return float(np.max(np.abs(shifted.f01 - base.f01)))
    a0, a1, a2 = cov
    base = field_tensor_from_samples((a0[:-1], a1[:-1], a2[:-1]), eps_a, 2)
    dev = 0.0
    for axis, component in ((1, "f01"), (2, "f02")):
        a0t, ait = _transform_covariant(cov, chi, eps_a, 2, axis)
        others = {1: a1[:-1], 2: a2[:-1]}
        others[axis] = ait
        shifted = field_tensor_from_samples((a0t, others[1], others[2]), eps_a, 2)
        dev = max(dev, float(np.max(np.abs(getattr(shifted, component) - getattr(base, component)))))
    # magnetic component: both spatial shifts at once
    d1 = discrete_derivative(chi, 1, eps_a, dimension=2)
    d2 = discrete_derivative(chi, 2, eps_a, dimension=2)
    shifted = field_tensor_from_samples((a0[:-1], a1[:-1] - d1, a2[:-1] - d2), eps_a, 2)
    dev = max(dev, float(np.max(np.abs(shifted.f12 - base.f12))))
    return dev


def pure_gauge_deviation(chi, eps_a: float, dimension: int) -> float:
    """Max |F| for the pure-gauge potential A = d chi; zero up to rounding."""
    chi = np.asarray(chi, dtype=float)
    if dimension == 1:
        cov = (
            discrete_derivative(chi, 0, eps_a, dimension=1),
            discrete_derivative(chi, 1, eps_a, dimension=1),
        )
        return float(np.max(np.abs(field_tensor_from_samples(cov, eps_a, 1).f01)))
    d1 = discrete_derivative(chi, 1, eps_a, dimension=2)
    d2 = discrete_derivative(chi, 2, eps_a, dimension=2)
    d0x = discrete_derivative(chi, 0, eps_a, dimension=2, parity="even")
    d0y = discrete_derivative(chi, 0, eps_a, dimension=2, parity="odd")
    f01 = field_tensor_from_samples((d0x, d1, d2), eps_a, 2).f01
    f02 = field_tensor_from_samples((d0y, d1, d2), eps_a, 2).f02
    f12 = field_tensor_from_samples((d0x, d1, d2), eps_a, 2).f12
    return float(max(np.max(np.abs(f01)), np.max(np.abs(f02)), np.max(np.abs(f12))))
