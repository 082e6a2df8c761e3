"""Probability density, lattice currents, and the exact continuity residual.

The 2D walk conserves a current built over two full steps: with symmetric
half-differences ``D_sym f = (f(+1) - f(-1)) / 2`` along each spacetime axis,
``D0_sym J0 + D1_sym Jx + D2_sym Jy`` vanishes identically for any unitary
coin pair and arbitrary phase fields (checked here to rounding).  ``Jx`` at an
even time index ``j`` is assembled from the y-substep arriving at ``j``;
``Jy`` from the x-substep departing ``j``.

A 1D analogue holds over the (t - eps, t, t + eps) window with the local,
phase-free current ``psi^dag (C^dag P_R C - P_L) psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ContractError, StencilConsistencyError, ValidationError
from .gauge import GaugePhases
from .lattice import COIN_L, COIN_R, LatticeGeom, WalkerState, coin_matrix

__all__ = [
    "MSet",
    "m_set",
    "probability_density",
    "current_x",
    "current_y",
    "current_1d",
    "symmetric_difference",
    "continuity_residual",
    "single_step_probability_drift",
    "ContinuityReport",
    "CurrentField",
    "measure_currents",
]

_IMAG_TOL = 1e-10
_IDENTITY_TOL = 1e-13

PROJ_R = np.diag([1.0, 0.0]).astype(complex)
PROJ_L = np.diag([0.0, 1.0]).astype(complex)


def _dag(m: NDArray) -> NDArray:
    return m.conj().T


@dataclass(frozen=True)
class MSet:
    """The sixteen coin-space matrices entering the 2D current stencils.

    ``m_rx``.. are the projected coins ``P_s C_i``; ``mx``/``my`` hold the
    four x/y stencil matrices; ``mlam`` the four density-difference matrices.
    The linear relations tying ``mlam`` to ``mx``/``my`` (which make the
    continuity equation close) are asserted at construction.
    """

    theta1: float
    theta2: float
    m_rx: NDArray[np.complex128]
    m_lx: NDArray[np.complex128]
    m_ry: NDArray[np.complex128]
    m_ly: NDArray[np.complex128]
    mx: tuple
    my: tuple
    mlam: tuple


def m_set(theta1: float, theta2: float) -> MSet:
    """Assemble the current stencil matrices for a coin-angle pair."""
    if not (math.isfinite(theta1) and math.isfinite(theta2)):
        raise ValidationError("coin angles must be finite")
    cx = coin_matrix(theta1).m
    cy = coin_matrix(theta2).m
    m_rx, m_lx = PROJ_R @ cx, PROJ_L @ cx
    m_ry, m_ly = PROJ_R @ cy, PROJ_L @ cy

    mx1 = m_ry @ m_rx @ _dag(m_rx) @ _dag(m_ly)
    mx2 = m_ly @ m_rx @ _dag(m_rx) @ _dag(m_ry)
    mx3 = PROJ_L @ cy @ PROJ_R @ _dag(cy) @ PROJ_L
    mx4 = PROJ_R @ cy @ PROJ_R @ _dag(cy) @ PROJ_R - _dag(cx) @ PROJ_L @ cx

    my1 = _dag(m_lx) @ _dag(m_ry) @ m_ry @ m_rx
    my2 = _dag(m_rx) @ _dag(m_ry) @ m_ry @ m_lx
    my3 = _dag(cx) @ PROJ_L @ _dag(cy) @ PROJ_R @ cy @ PROJ_L @ cx
    my4 = _dag(cx) @ PROJ_R @ _dag(cy) @ PROJ_R @ cy @ PROJ_R @ cx - PROJ_L

    ml1 = _dag(m_lx) @ _dag(m_ry) @ m_ry @ m_lx - m_ly @ m_rx @ _dag(m_rx) @ _dag(m_ly)
    ml2 = _dag(m_lx) @ _dag(m_ly) @ m_ly @ m_lx - m_ry @ m_rx @ _dag(m_rx) @ _dag(m_ry)
    ml3 = _dag(m_rx) @ _dag(m_ry) @ m_ry @ m_rx - m_ly @ m_lx @ _dag(m_lx) @ _dag(m_ly)
    ml4 = _dag(m_rx) @ _dag(m_ly) @ m_ly @ m_rx - m_ry @ m_lx @ _dag(m_lx) @ _dag(m_ry)

    for lhs, rhs, name in (
        (ml1, my3 - mx3, "mlam1"),
        (ml2, -my3 - mx4, "mlam2"),
        (ml3, my4 + mx3, "mlam3"),
        (ml4, -my4 + mx4, "mlam4"),
    ):
        dev = float(np.max(np.abs(lhs - rhs)))
        if dev > _IDENTITY_TOL:
            raise StencilConsistencyError(
                f"stencil identity {name} violated by {dev:.3e}"
            )

    return MSet(
        theta1,
        theta2,
        m_rx,
        m_lx,
        m_ry,
        m_ly,
        mx=(mx1, mx2, mx3, mx4),
        my=(my1, my2, my3, my4),
        mlam=(ml1, ml2, ml3, ml4),
    )


def probability_density(state: WalkerState) -> NDArray[np.float64]:
    """Per-site probability |amp_R|^2 + |amp_L|^2."""
    a = state.amp
    return (a.real**2 + a.imag**2).sum(axis=-1)


def _sandwich(left: NDArray, m: NDArray, right: NDArray) -> NDArray:
    """Per-site left^dag M right over the coin axis."""
    return np.einsum("...c,cd,...d->...", left.conj(), m, right)


def _real_or_raise(field: NDArray, label: str) -> NDArray[np.float64]:
    residue = float(np.max(np.abs(field.imag))) if field.size else 0.0
    if residue > _IMAG_TOL:
        raise StencilConsistencyError(
            f"{label} carries imaginary residue {residue:.3e}; stencil bug"
        )
    return field.real.copy()


def _require_current_time(state: WalkerState, offset_exists: int):
    if state.geom.dimension != 2:
        raise ContractError("2D current requested on a non-2D state")
    j = state.time_index
    if j % 2 != 0:
        raise ContractError(f"currents are defined at even time indices, got {j}")
    if offset_exists < 0:
        raise ContractError(f"current at time index {j} needs step {offset_exists}")


def current_x(state: WalkerState, phases: GaugePhases, mset: MSet) -> NDArray[np.float64]:
    """Lattice current along x at an even time index.

    Couples the amplitudes at ``y - eps`` and ``y + eps`` through the
    y-substep that arrived at this state, with that substep's phases.
    """
    j = state.time_index
    _require_current_time(state, j - 1)
    s = j - 1
    if s >= phases.n_steps:
        raise ContractError(f"phase schedule lacks step {s}")
    bm = phases.beta_minus(s)
    bp = phases.beta_plus(s)
    a = state.amp
    ym = np.roll(a, 1, axis=1)   # amplitudes at y - eps
    yp = np.roll(a, -1, axis=1)  # amplitudes at y + eps
    phase = np.exp(1j * (bm + np.roll(bp, 1, axis=1)))
    mx1, mx2, mx3, mx4 = mset.mx
    total = (
        phase * _sandwich(yp, mx1, ym)
        + np.conj(phase) * _sandwich(ym, mx2, yp)
        + _sandwich(ym, mx3, ym)
        + _sandwich(yp, mx4, yp)
    )
    return _real_or_raise(total, "current_x")


def current_y(state: WalkerState, phases: GaugePhases, mset: MSet) -> NDArray[np.float64]:
    """Lattice current along y at an even time index.

    Couples the amplitudes at ``x - eps`` and ``x + eps`` through the
    x-substep departing this state, with that substep's phases.
    """
    j = state.time_index
    _require_current_time(state, 0)
    s = j
    if s >= phases.n_steps:
        raise ContractError(f"phase schedule lacks step {s}")
    bm = phases.beta_minus(s)
    bp = phases.beta_plus(s)
    a = state.amp
    xm = np.roll(a, 1, axis=0)
    xp = np.roll(a, -1, axis=0)
    phase = np.exp(1j * (bp + np.roll(bm, 1, axis=0)))
    my1, my2, my3, my4 = mset.my
    total = (
        phase * _sandwich(xp, my1, xm)
        + np.conj(phase) * _sandwich(xm, my2, xp)
        + _sandwich(xp, my3, xp)
        + _sandwich(xm, my4, xm)
    )
    return _real_or_raise(total, "current_y")


def current_1d(state: WalkerState, theta: float) -> NDArray[np.float64]:
    """Local 1D current ``psi^dag (C^dag P_R C - P_L) psi``.

    Gauge phases cancel identically, so no phase fields are needed; together
    with the density it satisfies the symmetric-difference continuity
    identity over (t - eps, t, t + eps) for any angle and any fields.
    """
    if state.geom.dimension != 1:
        raise ContractError("current_1d requires a 1D state")
    c = coin_matrix(theta).m
    n_mat = _dag(c) @ PROJ_R @ c - PROJ_L
    total = _sandwich(state.amp, n_mat, state.amp)
    return _real_or_raise(total, "current_1d")


def symmetric_difference(field: NDArray, axis: int) -> NDArray:
    """Half-difference ``(f(+1) - f(-1)) / 2`` along a spacetime axis.

    The field is a time series of lattice slices, shape ``(T,) + site_shape``.
    Axis 0 is time: slices must be uniformly spaced and at least three, and
    the output lives on the interior slices.  Spatial axes wrap periodically.
    """
    field = np.asarray(field)
    if axis == 0:
        if field.shape[0] < 3:
            raise ContractError("time-axis symmetric difference needs >= 3 slices")
        return 0.5 * (field[2:] - field[:-2])
    if axis >= field.ndim or axis < 0:
        raise ValidationError(f"axis {axis} invalid for field of ndim {field.ndim}")
    return 0.5 * (np.roll(field, -1, axis=axis) - np.roll(field, 1, axis=axis))


def _spatial_halfdiff(field: NDArray, array_axis: int) -> NDArray:
    """Periodic half-difference on a single lattice slice (no time axis)."""
    return 0.5 * (np.roll(field, -1, axis=array_axis) - np.roll(field, 1, axis=array_axis))


@dataclass(frozen=True)
class ContinuityReport:
    """Pointwise continuity residual plus summary scalars."""

    residual: NDArray[np.float64]
    max_abs: float
    total_probability_drift: float
    single_step_drift: float | None = None


def continuity_residual(
    window: tuple[WalkerState, WalkerState, WalkerState],
    phases: GaugePhases,
    params,
    single_step_states=None,
) -> ContinuityReport:
    """Continuity residual at the central state of a three-state window.

    2D windows hold states at time indices ``(j - 2, j, j + 2)`` with ``j``
    even; 1D windows at ``(j - 1, j, j + 1)``.  The residual sums the
    symmetric time difference of the density with the symmetric spatial
    differences of the currents; it vanishes to rounding for any angles.

    ``single_step_states``, if given, additionally reports the largest
    probability-sum drift between consecutive states of that sequence.
    """
    before, center, after = window
    geom = center.geom
    dim = geom.dimension
    gap = 2 if dim == 2 else 1
    if before.time_index != center.time_index - gap or after.time_index != center.time_index + gap:
        raise ContractError(
            f"window indices {(before.time_index, center.time_index, after.time_index)} "
            f"must be spaced by {gap}"
        )
    p_before = probability_density(before)
    p_after = probability_density(after)
    d0 = 0.5 * (p_after - p_before)
    if dim == 2:
        mset = m_set(params.theta1, params.theta2)
        jx = current_x(center, phases, mset)
        jy = current_y(center, phases, mset)
        residual = d0 + _spatial_halfdiff(jx, 0) + _spatial_halfdiff(jy, 1)
    else:
        jx = current_1d(center, params.theta)
        residual = d0 + _spatial_halfdiff(jx, 0)
    drift = abs(float(p_after.sum() - p_before.sum()))
    single = None
    if single_step_states is not None:
        single = single_step_probability_drift(single_step_states)
    return ContinuityReport(
        residual=residual,
        max_abs=float(np.max(np.abs(residual))),
        total_probability_drift=drift,
        single_step_drift=single,
    )


def single_step_probability_drift(states) -> float:
    """Largest |sum J0| change between consecutive states of a trajectory."""
    sums = [float(probability_density(s).sum()) for s in states]
    if len(sums) < 2:
        return 0.0
    return float(max(abs(b - a) for a, b in zip(sums, sums[1:])))


@dataclass(frozen=True)
class CurrentField:
    """Density and currents of a normalized state at a current-evaluable time."""

    geom: LatticeGeom
    t: float
    j0: NDArray[np.float64]
    jx: NDArray[np.float64]
    jy: NDArray[np.float64] | None = None

    def __post_init__(self):
        if np.any(self.j0 < -1e-15):
            raise ValidationError("density must be nonnegative")
        total = float(self.j0.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"density sums to {total!r}, expected 1 within 1e-12")


def measure_currents(state: WalkerState, phases: GaugePhases, params) -> CurrentField:
    """Bundle (J0, Jx[, Jy]) for a normalized state, with validation."""
    geom = state.geom
    t = state.time_index * geom.spacing
    if geom.dimension == 2:
        t = state.time_index * geom.spacing / 2
        mset = m_set(params.theta1, params.theta2)
        return CurrentField(
            geom,
            t,
            probability_density(state),
            current_x(state, phases, mset),
            current_y(state, phases, mset),
        )
    return CurrentField(geom, t, probability_density(state), current_1d(state, params.theta))
