"""Gauged walk steps in 1D and alternating substeps in 2D.

A step applies the coin rotation first and then the coin-dependent gauged
shift.  Right movers pick up ``exp(+i beta_minus)`` at their departure site
before moving one site in the positive direction; left movers move first and
pick up ``exp(-i beta_plus)`` at their arrival site.  In 2D, steps alternate
the x and y axes starting with x, each applying half the temporal phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ContractError, ValidationError
from .gauge import GaugePhases
from .lattice import COIN_L, COIN_R, CoinOperator, WalkerState, apply_coin, coin_matrix

__all__ = [
    "WalkParams1D",
    "WalkParams2D",
    "gauged_shift_1d",
    "step_1d",
    "substep_2d",
    "step_2d",
    "evolve",
]


@dataclass(frozen=True)
class WalkParams1D:
    """1D walk parameters; `continuum_family` ties the angle to a mass."""

    theta: float
    charge: float = 1.0
    mass: float | None = None
    eps_m: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValidationError("theta must be finite")

    @classmethod
    def continuum_family(cls, mass: float, charge: float, eps_m: float) -> "WalkParams1D":
        """Angle choice theta = -2 eps_m m under which the walk limits to the
        1D Dirac flow as the spacing goes to zero."""
        return cls(theta=-2.0 * eps_m * mass, charge=charge, mass=mass, eps_m=eps_m)


@dataclass(frozen=True)
class WalkParams2D:
    """2D walk parameters with per-axis coin angles."""

    theta1: float
    theta2: float
    charge: float = 1.0
    mass: float | None = None
    eps_m: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise ValidationError("theta1 and theta2 must be finite")

    @classmethod
    def continuum_family(cls, mass: float, charge: float, eps_m: float) -> "WalkParams2D":
        """Angles theta1 = pi/2 - eps_m m, theta2 = -pi/2 - eps_m m."""
        return cls(
            theta1=math.pi / 2 - eps_m * mass,
            theta2=-math.pi / 2 - eps_m * mass,
            charge=charge,
            mass=mass,
            eps_m=eps_m,
        )

    def theta(self, axis: int) -> float:
        return self.theta1 if axis == 1 else self.theta2


def gauged_shift_1d(
    state: WalkerState,
    beta_minus: NDArray[np.float64],
    beta_plus: NDArray[np.float64],
    axis: int = 1,
) -> WalkerState:
    """Coin-dependent shift along one axis with gauge phases on the paths.

    ``out_R(p) = exp(i beta_minus(p-1)) in_R(p-1)`` and
    ``out_L(p) = exp(-i beta_plus(p)) in_L(p+1)``, indices periodic.  Unitary
    for real phase fields.  Does not advance the time index.
    """
    geom = state.geom
    if axis not in (1, 2) or axis > geom.dimension:
        raise ValidationError(f"axis {axis} invalid for a {geom.dimension}D lattice")
    ax = axis - 1
    beta_minus = np.broadcast_to(np.asarray(beta_minus, dtype=float), geom.site_shape)
    beta_plus = np.broadcast_to(np.asarray(beta_plus, dtype=float), geom.site_shape)
    amp = state.amp
    out = np.empty_like(amp)
    out[..., COIN_R] = np.roll(np.exp(1j * beta_minus) * amp[..., COIN_R], 1, axis=ax)
    out[..., COIN_L] = np.exp(-1j * beta_plus) * np.roll(amp[..., COIN_L], -1, axis=ax)
    return state.with_amp(out)


def _check_schedule(state: WalkerState, phases: GaugePhases):
    if phases.geom != state.geom:
        raise ContractError("state and phases live on different lattices")
    if state.time_index >= phases.n_steps:
        raise ContractError(
            f"phase schedule covers {phases.n_steps} steps; "
            f"state is at time index {state.time_index}"
        )


def step_1d(state: WalkerState, phases: GaugePhases, params: WalkParams1D) -> WalkerState:
    """One 1D step: coin, then gauged shift; advances the time index."""
    if state.geom.dimension != 1:
        raise ContractError("step_1d requires a 1D lattice")
    _check_schedule(state, phases)
    s = state.time_index
    rotated = apply_coin(state, coin_matrix(params.theta))
    shifted = gauged_shift_1d(rotated, phases.beta_minus(s), phases.beta_plus(s), axis=1)
    return shifted.with_amp(shifted.amp, time_index=s + 1)


def substep_2d(
    state: WalkerState,
    direction: int,
    phases: GaugePhases,
    params: WalkParams2D,
) -> WalkerState:
    """One 2D substep along `direction` (1 = x, 2 = y).

    The direction must match the time-index parity: even indices move along
    x, odd along y.  Applies the axis coin and the half-weight temporal phase.
    """
    if state.geom.dimension != 2:
        raise ContractError("substep_2d requires a 2D lattice")
    _check_schedule(state, phases)
    s = state.time_index
    expected = phases.axis(s)
    if direction != expected:
        raise ContractError(
            f"substep direction {direction} does not match parity of time index {s} "
            f"(expected {expected})"
        )
    rotated = apply_coin(state, coin_matrix(params.theta(direction)))
    shifted = gauged_shift_1d(rotated, phases.beta_minus(s), phases.beta_plus(s), axis=direction)
    return shifted.with_amp(shifted.amp, time_index=s + 1)


def step_2d(state: WalkerState, phases: GaugePhases, params: WalkParams2D) -> WalkerState:
    """One full 2D step: x-substep then y-substep (two time indices)."""
    if state.time_index % 2 != 0:
        raise ContractError(
            f"step_2d starts on even time indices, got {state.time_index}"
        )
    mid = substep_2d(state, 1, phases, params)
    return substep_2d(mid, 2, phases, params)


def evolve(
    state: WalkerState,
    n_steps: int,
    phases: GaugePhases | None,
    params: WalkParams1D | WalkParams2D,
    hooks: Iterable[Callable[[WalkerState], None]] = (),
    keep: str = "all",
) -> list[WalkerState]:
    """Evolve `n_steps` steps (2D: substeps) and return the trajectory.

    ``keep="all"`` returns every state including the initial one;
    ``keep="last"`` returns a single-element list.  Hooks are called on every
    state visited, starting with the initial one; states are immutable so
    hooks cannot perturb the trajectory.
    """
    if n_steps < 0:
        raise ValidationError("n_steps must be >= 0")
    if keep not in ("all", "last"):
        raise ValidationError("keep must be 'all' or 'last'")
    if phases is None:
        phases = GaugePhases.zeros(state.geom, max(n_steps, 1))
    if state.time_index + n_steps > phases.n_steps:
        raise ContractError(
            f"schedule covers {phases.n_steps} steps, cannot evolve "
            f"{n_steps} from index {state.time_index}"
        )
    hooks = tuple(hooks)
    trajectory = [state]
    for hook in hooks:
        hook(state)
    current = state
    for _ in range(n_steps):
        if state.geom.dimension == 1:
            current = step_1d(current, phases, params)
        else:
            direction = phases.axis(current.time_index)
            current = substep_2d(current, direction, phases, params)
        for hook in hooks:
            hook(current)
        if keep == "all":
            trajectory.append(current)
    if keep == "last":
        return [current]
    return trajectory
