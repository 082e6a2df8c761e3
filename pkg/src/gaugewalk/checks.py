"""Named invariance checks exercised by the `check` subcommand.

Each check runs a deterministic seeded scenario on the configured lattice and
reports its largest deviation against a fixed tolerance.  Fields are random
smooth periodic functions so every identity that holds exactly on paper is
exercised away from special cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .evolution import WalkParams2D, evolve
from .fields import random_gauge_function, random_potential
from .gauge import (
    GaugeFunction,
    gauge_transform,
    pure_gauge_deviation,
    sample_phases,
    tensor_invariance_deviation,
)
from .lattice import WalkerState, state_norm
from .observables import continuity_residual, m_set
from .gauge import GaugePhases

__all__ = ["CheckResult", "CHECK_NAMES", "run_all_checks"]

CHECK_NAMES = (
    "unitarity",
    "gauge-equivariance",
    "tensor-invariance",
    "continuity",
    "m-identities",
)

UNITARITY_TOL = 1e-12
EQUIVARIANCE_TOL = 1e-12
TENSOR_TOL = 1e-13
CONTINUITY_TOL = 1e-12
IDENTITY_TOL = 1e-13
SUM_TOL = 1e-15


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    max_deviation: float | None
    tolerance: float | None
    note: str = ""

    def line(self) -> str:
        dev = "-" if self.max_deviation is None else f"{self.max_deviation:.3e}"
        tol = "-" if self.tolerance is None else f"{self.tolerance:.0e}"
        suffix = f"  ({self.note})" if self.note else ""
        return f"{self.status.upper():7s} {self.name:20s} max_dev={dev} tol={tol}{suffix}"


def _seeded_phases(config: RunConfig, n_steps: int, rng):
    geom = config.geom()
    spec = random_potential(rng, geom, config.charge)
    return sample_phases(spec, geom, n_steps)


def _check_unitarity(config: RunConfig, rng) -> CheckResult:
    geom = config.geom()
    psi0 = config.initial_walker()
    n_steps = config.n_steps
    devs = [abs(state_norm(psi0) - 1.0)]
    if n_steps > 0:
        phases = _seeded_phases(config, n_steps, rng)
        hook = lambda s: devs.append(abs(state_norm(s) - 1.0))
        evolve(psi0, n_steps, phases, config.params(), hooks=[hook], keep="last")
    dev = float(max(devs))
    status = "pass" if dev <= UNITARITY_TOL else "fail"
    return CheckResult("unitarity", status, dev, UNITARITY_TOL)


def _check_equivariance(config: RunConfig, rng) -> CheckResult:
    geom = config.geom()
    n_steps = config.n_steps
    if n_steps < 1:
        return CheckResult("gauge-equivariance", "skipped", None, EQUIVARIANCE_TOL,
                           "insufficient steps")
    params = config.params()
    q = config.charge
    phases = _seeded_phases(config, n_steps, rng)
    chi_fn = config.chi_function() or GaugeFunction(fn=random_gauge_function(rng, geom))
    chi = chi_fn.sample(geom, n_steps + 1)
    phases2 = gauge_transform(phases, chi, q,
                              half_factor=not config.corrupt_gauge_half_factor)
    psi0 = config.initial_walker()
    psi0_t = WalkerState(geom, np.exp(1j * q * chi[0])[..., None] * psi0.amp)
    traj = evolve(psi0, n_steps, phases, params)
    traj2 = evolve(psi0_t, n_steps, phases2, params)
    dev = 0.0
    for j, (a, b) in enumerate(zip(traj, traj2)):
        expected = np.exp(1j * q * chi[j])[..., None] * a.amp
        dev = max(dev, float(np.max(np.abs(b.amp - expected))))
    note = "negative control (half factor removed)" if config.corrupt_gauge_half_factor else ""
    status = "pass" if dev <= EQUIVARIANCE_TOL else "fail"
    return CheckResult("gauge-equivariance", status, dev, EQUIVARIANCE_TOL, note)


def _check_tensor(config: RunConfig, rng) -> CheckResult:
    geom = config.geom()
    n_times = max(config.n_steps + 1, 16)
    shape = (n_times,) + geom.site_shape
    eps_a = config.eps_a if config.eps_a is not None else config.spacing
    cov = tuple(rng.normal(size=shape) for _ in range(geom.dimension + 1))
    chi = rng.normal(size=shape)
    dev = max(
        tensor_invariance_deviation(cov, chi, eps_a, geom.dimension),
        pure_gauge_deviation(chi, eps_a, geom.dimension),
    )
    status = "pass" if dev <= TENSOR_TOL else "fail"
    return CheckResult("tensor-invariance", status, dev, TENSOR_TOL)


def _check_continuity(config: RunConfig, rng) -> CheckResult:
    geom = config.geom()
    params = config.params()
    n_steps = config.n_steps
    gap = 2 if geom.dimension == 2 else 1
    if n_steps < 2 * gap:
        return CheckResult("continuity", "skipped", None, CONTINUITY_TOL,
                           "insufficient steps")
    phases = _seeded_phases(config, n_steps, rng)
    traj = evolve(config.initial_walker(), n_steps, phases, params)
    dev = 0.0
    drift = 0.0
    for j in range(gap, n_steps - gap + 1, gap):
        if geom.dimension == 2 and j % 2 != 0:
            continue
        if j + gap > n_steps:
            break
        report = continuity_residual((traj[j - gap], traj[j], traj[j + gap]), phases, params)
        dev = max(dev, report.max_abs)
        drift = max(drift, report.total_probability_drift)
    dev = float(max(dev, drift))
    status = "pass" if dev <= CONTINUITY_TOL else "fail"
    return CheckResult("continuity", status, dev, CONTINUITY_TOL)


def _check_m_identities(config: RunConfig, rng) -> CheckResult:
    eps_m = config.effective_eps_m()
    params = WalkParams2D.continuum_family(config.mass, config.charge, eps_m)
    try:
        ms = m_set(params.theta1, params.theta2)  # construction asserts identities
    except Exception as exc:  # pragma: no cover - identities hold for all angles
        return CheckResult("m-identities", "fail", None, IDENTITY_TOL, str(exc))
    dev = 0.0
    for lhs, rhs in (
        (ms.mlam[0], ms.my[2] - ms.mx[2]),
        (ms.mlam[1], -ms.my[2] - ms.mx[3]),
        (ms.mlam[2], ms.my[3] + ms.mx[2]),
        (ms.mlam[3], -ms.my[3] + ms.mx[3]),
    ):
        dev = max(dev, float(np.max(np.abs(lhs - rhs))))
    zero_order = m_set(np.pi / 2, -np.pi / 2)
    sum_dev = max(
        float(np.max(np.abs(sum(zero_order.mx) - np.array([[0, 1j], [-1j, 0]])))),
        float(np.max(np.abs(sum(zero_order.my) - np.diag([1.0, -1.0])))),
    )
    status = "pass" if dev <= IDENTITY_TOL and sum_dev <= SUM_TOL else "fail"
    return CheckResult("m-identities", status, float(max(dev, sum_dev)), IDENTITY_TOL)


_CHECKS = {
    "unitarity": _check_unitarity,
    "gauge-equivariance": _check_equivariance,
    "tensor-invariance": _check_tensor,
    "continuity": _check_continuity,
    "m-identities": _check_m_identities,
}


def run_all_checks(config: RunConfig, names=None) -> list[CheckResult]:
    names = tuple(names) if names else CHECK_NAMES
    results = []
    for name in names:
        if name not in _CHECKS:
            raise ValueError(f"unknown check {name!r}")
        rng = np.random.default_rng(config.seed)
        results.append(_CHECKS[name](config, rng))
    return results
