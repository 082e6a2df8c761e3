import numpy as np
import pytest

from gaugewalk import (
    DomainError,
    GaugeFunction,
    GaugePhases,
    LatticeGeom,
    PotentialSpec,
    SamplingError,
    ValidationError,
    WalkerState,
    WalkParams1D,
    WalkParams2D,
    covariant_samples,
    discrete_derivative,
    evolve,
    field_tensor,
    field_tensor_from_samples,
    gauge_transform,
    pure_gauge_deviation,
    sample_phases,
    sigma_delta,
    tensor_invariance_deviation,
)

from helpers import random_state_amp


def _const(value):
    return lambda t, x, y: value + 0.0 * np.broadcast_arrays(np.asarray(t), x, y)[1]


def test_sample_phases_zero_potential():
    geom = LatticeGeom(1, 6, spacing=0.5)
    phases = sample_phases(PotentialSpec.zero(1), geom, 4)
    assert phases.n_steps == 4
    np.testing.assert_array_equal(phases.alpha, 0.0)
    np.testing.assert_array_equal(phases.xi1, 0.0)


def test_sample_phases_constant_a0():
    # alpha = eps_a * q * A0 = 0.1 * 2 * 1 = 0.2 everywhere
    geom = LatticeGeom(1, 5)
    spec = PotentialSpec(_const(1.0), _const(0.0), charge=2.0, eps_a=0.1)
    phases = sample_phases(spec, geom, 3)
    np.testing.assert_allclose(phases.alpha, 0.2)


def test_sample_phases_linear_a1():
    geom = LatticeGeom(1, 4, spacing=1.0)
    spec = PotentialSpec(_const(0.0), lambda t, x, y: x, charge=1.0, eps_a=1.0)
    phases = sample_phases(spec, geom, 3)
    for s in range(3):
        np.testing.assert_allclose(phases.xi1[s], [0.0, 1.0, 2.0, 3.0])


def test_sample_phases_time_convention():
    rec = []

    def a0(t, x, y):
        rec.append(float(t))
        return np.zeros(np.broadcast(x, y).shape)

    geom1 = LatticeGeom(1, 4, spacing=0.5)
    sample_phases(PotentialSpec(a0, _const(0.0)), geom1, 2)
    geom2 = LatticeGeom(2, 4, 4, spacing=0.5)
    sample_phases(PotentialSpec(a0, _const(0.0), _const(0.0)), geom2, 2)
    assert rec[:2] == [0.5, 1.0]      # arrival times, one spacing per step
    assert rec[2:] == [0.25, 0.5]     # 2D steps advance half a spacing in time


def test_sampling_error_names_site():
    geom = LatticeGeom(1, 4)

    def bad(t, x, y):
        raise RuntimeError("boom")

    with pytest.raises(SamplingError, match=r"step 0, site \(0,\)"):
        sample_phases(PotentialSpec(bad, _const(0.0)), geom, 1)

    def spiky(t, x, y):
        return np.where(np.broadcast_arrays(np.asarray(x), x)[0] == 2.0, np.inf, 0.0)

    with pytest.raises(SamplingError, match=r"non-finite at step 0, site \(2,\)"):
        sample_phases(PotentialSpec(spiky, _const(0.0)), geom, 1)


def test_beta_recomputed_from_alpha_and_xi():
    geom = LatticeGeom(1, 4)
    rng = np.random.default_rng(0)
    alpha = rng.normal(size=(3, 4))
    xi = rng.normal(size=(3, 4))
    phases = GaugePhases(geom, alpha, xi)
    np.testing.assert_allclose(phases.beta_minus(1), xi[1] - alpha[1])
    np.testing.assert_allclose(phases.beta_plus(1), xi[1] + alpha[1])


def test_beta_halving_in_2d():
    geom = LatticeGeom(2, 4, 4)
    alpha = np.ones((2, 4, 4))
    xi = np.zeros((2, 4, 4))
    phases = GaugePhases(geom, alpha, xi, xi.copy(), substep_halving=True)
    np.testing.assert_allclose(phases.beta_minus(0), -0.5)
    np.testing.assert_allclose(phases.beta_plus(1), 0.5)


def test_sigma_delta_basic():
    f = np.full((3, 4), 2.5)
    np.testing.assert_array_equal(sigma_delta(f, 0, "delta"), 0.0)
    np.testing.assert_array_equal(sigma_delta(f, 1, "sigma"), 5.0)
    ramp = np.tile(np.arange(4.0), (2, 1))
    np.testing.assert_array_equal(sigma_delta(ramp, 1, "delta"), [[1, 1, 1, -3]] * 2)
    with pytest.raises(DomainError):
        sigma_delta(np.zeros((1, 4)), 0, "delta")


def test_discrete_derivative_linear_fields():
    eps_a = 0.25
    t_ramp = np.tile(np.arange(5.0)[:, None], (1, 4))
    np.testing.assert_allclose(
        discrete_derivative(t_ramp, 0, eps_a, dimension=1), 1.0 / eps_a
    )
    x_ramp = np.tile(np.arange(4.0), (5, 1))
    d1 = discrete_derivative(x_ramp, 1, eps_a, dimension=1)
    np.testing.assert_allclose(d1[:, :-1], 1.0 / eps_a)  # wrap column differs
    const = np.ones((4, 3))
    for mu in (0, 1):
        np.testing.assert_array_equal(
            discrete_derivative(const, mu, eps_a, dimension=1), 0.0
        )


def test_discrete_derivative_commutation():
    rng = np.random.default_rng(5)
    eps_a = 0.7
    chi = rng.normal(size=(6, 5))
    d0d1 = discrete_derivative(
        discrete_derivative(chi, 1, eps_a, dimension=1), 0, eps_a, dimension=1
    )
    d1d0 = discrete_derivative(
        discrete_derivative(chi, 0, eps_a, dimension=1), 1, eps_a, dimension=1
    )
    assert np.max(np.abs(d0d1 - d1d0)) <= 1e-13

    chi2 = rng.normal(size=(6, 4, 5))
    for parity in ("even", "odd"):
        for mu in (1, 2):
            a = discrete_derivative(
                discrete_derivative(chi2, mu, eps_a, dimension=2),
                0, eps_a, dimension=2, parity=parity,
            )
            b = discrete_derivative(
                discrete_derivative(chi2, 0, eps_a, dimension=2, parity=parity),
                mu, eps_a, dimension=2,
            )
            assert np.max(np.abs(a - b)) <= 1e-13


def test_gauge_transform_trivial_chi():
    geom = LatticeGeom(1, 6)
    rng = np.random.default_rng(1)
    phases = GaugePhases(geom, rng.normal(size=(4, 6)), rng.normal(size=(4, 6)))
    out = gauge_transform(phases, np.zeros((5, 6)), charge=1.3)
    np.testing.assert_array_equal(out.alpha, phases.alpha)
    np.testing.assert_array_equal(out.xi1, phases.xi1)
    out = gauge_transform(phases, np.full((5, 6), 3.7), charge=1.3)
    np.testing.assert_allclose(out.alpha, phases.alpha, atol=1e-15)
    np.testing.assert_allclose(out.xi1, phases.xi1, atol=1e-15)


def test_gauge_transform_needs_all_slices():
    geom = LatticeGeom(1, 6)
    phases = GaugePhases(geom, np.zeros((4, 6)), np.zeros((4, 6)))
    with pytest.raises(DomainError):
        gauge_transform(phases, np.zeros((4, 6)), charge=1.0)


def _equivariance_deviation(geom, n_steps, params, rng, half_factor=True):
    """Max |psi' - exp(i q chi) psi| over a random-field trajectory."""
    shape = (n_steps,) + geom.site_shape
    phases = GaugePhases(
        geom,
        rng.normal(size=shape),
        rng.normal(size=shape),
        rng.normal(size=shape) if geom.dimension == 2 else None,
        substep_halving=geom.dimension == 2,
    )
    chi = rng.normal(size=(n_steps + 1,) + geom.site_shape)
    q = params.charge
    psi0 = WalkerState(geom, random_state_amp(geom, rng))
    transformed0 = WalkerState(geom, np.exp(1j * q * chi[0])[..., None] * psi0.amp)
    phases2 = gauge_transform(phases, chi, q, half_factor=half_factor)
    traj = evolve(psi0, n_steps, phases, params)
    traj2 = evolve(transformed0, n_steps, phases2, params)
    dev = 0.0
    for j, (a, b) in enumerate(zip(traj, traj2)):
        expected = np.exp(1j * q * chi[j])[..., None] * a.amp
        dev = max(dev, float(np.max(np.abs(b.amp - expected))))
    return dev


def test_equivariance_1d_random_fields_dense_scale():
    rng = np.random.default_rng(42)
    geom = LatticeGeom(1, 6)
    params = WalkParams1D(theta=0.7, charge=1.3)
    assert _equivariance_deviation(geom, 5, params, rng) <= 1e-12


def test_equivariance_1d_many_lattices_and_steps():
    rng = np.random.default_rng(7)
    for n in (4, 9, 16):
        geom = LatticeGeom(1, n)
        params = WalkParams1D(theta=float(rng.uniform(-3, 3)), charge=float(rng.uniform(0.5, 2)))
        assert _equivariance_deviation(geom, 50, params, rng) <= 1e-12


def test_equivariance_1d_negative_control():
    rng = np.random.default_rng(42)
    geom = LatticeGeom(1, 6)
    params = WalkParams1D(theta=0.7, charge=1.3)
    assert _equivariance_deviation(geom, 5, params, rng, half_factor=False) >= 1e-2


def test_equivariance_2d_per_substep():
    rng = np.random.default_rng(8)
    for nx, ny in ((4, 4), (8, 8), (3, 5)):
        geom = LatticeGeom(2, nx, ny)
        params = WalkParams2D(
            theta1=float(rng.uniform(-3, 3)),
            theta2=float(rng.uniform(-3, 3)),
            charge=float(rng.uniform(0.5, 2)),
        )
        assert _equivariance_deviation(geom, 40, params, rng) <= 1e-12


def test_field_tensor_zero_potential():
    geom = LatticeGeom(1, 6)
    tensor = field_tensor(PotentialSpec.zero(1), geom, 5)
    np.testing.assert_array_equal(tensor.f01, 0.0)


def test_field_tensor_uniform_electric():
    # A1(t, x) = E0 * t; hand-evaluated stencil gives F01 = -E0 exactly
    e0 = 0.8
    geom = LatticeGeom(1, 6, spacing=0.5)
    spec = PotentialSpec(_const(0.0), lambda t, x, y: e0 * t + 0.0 * x, eps_a=0.5)
    tensor = field_tensor(spec, geom, 5)
    np.testing.assert_allclose(tensor.f01, -e0, atol=1e-13)


def test_field_tensor_antisymmetry_exact():
    rng = np.random.default_rng(2)
    cov = (rng.normal(size=(5, 4, 4)), rng.normal(size=(5, 4, 4)), rng.normal(size=(5, 4, 4)))
    tensor = field_tensor_from_samples(cov, 0.3, 2)
    np.testing.assert_array_equal(tensor.component(1, 0), -tensor.component(0, 1))
    np.testing.assert_array_equal(tensor.component(2, 0), -tensor.component(0, 2))
    np.testing.assert_array_equal(tensor.component(2, 1), -tensor.component(1, 2))
    np.testing.assert_array_equal(tensor.component(1, 1), 0.0)


def test_tensor_gauge_invariance_and_pure_gauge():
    rng = np.random.default_rng(3)
    eps_a = 0.4
    cov1 = (rng.normal(size=(8, 6)), rng.normal(size=(8, 6)))
    chi1 = rng.normal(size=(8, 6))
    assert tensor_invariance_deviation(cov1, chi1, eps_a, 1) <= 1e-13
    assert pure_gauge_deviation(chi1, eps_a, 1) <= 1e-13

    cov2 = tuple(rng.normal(size=(8, 5, 6)) for _ in range(3))
    chi2 = rng.normal(size=(8, 5, 6))
    assert tensor_invariance_deviation(cov2, chi2, eps_a, 2) <= 1e-13
    assert pure_gauge_deviation(chi2, eps_a, 2) <= 1e-13


def test_covariant_samples_signs():
    geom = LatticeGeom(1, 4)
    spec = PotentialSpec(_const(2.0), _const(3.0))
    a0, a1 = covariant_samples(spec, geom, 2)
    np.testing.assert_allclose(a0, 2.0)   # temporal component keeps its sign
    np.testing.assert_allclose(a1, -3.0)  # spatial component flips


def test_gauge_function_sampling():
    geom = LatticeGeom(1, 4, spacing=0.5)
    gf = GaugeFunction(fn=lambda t, x, y: t + x)
    samples = gf.sample(geom, 3)
    assert samples.shape == (3, 4)
    np.testing.assert_allclose(samples[1], 0.5 + np.arange(4) * 0.5)
    with pytest.raises(ValidationError):
        GaugeFunction()
    with pytest.raises(DomainError):
        GaugeFunction(samples=np.zeros((2, 4))).sample(geom, 3)
