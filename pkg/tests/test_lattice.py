import numpy as np
import pytest

from gaugewalk import (
    CoinOperator,
    LatticeGeom,
    ValidationError,
    WalkerState,
    apply_coin,
    coin_matrix,
    gaussian_packet,
    point_source,
    state_norm,
)


def test_geometry_validation():
    with pytest.raises(ValidationError):
        LatticeGeom(3, 4)
    with pytest.raises(ValidationError):
        LatticeGeom(1, 1)
    with pytest.raises(ValidationError):
        LatticeGeom(1, 4, extent_y=2)
    with pytest.raises(ValidationError):
        LatticeGeom(2, 4, extent_y=1)
    with pytest.raises(ValidationError):
        LatticeGeom(1, 4, spacing=0.0)
    with pytest.raises(ValidationError):
        LatticeGeom(1, 4, spacing=float("nan"))


def test_coin_matrix_zero_angle_is_identity():
    np.testing.assert_array_equal(coin_matrix(0.0).m, np.eye(2))


def test_coin_matrix_pi():
    expected = np.array([[0, 1j], [1j, 0]])
    np.testing.assert_allclose(coin_matrix(np.pi).m, expected, atol=1e-16)


def test_coin_matrix_half_pi():
    expected = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
    np.testing.assert_allclose(coin_matrix(np.pi / 2).m, expected, atol=1e-15)


def test_coin_matrix_rejects_nonfinite():
    with pytest.raises(ValidationError):
        coin_matrix(float("inf"))


def test_coin_inverse_pairs():
    rng = np.random.default_rng(3)
    for theta in rng.uniform(-10, 10, size=100):
        prod = coin_matrix(theta).m @ coin_matrix(-theta).m
        assert np.max(np.abs(prod - np.eye(2))) <= 1e-13


def test_coin_operator_unitarity_check():
    with pytest.raises(ValidationError):
        CoinOperator(np.array([[1.0, 0.0], [0.0, 2.0]]))
    CoinOperator.unchecked(np.array([[1.0, 0.0], [0.0, 2.0]]))  # no raise


def test_apply_coin_identity_and_flip():
    geom = LatticeGeom(1, 5)
    state = point_source(geom, [2])
    same = apply_coin(state, coin_matrix(0.0))
    np.testing.assert_array_equal(same.amp, state.amp)
    flipped = apply_coin(state, coin_matrix(np.pi))
    np.testing.assert_allclose(flipped.amp[2], [0.0, 1j], atol=1e-16)


def test_apply_coin_preserves_norm():
    rng = np.random.default_rng(11)
    geom = LatticeGeom(1, 8)
    amp = rng.normal(size=geom.amp_shape) + 1j * rng.normal(size=geom.amp_shape)
    state = WalkerState(geom, amp / np.linalg.norm(amp.reshape(-1)))
    out = apply_coin(state, coin_matrix(0.7))
    assert abs(state_norm(out) - 1.0) <= 1e-13


def test_state_norm_values():
    geom = LatticeGeom(1, 16)
    assert state_norm(point_source(geom, [0])) == 1.0
    zero = WalkerState(geom, np.zeros(geom.amp_shape, dtype=complex))
    assert state_norm(zero) == 0.0
    amp = np.zeros(geom.amp_shape, dtype=complex)
    amp[:, 0] = 1.0 / np.sqrt(geom.extent_x)
    assert abs(state_norm(WalkerState(geom, amp)) - 1.0) <= 1e-14


def test_state_is_readonly_and_validated():
    geom = LatticeGeom(1, 4)
    state = point_source(geom, [0])
    with pytest.raises(ValueError):
        state.amp[0, 0] = 0.0
    with pytest.raises(ValidationError):
        WalkerState(geom, np.zeros((5, 2), dtype=complex))
    with pytest.raises(ValidationError):
        WalkerState(geom, np.zeros(geom.amp_shape, dtype=complex), time_index=-1)


def test_gaussian_packet_normalized_and_smooth():
    geom = LatticeGeom(2, 32, 32, spacing=1 / 16)
    state = gaussian_packet(geom, (1.0, 1.0), 0.2, (np.pi, -np.pi), (1.0, 1j))
    assert abs(state_norm(state) - 1.0) <= 1e-13
    spectrum = np.fft.fft2(state.amp[..., 0])
    edge = np.abs(spectrum[16, :]).max()  # highest-frequency row
    assert edge < 1e-8 * np.abs(spectrum).max()


def test_point_source_wraps_site():
    geom = LatticeGeom(1, 6)
    state = point_source(geom, [7], (0.0, 1.0))
    np.testing.assert_allclose(state.amp[1], [0.0, 1.0])
