import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aris_opt.core import (DimensionMismatch, ReflectionVector, RisMode, db_to_linear,
                           linear_to_db, make_diag_channel, steering_vector, vectorize)
from conftest import complex_normal


class TestReflectionVector:
    def test_absorptive_accepts_disk(self):
        phi = ReflectionVector([0.5, -0.3 + 0.4j, 1.0])
        assert len(phi) == 3
        assert phi.mode is RisMode.ABSORPTIVE

    def test_absorptive_rejects_large_modulus(self):
        with pytest.raises(ValueError, match="absorptive"):
            ReflectionVector([0.5, 1.1])

    def test_conventional_requires_unit_modulus(self):
        ReflectionVector(np.exp(1j * np.array([0.3, -2.0])), RisMode.CONVENTIONAL)
        with pytest.raises(ValueError, match="conventional"):
            ReflectionVector([0.999, 1.0], RisMode.CONVENTIONAL)

    @given(st.floats(min_value=1.001, max_value=50.0), st.floats(0.0, 2 * np.pi))
    @settings(max_examples=50, deadline=None)
    def test_out_of_bound_modulus_rejected(self, modulus, phase):
        coeffs = [0.2, modulus * np.exp(1j * phase)]
        with pytest.raises(ValueError):
            ReflectionVector(coeffs)
        with pytest.raises(ValueError):
            ReflectionVector(coeffs, RisMode.CONVENTIONAL)

    def test_modulus_tolerance(self):
        ReflectionVector([1.0 + 5e-10])  # within the 1e-9 slack
        ReflectionVector([np.exp(1j * 0.1) * (1 + 5e-10)], RisMode.CONVENTIONAL)

    def test_augmented_appends_one(self):
        phi = ReflectionVector([0.5j])
        assert np.array_equal(phi.augmented(), np.array([0.5j, 1.0 + 0j]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            ReflectionVector([np.nan + 0j])

    def test_coeffs_immutable(self):
        phi = ReflectionVector([0.1, 0.2])
        with pytest.raises(ValueError):
            phi.coeffs[0] = 1.0


class TestMakeDiagChannel:
    def test_full_absorption_gives_zero(self, rng):
        h = complex_normal(rng, 3, 4)
        g = complex_normal(rng, 4, 2)
        out = make_diag_channel(np.zeros(4), h, g)
        assert np.all(out == 0)

    def test_scalar_product(self):
        out = make_diag_channel([0.5], [[2.0]], [[3.0]])
        assert np.allclose(out, [[3.0]])

    def test_matches_rank_one_sum(self, rng):
        h = complex_normal(rng, 3, 4)
        g = complex_normal(rng, 4, 2)
        phi = complex_normal(rng, 4) * 0.5
        expected = sum(phi[k] * np.outer(h[:, k], g[k, :]) for k in range(4))
        assert np.allclose(make_diag_channel(phi, h, g), expected, atol=1e-13)

    def test_linear_in_phi(self, rng):
        h = complex_normal(rng, 2, 5)
        g = complex_normal(rng, 5, 3)
        p1, p2 = complex_normal(rng, 5), complex_normal(rng, 5)
        a, b = 0.3 - 0.2j, -1.7 + 0.4j
        lhs = make_diag_channel(a * p1 + b * p2, h, g)
        rhs = a * make_diag_channel(p1, h, g) + b * make_diag_channel(p2, h, g)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_dimension_errors_name_operand(self, rng):
        h = complex_normal(rng, 3, 4)
        g = complex_normal(rng, 5, 2)
        with pytest.raises(DimensionMismatch, match="tx_to_ris"):
            make_diag_channel(np.zeros(4), h, g)
        with pytest.raises(DimensionMismatch, match="ris_to_rx"):
            make_diag_channel(np.zeros(5), h, complex_normal(rng, 5, 2))


class TestSteeringVector:
    def test_boresight(self):
        assert np.allclose(steering_vector(2, 0.0), np.array([1.0, 1.0]) / np.sqrt(2))

    def test_endfire(self):
        assert np.allclose(steering_vector(2, np.pi / 2),
                           np.array([1.0, -1.0]) / np.sqrt(2))

    def test_thirty_degrees_hand_computed(self):
        # sin(30 deg) = 1/2, so entry k is exp(j k pi / 2) / 2
        expected = np.array([1.0, 1.0j, -1.0, -1.0j]) / 2.0
        assert np.allclose(steering_vector(4, np.deg2rad(30.0)), expected, atol=1e-15)

    def test_unit_norm_many_sizes_and_angles(self, rng):
        angles = rng.uniform(-np.pi, np.pi, size=1000)
        for m in (1, 2, 3, 17, 64, 128):
            norms = [np.linalg.norm(steering_vector(m, a)) for a in angles[:: m // 8 + 1]]
            assert np.allclose(norms, 1.0, atol=1e-12)

    def test_first_entry_real(self):
        v = steering_vector(9, 1.234)
        assert v[0] == pytest.approx(1 / 3)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            steering_vector(0, 0.0)
        with pytest.raises(ValueError):
            steering_vector(4, np.inf)


class TestVectorize:
    def test_column_major_order(self):
        assert np.array_equal(vectorize([[1, 2], [3, 4]]),
                              np.array([1, 3, 2, 4], dtype=complex))

    def test_single_entry(self):
        assert np.array_equal(vectorize([[2.5j]]), np.array([2.5j]))

    def test_round_trip(self, rng):
        m = complex_normal(rng, 2, 3)
        v = vectorize(m)
        assert v.shape == (6,)
        assert np.array_equal(v.reshape(2, 3, order="F"), m)


def test_db_conversions():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(0.0) == pytest.approx(1.0)
    assert db_to_linear(-10.0) == pytest.approx(0.1)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    assert np.allclose(db_to_linear(np.array([0.0, 3.0])), [1.0, 10 ** 0.3])
