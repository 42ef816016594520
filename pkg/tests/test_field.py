"""Domain types, interpolation, gradients and strain differentiation."""

import numpy as np
import pytest

import altruist as alt
from altruist.errors import InvalidArgumentError
from altruist.field import DisplacementField, RegParams, RfFrame


def frame_from(values):
    return RfFrame(np.asarray(values, dtype=float))


class TestRfFrame:
    def test_rejects_small_grids(self):
        with pytest.raises(InvalidArgumentError):
            RfFrame(np.zeros((3, 8)))
        with pytest.raises(InvalidArgumentError):
            RfFrame(np.zeros((8, 3)))

    def test_rejects_non_finite(self):
        bad = np.zeros((4, 4))
        bad[1, 1] = np.nan
        with pytest.raises(InvalidArgumentError):
            RfFrame(bad)

    def test_samples_are_read_only(self):
        frame = frame_from(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            frame.samples[0, 0] = 1.0


class TestDisplacementField:
    def test_interleaved_layout(self):
        axial = np.arange(12.0).reshape(3, 4)
        lateral = -axial
        field = DisplacementField.from_components(axial, lateral)
        # sample (i, j) 1-based sits at p = (i-1)*n + (j-1); axial at 2p.
        p = (2 - 1) * 4 + (3 - 1)
        assert field.values[2 * p] == axial[1, 2]
        assert field.values[2 * p + 1] == lateral[1, 2]
        np.testing.assert_array_equal(field.axial, axial)
        np.testing.assert_array_equal(field.lateral, lateral)

    def test_length_is_validated(self):
        with pytest.raises(InvalidArgumentError):
            DisplacementField(np.zeros(10), 2, 2)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            DisplacementField(np.full(8, np.inf), 2, 2)


class TestRegParams:
    def test_multiplier_links_orders(self):
        params = RegParams.from_multiplier(0.015, 0.0012, 0.015, 0.0012,
                                           mf=100, gamma=1e-4, zeta=3000)
        assert params.theta1 == pytest.approx(1.5)
        assert params.theta2 == pytest.approx(0.12)
        assert params.lambda1 == pytest.approx(1.5)
        assert params.lambda2 == pytest.approx(0.12)

    @pytest.mark.parametrize("name, expected", [
        ("layer", (0.015, 0.0012, 0.015, 0.0012, 100.0, 0.0001, 3000.0)),
        ("inclusion", (0.05, 0.00015, 0.025, 0.000075, 25.0, 0.0001, 8000.0)),
        ("breast", (0.09, 0.0006, 0.045, 0.0003, 25.0, 0.00001, 3000.0)),
        ("liver1", (0.03, 0.0005, 0.015, 0.00025, 45.0, 0.0, 20000.0)),
        ("liver2", (0.00018, 0.0000006, 0.00018, 0.0000002, 100.0, 0.0, 2200000.0)),
        ("liver3", (0.0075, 0.00005, 0.00375, 0.000025, 45.0, 0.0, 20000.0)),
    ])
    def test_presets_match_tuning_table(self, name, expected):
        params = RegParams.preset(name)
        got = (params.alpha1, params.alpha2, params.beta1, params.beta2,
               params.mf, params.gamma, params.zeta)
        assert got == expected

    def test_zeta_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            RegParams.from_multiplier(0.1, 0.1, 0.1, 0.1, 10, 0.0, 0.0)

    def test_unknown_preset(self):
        with pytest.raises(InvalidArgumentError):
            RegParams.preset("nope")


class TestInterpBilinear:
    def test_on_grid_identity(self):
        samples = np.zeros((4, 4))
        samples[1, 2] = 5.0              # 1-based (2, 3)
        value, oob = alt.interp_bilinear(frame_from(samples), 2.0, 3.0)
        assert value == 5.0 and not oob

    def test_equal_weight_center(self):
        samples = np.zeros((4, 4))
        samples[1, 1] = 4.0              # corners (1,1),(1,2),(2,1),(2,2) = 0,0,0,4
        value, oob = alt.interp_bilinear(frame_from(samples), 1.5, 1.5)
        assert value == pytest.approx(1.0) and not oob

    def test_out_of_bounds_returns_zero_with_flag(self):
        value, oob = alt.interp_bilinear(frame_from(np.ones((4, 4))), 0.2, 1.0)
        assert value == 0.0 and oob

    def test_non_finite_coordinate_raises(self):
        with pytest.raises(InvalidArgumentError):
            alt.interp_bilinear(frame_from(np.ones((4, 4))), np.nan, 1.0)

    def test_vectorized_queries(self):
        frame = frame_from(np.arange(16.0).reshape(4, 4))
        values, oob = alt.interp_bilinear(frame, np.array([1.0, 2.5, 9.0]),
                                          np.array([1.0, 2.0, 1.0]))
        assert values.shape == (3,)
        assert not oob[0] and not oob[1] and oob[2]
        assert values[2] == 0.0

    def test_linear_in_amplitudes(self):
        rng = np.random.default_rng(3)
        f = rng.standard_normal((5, 5))
        g = rng.standard_normal((5, 5))
        ys = rng.uniform(1, 5, 20)
        xs = rng.uniform(1, 5, 20)
        combo, _ = alt.interp_bilinear(frame_from(2.0 * f + 3.0 * g), ys, xs)
        vf, _ = alt.interp_bilinear(frame_from(f), ys, xs)
        vg, _ = alt.interp_bilinear(frame_from(g), ys, xs)
        np.testing.assert_allclose(combo, 2.0 * vf + 3.0 * vg, rtol=1e-12, atol=1e-14)


class TestSpatialGradients:
    def test_axial_ramp(self):
        rows = np.arange(1.0, 9.0)[:, None] * np.ones((1, 5))
        ga, gl = alt.spatial_gradients(frame_from(2.0 * rows),
                                       DisplacementField.zeros(8, 5))
        np.testing.assert_allclose(ga[1:-1, 1:-1], 2.0, atol=1e-12)
        np.testing.assert_allclose(gl[1:-1, 1:-1], 0.0, atol=1e-12)

    def test_constant_frame(self):
        warp = DisplacementField.from_components(0.3 * np.ones((6, 6)),
                                                 0.2 * np.ones((6, 6)))
        ga, gl = alt.spatial_gradients(frame_from(np.full((6, 6), 3.0)), warp)
        np.testing.assert_allclose(ga[1:-1, 1:-1], 0.0, atol=1e-12)
        np.testing.assert_allclose(gl[1:-1, 1:-1], 0.0, atol=1e-12)

    def test_product_surface_point(self):
        # samples[i][j] = i*j (1-based): at (3, 4) the stencil gives (4, 3).
        ii = np.arange(1.0, 9.0)[:, None]
        jj = np.arange(1.0, 9.0)[None, :]
        ga, gl = alt.spatial_gradients(frame_from(ii * jj), DisplacementField.zeros(8, 8))
        assert ga[2, 3] == pytest.approx(4.0)
        assert gl[2, 3] == pytest.approx(3.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            alt.spatial_gradients(frame_from(np.ones((4, 4))), DisplacementField.zeros(5, 4))


class TestStrainFromDisplacement:
    def test_uniform_ramp_all_rows(self):
        axial = 0.02 * np.arange(1, 41)[:, None] * np.ones((1, 6))
        strain = alt.strain_from_displacement(DisplacementField.from_components(axial), 3)
        np.testing.assert_allclose(strain.values, 0.02, atol=1e-12)

    def test_constant_field_zero_strain(self):
        strain = alt.strain_from_displacement(
            DisplacementField.from_components(np.full((10, 4), 1.7)), 5)
        np.testing.assert_allclose(strain.values, 0.0, atol=1e-15)

    def test_two_regime_profile(self):
        rows = np.arange(1, 101)
        axial = np.where(rows <= 50, 0.01 * rows, 0.5 + 0.03 * (rows - 50))
        field = DisplacementField.from_components(np.tile(axial[:, None], (1, 4)))
        strain = alt.strain_from_displacement(field, 3)
        np.testing.assert_allclose(strain.values[:49], 0.01, atol=1e-12)
        np.testing.assert_allclose(strain.values[51:], 0.03, atol=1e-12)
        # central-difference values straddling the interface
        assert strain.values[49, 0] == pytest.approx(0.02)

    def test_affine_fields_recover_exact_slope(self):
        rng = np.random.default_rng(11)
        for kernel in (3, 5, 9, 15):
            slope, offset = rng.uniform(-0.05, 0.05), rng.uniform(-1, 1)
            axial = offset + slope * np.arange(1, 33)[:, None] * np.ones((1, 5))
            strain = alt.strain_from_displacement(
                DisplacementField.from_components(axial), kernel)
            np.testing.assert_allclose(strain.values, slope, atol=1e-12)

    def test_kernel_validation(self):
        field = DisplacementField.zeros(10, 4)
        with pytest.raises(InvalidArgumentError):
            alt.strain_from_displacement(field, 4)
        with pytest.raises(InvalidArgumentError):
            alt.strain_from_displacement(field, 11)
        with pytest.raises(InvalidArgumentError):
            alt.strain_from_displacement(field, 1)
