"""Tests for single-wave rectangle recovery, landscapes and far-field gaps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerscat.geometry import Medium, PlaneWave
from cornerscat.inverse_recovery import (
    InversionResult,
    LandscapeGrid,
    MeasurementSetup,
    OptimizerConfig,
    RectangleParams,
    canonicalize,
    default_start_grid,
    far_field_gap,
    forward_far_field,
    invert,
    landscape,
    misfit,
    synthesize_measurement,
)
from cornerscat.scatter_forward import FarFieldPattern

SETUP = MeasurementSetup(medium=Medium(2.0, 2.0), wave=PlaneWave.from_angle(0.4))
STAR = RectangleParams(0.15, -0.2, 0.9, 0.55, 0.3)


@pytest.fixture(scope="module")
def clean_data():
    return synthesize_measurement(STAR, SETUP)


class TestCanonicalize:
    def test_swaps_when_wide_axis_is_b(self):
        t = canonicalize(RectangleParams(0.0, 0.0, 1.0, 2.0, 0.0))
        assert (t.a, t.b) == (2.0, 1.0)
        assert t.phi == pytest.approx(math.pi / 2)

    def test_reduces_phi_mod_pi(self):
        t = canonicalize(RectangleParams(0.0, 0.0, 2.0, 1.0, 3 * math.pi / 2))
        assert t.phi == pytest.approx(math.pi / 2)
        assert (t.a, t.b) == (2.0, 1.0)

    @given(
        a=st.floats(0.2, 3.0),
        b=st.floats(0.2, 3.0),
        phi=st.floats(-7.0, 7.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_idempotent_and_canonical(self, a, b, phi):
        t = canonicalize(RectangleParams(0.1, 0.2, a, b, phi))
        assert t.a >= t.b
        assert 0.0 <= t.phi < math.pi
        again = canonicalize(t)
        assert again == t

    def test_rejects_nonpositive_half_sizes(self):
        with pytest.raises(ValueError):
            RectangleParams(0, 0, -1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            RectangleParams(0, 0, 1.0, 0.0, 0.0)


class TestMeasurementSetup:
    def test_noise_level_bounds(self):
        with pytest.raises(ValueError):
            MeasurementSetup(
                medium=Medium(2.0, 2.0),
                wave=PlaneWave.from_angle(0.0),
                noise_level=0.6,
            )

    def test_noiseless_is_exact_forward(self):
        g = synthesize_measurement(STAR, SETUP, n_per_side=32)
        f = forward_far_field(STAR, SETUP, n_per_side=32)
        assert np.array_equal(g.values, f.values)

    def test_same_seed_reproduces(self):
        s = MeasurementSetup(
            medium=Medium(2.0, 2.0),
            wave=PlaneWave.from_angle(0.4),
            noise_level=0.05,
            seed=42,
        )
        g1 = synthesize_measurement(STAR, s, n_per_side=32)
        g2 = synthesize_measurement(STAR, s, n_per_side=32)
        assert np.array_equal(g1.values, g2.values)

    def test_noise_magnitude_calibrated(self):
        s = MeasurementSetup(
            medium=Medium(2.0, 2.0),
            wave=PlaneWave.from_angle(0.4),
            noise_level=0.01,
            seed=3,
            n_directions=64,
        )
        clean = synthesize_measurement(
            STAR,
            MeasurementSetup(medium=Medium(2.0, 2.0), wave=PlaneWave.from_angle(0.4)),
            n_per_side=32,
        )
        noisy = synthesize_measurement(STAR, s, n_per_side=32)
        ratio = np.sqrt(np.mean(np.abs(noisy.values - clean.values) ** 2)) / np.sqrt(
            np.mean(np.abs(clean.values) ** 2)
        )
        assert 0.008 <= ratio <= 0.012


class TestMisfit:
    def test_zero_at_truth_with_identical_discretization(self):
        g = forward_far_field(STAR, SETUP, n_per_side=32)
        assert misfit(STAR, g, SETUP, n_per_side=32) < 1e-20

    def test_symmetry_invariance(self, clean_data):
        swapped = RectangleParams(
            STAR.c1, STAR.c2, STAR.b, STAR.a, STAR.phi + math.pi / 2
        )
        m1 = misfit(STAR, clean_data, SETUP, n_per_side=24)
        m2 = misfit(swapped, clean_data, SETUP, n_per_side=24)
        # canonical forms agree up to the roundoff of phi + pi/2 - pi/2
        assert m2 == pytest.approx(m1, rel=1e-6)

    def test_positive_for_wrong_rectangle(self, clean_data):
        wrong = RectangleParams(0.0, 0.0, 1.2, 0.5, 0.9)
        assert misfit(wrong, clean_data, SETUP, n_per_side=24) > 1e-2

    def test_rejects_mismatched_sampling(self, clean_data):
        small = MeasurementSetup(
            medium=SETUP.medium, wave=SETUP.wave, n_directions=32
        )
        with pytest.raises(ValueError):
            misfit(STAR, clean_data, small)


class TestGap:
    def test_self_gap_zero(self):
        assert far_field_gap(STAR, STAR, SETUP, n_per_side=24) == 0.0

    def test_symmetric(self):
        other = RectangleParams(0.0, 0.0, 1.2, 0.5, 0.9)
        g12 = far_field_gap(STAR, other, SETUP, n_per_side=24)
        g21 = far_field_gap(other, STAR, SETUP, n_per_side=24)
        assert g12 == g21
        assert g12 > 0.01

    def test_overlapping_distinct_rectangles_separate(self):
        # two rectangles sharing a region, one exposing a corner outside
        # the other: the patterns must differ measurably
        t1 = RectangleParams(0.0, 0.0, 1.0, 0.6, 0.0)
        t2 = RectangleParams(0.3, 0.1, 1.0, 0.6, 0.5)
        gap = far_field_gap(t1, t2, SETUP, n_per_side=32)
        assert gap > 0.01


class TestInvert:
    def test_recovers_noiseless_rectangle(self, clean_data):
        res = invert(clean_data, SETUP)
        cs = canonicalize(STAR)
        rel = np.abs(res.theta_hat.as_array() - cs.as_array()) / np.abs(cs.as_array())
        assert rel.max() < 1e-3
        assert res.misfit < 1e-10
        assert res.converged
        assert res.n_forward_solves > 108  # at least the probe stage ran

    def test_result_serializes(self, clean_data):
        cfg = OptimizerConfig(
            grid_shape=(2, 2, 1, 1, 2),
            n_refine=2,
            probe_n_per_side=12,
            coarse_n_per_side=16,
            fine_n_per_side=16,
            coarse_maxiter=40,
            fine_maxiter=40,
        )
        res = invert(clean_data, SETUP, cfg)
        d = res.to_json_dict()
        assert set(d) == {
            "theta_hat",
            "misfit",
            "n_forward_solves",
            "converged",
            "start_used",
        }
        assert set(d["theta_hat"]) == {"c1", "c2", "a", "b", "phi"}
        # canonical output
        assert d["theta_hat"]["a"] >= d["theta_hat"]["b"]
        assert 0.0 <= d["theta_hat"]["phi"] < math.pi

    def test_joint_contrast_mode_reports_q0(self, clean_data):
        cfg = OptimizerConfig(
            grid_shape=(1, 1, 1, 1, 1),
            n_refine=1,
            probe_n_per_side=12,
            coarse_n_per_side=12,
            fine_n_per_side=12,
            coarse_maxiter=30,
            fine_maxiter=30,
            estimate_q0=True,
        )
        res = invert(clean_data, SETUP, cfg)
        qlo, qhi = cfg.q0_bounds
        assert res.q0_hat is not None
        assert qlo <= res.q0_hat <= qhi
        assert res.to_json_dict()["q0_hat"] == res.q0_hat

    def test_default_mode_omits_q0(self, clean_data):
        cfg = OptimizerConfig(
            grid_shape=(1, 1, 1, 1, 1),
            n_refine=1,
            probe_n_per_side=12,
            coarse_n_per_side=12,
            fine_n_per_side=12,
            coarse_maxiter=10,
            fine_maxiter=10,
        )
        res = invert(clean_data, SETUP, cfg)
        assert res.q0_hat is None
        assert "q0_hat" not in res.to_json_dict()

    def test_start_grid_shape(self):
        cfg = OptimizerConfig()
        assert len(default_start_grid(cfg)) == 108
        cfg2 = OptimizerConfig(grid_shape=(2, 1, 1, 1, 2))
        assert len(default_start_grid(cfg2)) == 4


class TestLandscape:
    def test_truth_attains_grid_minimum(self, clean_data):
        avals = np.linspace(0.6, 1.2, 7)  # includes a* = 0.9
        bvals = np.linspace(0.35, 0.75, 5)  # includes b* = 0.55
        grid = landscape(
            clean_data, SETUP, ("a", avals), ("b", bvals), STAR, n_per_side=24
        )
        i, j = grid.argmin()
        assert avals[i] == pytest.approx(0.9)
        assert bvals[j] == pytest.approx(0.55)

    def test_away_from_truth_positive(self, clean_data):
        avals = np.linspace(0.5, 1.3, 9)
        bvals = np.array([0.55, 0.6])
        grid = landscape(
            clean_data, SETUP, ("a", avals), ("b", bvals), STAR, n_per_side=24
        )
        far = np.abs(avals - 0.9) >= 0.09
        assert np.all(grid.misfit_values[far, 0] > 1e-4)

    def test_csv_format(self, clean_data):
        grid = landscape(
            clean_data,
            SETUP,
            ("a", [0.8, 1.0]),
            ("b", [0.5, 0.6]),
            STAR,
            n_per_side=16,
        )
        lines = grid.to_csv().strip().split("\n")
        assert lines[0] == "p1,p2,misfit"
        assert len(lines) == 5
        p1, p2, m = lines[1].split(",")
        assert float(p1) == 0.8 and float(p2) == 0.5 and float(m) >= 0

    def test_rejects_bad_axes(self, clean_data):
        with pytest.raises(ValueError):
            landscape(clean_data, SETUP, ("a", [1, 2]), ("a", [1, 2]), STAR)
        with pytest.raises(ValueError):
            landscape(clean_data, SETUP, ("bogus", [1, 2]), ("b", [1, 2]), STAR)
        with pytest.raises(ValueError):
            landscape(clean_data, SETUP, ("a", [1.0]), ("b", [1, 2]), STAR)

    def test_grid_shape_invariant(self):
        with pytest.raises(ValueError):
            LandscapeGrid("a", np.arange(3.0), "b", np.arange(4.0), np.zeros((4, 3)))
