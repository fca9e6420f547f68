"""Tests for boundary geometry and discretization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerscat.geometry import (
    BadMesh,
    Disk,
    Medium,
    ParametricCurve,
    PlaneWave,
    Rectangle,
    discretize,
)


def kite_curve():
    def x(t):
        t = np.asarray(t)
        return np.column_stack([np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)])

    def dx(t):
        t = np.asarray(t)
        return np.column_stack([-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)])

    def ddx(t):
        t = np.asarray(t)
        return np.column_stack([-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)])

    return ParametricCurve(x=x, dx=dx, ddx=ddx)


class TestSceneTypes:
    def test_medium_wavenumbers(self):
        m = Medium(kappa=2.0, q0=4.0)
        assert m.k_exterior == 2.0
        assert m.k_interior == pytest.approx(4.0)
        assert m.lam == pytest.approx(0.25)

    @pytest.mark.parametrize("kappa,q0", [(0.0, 1.0), (-1.0, 2.0), (1.0, 0.0), (1.0, -3.0)])
    def test_medium_rejects_nonpositive(self, kappa, q0):
        with pytest.raises(ValueError):
            Medium(kappa=kappa, q0=q0)

    def test_plane_wave_must_be_unit(self):
        with pytest.raises(ValueError):
            PlaneWave((1.0, 1.0))
        w = PlaneWave.from_angle(0.7)
        assert math.hypot(*w.d) == pytest.approx(1.0)

    def test_rectangle_corners_ccw(self):
        r = Rectangle((0.0, 0.0), 2.0, 1.0)
        c = r.corners()
        # shoelace area should be positive (counter-clockwise) and 4ab
        area = 0.5 * np.sum(c[:, 0] * np.roll(c[:, 1], -1) - c[:, 1] * np.roll(c[:, 0], -1))
        assert area == pytest.approx(8.0)

    @given(
        rot=st.floats(-3.0, 3.0),
        cx=st.floats(-2.0, 2.0),
        cy=st.floats(-2.0, 2.0),
    )
    @settings(max_examples=30, deadline=None)
    def test_rectangle_contains_center_not_far_points(self, rot, cx, cy):
        r = Rectangle((cx, cy), 1.0, 0.5, rotation=rot)
        assert r.contains(np.array([[cx, cy]]))[0]
        assert not r.contains(np.array([[cx + 10.0, cy]]))[0]

    def test_disk_contains(self):
        d = Disk((1.0, -1.0), 0.5)
        assert d.contains(np.array([[1.2, -1.0]]))[0]
        assert not d.contains(np.array([[1.6, -1.0]]))[0]

    def test_curve_contains_winding(self):
        kite = kite_curve()
        assert kite.contains(np.array([[-0.3, 0.0]]))[0]
        assert not kite.contains(np.array([[3.0, 0.0]]))[0]


class TestDiscretization:
    def test_disk_weights_sum_to_circumference(self):
        disc = discretize(Disk((0.3, 0.3), 1.7), 64)
        assert np.sum(disc.weights) == pytest.approx(2 * math.pi * 1.7, rel=1e-12)

    def test_rectangle_weights_sum_to_perimeter(self):
        rect = Rectangle((0.0, 0.0), 1.5, 0.5, rotation=0.4)
        disc = discretize(rect, 64, grading_p=4)
        # graded trapezoid sum converges to the perimeter
        assert np.sum(disc.weights) == pytest.approx(2 * (3.0 + 1.0), rel=1e-6)

    def test_rectangle_no_node_on_corner(self):
        rect = Rectangle((0.0, 0.0), 1.0, 1.0)
        disc = discretize(rect, 32)
        corners = rect.corners()
        dmin = min(
            np.min(np.linalg.norm(disc.nodes - c, axis=1)) for c in corners
        )
        assert dmin > 1e-8

    def test_rectangle_nodes_on_boundary(self):
        rect = Rectangle((0.2, -0.1), 1.0, 0.7, rotation=0.9)
        disc = discretize(rect, 16)
        c, s = math.cos(0.9), math.sin(0.9)
        local = (disc.nodes - np.array([0.2, -0.1])) @ np.array([[c, -s], [s, c]])
        on_v = np.isclose(np.abs(local[:, 0]), 1.0, atol=1e-12)
        on_h = np.isclose(np.abs(local[:, 1]), 0.7, atol=1e-12)
        assert np.all(on_v | on_h)

    def test_grading_clusters_nodes_at_corners(self):
        disc = discretize(Rectangle((0.0, 0.0), 1.0, 1.0), 32, grading_p=4)
        gaps = np.linalg.norm(np.roll(disc.nodes, -1, axis=0) - disc.nodes, axis=1)
        assert np.max(gaps) / np.min(gaps) > 10.0

    def test_normals_outward_unit(self):
        for geom in [
            Disk((0.0, 0.0), 1.0),
            Rectangle((0.0, 0.0), 1.0, 0.6, rotation=0.3),
            kite_curve(),
        ]:
            disc = discretize(geom, 64)
            assert np.allclose(np.linalg.norm(disc.normals, axis=1), 1.0)
            probes = disc.nodes + 1e-3 * disc.normals
            assert not np.any(geom.contains(probes))

    def test_weights_integrate_smooth_function(self):
        # integral of x over the unit circle boundary is 0; of x^2 is pi
        disc = discretize(Disk((0.0, 0.0), 1.0), 128)
        assert np.sum(disc.weights * disc.nodes[:, 0]) == pytest.approx(0.0, abs=1e-12)
        assert np.sum(disc.weights * disc.nodes[:, 0] ** 2) == pytest.approx(
            math.pi, rel=1e-12
        )

    def test_corner_map_lists_nodes_near_each_corner(self):
        disc = discretize(Rectangle((0.0, 0.0), 1.0, 1.0), 32)
        assert set(disc.corner_map) == {0, 1, 2, 3}
        seen = set()
        for c, idx in disc.corner_map.items():
            assert len(idx) > 0
            assert seen.isdisjoint(idx)
            seen.update(idx.tolist())
            sc = c * math.pi / 2.0
            dist = np.abs(disc.params[idx] - sc)
            dist = np.minimum(dist, 2 * math.pi - dist)
            assert np.all(dist < math.pi / 8)

    def test_too_few_nodes_rejected(self):
        with pytest.raises(BadMesh):
            discretize(Disk((0.0, 0.0), 1.0), 4)

    def test_low_grading_rejected(self):
        with pytest.raises(BadMesh):
            discretize(Rectangle((0.0, 0.0), 1.0, 1.0), 32, grading_p=1)

    def test_unknown_geometry_rejected(self):
        with pytest.raises(TypeError):
            discretize(object(), 32)
