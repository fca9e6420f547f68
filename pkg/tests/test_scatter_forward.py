"""Tests for the Nystrom transmission solver.

The separation-of-variables disk series is the primary oracle: it is an
entirely independent solution path (mode matching + local Bessel code vs.
boundary integral equations + scipy kernels), so agreement pins down the
formulation, the jump relations, and the far-field normalization at once.
"""

import cmath
import math
import time

import numpy as np
import pytest
from scipy.special import hankel1, h1vp, jv, jvp

from cornerscat.scatter_forward import (
    DegenerateContrast,
    Disk,
    FarFieldPattern,
    Medium,
    NoConvergence,
    PlaneWave,
    Rectangle,
    TooCloseToBoundary,
    _KernelWorkspace,
    _log_quadrature_weights,
    discretize,
    disk_series_solution,
    evaluate_far,
    evaluate_near,
    helmholtz_residual,
    self_convergence_estimate,
    solve_transmission,
    transmission_residuals,
)

MEDIUM = Medium(kappa=2.0, q0=2.0)
WAVE = PlaneWave.from_angle(0.4)
RECT = Rectangle((0.1, -0.2), 0.9, 0.55, rotation=0.3)


@pytest.fixture(scope="module")
def rect_solution():
    disc = discretize(RECT, 128, grading_p=4)
    return solve_transmission(RECT, MEDIUM, WAVE, disc)


@pytest.fixture(scope="module")
def disk_solution():
    disk = Disk((0.0, 0.0), 1.0)
    medium = Medium(kappa=2.0, q0=4.0)
    return solve_transmission(disk, medium, WAVE, discretize(disk, 256))


class TestQuadrature:
    def test_log_weights_integrate_fourier_modes(self):
        # integral of ln(4 sin^2((t-s)/2)) e^{ims} ds = -2pi e^{imt}/|m|, 0 for m=0
        N = 32
        r = _log_quadrature_weights(N)
        s = 2 * math.pi * np.arange(N) / N
        t_idx = 5
        R = r[(t_idx - np.arange(N)) % N]
        for m in [0, 1, 2, 7, 12]:
            approx = np.sum(R * np.exp(1j * m * s))
            exact = 0.0 if m == 0 else -2 * math.pi / m * np.exp(1j * m * s[t_idx])
            assert abs(approx - exact) < 1e-13

    def test_layer_operators_diagonalize_on_circle(self):
        # On the unit circle every operator acts diagonally on e^{int};
        # the eigenvalues are classical Bessel products.
        disc = discretize(Disk((0.0, 0.0), 1.0), 64)
        ws = _KernelWorkspace(disc)
        k = 1.3
        S, D, Kp = ws.single_layer(k), ws.double_layer(k), ws.adjoint_double_layer(k)
        k2 = 2.1
        Td = ws.hypersingular_difference(k, k2)
        for n in [0, 1, 3, 7]:
            f = np.exp(1j * n * disc.params)
            lam_s = 0.5j * math.pi * jv(n, k) * hankel1(n, k)
            assert np.max(np.abs(S @ f - lam_s * f)) < 1e-12
            # principal-value double layer / its adjoint
            lam_d = 0.5j * math.pi * k * jvp(n, k) * hankel1(n, k) - 0.5
            lam_k = 0.5j * math.pi * k * jv(n, k) * h1vp(n, k) + 0.5
            assert np.max(np.abs(D @ f - lam_d * f)) < 1e-12
            assert np.max(np.abs(Kp @ f - lam_k * f)) < 1e-12

            def t_eig(kk):
                return 0.5j * math.pi * kk * kk * jvp(n, kk) * h1vp(n, kk)

            assert np.max(np.abs(Td @ f - (t_eig(k) - t_eig(k2)) * f)) < 1e-12


class TestDiskOracle:
    def test_far_field_matches_series(self, disk_solution):
        t0 = time.time()
        far = evaluate_far(disk_solution, 64)
        oracle = disk_series_solution(
            Medium(kappa=2.0, q0=4.0), 1.0, WAVE, n_terms=48, n_directions=64
        )
        assert far.rel_l2_distance(oracle) < 1e-6
        assert time.time() - t0 < 5.0

    def test_off_center_low_contrast(self):
        medium = Medium(kappa=1.7, q0=0.6)
        wave = PlaneWave.from_angle(-1.1)
        disk = Disk((0.4, -0.25), 0.8)
        sol = solve_transmission(disk, medium, wave, discretize(disk, 128))
        far = evaluate_far(sol, 64)
        oracle = disk_series_solution(
            medium, 0.8, wave, n_terms=40, n_directions=64, center=(0.4, -0.25)
        )
        assert far.rel_l2_distance(oracle) < 1e-6

    def test_near_field_matches_series_inside_and_outside(self, disk_solution):
        medium = Medium(kappa=2.0, q0=4.0)
        k1, k2, lam = medium.k_exterior, medium.k_interior, medium.lam
        R = 1.0
        theta_d = 0.4

        def coeffs(n):
            cn = -(1j**n) * cmath.exp(-1j * n * theta_d)
            num = k1 * jvp(n, k1 * R) * jv(n, k2 * R) - lam * k2 * jv(n, k1 * R) * jvp(n, k2 * R)
            den = k1 * h1vp(n, k1 * R) * jv(n, k2 * R) - lam * k2 * hankel1(n, k1 * R) * jvp(n, k2 * R)
            an = -cn * num / den
            bn = (cn * jv(n, k1 * R) + an * hankel1(n, k1 * R)) / jv(n, k2 * R)
            return cn, an, bn

        def series(r, th):
            s = 0.0
            for n in range(-30, 31):
                cn, an, bn = coeffs(n)
                if r < R:
                    s += bn * jv(n, k2 * r) * cmath.exp(1j * n * th)
                else:
                    s += (cn * jv(n, k1 * r) + an * hankel1(n, k1 * r)) * cmath.exp(1j * n * th)
            return s

        for r, th in [(0.5, 0.7), (0.3, -1.2), (1.5, 0.7), (2.2, 2.9)]:
            p = np.array([[r * math.cos(th), r * math.sin(th)]])
            got = evaluate_near(disk_solution, p)[0]
            assert abs(got - series(r, th)) < 1e-10

    def test_series_tail_guard(self):
        with pytest.raises(NoConvergence):
            disk_series_solution(Medium(kappa=8.0, q0=4.0), 1.0, WAVE, n_terms=6)


class TestTransmissionConditions:
    def test_interface_residuals_rectangle(self, rect_solution):
        res = transmission_residuals(rect_solution)
        assert res["value"] < 1e-4
        assert res["derivative"] < 1e-4

    def test_interface_residuals_disk(self, disk_solution):
        res = transmission_residuals(disk_solution)
        assert res["value"] < 1e-4
        assert res["derivative"] < 1e-4

    def test_helmholtz_residual_interior(self, rect_solution):
        assert helmholtz_residual(rect_solution, (0.1, -0.2)) < 1e-4

    def test_helmholtz_residual_exterior(self, rect_solution):
        assert helmholtz_residual(rect_solution, (2.0, 1.5)) < 1e-4


class TestFarField:
    def test_reciprocity_disk(self):
        disk = Disk((0.0, 0.0), 1.0)
        medium = Medium(kappa=2.0, q0=4.0)
        disc = discretize(disk, 256)
        n = 720
        i_d, i_x = 41, 305
        ang_d, ang_x = 2 * math.pi * i_d / n, 2 * math.pi * i_x / n
        f1 = evaluate_far(
            solve_transmission(disk, medium, PlaneWave.from_angle(ang_d), disc), n
        )
        f2 = evaluate_far(
            solve_transmission(disk, medium, PlaneWave.from_angle(ang_x + math.pi), disc), n
        )
        a, b = f1.values[i_x], f2.values[(i_d + n // 2) % n]
        assert abs(a - b) < 1e-6 * f1.l2_norm() / math.sqrt(2 * math.pi)

    def test_reciprocity_rectangle(self):
        disc = discretize(RECT, 128)
        n = 720
        i_d, i_x = 63, 411
        ang_d, ang_x = 2 * math.pi * i_d / n, 2 * math.pi * i_x / n
        f1 = evaluate_far(
            solve_transmission(RECT, MEDIUM, PlaneWave.from_angle(ang_d), disc), n
        )
        f2 = evaluate_far(
            solve_transmission(RECT, MEDIUM, PlaneWave.from_angle(ang_x + math.pi), disc), n
        )
        a, b = f1.values[i_x], f2.values[(i_d + n // 2) % n]
        assert abs(a - b) < 1e-3 * f1.l2_norm() / math.sqrt(2 * math.pi)

    def test_optical_theorem(self, disk_solution):
        # energy conservation for a lossless scatterer, incident amplitude -1:
        # int |vinf|^2 = sqrt(8 pi / k) Re[e^{i pi/4} vinf(d)]
        f = evaluate_far(disk_solution, 720)
        k = disk_solution.medium.kappa
        lhs = f.l2_norm() ** 2
        i_d = int(round(0.4 / (2 * math.pi) * 720))
        # incident direction must lie on the sampling grid for this check
        assert abs(2 * math.pi * i_d / 720 - 0.4) < 1e-2
        f = evaluate_far(disk_solution, 3600)
        i_d = int(round(0.4 / (2 * math.pi) * 3600))
        ang_err = 2 * math.pi * i_d / 3600 - 0.4
        assert abs(ang_err) < 1e-3
        rhs = math.sqrt(8 * math.pi / k) * (
            cmath.exp(0.25j * math.pi) * f.values[i_d]
        ).real
        assert lhs == pytest.approx(rhs, rel=5e-3)

    def test_scattered_field_matches_far_field_asymptotics(self, disk_solution):
        # v_sc(r xhat) = e^{ikr}/sqrt(r) (vinf(xhat) + O(1/r))
        k = disk_solution.medium.kappa
        theta = 0.9
        xhat = np.array([math.cos(theta), math.sin(theta)])
        n = 3600
        f = evaluate_far(disk_solution, n)
        vinf = f.values[int(round(theta / (2 * math.pi) * n)) % n]
        errs = []
        for r in [200.0, 400.0, 800.0]:
            p = (r * xhat)[None, :]
            vtot = evaluate_near(disk_solution, p)[0]
            vin = -cmath.exp(1j * k * float(p[0] @ np.asarray(WAVE.d)))
            vsc = vtot - vin
            errs.append(abs(vsc - cmath.exp(1j * k * r) / math.sqrt(r) * vinf))
        # absolute remainder decays like r^{-3/2}: halving at each doubling at least
        assert errs[1] < 0.6 * errs[0]
        assert errs[2] < 0.6 * errs[1]

    def test_vector_far_field_identification(self, disk_solution):
        # The derived vector field (1/ik)(-d2 v, d1 v) has far-field
        # amplitude vinf * xhat_perp: the scalar pattern transfers directly.
        k = disk_solution.medium.kappa
        theta = 0.9
        xhat = np.array([math.cos(theta), math.sin(theta)])
        n = 3600
        f = evaluate_far(disk_solution, n)
        vinf = f.values[int(round(theta / (2 * math.pi) * n)) % n]
        r, h = 800.0, 1e-3
        p0 = r * xhat

        def vsc(p):
            vtot = evaluate_near(disk_solution, np.atleast_2d(p))[0]
            return vtot + cmath.exp(1j * k * float(np.dot(p, WAVE.d)))

        d1 = (vsc(p0 + [h, 0]) - vsc(p0 - [h, 0])) / (2 * h)
        d2 = (vsc(p0 + [0, h]) - vsc(p0 - [0, h])) / (2 * h)
        u = np.array([-d2, d1]) / (1j * k)
        uinf = u * math.sqrt(r) * cmath.exp(-1j * k * r)
        pred = vinf * np.array([-xhat[1], xhat[0]])
        assert np.max(np.abs(uinf - pred)) < 5e-3 * abs(vinf)

    def test_pattern_l2_and_distance(self):
        th = 2 * math.pi * np.arange(64) / 64
        ones = FarFieldPattern(th, np.ones(64, dtype=complex))
        assert ones.l2_norm() == pytest.approx(math.sqrt(2 * math.pi))
        assert ones.rel_l2_distance(ones) == 0.0
        with pytest.raises(ValueError):
            FarFieldPattern(th, np.ones(32, dtype=complex))


class TestDegenerateAndErrors:
    def test_no_contrast_scatters_nothing(self):
        medium = Medium(kappa=2.0, q0=1.0)
        disc = discretize(RECT, 32)
        sol = solve_transmission(RECT, medium, WAVE, disc)
        assert evaluate_far(sol, 64).l2_norm() == 0.0
        p = np.array([[3.0, 2.0]])
        vin = -np.exp(1j * 2.0 * (p @ np.asarray(WAVE.d)))
        assert abs(evaluate_near(sol, p)[0] - vin[0]) < 1e-12

    def test_no_contrast_strict_raises(self):
        disc = discretize(RECT, 32)
        with pytest.raises(DegenerateContrast):
            solve_transmission(RECT, Medium(2.0, 1.0), WAVE, disc, strict_contrast=True)

    def test_contrast_continuity_near_one(self):
        # q0 -> 1 should make the far field small, continuously
        disc = discretize(Disk((0.0, 0.0), 1.0), 64)
        disk = Disk((0.0, 0.0), 1.0)
        norm = evaluate_far(
            solve_transmission(disk, Medium(2.0, 1.001), WAVE, disc), 64
        ).l2_norm()
        assert norm < 5e-3

    def test_near_evaluation_guard(self, rect_solution):
        corners = RECT.corners()
        mid = 0.5 * (corners[0] + corners[1])
        with pytest.raises(TooCloseToBoundary):
            evaluate_near(rect_solution, mid[None, :] * 1.0001)

    def test_mismatched_geometry_rejected(self, rect_solution):
        other = Rectangle((0.0, 0.0), 1.0, 1.0)
        with pytest.raises(ValueError):
            solve_transmission(other, MEDIUM, WAVE, rect_solution.disc)


class TestConvergence:
    def test_self_convergence_decreases_under_refinement(self):
        e32 = self_convergence_estimate(RECT, MEDIUM, WAVE, 32)
        e64 = self_convergence_estimate(RECT, MEDIUM, WAVE, 64)
        assert e64 < 0.25 * e32  # better than second order in practice
        assert e64 < 1e-4
