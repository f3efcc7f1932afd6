import json
import math

import pytest

from psector.exponent import DomainError
from psector.pde import (
    ResidualReport,
    inf_lap_residual,
    inf_separation_residual,
    laplace_polar_residual,
    polar_plap_residual,
    polar_residual_report,
    profile_corner_bands,
    separation_report,
    separation_residual,
)
from psector.profile import PolarPoint, build_profile


class TestSeparationResidual:
    def test_zero_state(self):
        assert separation_residual(0.0, 0.0, 0.0, 1.5, 3.0) == 0.0

    def test_built_profile_satisfies_ode(self):
        # spec-level spot check: tabulated (f, f', numeric f'') of a built
        # profile solves its own separation equation
        prof = build_profile(1.0, 4.0, 257)
        h = float(prof.phi[1] - prof.phi[0])
        i = len(prof.phi) // 3
        fpp = (prof.f[i + 1] - 2 * prof.f[i] + prof.f[i - 1]) / (h * h)
        r = separation_residual(prof.f[i], prof.fprime[i], fpp, prof.k, 4.0,
                                relative=True)
        assert abs(r) <= 1e-4

    def test_p2_reduced_form(self):
        # for p = 2 the balance is f'' + nu^2 f = 0; cos(nu phi) is exact
        nu, phi = 2.0, 0.35
        f, fpp = math.cos(nu * phi), -nu * nu * math.cos(nu * phi)
        assert fpp + nu * nu * f == pytest.approx(0.0, abs=1e-14)

    def test_rejects_p2_and_inf(self):
        with pytest.raises(DomainError):
            separation_residual(1.0, 0.0, -1.0, 1.0, 2.0)
        with pytest.raises(DomainError):
            separation_residual(1.0, 0.0, -1.0, 1.0, math.inf)


class TestInfSeparationResidual:
    def test_zero_state(self):
        assert inf_separation_residual(0.0, 0.0, 0.0, 1.0) == 0.0

    def test_half_plane_profile(self):
        # k = 1 reduces the equation to f'^2 (f'' + f); cosine is exact
        phi = 0.7
        f, fp, fpp = math.cos(phi), -math.sin(phi), -math.cos(phi)
        assert inf_separation_residual(f, fp, fpp, 1.0) == pytest.approx(0.0, abs=1e-16)

    def test_built_sup_profiles(self):
        for nu in (1.0, 2.0):
            prof = build_profile(nu, math.inf, 257)
            rep = separation_report(prof)
            assert rep.max_abs_residual <= 1e-4, (nu, rep.max_abs_residual)


class TestPolarResidual:
    def test_constant_field(self):
        res = polar_plap_residual(lambda r, f: 5.0, PolarPoint(1.0, 0.1), 3.0, 1e-3)
        assert res == 0.0

    def test_harmonic_field_laplace_form(self):
        nu = 2.0
        fld = lambda r, f: r**nu * math.cos(nu * f)  # noqa: E731
        res = laplace_polar_residual(fld, PolarPoint(1.0, 0.2), 1e-4, relative=True)
        assert abs(res) <= 1e-6

    def test_constructed_solution(self):
        prof = build_profile(2.0, 3.0, 257)
        fld = lambda r, f: r**prof.k * prof.f_exact(f)  # noqa: E731
        res = polar_plap_residual(fld, PolarPoint(1.0, 0.2), 3.0, 1e-3)
        assert abs(res) <= 1e-4

    def test_k_relativization(self):
        prof = build_profile(2.0, 3.0, 257)
        fld = lambda r, f: r**prof.k * prof.f_exact(f)  # noqa: E731
        raw = polar_plap_residual(fld, PolarPoint(0.5, 0.2), 3.0, 1e-4)
        scaled = polar_plap_residual(fld, PolarPoint(0.5, 0.2), 3.0, 1e-4, k=prof.k)
        assert scaled == pytest.approx(raw / 0.5 ** (3 * (prof.k - 1) - 1), rel=1e-12)

    def test_stencil_bounds(self):
        with pytest.raises(DomainError):
            polar_plap_residual(lambda r, f: r, PolarPoint(1e-4, 0.0), 3.0, 1e-3)


class TestInfLapResidual:
    def test_affine_field(self):
        res = inf_lap_residual(lambda x, y: 2 * x - 3 * y + 1, (0.5, 0.1), 1e-3)
        assert res == pytest.approx(0.0, abs=1e-12)

    def test_cone_field(self):
        x0, y0 = -0.3, 0.4
        fld = lambda x, y: math.hypot(x - x0, y - y0)  # noqa: E731
        for step in (1e-3, 5e-4):
            res = inf_lap_residual(fld, (0.5, 0.1), step, relative=True)
            assert abs(res) <= 1e-6

    def test_sup_profile_field(self):
        prof = build_profile(1.0, math.inf, 257)

        def fld(x, y):
            return math.hypot(x, y) ** prof.k * prof.f_exact(math.atan2(y, x))

        pt = (math.cos(0.5), math.sin(0.5))
        assert abs(inf_lap_residual(fld, pt, 1e-3, relative=True)) <= 1e-3


PROFILE_SET = [(1.0, 3.0), (2.0, 3.0), (2.0, 4.0), (0.75, 3.0), (2.0, 1.5),
               (0.5, 1.5), (1.0, math.inf), (2.0, math.inf), (0.5, math.inf)]


class TestReports:
    def test_separation_bound_across_profiles(self):
        for nu, p in PROFILE_SET:
            prof = build_profile(nu, p, 257)
            rep = separation_report(prof)
            assert rep.max_abs_residual <= 1e-3, (nu, p, rep.max_abs_residual)

    def test_field_bound_across_profiles(self):
        for nu, p in PROFILE_SET:
            prof = build_profile(nu, p, 257)
            rep = polar_residual_report(prof, 100)
            assert rep.max_abs_residual <= 1e-3, (nu, p, rep.max_abs_residual)
            assert rep.sample_count >= 80

    def test_step_halving_order(self):
        prof = build_profile(2.0, 3.0, 257)
        r1 = polar_residual_report(prof, 20, step=1e-3).max_abs_residual
        r2 = polar_residual_report(prof, 20, step=5e-4).max_abs_residual
        assert 3.0 <= r1 / r2 <= 5.0

    def test_corner_bands(self):
        assert profile_corner_bands(build_profile(2.0, 3.0, 65)) == []
        ridge = profile_corner_bands(build_profile(2.0, math.inf, 65))
        assert len(ridge) == 1 and ridge[0][0] < 0 < ridge[0][1]
        plateau = profile_corner_bands(build_profile(0.5, math.inf, 65))
        assert len(plateau) == 2

    def test_report_json(self):
        rep = ResidualReport(1e-5, 40, [(-0.1, 0.1)], 2.0)
        data = json.loads(rep.to_json())
        assert data["max_abs_residual"] == 1e-5
        assert data["sample_count"] == 40
        assert data["excluded_bands"] == [[-0.1, 0.1]]
        assert data["normalization_scale"] == 2.0

    def test_report_validation(self):
        with pytest.raises(ValueError):
            ResidualReport(-1.0, 10)
        with pytest.raises(ValueError):
            ResidualReport(0.0, 0)
