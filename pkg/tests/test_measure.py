import json
import math

import numpy as np
import pytest

from psector.exponent import DomainError
from psector.measure import (
    FULL_ARC,
    INNER_ARC,
    REGION_S2NU,
    REGION_SNU,
    MeasureProblem,
    MeasureSolution,
    comparability_constants,
    fit_slope,
    mc_harmonic_measure,
    solve_measure,
    write_summary_json,
)


def exact_half_disk(r, phi=0.0, nu=1.0, terms=400):
    """Series solution of the p = 2 measure on a sector of half-aperture
    pi/(2 nu): sum over odd n of 4/(n pi) (-1)^((n-1)/2) r^(n nu) cos(n nu phi)."""
    s = 0.0
    for m in range(terms):
        n = 2 * m + 1
        s += 4.0 / (n * math.pi) * (-1) ** m * r ** (n * nu) * math.cos(n * nu * phi)
    return s


@pytest.fixture(scope="module")
def harmonic_sol():
    return solve_measure(MeasureProblem(nu=1.0, p=2.0, n_r=128, n_phi=129))


class TestSolveMeasure:
    def test_boundary_data(self, harmonic_sol):
        om = harmonic_sol.omega
        assert np.all(om[-1, 1:-1] == 1.0)
        # corners where the arc data jumps to the sides carry the 1/2 value
        assert om[-1, 0] == 0.5 and om[-1, -1] == 0.5
        assert np.all(om[:-1, 0] == 0.0)
        assert np.all(om[:-1, -1] == 0.0)
        assert np.all(om[0, :] == 0.0)

    def test_maximum_principle(self, harmonic_sol):
        om = harmonic_sol.omega
        assert om.min() >= 0.0 and om.max() <= 1.0
        interior = om[1:-1, 1:-1]
        assert interior.min() > 0.0 and interior.max() < 1.0

    def test_symmetry(self, harmonic_sol):
        om = harmonic_sol.omega
        assert np.max(np.abs(om - om[:, ::-1])) <= 1e-7

    def test_monotone_along_axis(self, harmonic_sol):
        ray = harmonic_sol.ray_values(0.0)
        assert np.all(np.diff(ray) >= -1e-12)

    def test_matches_exact_series(self, harmonic_sol):
        ray = harmonic_sol.ray_values(0.0)
        r = harmonic_sol.r
        m = (r >= 0.4) & (r <= 0.6)
        exact = np.array([exact_half_disk(x) for x in r[m]])
        assert np.max(np.abs(ray[m] - exact) / exact) <= 0.01

    def test_converged_flag(self, harmonic_sol):
        assert harmonic_sol.converged
        assert harmonic_sol.final_update < 1e-8
        assert len(harmonic_sol.energy_history) >= harmonic_sol.iterations

    def test_energy_settles(self, harmonic_sol):
        hist = harmonic_sol.energy_history
        assert abs(hist[-1] - hist[-2]) <= 1e-6 * abs(hist[-1])

    def test_nonconvergence_reported_not_raised(self):
        sol = solve_measure(MeasureProblem(nu=1.0, p=3.0, n_r=32, n_phi=32, max_iter=3))
        assert not sol.converged
        assert sol.iterations == 3

    def test_problem_validation(self):
        with pytest.raises(DomainError):
            MeasureProblem(nu=0.4, p=2.0)
        with pytest.raises(DomainError):
            MeasureProblem(nu=1.0, p=math.inf)
        with pytest.raises(DomainError):
            MeasureProblem(nu=1.0, p=2.0, n_r=4)
        with pytest.raises(DomainError):
            MeasureProblem(nu=1.0, p=2.0, eps_reg=0.0)
        with pytest.raises(DomainError):
            MeasureProblem(nu=1.0, p=2.0, radial_spacing="geometric")

    def test_uniform_spacing_supported(self):
        sol = solve_measure(MeasureProblem(nu=1.0, p=2.0, n_r=48, n_phi=49,
                                           radial_spacing="uniform"))
        assert sol.converged
        fit = fit_slope(sol, 0.0, (0.1, 0.5))
        assert fit.exponent == pytest.approx(1.0, rel=0.08)

    def test_eps_reg_insensitivity(self):
        # fitted exponent must move < 1% when the regularization drops 10x
        fits = []
        for eps in (1e-6, 1e-7):
            sol = solve_measure(MeasureProblem(nu=2.0, p=3.0, n_r=128,
                                               n_phi=129, eps_reg=eps))
            assert sol.converged
            fits.append(fit_slope(sol, 0.0, (0.05, 0.4)).exponent)
        assert abs(fits[1] - fits[0]) / abs(fits[0]) <= 0.01

    def test_mesh_refinement_slope_stability(self):
        # fitted exponent must move < 2% when both grid dimensions double
        fits = []
        for n in (64, 128):
            sol = solve_measure(MeasureProblem(nu=2.0, p=3.0, n_r=n, n_phi=n + 1))
            assert sol.converged
            fits.append(fit_slope(sol, 0.0, (0.05, 0.4)).exponent)
        assert abs(fits[1] - fits[0]) / abs(fits[0]) <= 0.02


class TestFitSlope:
    def test_planted_power_law(self, harmonic_sol):
        sol = MeasureSolution(
            problem=harmonic_sol.problem,
            r=harmonic_sol.r,
            phi=harmonic_sol.phi,
            omega=(harmonic_sol.r[:, None] / 1.0) ** 1.75
            * np.ones_like(harmonic_sol.phi)[None, :],
            iterations=1, final_update=0.0, converged=True,
        )
        fit = fit_slope(sol, 0.0, (0.05, 0.4))
        assert fit.exponent == pytest.approx(1.75, abs=1e-10)
        assert fit.rms <= 1e-12

    def test_harmonic_slope(self, harmonic_sol):
        fit = fit_slope(sol := harmonic_sol, 0.0, (0.05, 0.4))
        assert fit.exponent == pytest.approx(1.0, rel=0.05)
        del sol

    def test_window_validation(self, harmonic_sol):
        with pytest.raises(DomainError):
            fit_slope(harmonic_sol, 0.0, (0.4, 0.05))
        with pytest.raises(DomainError):
            fit_slope(harmonic_sol, 0.0, (0.97, 0.999))


class TestComparability:
    def test_planted_ratio_is_one(self, harmonic_sol):
        sol = MeasureSolution(
            problem=harmonic_sol.problem,
            r=harmonic_sol.r,
            phi=harmonic_sol.phi,
            omega=(harmonic_sol.r[:, None]) ** 2.0
            * np.ones_like(harmonic_sol.phi)[None, :],
            iterations=1, final_update=0.0, converged=True,
        )
        lo, hi = comparability_constants(sol, 2.0, REGION_S2NU)
        assert lo == pytest.approx(1.0, rel=1e-12)
        assert hi == pytest.approx(1.0, rel=1e-12)

    def test_certificate_finite(self, harmonic_sol):
        lo, hi = comparability_constants(harmonic_sol, 1.0, REGION_S2NU)
        assert 0.0 < lo <= hi < math.inf
        lo2, hi2 = comparability_constants(harmonic_sol, 1.0, REGION_SNU)
        assert 0.0 < lo2 <= hi2 < math.inf
        assert hi2 >= hi  # larger region can only widen the range

    def test_region_validation(self, harmonic_sol):
        with pytest.raises(DomainError):
            comparability_constants(harmonic_sol, 0.0)
        with pytest.raises(DomainError):
            comparability_constants(harmonic_sol, 1.0, region="S_half")


class TestInnerArc:
    def test_lower_certificate_on_half_ball(self):
        sol = solve_measure(MeasureProblem(nu=1.0, p=2.0, n_r=128, n_phi=129,
                                           arc_target=INNER_ARC))
        assert sol.converged
        lo, hi = comparability_constants(sol, 1.0, REGION_S2NU, r_window=(0.02, 0.5))
        assert 0.0 < lo <= hi < math.inf

    def test_data_jump_node(self):
        pr = MeasureProblem(nu=1.0, p=2.0, n_r=16, n_phi=17, arc_target=INNER_ARC)
        sol = solve_measure(pr)
        arc = sol.omega[-1, :]
        quarter = math.pi / 4
        inside = np.abs(sol.phi) < quarter - 1e-9
        outside = np.abs(sol.phi) > quarter + 1e-9
        assert np.all(arc[inside] == 1.0)
        assert np.all(arc[outside & (np.abs(sol.phi) < sol.phi[-1] - 1e-9)] == 0.0)
        jump = np.isclose(np.abs(sol.phi), quarter)
        assert np.all(arc[jump] == 0.5)


class TestWalkOnSpheres:
    def test_matches_exact_harmonic_measure(self):
        pts = [(0.5, 0.0), (0.3, 0.5), (0.7, -0.3)]
        out = mc_harmonic_measure(1.0, 1.0, pts, 40000, seed=7)
        for (r0, f0), (est, se) in zip(pts, out):
            assert abs(est - exact_half_disk(r0, f0)) <= 3.0 * se

    def test_deterministic_for_seed(self):
        a = mc_harmonic_measure(2.0, 1.0, [(0.5, 0.1)], 5000, seed=11)
        b = mc_harmonic_measure(2.0, 1.0, [(0.5, 0.1)], 5000, seed=11)
        assert a == b

    def test_limits(self):
        near_apex = mc_harmonic_measure(1.0, 1.0, [(1e-3, 0.0)], 4000, seed=1)[0][0]
        assert near_apex <= 0.01
        near_arc = mc_harmonic_measure(1.0, 1.0, [(1.0 - 1e-3, 0.0)], 4000, seed=2)[0][0]
        assert near_arc >= 0.95

    def test_rejects_exterior_start(self):
        with pytest.raises(DomainError):
            mc_harmonic_measure(1.0, 1.0, [(1.5, 0.0)], 100, seed=0)

    def test_accepts_polar_points(self):
        from psector.profile import PolarPoint

        out = mc_harmonic_measure(1.0, 1.0, [PolarPoint(0.5, 0.0)], 2000, seed=3)
        assert 0.0 < out[0][0] < 1.0


class TestExports:
    def test_csv_and_summary(self, tmp_path, harmonic_sol):
        csv = tmp_path / "field.csv"
        harmonic_sol.to_csv(csv)
        lines = csv.read_text().splitlines()
        assert lines[0].startswith("# nu = ")
        assert "r,phi,omega" in lines
        js = tmp_path / "summary.json"
        write_summary_json(harmonic_sol, js, {"slope": 1.0})
        data = json.loads(js.read_text())
        assert data["converged"] is True
        assert data["slope"] == 1.0
        assert data["arc_target"] == FULL_ARC
