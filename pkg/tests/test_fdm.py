import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import (
    backward_euler_heat_factor,
    crank_nicolson_heat_factor,
    dirichlet_laplacian_eigenvalue,
    heun_scalar,
)
from parapos.coefficients import build_initial_field
from parapos.errors import DegenerateRefinement, NonConvergence, SolverError, SpecError
from parapos.fdm import (
    SchemeConfig,
    estimate_order,
    positivity_step_bound,
    solve,
    solve_cauchy_nested,
    step,
)
from parapos.model import (
    Field,
    Grid,
    LVCoefficients,
    SpatialDomain,
    build_lv_problem,
)

UNIT = SpatialDomain(((0.0, 1.0),))


def heat_problem(n=101, d=1.0, amplitude=1.0, horizon=1.0):
    g = Grid(UNIT, (n,))
    lv = LVCoefficients(np.array([d]), (lambda t, x: 0.0,), ((lambda t, x: 0.0,),))
    init = Field.from_arrays(g, (amplitude * np.sin(np.pi * g.axes[0]))[None])
    return build_lv_problem(lv, UNIT, init, horizon)


def logistic_problem(n=101, d=0.01, beta=1.0, gamma=1.0, amplitude=0.5, horizon=5.0):
    g = Grid(UNIT, (n,))
    lv = LVCoefficients(np.array([d]), (lambda t, x: beta,), ((lambda t, x: gamma,),))
    init = Field.from_arrays(g, (amplitude * np.sin(np.pi * g.axes[0]))[None])
    return build_lv_problem(lv, UNIT, init, horizon)


class TestSingleStep:
    def test_implicit_euler_damps_the_sine_mode_exactly(self):
        spec = heat_problem()
        g = spec.initial.grid
        dt = 0.01
        new, report = step(spec.initial, 0.0, dt, spec, SchemeConfig(scheme="imex_be", dt=dt))
        factor = backward_euler_heat_factor(g.spacing[0], dt)
        assert_allclose(new.values[0], factor * spec.initial.values[0], atol=1e-12)
        assert report.solve_iterations >= 0
        assert report.source_evaluations == 1

    def test_trapezoidal_step_matches_its_modal_factor(self):
        spec = heat_problem()
        g = spec.initial.grid
        dt = 0.01
        new, _ = step(spec.initial, 0.0, dt, spec, SchemeConfig(scheme="imex_cn", dt=dt))
        factor = crank_nicolson_heat_factor(g.spacing[0], dt)
        assert_allclose(new.values[0], factor * spec.initial.values[0], atol=1e-12)

    def test_heun_on_a_flat_state_reduces_to_the_scalar_update(self):
        # far from the boundary the diffusion term vanishes on a constant
        # state, so one Heun step must agree with the scalar ODE stepper
        g = Grid(UNIT, (101,))
        lv = LVCoefficients(np.array([0.05]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        init = Field.from_arrays(g, np.full((1, 101), 0.4))
        spec = build_lv_problem(lv, UNIT, init, horizon=1.0)
        dt = 1e-3
        new, report = step(init, 0.0, dt, spec, SchemeConfig(scheme="erk2", dt=dt))
        oracle = heun_scalar(lambda t, y: y * (1.0 - y), 0.4, dt, 1)
        assert_allclose(new.values[0, 3:-3], oracle, rtol=0, atol=1e-14)
        assert report.source_evaluations == 2

    def test_two_dimensional_mode_damped_with_the_summed_eigenvalue(self):
        g = Grid(SpatialDomain(((0.0, 1.0), (0.0, 1.0))), (33, 33))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 0.0,), ((lambda t, x: 0.0,),))
        pts = g.points
        init = Field.from_arrays(
            g, (np.sin(np.pi * pts[..., 0]) * np.sin(np.pi * pts[..., 1]))[None]
        )
        spec = build_lv_problem(lv, g.domain, init, horizon=1.0)
        dt = 1e-3
        new, report = step(init, 0.0, dt, spec, SchemeConfig(scheme="imex_be", dt=dt))
        lam = 2.0 * dirichlet_laplacian_eigenvalue(g.spacing[0])
        assert_allclose(new.values[0], init.values[0] / (1.0 + dt * lam), atol=1e-9)
        assert report.solve_iterations >= 1

    def test_bad_dt_rejected(self):
        spec = heat_problem()
        with pytest.raises(SpecError):
            step(spec.initial, 0.0, -0.1, spec, SchemeConfig())

    def test_step_keeps_the_boundary_pinned(self):
        spec = logistic_problem()
        for scheme in ("imex_be", "imex_cn"):
            new, _ = step(spec.initial, 0.0, 0.01, spec, SchemeConfig(scheme=scheme, dt=0.01))
            assert new.values[0, 0] == 0.0
            assert new.values[0, -1] == 0.0


class TestSolve:
    def test_zero_data_is_preserved_bitwise(self):
        g = Grid(UNIT, (101,))
        lv = LVCoefficients(np.array([0.01]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        spec = build_lv_problem(lv, UNIT, Field.zeros(g, 1), horizon=1.0)
        traj = solve(spec, SchemeConfig(scheme="imex_be", dt=0.01))
        assert np.all(traj.values == 0.0)
        assert all(r.negpart_norm == 0.0 for r in traj.reports)

    def test_logistic_competition_stays_positive_and_bounded(self):
        spec = logistic_problem(horizon=5.0)
        traj = solve(spec, SchemeConfig(scheme="imex_be", dt=0.01))
        assert traj.values.min() >= -1e-10
        # carrying capacity 1 plus the barrier slack
        assert max(r.sup_norm for r in traj.reports) <= 1.0 + 1e-6

    def test_boundary_exact_across_schemes(self):
        for scheme, dt in (("imex_be", 0.01), ("imex_cn", 0.01), ("erk2", 1e-5)):
            spec = heat_problem(n=51, horizon=0.001)
            traj = solve(spec, SchemeConfig(scheme=scheme, dt=dt))
            assert np.all(traj.values[:, :, 0] == 0.0)
            assert np.all(traj.values[:, :, -1] == 0.0)

    def test_explicit_scheme_rejects_unstable_dt(self):
        spec = heat_problem(n=101, horizon=0.002)
        # the sampled bound for unit diffusion on h = 0.01 is h^2 / 2 = 5e-5
        with pytest.raises(SolverError) as err:
            solve(spec, SchemeConfig(scheme="erk2", dt=1e-4))
        assert "unstable" in str(err.value)
        traj = solve(spec, SchemeConfig(scheme="erk2", dt=4.9e-5))
        assert np.isfinite(traj.values).all()

    def test_stability_gate_can_be_disabled(self):
        spec = heat_problem(n=101, horizon=5.25e-5)
        config = SchemeConfig(scheme="erk2", dt=5.25e-5, check_stability=False)
        traj = solve(spec, config)  # one mildly amplified step still finishes
        assert np.isfinite(traj.values).all()

    def test_trajectory_bookkeeping(self):
        spec = logistic_problem(horizon=1.0)
        traj = solve(spec, SchemeConfig(scheme="imex_be", dt=0.01, store_every=25))
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(1.0)
        assert np.all(np.diff(traj.times) > 0)
        # 100 steps stored every 25 plus the initial slice
        assert len(traj.times) == 5
        assert len(traj.reports) == 100
        assert not traj.dt_adjusted

    def test_dt_rounded_to_land_on_the_horizon(self):
        spec = logistic_problem(horizon=1.0)
        traj = solve(spec, SchemeConfig(scheme="imex_be", dt=0.03))
        assert traj.dt_adjusted
        assert traj.times[-1] == pytest.approx(1.0)
        assert traj.dt == pytest.approx(1.0 / 33)

    def test_clip_mode_counts_and_clamps(self):
        # a source pushed below zero forces negativity; clip mode flags it
        g = Grid(UNIT, (51,))
        lv = LVCoefficients(np.array([0.01]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        init = build_initial_field(
            g, [{"kind": "plateau", "amplitude": 0.4, "center": [0.5], "radius": 0.3, "width": 0.1}]
        )
        spec = build_lv_problem(lv, UNIT, init, horizon=0.5)
        shifted = spec.coefficients.source

        def negative_source(t, x, u, p, _base=shifted):
            return np.asarray(_base(t, x, u, p)) - 1.0

        from dataclasses import replace
        spec = replace(spec, coefficients=replace(spec.coefficients, source=negative_source))
        config = SchemeConfig(scheme="imex_be", dt=0.01, positivity="clip_and_flag")
        traj = solve(spec, config)
        assert traj.clipped_total > 0
        assert traj.values.min() >= 0.0
        # the report keeps the pre-clip minimum so the excursion stays visible
        assert min(r.min_value for r in traj.reports) < 0.0

    def test_monitor_mode_never_alters_the_state(self):
        spec = logistic_problem(horizon=1.0)
        traj = solve(spec, SchemeConfig(scheme="imex_be", dt=0.01, positivity="monitor_only"))
        assert traj.clipped_total == 0

    def test_mismatched_grid_argument_rejected(self):
        spec = logistic_problem(n=51)
        other = Grid(UNIT, (41,))
        with pytest.raises(SpecError):
            solve(spec, SchemeConfig(), grid=other)

    def test_mixed_derivative_terms_consistent_between_schemes(self):
        # anisotropic 2D diffusion with a cross term: the implicit-explicit
        # and fully explicit paths must agree to the schemes' joint accuracy
        dom = SpatialDomain(((0.0, 1.0), (0.0, 1.0)))
        g = Grid(dom, (21, 21))
        from parapos.model import CoefficientSet, ProblemSpec

        a = np.array([[1.0, 0.3], [0.3, 0.5]])

        def diffusion(t, x, u):
            return np.broadcast_to(a, np.asarray(x).shape[:-1] + (2, 2))

        coeffs = CoefficientSet(
            diffusion=diffusion,
            drift=lambda t, x, u, p: np.zeros(np.asarray(x).shape[:-1] + (2,)),
            source=lambda t, x, u, p: np.zeros_like(u),
        )
        pts = g.points
        init = Field.from_arrays(
            g, (np.sin(np.pi * pts[..., 0]) * np.sin(np.pi * pts[..., 1]))[None]
        )
        spec = ProblemSpec(dom, coeffs, init, horizon=2e-3)
        fine = SchemeConfig(scheme="erk2", dt=1e-5)
        traj_e = solve(spec, fine)
        traj_i = solve(spec, SchemeConfig(scheme="imex_be", dt=1e-5))
        assert np.abs(traj_e.final_values - traj_i.final_values).max() < 1e-5


def test_positivity_step_bound_matches_the_logistic_slope():
    # slope of u(1-u) over [0, 2 amp] bottoms out at 1 - 2 * (2 amp) = -3;
    # the sampled extremum sits slightly inside the box, so the bound runs
    # a few percent above the analytic 1/6
    spec = logistic_problem(amplitude=1.0)
    bound = positivity_step_bound(spec, reference=spec.initial.values)
    assert bound == pytest.approx(1.0 / 6.0, rel=0.05)
    assert bound >= 1.0 / 6.0


def test_positivity_step_bound_infinite_without_negative_slopes():
    spec = heat_problem()
    assert positivity_step_bound(spec) == float("inf")


class TestEstimateOrder:
    GRIDS = tuple(Grid(UNIT, (n,)) for n in (21, 41, 81))

    @staticmethod
    def sine_initial(g):
        return build_initial_field(g, [{"kind": "sine", "amplitude": 1.0}])

    def test_smooth_heat_is_second_order(self):
        spec = heat_problem(n=21, horizon=0.05)
        est = estimate_order(
            spec, SchemeConfig(scheme="imex_be", dt=1e-3), self.GRIDS,
            rebuild_initial=self.sine_initial,
        )
        assert est.order == pytest.approx(2.0, abs=0.3)
        assert est.nodes == (21, 41, 81)

    def test_competition_with_heun_is_second_order(self):
        spec = logistic_problem(n=21, horizon=1.0)
        est = estimate_order(
            spec, SchemeConfig(scheme="erk2", dt=1e-2), self.GRIDS,
            rebuild_initial=lambda g: build_initial_field(g, [{"kind": "sine", "amplitude": 0.5}]),
        )
        assert est.order == pytest.approx(2.0, abs=0.3)

    def test_unresolved_kink_degrades_the_order_without_raising(self):
        # a piecewise-linear crest off the node lattice, observed before
        # diffusion has resolved it, cannot show second order
        xi = 1.0 / 3.0

        def kink(g):
            x = g.points[..., 0]
            return Field.from_arrays(g, (0.5 * np.minimum(x / xi, (1 - x) / (1 - xi)))[None])

        spec = heat_problem(n=21, d=0.01, horizon=0.01)
        spec = type(spec)(**{**spec.__dict__, "initial": kink(self.GRIDS[0])})
        est = estimate_order(
            spec, SchemeConfig(scheme="imex_be", dt=2e-4), self.GRIDS, rebuild_initial=kink
        )
        assert est.order < 1.5
        assert all(d > 0 for d in est.diffs)

    def test_zero_data_raises_degenerate_refinement(self):
        g = Grid(UNIT, (21,))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 0.0,), ((lambda t, x: 0.0,),))
        spec = build_lv_problem(lv, UNIT, Field.zeros(g, 1), horizon=0.05)
        with pytest.raises(DegenerateRefinement):
            estimate_order(spec, SchemeConfig(dt=1e-3), self.GRIDS,
                           rebuild_initial=lambda grid: Field.zeros(grid, 1))

    def test_short_ladders_rejected(self):
        spec = heat_problem(n=21, horizon=0.05)
        with pytest.raises(SpecError):
            estimate_order(spec, SchemeConfig(dt=1e-3), self.GRIDS[:2])

    def test_sloppy_refinement_rejected(self):
        spec = heat_problem(n=21, horizon=0.05)
        bad = (self.GRIDS[0], Grid(UNIT, (40,)), self.GRIDS[2])
        with pytest.raises(SpecError):
            estimate_order(spec, SchemeConfig(dt=1e-3), bad)

    def test_foreign_domain_rejected(self):
        spec = heat_problem(n=21, horizon=0.05)
        other = SpatialDomain(((0.0, 2.0),))
        bad = (Grid(other, (21,)), Grid(other, (41,)), Grid(other, (81,)))
        with pytest.raises(SpecError):
            estimate_order(spec, SchemeConfig(dt=1e-3), bad)


class TestNestedBoxes:
    DOMAIN = SpatialDomain(((-4.0, 4.0),))

    def cauchy_spec(self, initial_spec, d=1.0, horizon=0.1):
        g = Grid(self.DOMAIN, (129,))
        lv = LVCoefficients(np.array([d]), (lambda t, x: 0.0,), ((lambda t, x: 0.0,),))
        init = build_initial_field(g, [initial_spec])
        return build_lv_problem(lv, self.DOMAIN, init, horizon)

    def test_decaying_data_converges_in_the_core(self):
        spec = self.cauchy_spec({"kind": "gaussian", "amplitude": 1.0, "center": [0.0], "width": 0.8})
        traj, report = solve_cauchy_nested(
            spec, (2.0, 3.0, 4.0), SchemeConfig(scheme="imex_be", dt=5e-3),
            cutoff_width=1.0, tol_nested=1e-3,
        )
        assert report.diffs[1] < report.diffs[0]
        assert report.converged
        assert traj.grid.domain.bounds == self.DOMAIN.bounds

    def test_zero_data_counts_as_converged(self):
        g = Grid(self.DOMAIN, (129,))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 0.0,), ((lambda t, x: 0.0,),))
        spec = build_lv_problem(lv, self.DOMAIN, Field.zeros(g, 1), horizon=0.1)
        _, report = solve_cauchy_nested(spec, (2.0, 3.0, 4.0), SchemeConfig(dt=5e-3))
        assert report.diffs == (0.0, 0.0)
        assert report.converged

    def test_mass_near_the_cut_raises_nonconvergence(self):
        # a bump in the shoulder of the middle cutoff is kept by the largest
        # box, halved by the middle one, and erased by the smallest, so the
        # core differences grow with the radius
        spec = self.cauchy_spec(
            {"kind": "bump", "amplitude": 1.0, "center": [2.6], "radius": 0.5}, d=4.0, horizon=0.25
        )
        with pytest.raises(NonConvergence):
            solve_cauchy_nested(spec, (2.0, 3.0, 4.0), SchemeConfig(scheme="imex_be", dt=5e-3),
                                cutoff_width=1.0)

    def test_competition_with_compact_data_settles_early(self):
        g = Grid(self.DOMAIN, (129,))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        init = build_initial_field(
            g, [{"kind": "plateau", "amplitude": 0.5, "center": [0.0], "radius": 1.0, "width": 0.5}]
        )
        spec = build_lv_problem(lv, self.DOMAIN, init, horizon=0.25)
        _, report = solve_cauchy_nested(
            spec, (2.0, 3.0, 4.0), SchemeConfig(scheme="imex_be", dt=5e-3), cutoff_width=1.0
        )
        # data supported well inside the smallest box: the outer pair of
        # boxes can no longer disagree above tolerance
        assert report.diffs[-1] <= 1e-6

    def test_radii_must_align_with_the_lattice(self):
        spec = self.cauchy_spec({"kind": "gaussian", "amplitude": 1.0, "center": [0.0], "width": 0.8})
        with pytest.raises(SpecError):
            solve_cauchy_nested(spec, (2.03, 3.0, 4.0), SchemeConfig(dt=5e-3))

    def test_domain_must_be_the_largest_centered_box(self):
        spec = heat_problem(n=101)  # lives on [0, 1]
        with pytest.raises(SpecError):
            solve_cauchy_nested(spec, (0.25, 0.35, 0.5), SchemeConfig(dt=1e-3))

    def test_needs_three_radii(self):
        spec = self.cauchy_spec({"kind": "gaussian", "amplitude": 1.0, "center": [0.0], "width": 0.8})
        with pytest.raises(SpecError):
            solve_cauchy_nested(spec, (3.0, 4.0), SchemeConfig(dt=5e-3))
