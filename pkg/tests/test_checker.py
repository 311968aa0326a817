import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from parapos.checker import (
    CheckTolerances,
    SampleBudget,
    check_compatibility,
    check_dissipativity,
    check_growth,
    check_initial_monotonicity,
    check_monotone_coefficients,
    check_parabolicity,
    check_positivity_source,
    discrete_laplacian,
    halton_block,
    run_checks,
)
from parapos.errors import SpecError
from parapos.model import (
    CoefficientSet,
    Field,
    Grid,
    LVCoefficients,
    Majorants,
    ProblemSpec,
    SpatialDomain,
    build_lv_problem,
)
from parapos.scenarios import get_scenario

BUDGET = SampleBudget(t=3, x=3, u=3, p=2, seed=0)


def logistic_problem(beta=1.0, gamma=1.0, d=1.0, amplitude=0.5, n=41, horizon=1.0):
    g = Grid(SpatialDomain(((0.0, 1.0),)), (n,))
    lv = LVCoefficients(
        np.array([d]),
        (lambda t, x: beta,),
        ((lambda t, x: gamma,),),
    )
    initial = Field.from_functions(g, [lambda p: amplitude * np.sin(np.pi * p[..., 0])])
    return build_lv_problem(lv, g.domain, initial, horizon)


def generic_problem(source, drift=None, diffusion=1.0, depends_on_gradient=False, n=21):
    """Scalar problem with hand-rolled evaluators, for off-family checks."""
    g = Grid(SpatialDomain(((0.0, 1.0),)), (n,))

    def diff(t, x, u):
        batch = np.asarray(x).shape[:-1]
        return np.broadcast_to(np.array([[diffusion]]), batch + (1, 1))

    def zero_drift(t, x, u, p):
        return np.zeros(np.asarray(x).shape[:-1] + (1,))

    coeffs = CoefficientSet(
        diffusion=diff,
        drift=drift or zero_drift,
        source=source,
        depends_on_gradient=depends_on_gradient,
    )
    return ProblemSpec(g.domain, coeffs, Field.zeros(g, 1), horizon=1.0)


class TestHalton:
    def test_deterministic_for_a_seed(self):
        a = halton_block(16, 3, seed=5)
        b = halton_block(16, 3, seed=5)
        assert np.array_equal(a, b)
        c = halton_block(16, 3, seed=6)
        assert not np.array_equal(a, c)

    def test_prefix_nested(self):
        small = halton_block(8, 4, seed=1)
        big = halton_block(20, 4, seed=1)
        assert np.array_equal(big[:8], small)

    def test_covers_unit_cube(self):
        pts = halton_block(200, 2, seed=0)
        assert pts.min() >= 0.0 and pts.max() <= 1.0
        # equidistribution sanity: each quadrant gets a fair share
        quad = (pts[:, 0] > 0.5).astype(int) * 2 + (pts[:, 1] > 0.5).astype(int)
        counts = np.bincount(quad, minlength=4)
        assert counts.min() > 30


class TestParabolicity:
    def test_positive_diffusion_passes_with_its_smallest_eigenvalue(self):
        spec = logistic_problem(d=0.7)
        entry, kappa = check_parabolicity(spec, BUDGET)
        assert entry.status == "pass"
        assert kappa == pytest.approx(0.7)

    def test_two_species_reports_smaller_constant(self):
        spec = get_scenario("S1_positivity").build_problem()
        entry, kappa = check_parabolicity(spec, BUDGET)
        assert entry.status == "pass"
        assert kappa == pytest.approx(0.01)

    def test_degenerate_diffusion_fails(self):
        spec = generic_problem(
            source=lambda t, x, u, p: np.zeros_like(u),
            diffusion=0.0,
        )
        entry, kappa = check_parabolicity(spec, BUDGET)
        assert entry.status == "fail"
        assert kappa == 0.0
        assert entry.witness is not None

    def test_envelope_violation_detected(self):
        spec = logistic_problem(d=2.0)
        majorants = Majorants(mu=lambda s: 1.0)  # claims eigenvalues stay under 1
        entry, _ = check_parabolicity(spec, BUDGET, majorants=majorants)
        assert entry.status == "fail"
        assert "envelope" in entry.note


class TestDissipativity:
    def test_logistic_fit_is_bounded_by_growth_rate(self):
        spec = logistic_problem(beta=1.0, gamma=1.0)
        entry, d1, d2 = check_dissipativity(spec, BUDGET, "A2_prime")
        assert entry.status == "pass"
        # (c, u) = u^2 (1 - u) <= 1 * u^2 on the orthant, so the fit sits in [0, 1]
        assert 0.0 <= d2 <= 1.0
        assert d1 == pytest.approx(0.0, abs=1e-12)

    def test_signed_region_needs_a_larger_constant(self):
        spec = logistic_problem(beta=1.0, gamma=1.0)
        _, _, d2_orthant = check_dissipativity(spec, BUDGET, "A2_prime")
        entry, _, d2_full = check_dissipativity(spec, BUDGET, "A2")
        # on u < 0 the logistic source pushes away from zero, so the signed
        # sample block dominates the orthant fit
        assert d2_full >= d2_orthant
        assert entry.assumption == "A2"

    def test_user_constants_checked_for_dominance(self):
        spec = logistic_problem(beta=1.0, gamma=1.0)
        good = Majorants(d1=0.0, d2=1.0)
        entry, _, _ = check_dissipativity(spec, BUDGET, "A2_prime", majorants=good)
        assert entry.status == "pass"
        bad = Majorants(d1=0.0, d2=0.0)
        entry, _, _ = check_dissipativity(spec, BUDGET, "A2_prime", majorants=bad)
        assert entry.status == "fail"
        assert "violated" in entry.note

    def test_superquadratic_source_is_flagged(self):
        spec = generic_problem(source=lambda t, x, u, p: u**3)
        entry, _, _ = check_dissipativity(spec, BUDGET, "A2_prime")
        assert entry.status == "fail"
        assert "superquadratic" in entry.note

    def test_unknown_mode_rejected(self):
        with pytest.raises(SpecError):
            check_dissipativity(logistic_problem(), BUDGET, "A3")


class TestGrowth:
    def test_no_envelopes_means_not_applicable(self):
        entries = check_growth(logistic_problem(), BUDGET)
        assert [e.status for e in entries] == ["not_applicable", "not_applicable"]

    def test_zero_drift_passes_unit_envelope(self):
        majorants = Majorants(theta1=lambda s: 1.0)
        entries = check_growth(logistic_problem(), BUDGET, majorants=majorants)
        a4a = entries[0]
        assert a4a.assumption == "A4a" and a4a.status == "pass"
        assert a4a.margin >= 1.0  # bound (1+|p|) minus |b| = 0

    def test_linear_in_gradient_drift_breaks_unit_envelope(self):
        def drift(t, x, u, p):
            q = np.sqrt((np.asarray(p) ** 2).sum())
            return np.array([2.0 * q])

        spec = generic_problem(
            source=lambda t, x, u, p: np.zeros_like(u),
            drift=drift,
            depends_on_gradient=True,
        )
        majorants = Majorants(theta1=lambda s: 1.0)
        a4a = check_growth(spec, BUDGET, majorants=majorants)[0]
        assert a4a.status == "fail"
        assert a4a.margin < 0.0
        assert a4a.witness is not None

    def test_source_envelope_with_quadratic_decay_passes(self):
        spec = logistic_problem(beta=1.0, gamma=1.0)
        # |c| = |u (1-u)| <= 6 on |u| <= 2, and theta2 soaks up the (1+q)^2
        majorants = Majorants(theta2=lambda s, q: 6.0 / (1.0 + q) ** 2)
        a4b = check_growth(spec, BUDGET, majorants=majorants)[1]
        assert a4b.assumption == "A4b" and a4b.status == "pass"

    def test_growing_envelope_fails_the_ladder_probe(self):
        spec = logistic_problem()
        majorants = Majorants(theta2=lambda s, q: 10.0 + q)
        a4b = check_growth(spec, BUDGET, majorants=majorants)[1]
        assert a4b.status == "fail"
        assert "ladder" in a4b.note


class TestCompatibility:
    def test_zero_data_passes_with_full_margin(self):
        spec = logistic_problem(amplitude=0.0)
        entry = check_compatibility(spec)
        assert entry.status == "pass"
        assert entry.details["worst_residual"] == pytest.approx(0.0, abs=1e-14)

    def test_curved_data_fails_with_the_boundary_curvature(self):
        # x^2 (1-x)^2 has second derivative 2 at both walls, so the residual
        # is d * 2 up to the one-sided stencil error on the quartic tail
        g = Grid(SpatialDomain(((0.0, 1.0),)), (101,))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        initial = Field.from_functions(g, [lambda p: p[..., 0] ** 2 * (1 - p[..., 0]) ** 2])
        spec = build_lv_problem(lv, g.domain, initial, horizon=1.0)
        entry = check_compatibility(spec)
        assert entry.status == "fail"
        assert entry.details["worst_residual"] == pytest.approx(2.0, abs=0.01)

    def test_sine_data_fails_at_coarse_resolution(self):
        # analytically compatible, but the one-sided stencil leaves an h^3
        # truncation residual above the default threshold on a coarse grid
        spec = logistic_problem(amplitude=0.1, n=101)
        entry = check_compatibility(spec)
        assert entry.status == "fail"
        assert entry.details["worst_residual"] < 1e-3

    def test_threshold_scales_with_configured_factor(self):
        spec = logistic_problem(amplitude=0.1, n=101)
        entry = check_compatibility(spec, tolerances=CheckTolerances(compat_factor=1e-3))
        assert entry.status == "pass"

    def test_nonzero_boundary_data_is_caught(self):
        g = Grid(SpatialDomain(((0.0, 1.0),)), (11,))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        vals = np.full((1, 11), 0.3)
        initial = Field(g, vals)  # bypasses the zeroing constructor
        spec = ProblemSpec.__new__(ProblemSpec)  # skip validate: we want the check to see it
        spec.domain = g.domain
        spec.coefficients = build_lv_problem(lv, g.domain, Field.zeros(g, 1), 1.0).coefficients
        spec.initial = initial
        spec.horizon = 1.0
        spec.lv = lv
        entry = check_compatibility(spec)
        assert entry.status == "fail"
        assert entry.details["boundary_value_max"] == pytest.approx(0.3)


class TestPositivitySource:
    def test_lv_data_and_source_pass_on_the_face(self):
        spec = logistic_problem()
        a7a, a7b = check_positivity_source(spec, BUDGET)
        assert a7a.status == "pass"
        assert a7b.status == "pass"
        # u^k = 0 kills the competition source exactly
        assert a7b.margin == pytest.approx(0.0, abs=1e-15)

    def test_negative_initial_node_fails_a7a(self):
        g = Grid(SpatialDomain(((0.0, 1.0),)), (21,))
        vals = np.zeros((1, 21))
        vals[0, 10] = -0.2
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        spec = build_lv_problem(lv, g.domain, Field(g, vals), horizon=1.0)
        a7a, _ = check_positivity_source(spec, BUDGET)
        assert a7a.status == "fail"
        assert a7a.margin == pytest.approx(-0.2)
        assert a7a.witness["component"] == 0

    def test_negative_source_offset_fails_a7b(self):
        spec = generic_problem(source=lambda t, x, u, p: u * (1.0 - u) - 1.0)
        _, a7b = check_positivity_source(spec, BUDGET)
        assert a7b.status == "fail"
        assert a7b.margin == pytest.approx(-1.0)


TWO_SPECIES_D = np.array([0.1, 0.1])


def lv_two(beta, gamma, delta, rho, sigma, theta):
    return LVCoefficients(
        TWO_SPECIES_D,
        (beta, rho),
        ((gamma, delta), (sigma, theta)),
    )


class TestMonotoneCoefficients:
    DOMAIN = SpatialDomain(((0.0, 1.0),))

    def test_canonical_sign_pattern_passes(self):
        lv = lv_two(
            beta=lambda t, x: 1.0 - np.exp(-t),
            gamma=lambda t, x: 1.0 + np.exp(-t),
            delta=lambda t, x: 1.0 + np.exp(-t),
            rho=lambda t, x: np.exp(-t),
            sigma=lambda t, x: 1.0 - 0.5 * np.exp(-t),
            theta=lambda t, x: 1.0 - 0.5 * np.exp(-t),
        )
        entry = check_monotone_coefficients(lv, BUDGET, self.DOMAIN, horizon=2.0)
        assert entry.status == "pass"
        assert entry.margin >= 0.0

    def test_decaying_growth_rate_fails_with_named_witness(self):
        lv = lv_two(
            beta=lambda t, x: np.exp(-t),  # must be non-decreasing
            gamma=lambda t, x: 1.0,
            delta=lambda t, x: 1.0,
            rho=lambda t, x: 1.0,
            sigma=lambda t, x: 1.0,
            theta=lambda t, x: 1.0,
        )
        entry = check_monotone_coefficients(lv, BUDGET, self.DOMAIN, horizon=2.0)
        assert entry.status == "fail"
        assert entry.witness["coefficient"] == "beta"
        assert "t" in entry.witness

    def test_growing_self_limitation_fails_on_gamma(self):
        lv = lv_two(
            beta=lambda t, x: 1.0,
            gamma=lambda t, x: 1.0 + t,  # must be non-increasing
            delta=lambda t, x: 1.0,
            rho=lambda t, x: 1.0,
            sigma=lambda t, x: 1.0,
            theta=lambda t, x: 1.0,
        )
        entry = check_monotone_coefficients(lv, BUDGET, self.DOMAIN, horizon=2.0)
        assert entry.status == "fail"
        assert entry.witness["coefficient"] == "gamma"


class TestInitialMonotonicity:
    def test_zero_data_passes_with_zero_margin(self):
        g = Grid(SpatialDomain(((0.0, 1.0),)), (21,))
        lv = lv_two(*(lambda t, x: 1.0 for _ in range(6)))
        entry = check_initial_monotonicity(lv, np.zeros(21), np.zeros(21), g)
        assert entry.status == "pass"
        assert entry.margin == pytest.approx(0.0)

    def test_library_monotone_scenario_passes(self):
        spec = get_scenario("S4_asymptotics").build_problem()
        entry = check_initial_monotonicity(
            spec.lv, spec.initial.values[0], spec.initial.values[1], spec.initial.grid
        )
        assert entry.status == "pass"

    def test_concave_hump_with_weak_growth_fails(self):
        # d lap(phi) ~ -pi^2 at the crest overwhelms the logistic push
        g = Grid(SpatialDomain(((0.0, 1.0),)), (41,))
        lv = LVCoefficients(
            np.array([1.0, 1.0]),
            (lambda t, x: 0.5, lambda t, x: 1.0),
            ((lambda t, x: 1.0, lambda t, x: 0.0),
             (lambda t, x: 0.0, lambda t, x: 1.0)),
        )
        phi = np.sin(np.pi * g.axes[0])
        entry = check_initial_monotonicity(lv, phi, np.zeros(41), g)
        assert entry.status == "fail"
        assert entry.witness["condition"] == "first species slope"

    def test_single_species_rejected(self):
        g = Grid(SpatialDomain(((0.0, 1.0),)), (11,))
        lv = LVCoefficients(np.array([1.0]), (lambda t, x: 1.0,), ((lambda t, x: 1.0,),))
        with pytest.raises(SpecError):
            check_initial_monotonicity(lv, np.zeros(11), np.zeros(11), g)


def test_discrete_laplacian_matches_modal_eigenvalue():
    g = Grid(SpatialDomain(((0.0, 1.0),)), (51,))
    h = g.spacing[0]
    vals = np.sin(np.pi * g.axes[0])[None]
    lap = discrete_laplacian(vals, g)
    lam = 2.0 * (1.0 - np.cos(np.pi * h)) / h**2
    inner = slice(1, -1)
    assert_allclose(lap[0, inner], -lam * vals[0, inner], rtol=1e-10)
    assert lap[0, 0] == 0.0 and lap[0, -1] == 0.0


class TestRunChecks:
    def test_report_shape_and_provenance(self):
        spec = logistic_problem(amplitude=0.0)
        report = run_checks(spec, BUDGET, ["A1", "A2'", "A5", "A6", "A7a", "A7b"])
        blob = report.to_json()
        assert blob["provenance"] == "sampled, not proven"
        assert blob["seed"] == BUDGET.seed
        assert report.entry("A5").status == "not_applicable"
        assert report.all_passed()
        assert report.kappa_hat is not None
        assert report.d2_hat is not None

    def test_two_species_extras_dispatched(self):
        spec = get_scenario("S4_asymptotics").build_problem()
        report = run_checks(spec, BUDGET, ["MonotoneCoeffs", "InitMonotone"])
        assert report.entry("MonotoneCoeffs").status == "pass"
        assert report.entry("InitMonotone").status == "pass"

    def test_single_species_extras_not_applicable(self):
        report = run_checks(logistic_problem(), BUDGET, ["MonotoneCoeffs", "InitMonotone"])
        assert report.entry("MonotoneCoeffs").status == "not_applicable"
        assert report.entry("InitMonotone").status == "not_applicable"

    def test_fail_entries_carry_witnesses_in_json(self):
        spec = generic_problem(source=lambda t, x, u, p: u * (1.0 - u) - 1.0)
        report = run_checks(spec, BUDGET, ["A7b"])
        entry = report.entry("A7b")
        assert entry.status == "fail"
        assert entry.to_json()["witness"] is not None

    def test_same_seed_bitwise_reproducible(self):
        spec = logistic_problem()
        r1 = run_checks(spec, SampleBudget(seed=3), ["A1", "A2'", "A7b"])
        r2 = run_checks(spec, SampleBudget(seed=3), ["A1", "A2'", "A7b"])
        for e1, e2 in zip(r1.entries, r2.entries):
            assert e1.margin == e2.margin
            assert e1.witness == e2.witness

    def test_seed_changes_the_sample_set(self):
        spec = logistic_problem()
        r1 = run_checks(spec, SampleBudget(seed=0), ["A2'"])
        r2 = run_checks(spec, SampleBudget(seed=1), ["A2'"])
        assert r1.entry("A2'").witness != r2.entry("A2'").witness


@settings(max_examples=20, deadline=None)
@given(
    amp=st.floats(0.2, 2.0),
    rate=st.floats(0.5, 3.0),
    small=st.integers(2, 4),
    extra=st.integers(1, 4),
)
def test_refining_the_budget_never_improves_a_margin(amp, rate, small, extra):
    """Sample refinement is one-way: a bigger budget can only lower margins.

    The sample set is prefix-nested in the total count, so the minimum over
    samples (the reported margin) is non-increasing under refinement, which
    is exactly what keeps a failed check from passing on a second, larger
    look.
    """
    lv = lv_two(
        beta=lambda t, x: amp * np.exp(-rate * t),  # wrong sign: decreasing
        gamma=lambda t, x: 1.0,
        delta=lambda t, x: 1.0,
        rho=lambda t, x: 1.0,
        sigma=lambda t, x: 1.0,
        theta=lambda t, x: 1.0,
    )
    domain = SpatialDomain(((0.0, 1.0),))
    b_small = SampleBudget(t=small, x=small, u=2, p=2, seed=0)
    b_big = SampleBudget(t=small + extra, x=small, u=2, p=2, seed=0)
    m_small = check_monotone_coefficients(lv, b_small, domain, horizon=2.0).margin
    m_big = check_monotone_coefficients(lv, b_big, domain, horizon=2.0).margin
    assert m_big <= m_small + 1e-12


@settings(max_examples=15, deadline=None)
@given(beta=st.floats(0.2, 3.0), small=st.integers(2, 3), extra=st.integers(1, 3))
def test_fitted_dissipativity_constant_grows_with_the_sample_set(beta, small, extra):
    spec = logistic_problem(beta=beta, gamma=1.0)
    b_small = SampleBudget(t=small, x=small, u=small, p=2, seed=0)
    b_big = SampleBudget(t=small, x=small, u=small + extra, p=2, seed=0)
    _, _, d2_small = check_dissipativity(spec, b_small, "A2_prime")
    _, _, d2_big = check_dissipativity(spec, b_big, "A2_prime")
    assert d2_big >= d2_small - 1e-12
