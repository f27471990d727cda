"""Warped products: fiber data, lifts, the Einstein system, completeness."""

import math

import pytest

from frame_kahler.fields import DomainError, constant, make_closed_form
from frame_kahler.frames import (
    FrameError,
    grid_points,
    max_abs_on_grid,
    sectional_curvature,
)
from frame_kahler.warped import (
    TAU_KSET,
    WarpedFamily,
    adaptive_simpson,
    completeness,
    einstein_verdict,
    family_alpha_negative,
    family_alpha_zero,
    family_implicit_tan,
    fiber_consistency,
    implicit_tan_field,
    ke_ode_residual,
    ke_pde_residual,
    lift_fiber,
    make_fiber,
    quotient_gauss_check,
    solve_implicit_w,
)

from conftest import central_diff, fd_plane_laplacian

TAU0 = 1.0 - math.pi / 4.0

TAU_GRID_POS = grid_points(TAU_KSET, {"tau": (0.2, 1.4, 5)})
TAU_GRID_SYM = grid_points(TAU_KSET, {"tau": (-1.0, 1.0, 5)})
TAU_GRID_T0 = grid_points(TAU_KSET, {"tau": (0.05, 1.0, 7)})


def plane_fiber(expr):
    return make_fiber(0.0, expr, ("p", "q"))


class TestFiber:
    def test_constant_twist_fiber_passes(self):
        F = make_fiber(-2.0, "-2")
        rep = fiber_consistency(F, [()])
        assert rep.passed

    def test_plane_fiber_passes(self):
        F = plane_fiber("-sech(p + 2*q)^2")
        grid = grid_points(F.structure.kset, {"p": (-0.5, 0.5, 4), "q": (-0.5, 0.5, 4)})
        rep = fiber_consistency(F, grid)
        assert rep.passed

    def test_positive_twist_flagged(self):
        F = make_fiber(0.0, "2")
        rep = fiber_consistency(F, [()])
        assert not rep.passed
        assert any(c.check_id == "twist_negative" for c in rep.failed_checks())

    def test_plane_variables_require_alpha_zero(self):
        with pytest.raises(FrameError):
            make_fiber(-1.0, "-sech(p)^2", ("p", "q"))


class TestLiftFiber:
    def test_product_case_keeps_fiber_twist(self):
        F = make_fiber(0.0, "-2")
        one = constant(TAU_KSET, 1.0)
        A = lift_fiber(F, one, one)
        # w = 1: [x,y] = iota_bar (k + T) and iota = iota_bar
        assert A.structure.C[2][3][0].at((0.0,)) == pytest.approx(-2.0)
        assert A.structure.C[2][3][1].at((0.0,)) == pytest.approx(-2.0)
        assert A.iota.at((0.0,)) == pytest.approx(-2.0)
        assert A.structure.C[0][1][0].at((0.0,)) == 0.0  # [k,T] = 0 for w' = 0

    def test_sphere_fiber_bracket_scaling(self):
        F = make_fiber(-2.0, "-2")
        w = make_closed_form("exp(tau)", TAU_KSET)
        f = constant(TAU_KSET, 1.0)
        A = lift_fiber(F, w, f)
        pt = (0.5,)
        scale = -2.0 / math.exp(0.5)
        assert A.structure.C[2][3][0].at(pt) == pytest.approx(scale)
        assert A.structure.C[2][3][1].at(pt) == pytest.approx(scale)
        # [k, x] = (alpha/w) y - (w'/w) x
        assert A.structure.C[0][2][3].at(pt) == pytest.approx(-2.0 / math.exp(0.5))
        assert A.structure.C[0][2][2].at(pt) == pytest.approx(-1.0)

    def test_derivative_table(self):
        F = plane_fiber("-sech(p)^2")
        w = make_closed_form("exp(tau)", TAU_KSET)
        A = lift_fiber(F, w, constant(TAU_KSET, 1.0))
        pt = (0.3, 0.1, -0.2)
        assert A.structure.D[0][0].at(pt) == 1.0  # d_k tau
        assert A.structure.D[1][0].at(pt) == -1.0  # d_T tau
        assert A.structure.D[2][0].at(pt) == 0.0
        assert A.structure.D[2][1].at(pt) == pytest.approx(math.exp(-0.3))  # d_x p = 1/w
        assert A.structure.D[3][2].at(pt) == pytest.approx(math.exp(-0.3))

    def test_metric_values(self):
        F = make_fiber(0.0, "-2")
        A = lift_fiber(F, make_closed_form("exp(tau)", TAU_KSET), constant(TAU_KSET, 1.0))
        assert A.structure.g[0][1].at((0.0,)) == 1.0
        assert A.structure.g[1][1].at((0.0,)) == -1.0
        assert A.structure.g[0][0].at((0.0,)) == 0.0

    def test_nonpositive_warping_rejected_at_evaluation(self):
        F = make_fiber(0.0, "-2")
        w = make_closed_form("tau", TAU_KSET)
        A = lift_fiber(F, w, constant(TAU_KSET, 1.0))
        with pytest.raises(DomainError):
            A.iota.at((0.0,))


class TestKeOdeResidual:
    @pytest.mark.parametrize("lam", [-3.0, 0.0])
    def test_alpha_zero_both_branches(self, lam):
        interval = (-1.0, 1.0) if lam != 0.0 else (0.0, 2.0)
        a2 = 0.0 if lam != 0.0 else 1.0
        fam = family_alpha_zero(lam, 1.0, a2, interval)
        grid = grid_points(TAU_KSET, {"tau": interval + (5,)})
        assert max_abs_on_grid(ke_ode_residual(fam, 0.0), grid) <= 1e-9

    def test_alpha_zero_general_constants(self):
        fam = family_alpha_zero(-3.0, 1.0, 1.5, (-1.0, 1.0))
        assert max_abs_on_grid(ke_ode_residual(fam, 0.0), TAU_GRID_SYM) <= 1e-9

    @pytest.mark.parametrize("alpha", [-0.5, -1.0, -3.0])
    def test_alpha_negative_family(self, alpha):
        fam = family_alpha_negative(alpha, (0.2, 1.4))
        assert max_abs_on_grid(ke_ode_residual(fam, alpha), TAU_GRID_POS) <= 1e-9

    def test_implicit_family(self):
        fam = family_implicit_tan((0.05, 1.0))
        assert max_abs_on_grid(ke_ode_residual(fam, -2.0), TAU_GRID_T0) <= 1e-9

    def test_wrong_alpha_leaves_residual(self):
        fam = family_alpha_negative(-1.0, (0.2, 1.4))
        assert max_abs_on_grid(ke_ode_residual(fam, -2.0), TAU_GRID_POS) > 0.1


class TestKePdeResidual:
    def test_constant_twist_needs_c_zero(self):
        F = make_fiber(-2.0, "-2")
        assert max_abs_on_grid(ke_pde_residual(F, -3.0, 0.0), [()]) == 0.0
        assert max_abs_on_grid(ke_pde_residual(F, -3.0, 0.5), [()]) > 1.0

    def test_harmonic_exponent(self):
        F = plane_fiber("-exp(p^2 - q^2)")
        grid = grid_points(F.structure.kset, {"p": (-0.5, 0.5, 4), "q": (-0.5, 0.5, 4)})
        assert max_abs_on_grid(ke_pde_residual(F, 0.0, 1.0), grid) <= 1e-8

    def test_sech_profile(self):
        # iota_bar = -sech^2(p + 2q): the equation holds with lam C = -(1+4)
        F = plane_fiber("-sech(p + 2*q)^2")
        grid = grid_points(F.structure.kset, {"p": (-0.5, 0.5, 4), "q": (-0.5, 0.5, 4)})
        lam, C = 1.0, -5.0
        assert max_abs_on_grid(ke_pde_residual(F, lam, C), grid) <= 1e-7
        # oracle: the finite-difference plane Laplacian of log|iota_bar|
        pt = (0.2, -0.1)
        lap = fd_plane_laplacian(lambda s: math.log(abs(F.iota_bar.at(s))), pt, 0, 1)
        assert lap == pytest.approx(-2.0 * lam * C * F.iota_bar.at(pt), abs=1e-5)


class TestFiberEquationProperties:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @settings(max_examples=15, deadline=None)
    @given(
        st.floats(-2.0, 2.0),
        st.floats(-2.0, 2.0),
        st.floats(-0.5, 0.5),
    )
    def test_sech_profile_solves_for_matching_constant(self, p, q, r):
        # iota_bar = -sech^2(p x + q y + r) solves the fiber equation with
        # lam C = -(p^2 + q^2), for every coefficient choice
        F = plane_fiber("-sech(%r*p + %r*q + %r)^2" % (p, q, r))
        grid = grid_points(F.structure.kset, {"p": (-0.4, 0.4, 3), "q": (-0.4, 0.4, 3)})
        lamC = -(p * p + q * q)
        res = ke_pde_residual(F, 1.0, lamC)
        assert max_abs_on_grid(res, grid) <= 1e-7

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-0.5, 0.5))
    def test_harmonic_exponent_solves_with_zero(self, c1, c2, c3):
        # |iota_bar| = e^h with h harmonic gives a solution with lam C = 0
        expr = "-exp(%r*(p^2 - q^2) + %r*p*q + %r*p)" % (c1, c2, c3)
        F = plane_fiber(expr)
        grid = grid_points(F.structure.kset, {"p": (-0.4, 0.4, 3), "q": (-0.4, 0.4, 3)})
        res = ke_pde_residual(F, 1.0, 0.0)
        assert max_abs_on_grid(res, grid) <= 1e-8


class TestImplicitSolve:
    def test_root_at_tau0(self):
        x0 = solve_implicit_w(TAU0, -math.pi / 4.0)
        assert abs(x0 + math.pi / 4.0) <= 1e-12
        assert abs(TAU0 + math.tan(x0) - x0) <= 1e-12

    def test_derivative_closed_form_and_fd(self):
        # x'(tau) = -cot^2(x(tau)); at tau0 this is -1
        x = implicit_tan_field(TAU_KSET, 0, -math.pi / 4.0)
        assert x.partial(0).at((TAU0,)) == pytest.approx(-1.0, abs=1e-10)
        oracle = central_diff(lambda p: solve_implicit_w(p[0], -math.pi / 4.0), (TAU0,), 0)
        assert x.partial(0).at((TAU0,)) == pytest.approx(oracle, abs=1e-6)

    def test_warping_values_at_tau0(self):
        fam = family_implicit_tan((0.05, 1.0))
        assert fam.w.at((TAU0,)) == pytest.approx(1.0, abs=1e-12)
        assert fam.w.partial(0).at((TAU0,)) == pytest.approx(2.0, abs=1e-10)

    def test_nonconvergence_errors(self):
        # no root of x = tau + tan(x) inside (seed - 0.01, seed + 0.01)
        with pytest.raises(ArithmeticError):
            solve_implicit_w(100.0, -math.pi / 4.0, halfwidth=0.01, max_iter=8)


class TestEinsteinVerdict:
    def test_alpha0_einstein(self, built):
        be = built("warped_alpha0")
        entry = be.entry
        rep = einstein_verdict(be.data, -3.0, be.grid, fam=entry.family, fiber=entry.fiber,
                               fiber_grid=[()], C=0.0)
        assert rep.passed
        by_id = {c.check_id: c for c in rep.checks}
        assert by_id["einstein_residual"].residual <= 1e-7
        assert by_id["rho_horizontal_vertical"].residual <= 1e-9

    def test_alphaneg_flat(self, built):
        be = built("warped_alphaneg")
        rep = einstein_verdict(be.data, 0.0, be.grid, fam=be.entry.family,
                               fiber=be.entry.fiber, fiber_grid=[()])
        assert rep.passed
        assert be.curv_k.max_component(be.grid) <= 1e-7
        assert be.curv_k.max_ricci(be.grid) <= 1e-7

    def test_implicit_family_ricci_flat_not_flat(self, built):
        be = built("warped_alpha_minus2")
        rep = einstein_verdict(be.data, 0.0, be.grid, fam=be.entry.family,
                               fiber=be.entry.fiber, fiber_grid=[()])
        assert rep.passed
        assert be.curv_k.max_ricci(be.grid) <= 1e-7
        K_xy = sectional_curvature(be.kahler.structure, be.curv_k, 2, 3)
        assert abs(K_xy.at((TAU0,))) > 0.1

    def test_wrong_lambda_fails(self, built):
        be = built("warped_alpha0")
        rep = einstein_verdict(be.data, -1.0, be.grid)
        assert not rep.passed

    def test_log_derivative_identity(self, built):
        # c'/c = (fw)''/(fw)' - w'/w as fields
        for eid in ("warped_alpha0", "warped_alphaneg", "warped_alpha_minus2"):
            be = built(eid)
            rep = einstein_verdict(be.data, be.entry.family.lam, be.grid)
            by_id = {c.check_id: c for c in rep.checks}
            assert by_id["log_derivative_identity"].residual <= 1e-10
            assert by_id["twist_substitution"].residual <= 1e-10


class TestCompleteness:
    def test_complete_example(self):
        w = make_closed_form("exp(tau)", TAU_KSET)
        fam = WarpedFamily(constant(TAU_KSET, 1.0), w, -3.0, 0.0, (-math.inf, math.inf))
        cv = completeness(fam)
        assert cv.verdict == "complete"
        assert cv.lower_diverged and cv.upper_diverged
        assert cv.s_range[0] < -1e6 and cv.s_range[1] > 1e6

    def test_bounded_interval_inconclusive(self):
        w = make_closed_form("exp(tau)", TAU_KSET)
        fam = WarpedFamily(constant(TAU_KSET, 1.0), w, -3.0, 0.0, (0.0, 1.0))
        cv = completeness(fam)
        assert cv.verdict == "inconclusive"
        assert cv.s_range[1] - cv.s_range[0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-6)

    def test_lambda_zero_family_inconclusive(self):
        fam = family_alpha_negative(-1.0, (0.0, 1.4))
        cv = completeness(fam)
        assert cv.verdict == "inconclusive"

    def test_nonpositive_c_detected(self):
        # f = 1, w = exp(-tau^2): (fw)'/w = -2 tau < 0 for tau > 0
        w = make_closed_form("exp(-tau^2)", TAU_KSET)
        fam = WarpedFamily(constant(TAU_KSET, 1.0), w, 0.0, 0.0, (0.5, 2.0))
        with pytest.raises(DomainError):
            completeness(fam)

    def test_adaptive_simpson_accuracy(self):
        val = adaptive_simpson(math.exp, 0.0, 1.0, rel_tol=1e-12)
        assert val == pytest.approx(math.e - 1.0, rel=1e-11)
        val = adaptive_simpson(lambda t: t ** (-0.75), 1e-12, 1.0, rel_tol=1e-9)
        assert val == pytest.approx(4.0, rel=1e-3)


class TestQuotientGauss:
    def test_constant_twist(self):
        F = make_fiber(-2.0, "-2")
        rep = quotient_gauss_check(F, -3.0, 0.0, [()])
        assert rep.passed

    def test_sech_profile_matches_fit(self):
        F = plane_fiber("-sech(p + 2*q)^2")
        grid = grid_points(F.structure.kset, {"p": (-0.5, 0.5, 4), "q": (-0.5, 0.5, 4)})
        rep = quotient_gauss_check(F, 1.0, -5.0, grid)
        assert rep.passed
        by_id = {c.check_id: c for c in rep.checks}
        assert "fitted_constant" in by_id and by_id["fitted_constant"].passed

    def test_nonharmonic_exponent_fails_every_constant(self):
        F = plane_fiber("-exp(p^2)")
        grid = grid_points(F.structure.kset, {"p": (-0.5, 0.5, 5), "q": (-0.5, 0.5, 3)})
        rep = quotient_gauss_check(F, 1.0, 1.0, grid)
        # Gauss curvature nonconstant and no constant fits: verdicts co-vanish
        assert rep.passed
        assert "fitted_constant" not in {c.check_id for c in rep.checks}
        res = ke_pde_residual(F, 1.0, 1.0)
        assert max_abs_on_grid(res, grid) > 0.1


class TestSectionalValues:
    def test_complete_example_sectionals(self, built):
        be = built("warped_complete")
        lam = be.entry.family.lam
        K_kT = sectional_curvature(be.kahler.structure, be.curv_k, 0, 1)
        K_xk = sectional_curvature(be.kahler.structure, be.curv_k, 2, 0)
        assert max_abs_on_grid(K_kT - 2.0 * lam / 3.0, be.grid) <= 1e-8
        assert max_abs_on_grid(K_xk - lam / 6.0, be.grid) <= 1e-8

    def test_c_profile_constant(self, built):
        be = built("warped_complete")
        c_field = be.entry.family.c_field()
        tau_grid = sorted({(p[0],) for p in be.grid})
        assert max_abs_on_grid(c_field - 1.0, tau_grid) <= 1e-9
