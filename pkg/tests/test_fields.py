"""Scalar-field algebra: parser, exact partials, solves, complex fields."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frame_kahler.fields import (
    CScalarField,
    DomainError,
    ExpressionError,
    FieldError,
    KSet,
    LinearFieldSystem,
    constant,
    determinant,
    exp,
    guarded,
    lift_partial,
    log,
    log_abs,
    make_closed_form,
    remap,
    solve_linear,
    sqrt,
    variable,
)

from conftest import central_diff, fd_plane_laplacian, second_diff

KS1 = KSet(("tau",))
KS2 = KSet(("x", "y"))


class TestKSet:
    def test_size_and_index(self):
        ks = KSet(("tau", "x", "y"))
        assert ks.size == 3
        assert ks.index("x") == 1

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            KSet(("x", "x"))

    def test_rejects_too_many(self):
        with pytest.raises(ValueError):
            KSet(("a", "b", "c", "d"))

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            KS2.index("z")

    def test_empty_kset_allowed(self):
        assert KSet(()).size == 0


class TestParser:
    def test_identity(self):
        f = make_closed_form("tau", KS1)
        assert f.at((2.0,)) == 2.0
        assert f.partial(0).at((2.0,)) == 1.0

    def test_exp_at_zero(self):
        f = make_closed_form("exp(tau)", KS1)
        assert f.at((0.0,)) == 1.0
        assert f.partial(0).at((0.0,)) == 1.0

    def test_sech_squared_log_laplacian(self):
        # log of sech(x + 2y)^2 has plane Laplacian -2 (1^2 + 2^2) sech^2
        f = make_closed_form("sech(x + 2*y)^2", KS2)
        pt = (0.3, -0.1)
        expected = -2.0 * (1.0 + 4.0) / math.cosh(0.1) ** 2
        L = log_abs(f)
        exact = L.partial(0).partial(0).at(pt) + L.partial(1).partial(1).at(pt)
        assert exact == pytest.approx(expected, abs=1e-12)
        oracle = fd_plane_laplacian(lambda p: math.log(abs(f.at(p))), pt, 0, 1, h=1e-4)
        assert exact == pytest.approx(oracle, abs=1e-6)

    def test_unknown_variable(self):
        with pytest.raises(ExpressionError):
            make_closed_form("z + 1", KS2)

    def test_unknown_function(self):
        with pytest.raises(ExpressionError):
            make_closed_form("frob(x)", KS2)

    def test_trailing_garbage(self):
        with pytest.raises(ExpressionError):
            make_closed_form("x + ", KS2)

    def test_power_precedence(self):
        f = make_closed_form("-x^2", KS2)
        assert f.at((3.0, 0.0)) == -9.0
        g = make_closed_form("2^-2", KS2)
        assert g.at((0.0, 0.0)) == 0.25

    def test_named_constants(self):
        f = make_closed_form("pi + e", KS1)
        assert f.at((0.0,)) == pytest.approx(math.pi + math.e)

    @pytest.mark.parametrize(
        "expr",
        [
            "x^2 + 3*x*y - y/2",
            "exp(x) * sin(y)",
            "log(2 + x^2)",
            "tanh(x - y) + cosh(x*y)",
            "sqrt(4 + x^2)",
            "1 / (2 + sin(x))",
            "(2 + x)^1.5 + 2",
        ],
    )
    def test_partials_match_finite_differences(self, expr):
        f = make_closed_form(expr, KS2)
        for pt in [(0.3, -0.2), (1.1, 0.7), (0.0, 0.4)]:
            for i in range(2):
                exact = f.partial(i).at(pt)
                oracle = central_diff(f.at, pt, i, h=1e-5)
                assert abs(exact - oracle) <= 1e-6 * (1.0 + abs(exact))

    def test_second_partials_symmetric(self):
        f = make_closed_form("exp(x*y) + sin(x)*y^3", KS2)
        for pt in [(0.2, 0.5), (-0.4, 1.2)]:
            mixed_xy = f.partial(0).partial(1).at(pt)
            mixed_yx = f.partial(1).partial(0).at(pt)
            assert abs(mixed_xy - mixed_yx) <= 1e-8


class TestLiftPartial:
    def test_polynomial(self):
        f = make_closed_form("tau^2", KS1)
        assert lift_partial(f, 0).at((3.0,)) == 6.0

    def test_lift_twice_log_sech(self):
        # d^2/dx^2 of log(sech^2 x) = -2 sech^2 x; at 0 this is -2
        iota = make_closed_form("sech(x)^2", KS2)
        L = log_abs(iota)
        twice = lift_partial(lift_partial(L, "x"), "x")
        assert twice.at((0.0, 0.0)) == pytest.approx(-2.0, abs=1e-12)
        oracle = second_diff(lambda p: math.log(abs(iota.at(p))), (0.0, 0.0), 0, 0, h=1e-4)
        assert twice.at((0.0, 0.0)) == pytest.approx(oracle, abs=1e-6)

    def test_constant_lifts_to_zero(self):
        f = constant(KS1, 7.0)
        assert lift_partial(f, 0).is_constant
        assert lift_partial(f, 0).at((1.0,)) == 0.0

    def test_out_of_range(self):
        f = make_closed_form("tau", KS1)
        with pytest.raises(IndexError):
            f.partial(3)


class TestDomains:
    def test_log_nonpositive(self):
        f = log(variable(KS1, "tau"))
        with pytest.raises(DomainError):
            f.at((-1.0,))

    def test_log_abs_zero(self):
        f = log_abs(variable(KS1, "tau"))
        with pytest.raises(DomainError):
            f.at((0.0,))
        assert f.at((-2.0,)) == math.log(2.0)

    def test_fractional_power_negative_base(self):
        f = variable(KS1, "tau") ** (-1.5)
        assert f.at((4.0,)) == pytest.approx(0.125)
        with pytest.raises(DomainError):
            f.at((-4.0,))

    def test_sqrt_negative(self):
        with pytest.raises(DomainError):
            sqrt(variable(KS1, "tau")).at((-1.0,))

    def test_guard(self):
        f = guarded(variable(KS1, "tau"), lambda p: p[0] > 0.0, "tau > 0")
        assert f.at((2.0,)) == 2.0
        with pytest.raises(DomainError):
            f.at((-2.0,))
        # the guard survives differentiation
        with pytest.raises(DomainError):
            f.partial(0).at((-2.0,))

    def test_division_by_zero_field(self):
        f = constant(KS1, 1.0) / variable(KS1, "tau")
        with pytest.raises(DomainError):
            f.at((0.0,))


class TestRingAxioms:
    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(-2, 2),
        st.floats(-2, 2),
    )
    def test_associativity_distributivity(self, a, b, c, x, y):
        fa = constant(KS2, a) + variable(KS2, "x")
        fb = constant(KS2, b) * variable(KS2, "y") + 1.0
        fc = constant(KS2, c) - variable(KS2, "x") * variable(KS2, "y")
        pt = (x, y)
        lhs = ((fa + fb) + fc).at(pt)
        rhs = (fa + (fb + fc)).at(pt)
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))
        lhs = ((fa * fb) * fc).at(pt)
        rhs = (fa * (fb * fc)).at(pt)
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))
        lhs = (fa * (fb + fc)).at(pt)
        rhs = (fa * fb + fa * fc).at(pt)
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))

    def test_mixed_kset_rejected(self):
        with pytest.raises(FieldError):
            variable(KS1, "tau") + variable(KS2, "x")


class TestComplexFields:
    @settings(max_examples=40, deadline=None)
    @given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
    def test_matches_python_complex(self, z1, z2):
        f1 = CScalarField(constant(KS1, z1.real), constant(KS1, z1.imag))
        f2 = CScalarField(constant(KS1, z2.real), constant(KS1, z2.imag))
        pt = (0.0,)
        assert (f1 + f2).at(pt) == pytest.approx(z1 + z2)
        assert (f1 * f2).at(pt) == pytest.approx(z1 * z2)
        if abs(z2) > 1e-3:
            assert (f1 / f2).at(pt) == pytest.approx(z1 / z2, rel=1e-12)

    def test_real_times_complex_scalar(self):
        tau = variable(KS1, "tau")
        z = tau * (2.0 + 3.0j)
        assert z.at((1.5,)) == pytest.approx(3.0 + 4.5j)
        assert z.partial(0).at((1.5,)) == pytest.approx(2.0 + 3.0j)

    def test_conjugate(self):
        tau = variable(KS1, "tau")
        z = CScalarField(tau, tau * 2.0)
        assert z.conj().at((1.0,)) == pytest.approx(1.0 - 2.0j)


class TestLinearSolve:
    def test_matches_numpy_and_fd(self):
        A = [
            [constant(KS2, 2.0), variable(KS2, "x")],
            [variable(KS2, "x"), constant(KS2, 3.0)],
        ]
        b = [variable(KS2, "y"), constant(KS2, 1.0)]
        sol = solve_linear(A, b)
        pt = (0.4, -0.7)

        def direct(p):
            M = np.array([[2.0, p[0]], [p[0], 3.0]])
            return np.linalg.solve(M, np.array([p[1], 1.0]))

        for j in range(2):
            assert sol[j].at(pt) == pytest.approx(direct(pt)[j], rel=1e-12)
            for i in range(2):
                oracle = central_diff(lambda p: direct(p)[j], pt, i, h=1e-5)
                assert sol[j].partial(i).at(pt) == pytest.approx(oracle, abs=1e-6)
        # second derivative through the solve
        oracle2 = second_diff(lambda p: direct(p)[0], pt, 0, 0, h=1e-4)
        assert sol[0].partial(0).partial(0).at(pt) == pytest.approx(oracle2, abs=1e-5)

    def test_singular_matrix_raises(self):
        A = [
            [variable(KS1, "tau"), constant(KS1, 0.0)],
            [constant(KS1, 0.0), constant(KS1, 1.0)],
        ]
        b = [constant(KS1, 1.0), constant(KS1, 1.0)]
        sys = LinearFieldSystem(A, b)
        from frame_kahler.fields import SingularMatrixError

        with pytest.raises(SingularMatrixError):
            sys.components()[0].at((0.0,))

    def test_determinant_field(self):
        m = [
            [constant(KS2, 1.0), variable(KS2, "x")],
            [variable(KS2, "y"), constant(KS2, 2.0)],
        ]
        d = determinant(m)
        assert d.at((3.0, 0.5)) == pytest.approx(2.0 - 1.5)


class TestRemapAndFolds:
    def test_remap_variables(self):
        small = make_closed_form("sech(p + 2*q)^2", KSet(("p", "q")))
        big = remap(small, KSet(("tau", "p", "q")))
        assert big.at((9.9, 0.3, -0.1)) == pytest.approx(small.at((0.3, -0.1)))
        assert big.partial(0).at((9.9, 0.3, -0.1)) == 0.0
        assert big.partial(1).at((9.9, 0.3, -0.1)) == pytest.approx(small.partial(0).at((0.3, -0.1)))

    def test_shared_node_quotient_folds(self):
        # w'/w for w = e^tau collapses to the constant 1, so the ratio stays
        # evaluable far beyond the overflow range of w itself
        w = make_closed_form("exp(tau)", KS1)
        ratio = w.partial(0) / w
        assert ratio.is_constant
        assert ratio.at((1.0e6,)) == 1.0

    def test_exp_product_quotient_folds(self):
        w = 2.0 * exp(variable(KS1, "tau") * 3.0)
        ratio = w.partial(0) / w
        assert ratio.is_constant
        assert ratio.at((0.0,)) == pytest.approx(3.0)
