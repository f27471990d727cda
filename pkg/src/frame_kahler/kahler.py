"""Induced Kahler metrics, complex connection 1-forms and the Ricci form.

Starting data is an admissible frame structure: frames ordered (k, T, x, y)
where k is null, T is a rescaled gradient of the distinguished variable tau,
and (x, y) is an oriented orthonormal frame of the horizontal distribution.
The induced metric

    gK(k,k) = gK(T,T) = -(f' det(g|_V)/ell - f dk^flat(k,T)),
    gK(k,T) = 0,  gK(H,V) = 0,  gK|_H = -f iota g|_H,

is Kahler for the complex structure J with Jk = T, JT = -k, Jx = y,
Jy = -x.  Its Ricci form is computed the Kahler way, from the trace of the
complex connection 1-forms: rho = i (d Gamma_1^1 + d Gamma_2^2), entirely
avoiding the curvature tensor; the tensor route lives in ``frames`` and is
used as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .fields import CScalarField, Const, KSet, ScalarField
from .frames import (
    ConnectionTable,
    FrameError,
    FrameStructure,
    directional_derivative,
    koszul_connection,
    max_abs_on_grid,
)
from .reporting import VerificationReport

__all__ = [
    "CASE_CENTRAL",
    "CASE_WARPED",
    "AdmissibleConstants",
    "AdmissibleData",
    "KahlerMetric",
    "GammaForms",
    "FrameOneForm",
    "FrameTwoForm",
    "J_IMAGE",
    "j_image",
    "check_admissible",
    "build_kahler",
    "gamma_forms",
    "exterior_d",
    "exterior_d_two_form",
    "ricci_form",
    "ricci_from_form",
    "kahler_form",
    "kahler_form_closed",
    "cross_route_ricci_residual",
]

CASE_CENTRAL = "central"
CASE_WARPED = "warped"

K, T, X, Y = 0, 1, 2, 3

# J e_a = sign * e_b encoded as (b, sign): Jk = T, JT = -k, Jx = y, Jy = -x.
J_IMAGE = ((T, 1.0), (K, -1.0), (Y, 1.0), (X, -1.0))


def j_image(a: int):
    return J_IMAGE[a]


@dataclass(frozen=True)
class AdmissibleConstants:
    """Constants of an admissible structure.

    a = g(k,T) and b = g(T,T); alpha, beta are the bracket constants of
    [k,x] = alpha y and [T,x] = beta y (central case; the warped case keeps
    alpha as the fiber bracket constant and beta = 0).  ``ell_gradient`` is
    the factor in T = ell * grad(tau).
    """

    a: float
    b: float
    alpha: float
    beta: float
    ell_gradient: float = 1.0


@dataclass
class AdmissibleData:
    """Frame structure with designated roles plus the metric-building data.

    The frame order is fixed as (k, T, x, y).  ``f`` is the parameter
    function (a field of tau only), ``iota`` the twist of k.  Warped
    structures also carry the warping function ``w`` and the fiber twist.
    """

    structure: FrameStructure
    constants: AdmissibleConstants
    f: ScalarField
    iota: ScalarField
    case: str
    tau_index: int = 0
    w: Optional[ScalarField] = None
    iota_bar: Optional[ScalarField] = None

    def __post_init__(self):
        if self.case not in (CASE_CENTRAL, CASE_WARPED):
            raise ValueError("case must be %r or %r" % (CASE_CENTRAL, CASE_WARPED))
        if self.structure.n != 4:
            raise FrameError("admissible data needs a 4-frame structure")

    @property
    def kset(self) -> KSet:
        return self.structure.kset

    def f_prime(self) -> ScalarField:
        return self.f.partial(self.tau_index)

    def vertical_det(self) -> ScalarField:
        """det(g|_V) = g(k,k) g(T,T) - g(k,T)^2."""
        g = self.structure.g
        return g[K][K] * g[T][T] - g[K][T] * g[K][T]

    def dk_flat_kT(self) -> ScalarField:
        """d(k^flat)(k, T) for the 1-form k^flat = g(k, .)."""
        S = self.structure
        kflat = [S.g[K][c] for c in range(4)]
        out = S.dd(K, kflat[T]) - S.dd(T, kflat[K])
        for c in range(4):
            out = out - S.C[K][T][c] * kflat[c]
        return out


@dataclass
class KahlerMetric:
    """The induced metric with its region predicate and frame structure."""

    base: AdmissibleData
    g: list  # 4x4 ScalarField
    structure: FrameStructure
    region_twist_factor: ScalarField  # f * iota, required < 0
    region_vertical_factor: ScalarField  # f' det(g|_V)/ell - f dk^flat(k,T), required < 0

    def region_ok(self, point) -> bool:
        return self.region_twist_factor.at(point) < 0.0 and self.region_vertical_factor.at(point) < 0.0

    def region_mask(self, grid):
        return [self.region_ok(p) for p in grid]


def check_admissible(A: AdmissibleData, grid, tol: float = 1e-8) -> VerificationReport:
    """Admissibility residuals of a role-assigned frame structure.

    Checks the spacelike/orthonormal horizontal pair, closure of the
    vertical brackets into H, shear-freeness of k and T, the gradient
    condition on T, constancy of g(k,T) and g(k,k) along H, the case
    bracket patterns, the horizontal twist gradient, and nonvanishing of
    the twist.
    """
    S = A.structure
    cs = A.constants
    report = VerificationReport(suite="admissibility")

    # horizontal frame orthonormal (hence g|_H positive definite)
    worst = max(
        max_abs_on_grid(S.g[X][X] - 1.0, grid),
        max_abs_on_grid(S.g[Y][Y] - 1.0, grid),
        max_abs_on_grid(S.g[X][Y], grid),
    )
    report.add("horizontal_orthonormal", worst, tol)

    worst = max(
        max_abs_on_grid(S.g[K][X], grid),
        max_abs_on_grid(S.g[K][Y], grid),
        max_abs_on_grid(S.g[T][X], grid),
        max_abs_on_grid(S.g[T][Y], grid),
    )
    report.add("vertical_horizontal_orthogonal", worst, tol)

    # [k, H] and [T, H] stay horizontal
    worst = 0.0
    for v in (K, T):
        for h in (X, Y):
            for c in (K, T):
                worst = max(worst, max_abs_on_grid(S.C[v][h][c], grid))
    report.add("vertical_brackets_preserve_H", worst, tol)

    # shear-freeness of k and T against the orthonormal pair
    worst = 0.0
    for v in (K, T):
        off = S.g_of_bracket(Y, v, X) + S.g_of_bracket(X, v, Y)
        diag = S.g_of_bracket(X, v, X) - S.g_of_bracket(Y, v, Y)
        worst = max(worst, max_abs_on_grid(off, grid), max_abs_on_grid(diag, grid))
    report.add("shear_free", worst, tol)

    # T = ell grad(tau): g(T, e_a) = ell d_a tau
    worst = 0.0
    for a in range(4):
        f = S.g[T][a] - cs.ell_gradient * S.D[a][A.tau_index]
        worst = max(worst, max_abs_on_grid(f, grid))
    report.add("gradient_condition", worst, tol)

    # constants of the metric on V, constant along H
    worst = max(
        max_abs_on_grid(S.g[K][T] - cs.a, grid),
        max_abs_on_grid(S.g[T][T] - cs.b, grid) if A.case == CASE_CENTRAL else 0.0,
    )
    report.add("vertical_metric_constants", worst, tol)
    worst = 0.0
    for h in (X, Y):
        worst = max(worst, max_abs_on_grid(S.dd(h, S.g[K][T]), grid))
        worst = max(worst, max_abs_on_grid(S.dd(h, S.g[K][K]), grid))
    report.add("vertical_metric_constant_along_H", worst, tol)

    report.add("k_null", max_abs_on_grid(S.g[K][K], grid), tol)

    if A.case == CASE_CENTRAL:
        # k must have geodesic flow or be Killing (warped k is merely
        # pre-geodesic once the warping is nonconstant, so only here)
        conn_base = koszul_connection(S)
        geo = max(max_abs_on_grid(conn_base.gamma[K][K][c], grid) for c in range(4))
        kill = 0.0
        for u in range(4):
            for v in range(u, 4):
                f = S.dd(K, S.g[u][v]) - S.g_of_bracket(v, K, u) - S.g_of_bracket(u, K, v)
                kill = max(kill, max_abs_on_grid(f, grid))
        report.add(
            "k_geodesic_or_killing",
            min(geo, kill),
            tol,
            passed=geo <= tol or kill <= tol,
            note="geodesic residual %.2e, Killing residual %.2e" % (geo, kill),
        )
        worst = 0.0
        for c in range(4):
            worst = max(worst, max_abs_on_grid(S.C[K][T][c], grid))
        report.add("k_T_commute", worst, tol)
        worst = max(
            max_abs_on_grid(S.C[K][X][Y] - cs.alpha, grid),
            max_abs_on_grid(S.C[K][Y][X] + cs.alpha, grid),
            max_abs_on_grid(S.C[T][X][Y] - cs.beta, grid),
            max_abs_on_grid(S.C[T][Y][X] + cs.beta, grid),
            max_abs_on_grid(S.C[K][X][X], grid),
            max_abs_on_grid(S.C[K][Y][Y], grid),
            max_abs_on_grid(S.C[T][X][X], grid),
            max_abs_on_grid(S.C[T][Y][Y], grid),
            max_abs_on_grid(S.C[X][Y][X], grid),
            max_abs_on_grid(S.C[X][Y][Y], grid),
        )
        report.add("bracket_pattern", worst, tol)
    else:
        # lifted warped brackets: [k,T] = -(w'/w)(k+T), [k,x] = (alpha/w) y - (w'/w) x, ...
        if A.w is None:
            raise FrameError("warped admissible data must carry the warping function")
        w = A.w
        wp = w.partial(A.tau_index)
        rho = wp / w
        aw = Const(S.kset, cs.alpha) / w
        checks = [
            (S.C[K][T][K] + rho), (S.C[K][T][T] + rho),
            (S.C[K][X][Y] - aw), (S.C[K][X][X] + rho),
            (S.C[K][Y][X] + aw), (S.C[K][Y][Y] + rho),
            (S.C[T][X][X] - rho), (S.C[T][Y][Y] - rho),
            (S.C[T][X][Y]), (S.C[T][Y][X]),
        ]
        worst = max(max_abs_on_grid(f, grid) for f in checks)
        report.add("bracket_pattern", worst, tol)
        report.add(
            "warped_metric_values",
            max(
                max_abs_on_grid(S.g[K][T] - 1.0, grid),
                max_abs_on_grid(S.g[T][T] + 1.0, grid),
            ),
            tol,
        )

    # twist matches the structure; the central twist (warped: the fiber
    # twist) has no vertical derivative
    worst = max_abs_on_grid(A.iota - S.g_of_bracket(K, X, Y), grid)
    report.add("twist_matches_brackets", worst, tol)
    invariant_twist = A.iota if A.case == CASE_CENTRAL else A.iota_bar
    worst = max(
        max_abs_on_grid(S.dd(K, invariant_twist), grid),
        max_abs_on_grid(S.dd(T, invariant_twist), grid),
    )
    report.add("twist_vertical_derivative", worst, tol)

    min_twist = min(abs(A.iota.at(p)) for p in grid)
    report.add(
        "twist_nonvanishing",
        0.0 if min_twist > tol else tol - min_twist,
        0.0,
        note="min |iota| = %.3e" % min_twist,
    )
    return report


def build_kahler(A: AdmissibleData) -> KahlerMetric:
    """Assemble the induced Kahler metric from its closed-form components."""
    S = A.structure
    zero = S.zero()
    fp = A.f_prime()
    vertical = fp * A.vertical_det() * (1.0 / A.constants.ell_gradient) - A.f * A.dk_flat_kT()
    g_vv = -vertical
    g_hh = -(A.f * A.iota)
    gk = [[zero for _ in range(4)] for _ in range(4)]
    gk[K][K] = g_vv
    gk[T][T] = g_vv
    gk[X][X] = g_hh * S.g[X][X]
    gk[Y][Y] = g_hh * S.g[Y][Y]
    gk[X][Y] = gk[Y][X] = g_hh * S.g[X][Y]
    return KahlerMetric(
        base=A,
        g=gk,
        structure=S.with_metric(gk),
        region_twist_factor=A.f * A.iota,
        region_vertical_factor=vertical,
    )


# frame-indexed exterior algebra ----------------------------------------------


class FrameOneForm:
    """A 1-form through its values on the frame fields."""

    def __init__(self, coeffs):
        self.coeffs = list(coeffs)

    def __call__(self, a):
        return self.coeffs[a]


class FrameTwoForm:
    """An antisymmetric 2-form through its values on frame pairs a < b."""

    def __init__(self, n, vals, zero):
        self.n = n
        self.vals = dict(vals)  # (a, b) with a < b -> field
        self.zero = zero

    def __call__(self, a, b):
        if a == b:
            return self.zero
        if a < b:
            return self.vals[(a, b)]
        return -self.vals[(b, a)]

    def pairs(self):
        return sorted(self.vals)


def exterior_d(S: FrameStructure, xi: FrameOneForm) -> FrameTwoForm:
    """d xi on frame pairs: d xi(u,v) = d_u xi(v) - d_v xi(u) - xi([u,v])."""
    n = S.n
    vals = {}
    for a in range(n):
        for b in range(a + 1, n):
            f = directional_derivative(S, a, xi(b)) - directional_derivative(S, b, xi(a))
            for c in range(n):
                f = f - xi(c) * S.C[a][b][c]
            vals[(a, b)] = f
    zero = _zero_like(xi(0), S.kset)
    return FrameTwoForm(n, vals, zero)


def exterior_d_two_form(S: FrameStructure, eta: FrameTwoForm) -> dict:
    """d eta on frame triples a < b < c."""
    out = {}
    n = S.n
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                f = (
                    directional_derivative(S, a, eta(b, c))
                    - directional_derivative(S, b, eta(a, c))
                    + directional_derivative(S, c, eta(a, b))
                )
                for e in range(n):
                    f = f - S.C[a][b][e] * eta(e, c)
                    f = f + S.C[a][c][e] * eta(e, b)
                    f = f - S.C[b][c][e] * eta(e, a)
                out[(a, b, c)] = f
    return out


def _zero_like(sample, kset):
    zero = Const(kset, 0.0)
    if isinstance(sample, CScalarField):
        return CScalarField(zero, zero)
    return zero


# complex connection forms and the Ricci form ---------------------------------


@dataclass
class GammaForms:
    """Connection 1-forms of the complexified Kahler connection.

    ``form[i][j]`` is Gamma_i^j with nabla w_i = Gamma_i^j (x) w_j for
    w_1 = k - iT, w_2 = x - iy.  ``antiholomorphic`` holds the would-be
    (0,1) components; they vanish when the connection commutes with J, and
    their grid residual is the reconstruction check.
    """

    forms: list  # 2x2 of FrameOneForm with CScalarField coefficients
    antiholomorphic: list  # flat list of CScalarField

    def reconstruction_residual(self, grid) -> float:
        return max(max_abs_on_grid(f, grid) for f in self.antiholomorphic)


def gamma_forms(A: AdmissibleData, kahler: KahlerMetric, conn_k: ConnectionTable) -> GammaForms:
    """Read the complex connection 1-forms off a connection of gK."""
    if conn_k.structure is not kahler.structure:
        raise FrameError("gamma_forms needs the connection of the induced Kahler metric")
    gamma = conn_k.gamma
    pair_indices = ((K, T), (X, Y))
    forms = [[None, None], [None, None]]
    residuals = []
    for i, (p, q) in enumerate(pair_indices):
        coeffs_1 = []
        coeffs_2 = []
        for u in range(4):
            # nabla_u w_{i+1} = (gamma[u][p][c] - i gamma[u][q][c]) e_c
            comp = [CScalarField(gamma[u][p][c], -gamma[u][q][c]) for c in range(4)]
            holo_1 = (comp[K] + comp[T] * 1j) * 0.5
            holo_2 = (comp[X] + comp[Y] * 1j) * 0.5
            anti_1 = (comp[K] - comp[T] * 1j) * 0.5
            anti_2 = (comp[X] - comp[Y] * 1j) * 0.5
            coeffs_1.append(holo_1)
            coeffs_2.append(holo_2)
            residuals.extend([anti_1, anti_2])
        forms[i][0] = FrameOneForm(coeffs_1)
        forms[i][1] = FrameOneForm(coeffs_2)
    return GammaForms(forms=forms, antiholomorphic=residuals)


def ricci_form(A: AdmissibleData, gforms: GammaForms) -> FrameTwoForm:
    """rho = i (d Gamma_1^1 + d Gamma_2^2), complex-valued on frame pairs.

    The imaginary parts must vanish; callers check them as a residual and
    work with the real parts.
    """
    S = A.structure
    d11 = exterior_d(S, gforms.forms[0][0])
    d22 = exterior_d(S, gforms.forms[1][1])
    vals = {}
    for ab in d11.pairs():
        total = d11.vals[ab] + d22.vals[ab]
        vals[ab] = total * 1j
    return FrameTwoForm(4, vals, d11.zero)


def ricci_form_real(rho: FrameTwoForm) -> FrameTwoForm:
    vals = {ab: f.re for ab, f in rho.vals.items()}
    zero = rho.zero.re if isinstance(rho.zero, CScalarField) else rho.zero
    return FrameTwoForm(rho.n, vals, zero)


def ricci_form_imag_residual(rho: FrameTwoForm, grid) -> float:
    return max(max_abs_on_grid(f.im, grid) for f in rho.vals.values())


def ricci_from_form(rho_real: FrameTwoForm):
    """Ricci values on frame pairs from the form: Ric(u,v) = rho(-Ju, v)."""
    out = [[None] * 4 for _ in range(4)]
    for u in range(4):
        ju, sign = J_IMAGE[u]
        for v in range(4):
            out[u][v] = rho_real(ju, v) * (-sign)
    return out


def kahler_form(kahler: KahlerMetric) -> FrameTwoForm:
    """omega(u, v) = gK(Ju, v) on frame pairs."""
    gk = kahler.g
    vals = {}
    for a in range(4):
        for b in range(a + 1, 4):
            ja, sign = J_IMAGE[a]
            vals[(a, b)] = gk[ja][b] * sign
    return FrameTwoForm(4, vals, kahler.structure.zero())


def kahler_form_closed(A: AdmissibleData, kahler: KahlerMetric, grid, tol: float = 1e-8) -> VerificationReport:
    """d omega = 0 on all frame triples: the testable shadow of Kahlerness."""
    report = VerificationReport(suite="kahler-form-closed")
    omega = kahler_form(kahler)
    d_omega = exterior_d_two_form(A.structure, omega)
    worst = max(max_abs_on_grid(f, grid) for f in d_omega.values())
    report.add("d_omega", worst, tol)
    return report


def cross_route_ricci_residual(rho_real: FrameTwoForm, curv_k, grid) -> float:
    """Forms-route Ricci against the tensor-route Ricci, all frame pairs."""
    ric_form = ricci_from_form(rho_real)
    worst = 0.0
    for u in range(4):
        for v in range(4):
            worst = max(worst, max_abs_on_grid(ric_form[u][v] - curv_k.ricci[u][v], grid))
    return worst
