"""Central-metric analysis of induced Kahler metrics.

For admissible structures with commuting k, T, constant a = g(k,T) and
b = g(T,T), parameter function f = e^tau and a twist with horizontal
gradient, the induced metric has Ricci endomorphism vanishing on the
vertical distribution, hence zero central curvature (the determinant of the
Ricci endomorphism).  The conformally rescaled metric e^{-tau} gK has
constant scalar curvature exactly when the twist satisfies the
Liouville-type equation  (d_x d_x + d_y d_y) log|iota| = c iota  for some
constant c; both sides of that equivalence are checked numerically here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import ScalarField, determinant, exp, log_abs, variable, _div
from .frames import (
    CurvatureTensor,
    FrameStructure,
    curvature,
    gradient,
    inverse_metric,
    koszul_connection,
    laplacian,
    laplacian_orthonormal,
    max_abs_on_grid,
    spread_on_grid,
)
from .kahler import (
    CASE_CENTRAL,
    AdmissibleData,
    KahlerMetric,
    X,
    Y,
    build_kahler,
)
from .reporting import VerificationReport

__all__ = [
    "CentralReport",
    "central_curvature",
    "ricci_endomorphism_eigenvalues",
    "expected_q",
    "conformal_scalar",
    "conformal_scalar_closed_form",
    "laplacian_self_test",
    "liouville_residual",
    "liouville_fit",
    "csc_verdict",
    "left_invariance_check",
]


def expected_q(constants) -> float:
    """Horizontal Ricci eigenvalue scale for constant twist:
    q = -(a^2 + b^2 - b alpha + a beta) / a^2."""
    a, b = constants.a, constants.b
    return -(a * a + b * b - b * constants.alpha + a * constants.beta) / (a * a)


def central_curvature(A: AdmissibleData, kahler: KahlerMetric, curv_k: CurvatureTensor) -> ScalarField:
    """Determinant of the Ricci endomorphism of gK, as a field."""
    det_ric = determinant(curv_k.ricci)
    det_gk = determinant(kahler.g)
    return _div(det_ric, det_gk, eps=1e-300, label="det gK")


def ricci_endomorphism_eigenvalues(kahler: KahlerMetric, curv_k: CurvatureTensor, point):
    """Eigenvalues of gK^{-1} Ric at a point, sorted ascending.

    The endomorphism is gK-self-adjoint, so the spectrum is real; tiny
    imaginary parts from the general eigensolver are dropped after a
    sanity bound."""
    gk = np.array([[f.at(point) for f in row] for row in kahler.g])
    ric = np.array([[f.at(point) for f in row] for row in curv_k.ricci])
    endo = np.linalg.solve(gk, ric)
    vals = np.linalg.eigvals(endo)
    if np.max(np.abs(vals.imag)) > 1e-8 * (1.0 + np.max(np.abs(vals.real))):
        raise ArithmeticError("Ricci endomorphism spectrum unexpectedly complex at %r" % (point,))
    return np.sort(vals.real)


def conformal_scalar_closed_form(constants) -> float:
    """Scalar curvature of e^{-tau} gK for constant twist:
    -(a^2 + b^2)/(2 a^2) + 2 (b alpha - a beta)/a^2."""
    a, b = constants.a, constants.b
    return -(a * a + b * b) / (2 * a * a) + 2.0 * (b * constants.alpha - a * constants.beta) / (a * a)


def conformal_scalar(
    A: AdmissibleData,
    kahler: KahlerMetric,
    conn_k,
    curv_k: CurvatureTensor,
) -> dict:
    """Scalar curvature of the conformal metric e^{-tau} gK.

    Computed from the conformal-change formula
        s~ = s_K u^2 + 6 u Lap u - 12 gK(grad u, grad u),   u = e^{tau/2},
    with the Laplacian taken two ways (inverse-metric contraction and the
    normalized-frame sum) as an internal cross-check.  For constant twist
    the closed-form constant is also returned.
    """
    S = kahler.structure
    tau = variable(A.kset, A.kset.names[A.tau_index])
    u = exp(tau * 0.5)
    invg = inverse_metric(S)
    lap_u = laplacian(S, conn_k, u, invg)
    lap_u_frame = laplacian_orthonormal(S, conn_k, u)
    grad_u = gradient(S, u, invg)
    grad_sq = S.zero()
    for a in range(4):
        grad_sq = grad_sq + grad_u[a] * S.dd(a, u)
    s_tilde = curv_k.scalar * u * u + 6.0 * u * lap_u - 12.0 * grad_sq
    s_tilde_alt = curv_k.scalar * u * u + 6.0 * u * lap_u_frame - 12.0 * grad_sq
    lap_tau = laplacian(S, conn_k, tau, invg)
    lap_tau_frame = laplacian_orthonormal(S, conn_k, tau)
    return {
        "s_tilde": s_tilde,
        "s_tilde_alt": s_tilde_alt,
        "laplacian_tau": lap_tau,
        "laplacian_tau_alt": lap_tau_frame,
        "u": u,
    }


def laplacian_self_test(A: AdmissibleData, kahler: KahlerMetric, conn_k, grid, tol: float = 1e-8) -> VerificationReport:
    """Internal Laplacian checks on the central structure.

    The two Laplacian routes must agree, and Lap_K tau must equal the
    closed-form value e^{-tau} (1 + b^2/a^2)."""
    report = VerificationReport(suite="laplacian-self-test")
    S = kahler.structure
    tau = variable(A.kset, A.kset.names[A.tau_index])
    lap_tau = laplacian(S, conn_k, tau)
    lap_tau_frame = laplacian_orthonormal(S, conn_k, tau)
    report.add(
        "laplacian_routes_agree",
        max_abs_on_grid(lap_tau - lap_tau_frame, grid),
        tol,
    )
    a, b = A.constants.a, A.constants.b
    closed = exp(-tau) * (1.0 + (b * b) / (a * a))
    report.add(
        "laplacian_tau_closed_form",
        max_abs_on_grid(lap_tau - closed, grid),
        tol,
        source="derived",
    )
    return report


def liouville_residual(iota: ScalarField, c: float, x_index: int = 0, y_index: int = 1) -> ScalarField:
    """(d_x d_x + d_y d_y) log|iota| - c iota, with the two directions acting
    as plane partials of the given variable indices."""
    L = log_abs(iota)
    lap = L.partial(x_index).partial(x_index) + L.partial(y_index).partial(y_index)
    return lap - iota * float(c)


def _plane_laplacian_log_abs(S: FrameStructure, iota: ScalarField) -> ScalarField:
    """(d_x d_x + d_y d_y) log|iota| through the frame directions of S."""
    L = log_abs(iota)
    return S.dd(X, S.dd(X, L)) + S.dd(Y, S.dd(Y, L))


def liouville_fit(A: AdmissibleData, grid):
    """Least-squares constant c for  Lap_H log|iota| = c iota  on the grid.

    Returns (c, max residual).  A constant twist fits c = 0 exactly."""
    lap = _plane_laplacian_log_abs(A.structure, A.iota)
    lap_vals = np.array([lap.at(p) for p in grid])
    iota_vals = np.array([A.iota.at(p) for p in grid])
    denom = float(np.dot(iota_vals, iota_vals))
    c = float(np.dot(lap_vals, iota_vals) / denom) if denom > 0 else 0.0
    residual = float(np.max(np.abs(lap_vals - c * iota_vals)))
    return c, residual


@dataclass
class CentralReport:
    """Outcome of the central analysis on one structure."""

    central_curvature: ScalarField
    central_curvature_max: float
    q: Optional[float]
    s_tilde: ScalarField
    s_tilde_mean: float
    s_tilde_spread: float
    is_csc: bool
    pde_constant_c: Optional[float]
    pde_residual: float
    verdicts_agree: bool

    def to_dict(self) -> dict:
        return {
            "central_curvature_max": self.central_curvature_max,
            "q": self.q,
            "s_tilde_mean": self.s_tilde_mean,
            "s_tilde_spread": self.s_tilde_spread,
            "is_csc": self.is_csc,
            "pde_constant_c": self.pde_constant_c,
            "pde_residual": self.pde_residual,
            "verdicts_agree": self.verdicts_agree,
        }


def _is_constant_on_grid(field: ScalarField, grid, tol: float) -> bool:
    spread, mean = spread_on_grid(field, grid)
    return spread <= tol * (1.0 + abs(mean))


def csc_verdict(
    A: AdmissibleData,
    grid,
    kahler: Optional[KahlerMetric] = None,
    conn_k=None,
    curv_k: Optional[CurvatureTensor] = None,
    tol: float = 1e-7,
) -> CentralReport:
    """Constant-scalar-curvature verdict for the conformal metric.

    Decides CSC two independent ways: constancy of the computed conformal
    scalar curvature on the grid, and existence of a constant c fitting the
    twist equation; the verdicts must agree.
    """
    if A.case != CASE_CENTRAL:
        raise ValueError("csc_verdict applies to central-case data")
    if kahler is None:
        kahler = build_kahler(A)
    if conn_k is None:
        conn_k = koszul_connection(kahler.structure)
    if curv_k is None:
        curv_k = curvature(kahler.structure, conn_k)

    det_field = central_curvature(A, kahler, curv_k)
    cc_max = max_abs_on_grid(det_field, grid)

    parts = conformal_scalar(A, kahler, conn_k, curv_k)
    s_tilde = parts["s_tilde"]
    spread, mean = spread_on_grid(s_tilde, grid)
    s_constant = spread <= tol * (1.0 + abs(mean))

    c_fit, pde_res = liouville_fit(A, grid)
    pde_holds = pde_res <= tol

    iota_constant = _is_constant_on_grid(A.iota, grid, 1e-10)
    q = expected_q(A.constants) if iota_constant else None

    return CentralReport(
        central_curvature=det_field,
        central_curvature_max=cc_max,
        q=q,
        s_tilde=s_tilde,
        s_tilde_mean=mean,
        s_tilde_spread=spread,
        is_csc=s_constant,
        pde_constant_c=c_fit if pde_holds else None,
        pde_residual=pde_res,
        verdicts_agree=s_constant == pde_holds,
    )


def left_invariance_check(A: AdmissibleData, kahler: KahlerMetric, grid, tol: float = 1e-8):
    """For constant twist: the conformal metric is locally a left-invariant
    metric; checked through constancy of the bracket coefficients, constancy
    of the e^{-tau}-rescaled metric values on the frame, and the Jacobi
    identity of the resulting structure constants.

    Returns (report, structure_constant_table); the table is None when the
    twist is not constant (the check does not apply)."""
    report = VerificationReport(suite="left-invariance")
    S = A.structure
    if not _is_constant_on_grid(A.iota, grid, 1e-10):
        report.add("applicable", 0.0, 0.0, note="not applicable: twist is not constant on the grid")
        return report, None

    worst = 0.0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                spread, _ = spread_on_grid(S.C[a][b][c], grid)
                worst = max(worst, spread)
    report.add("brackets_constant", worst, tol)

    tau = variable(A.kset, A.kset.names[A.tau_index])
    scale = exp(-tau)
    worst = 0.0
    for a in range(4):
        for b in range(4):
            spread, _ = spread_on_grid(scale * kahler.g[a][b], grid)
            worst = max(worst, spread)
    report.add("conformal_metric_constant", worst, tol)

    base = grid[len(grid) // 2]
    table = {}
    cvals = [[[S.C[a][b][c].at(base) for c in range(4)] for b in range(4)] for a in range(4)]
    for a in range(4):
        for b in range(a + 1, 4):
            table[(S.frame_names[a], S.frame_names[b])] = list(cvals[a][b])
    worst = 0.0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for e in range(4):
                    total = 0.0
                    for d in range(4):
                        total += (
                            cvals[a][b][d] * cvals[d][c][e]
                            + cvals[b][c][d] * cvals[d][a][e]
                            + cvals[c][a][d] * cvals[d][b][e]
                        )
                    worst = max(worst, abs(total))
    report.add("structure_constants_jacobi", worst, tol)
    return report, table
