"""Frame structures and the Koszul connection engine.

A geometry here is presented without coordinates: n frame fields (n = 4 for
the spacetimes, n = 3 for warped-product fibers) with metric values
g(e_a, e_b), bracket expansions [e_a, e_b] = C_ab^c e_c, and a table of
frame derivatives of the independent variables.  Directional derivatives,
the Levi-Civita connection (via the Koszul formula, solved pointwise as an
n-by-n linear system against g), the curvature tensor, Ricci, scalar and
sectional curvatures all follow from this data alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fields import (
    CScalarField,
    Const,
    FieldError,
    KSet,
    LinearFieldSystem,
    ScalarField,
    _div,
    determinant,
)

__all__ = [
    "FrameStructure",
    "ConnectionTable",
    "CurvatureTensor",
    "FrameError",
    "grid_points",
    "grid_spec_string",
    "max_abs_on_grid",
    "spread_on_grid",
    "directional_derivative",
    "koszul_connection",
    "curvature",
    "sectional_curvature",
    "twist",
    "inverse_metric",
    "laplacian",
    "gradient",
    "consistency_suite",
]


class FrameError(FieldError):
    """A frame structure violates a structural precondition."""


def grid_points(kset: KSet, box: dict) -> list:
    """Cartesian evaluation grid from {name: (lo, hi, n)} specifications.

    Variables absent from ``box`` get the single sample 0.0.  An empty
    k-set yields the one empty point, so constant structures still get
    evaluated exactly once.
    """
    axes = []
    for name in kset.names:
        if name in box:
            lo, hi, n = box[name]
            axes.append([float(v) for v in np.linspace(lo, hi, int(n))])
        else:
            axes.append([0.0])
    return [tuple(p) for p in itertools.product(*axes)] if axes else [()]


def grid_spec_string(kset: KSet, box: dict) -> str:
    parts = []
    for name in kset.names:
        if name in box:
            lo, hi, n = box[name]
            parts.append("%s=%g:%g:%d" % (name, lo, hi, n))
        else:
            parts.append("%s=0" % name)
    return ",".join(parts) if parts else "(point)"


def max_abs_on_grid(field, grid) -> float:
    """Largest |value| of a real or complex field over the grid."""
    worst = 0.0
    for p in grid:
        v = abs(field.at(p))
        if v > worst:
            worst = v
    return worst


def spread_on_grid(field, grid):
    """(max - min, mean) of a real field over the grid."""
    vals = [field.at(p) for p in grid]
    return max(vals) - min(vals), sum(vals) / len(vals)


class FrameStructure:
    """Metric, bracket and derivative data of an n-frame over a k-set.

    ``g[a][b]`` are the metric values g(e_a, e_b), ``C[a][b][c]`` the
    coefficients in [e_a, e_b] = C_ab^c e_c, and ``D[a][i]`` the directional
    derivatives d_{e_a} u_i of the k-set variables.
    """

    def __init__(self, kset: KSet, frame_names, g, C, D):
        self.kset = kset
        self.frame_names = tuple(frame_names)
        n = len(self.frame_names)
        if len(set(self.frame_names)) != n:
            raise FrameError("duplicate frame names: %r" % (self.frame_names,))
        if n not in (3, 4):
            raise FrameError("frame structures support 3 or 4 frame fields, got %d" % n)
        self.g = [list(row) for row in g]
        self.C = [[list(col) for col in row] for row in C]
        self.D = [list(row) for row in D]
        if len(self.g) != n or any(len(row) != n for row in self.g):
            raise FrameError("metric table must be %d x %d" % (n, n))
        if len(self.C) != n or any(len(row) != n for row in self.C) or any(
            len(col) != n for row in self.C for col in row
        ):
            raise FrameError("bracket table must be %d x %d x %d" % (n, n, n))
        if len(self.D) != n or any(len(row) != kset.size for row in self.D):
            raise FrameError("derivative table must be %d x %d" % (n, kset.size))

    @property
    def n(self) -> int:
        return len(self.frame_names)

    def index(self, name: str) -> int:
        try:
            return self.frame_names.index(name)
        except ValueError:
            raise FrameError("unknown frame name %r" % name) from None

    def dd(self, a: int, field: ScalarField) -> ScalarField:
        """Directional derivative d_{e_a} of a field, via the D table."""
        if field.is_constant:
            return Const(self.kset, 0.0)
        out = Const(self.kset, 0.0)
        for i in range(self.kset.size):
            out = out + field.partial(i) * self.D[a][i]
        return out

    def g_of_bracket(self, u: int, v: int, w: int) -> ScalarField:
        """g(e_u, [e_v, e_w])."""
        out = Const(self.kset, 0.0)
        for e in range(self.n):
            out = out + self.C[v][w][e] * self.g[u][e]
        return out

    def metric_matrix(self, point) -> np.ndarray:
        return np.array([[f.at(point) for f in row] for row in self.g])

    def with_metric(self, new_g) -> "FrameStructure":
        """Same frame, brackets and derivatives under a different metric."""
        return FrameStructure(self.kset, self.frame_names, new_g, self.C, self.D)

    def zero(self) -> ScalarField:
        return Const(self.kset, 0.0)


def directional_derivative(S: FrameStructure, a: int, field):
    """d_{e_a} of a real or complex field over S's k-set."""
    if isinstance(field, CScalarField):
        return CScalarField(S.dd(a, field.re), S.dd(a, field.im))
    return S.dd(a, field)


@dataclass
class ConnectionTable:
    """Frame coefficients of a connection: nabla_{e_a} e_b = Gamma_ab^c e_c."""

    structure: FrameStructure
    gamma: list  # gamma[a][b][c] ScalarField

    def coeff(self, a, b, c) -> ScalarField:
        return self.gamma[a][b][c]

    def torsion_residual(self, grid) -> float:
        """max |Gamma_ab^c - Gamma_ba^c - C_ab^c| over the grid."""
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(a + 1, S.n):
                for c in range(S.n):
                    f = self.gamma[a][b][c] - self.gamma[b][a][c] - S.C[a][b][c]
                    worst = max(worst, max_abs_on_grid(f, grid))
        return worst

    def compatibility_residual(self, grid) -> float:
        """max |d_a g_bc - Gamma_ab^d g_dc - Gamma_ac^d g_bd| over the grid."""
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(S.n):
                for c in range(b, S.n):
                    f = S.dd(a, S.g[b][c])
                    for d in range(S.n):
                        f = f - self.gamma[a][b][d] * S.g[d][c] - self.gamma[a][c][d] * S.g[b][d]
                    worst = max(worst, max_abs_on_grid(f, grid))
        return worst


def koszul_connection(S: FrameStructure, min_abs_det: float = 1e-10) -> ConnectionTable:
    """Levi-Civita connection coefficients from the Koszul formula.

    For each frame pair (a, b) the coefficients solve the pointwise linear
    system  g_dc Gamma_ab^d = g(nabla_a e_b, e_c), with the right-hand side
    assembled from metric derivatives and bracket terms.
    """
    n = S.n
    gamma = []
    for a in range(n):
        row = []
        for b in range(n):
            rhs = []
            for c in range(n):
                expr = (
                    S.dd(a, S.g[b][c])
                    + S.dd(b, S.g[a][c])
                    - S.dd(c, S.g[a][b])
                    - S.g_of_bracket(a, b, c)
                    - S.g_of_bracket(b, a, c)
                    + S.g_of_bracket(c, a, b)
                ) * 0.5
                rhs.append(expr)
            matrix = [[S.g[c][d] for d in range(n)] for c in range(n)]
            row.append(LinearFieldSystem(matrix, rhs, min_abs_det).components())
        gamma.append(row)
    return ConnectionTable(S, gamma)


class CurvatureTensor:
    """R(e_a, e_b) e_c = R_abc^d e_d, with Ricci and scalar contractions.

    Convention: R(X, Y) Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z -
    nabla_[X,Y] Z and Ric(X, Y) = trace of Z -> R(Z, X) Y, so the round
    sphere has positive Ricci.
    """

    def __init__(self, structure: FrameStructure, R, ricci, scalar):
        self.structure = structure
        self.R = R
        self.ricci = ricci
        self.scalar = scalar
        self._lowered = {}

    def lowered(self, a, b, c, d) -> ScalarField:
        """R_abcd = g(R(e_a, e_b) e_c, e_d)."""
        key = (a, b, c, d)
        f = self._lowered.get(key)
        if f is None:
            S = self.structure
            f = S.zero()
            for e in range(S.n):
                f = f + self.R[a][b][c][e] * S.g[e][d]
            self._lowered[key] = f
        return f

    def max_component(self, grid) -> float:
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(a + 1, S.n):
                for c in range(S.n):
                    for d in range(S.n):
                        worst = max(worst, max_abs_on_grid(self.R[a][b][c][d], grid))
        return worst

    def pair_symmetry_residual(self, grid) -> float:
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(a + 1, S.n):
                for c in range(S.n):
                    for d in range(c + 1, S.n):
                        f = self.lowered(a, b, c, d) - self.lowered(c, d, a, b)
                        worst = max(worst, max_abs_on_grid(f, grid))
        return worst

    def first_bianchi_residual(self, grid) -> float:
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(S.n):
                for c in range(S.n):
                    for d in range(S.n):
                        f = self.lowered(a, b, c, d) + self.lowered(b, c, a, d) + self.lowered(c, a, b, d)
                        worst = max(worst, max_abs_on_grid(f, grid))
        return worst

    def ricci_symmetry_residual(self, grid) -> float:
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(a + 1, S.n):
                worst = max(worst, max_abs_on_grid(self.ricci[a][b] - self.ricci[b][a], grid))
        return worst

    def max_ricci(self, grid) -> float:
        S = self.structure
        worst = 0.0
        for a in range(S.n):
            for b in range(S.n):
                worst = max(worst, max_abs_on_grid(self.ricci[a][b], grid))
        return worst


def curvature(S: FrameStructure, conn: ConnectionTable) -> CurvatureTensor:
    """Full curvature tensor of a connection table, with contractions."""
    n = S.n
    zero = S.zero()
    gamma = conn.gamma
    R = [[[[zero for _ in range(n)] for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(n):
                for e in range(n):
                    f = S.dd(a, gamma[b][c][e]) - S.dd(b, gamma[a][c][e])
                    for d in range(n):
                        f = f + gamma[b][c][d] * gamma[a][d][e]
                        f = f - gamma[a][c][d] * gamma[b][d][e]
                        f = f - S.C[a][b][d] * gamma[d][c][e]
                    R[a][b][c][e] = f
                    R[b][a][c][e] = -f
    ricci = [[zero for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            f = zero
            for c in range(n):
                f = f + R[c][a][b][c]
            ricci[a][b] = f
    invg = inverse_metric(S)
    scalar = zero
    for a in range(n):
        for b in range(n):
            scalar = scalar + invg[a][b] * ricci[a][b]
    return CurvatureTensor(S, R, ricci, scalar)


def inverse_metric(S: FrameStructure, min_abs_det: float = 1e-10):
    """Inverse metric components g^{ab} as fields (pointwise solves)."""
    n = S.n
    cols = []
    for j in range(n):
        e_j = [Const(S.kset, 1.0 if i == j else 0.0) for i in range(n)]
        cols.append(LinearFieldSystem(S.g, e_j, min_abs_det).components())
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def sectional_curvature(S: FrameStructure, curv: CurvatureTensor, a: int, b: int) -> ScalarField:
    """K(e_a, e_b) = R_abba / (g_aa g_bb - g_ab^2); degenerate planes raise."""
    num = curv.lowered(a, b, b, a)
    den = S.g[a][a] * S.g[b][b] - S.g[a][b] * S.g[a][b]
    return _div(num, den, eps=1e-12, label="sectional-curvature plane (%d,%d)" % (a, b))


def twist(S: FrameStructure, k: int = 0, x: int = 2, y: int = 3, grid=None, tol: float = 1e-9) -> ScalarField:
    """Twist of e_k with respect to the orthonormal pair (e_x, e_y):
    g(e_k, [e_x, e_y]).  When a grid is given, orthonormality of the pair is
    verified first."""
    if grid is not None:
        bad = max(
            max_abs_on_grid(S.g[x][x] - 1.0, grid),
            max_abs_on_grid(S.g[y][y] - 1.0, grid),
            max_abs_on_grid(S.g[x][y], grid),
        )
        if bad > tol:
            raise FrameError("frame pair (%d, %d) is not g-orthonormal (residual %.3e)" % (x, y, bad))
    return S.g_of_bracket(k, x, y)


def gradient(S: FrameStructure, F: ScalarField, invg=None):
    """Frame components of the metric gradient of F: grad F = (g^{ab} d_b F) e_a."""
    if invg is None:
        invg = inverse_metric(S)
    n = S.n
    out = []
    for a in range(n):
        f = S.zero()
        for b in range(n):
            f = f + invg[a][b] * S.dd(b, F)
        out.append(f)
    return out


def laplacian(S: FrameStructure, conn: ConnectionTable, F: ScalarField, invg=None) -> ScalarField:
    """Metric Laplacian: g^{ab} (d_a d_b F - Gamma_ab^c d_c F)."""
    if invg is None:
        invg = inverse_metric(S)
    n = S.n
    out = S.zero()
    dF = [S.dd(c, F) for c in range(n)]
    for a in range(n):
        for b in range(n):
            hess = S.dd(a, dF[b])
            for c in range(n):
                hess = hess - conn.gamma[a][b][c] * dF[c]
            out = out + invg[a][b] * hess
    return out


def laplacian_orthonormal(S: FrameStructure, conn: ConnectionTable, F: ScalarField) -> ScalarField:
    """Laplacian as the frame sum over the normalized frame e_a/|e_a|.

    Requires a g-orthogonal frame with positive norms (the induced Kahler
    case).  With s_a = sqrt(g_aa):
      d_e d_e F      = (1/s) d_a((1/s) d_a F)
      dF(nabla_e e)  = (1/s) d_a(1/s) d_a F + (1/s^2) Gamma_aa^c d_c F
    """
    from .fields import sqrt as _sqrt

    n = S.n
    out = S.zero()
    for a in range(n):
        s = _sqrt(S.g[a][a])
        inv_s = _div(Const(S.kset, 1.0), s, label="frame norm")
        first = inv_s * S.dd(a, inv_s * S.dd(a, F))
        correction = inv_s * S.dd(a, inv_s) * S.dd(a, F)
        for c in range(n):
            correction = correction + _div(conn.gamma[a][a][c], S.g[a][a], label="frame norm") * S.dd(c, F)
        out = out + first - correction
    return out


def jacobi_residual_fields(S: FrameStructure):
    """Jacobi identity for the bracket table, including the derivative terms:
    sum over cyclic (a,b,c) of  C_ab^d C_dc^e - d_c C_ab^e  must vanish."""
    n = S.n
    out = []
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for e in range(n):
                    f = S.zero()
                    for (u, v, w) in ((a, b, c), (b, c, a), (c, a, b)):
                        term = -S.dd(w, S.C[u][v][e])
                        for d in range(n):
                            term = term + S.C[u][v][d] * S.C[d][w][e]
                        f = f + term
                    out.append(f)
    return out


def frame_derivative_consistency_fields(S: FrameStructure):
    """d_a d_b u_i - d_b d_a u_i - d_[a,b] u_i for all pairs and variables."""
    n = S.n
    out = []
    for a in range(n):
        for b in range(a + 1, n):
            for i in range(S.kset.size):
                f = S.dd(a, S.D[b][i]) - S.dd(b, S.D[a][i])
                for c in range(n):
                    f = f - S.C[a][b][c] * S.D[c][i]
                out.append(f)
    return out


def consistency_suite(S: FrameStructure, grid, tol: float = 1e-8, det_floor: float = 1e-10):
    """Structural invariants of a frame structure, as a verification report:
    metric symmetry, bracket antisymmetry, nondegeneracy, Jacobi identity,
    derivative-table consistency, and torsion-freeness plus metric
    compatibility of the Koszul connection."""
    from .reporting import VerificationReport

    report = VerificationReport(suite="frame-consistency")
    n = S.n

    worst = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            worst = max(worst, max_abs_on_grid(S.g[a][b] - S.g[b][a], grid))
    report.add("metric_symmetric", worst, tol)

    worst = 0.0
    for a in range(n):
        for b in range(a, n):
            for c in range(n):
                worst = max(worst, max_abs_on_grid(S.C[a][b][c] + S.C[b][a][c], grid))
    report.add("bracket_antisymmetric", worst, tol)

    det_field = determinant(S.g)
    min_det = min(abs(det_field.at(p)) for p in grid)
    report.add(
        "metric_nondegenerate",
        0.0 if min_det > det_floor else det_floor - min_det,
        0.0,
        note="min |det g| = %.3e" % min_det,
    )

    worst = 0.0
    for f in jacobi_residual_fields(S):
        worst = max(worst, max_abs_on_grid(f, grid))
    report.add("jacobi_identity", worst, tol)

    worst = 0.0
    for f in frame_derivative_consistency_fields(S):
        worst = max(worst, max_abs_on_grid(f, grid))
    report.add("frame_derivative_consistency", worst, tol)

    conn = koszul_connection(S)
    report.add("torsion_free", conn.torsion_residual(grid), tol)
    report.add("metric_compatible", conn.compatibility_residual(grid), tol)
    return report
