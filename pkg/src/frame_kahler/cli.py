"""Command-line driver: verification suites, Einstein families, catalog.

Commands
--------
verify   Run the central or warped verification suite on a catalog entry or
         a user structure document; write a JSON report (optionally a CSV of
         curve data).  Exit 0 when every check passes, 1 on a verification
         failure, 2 on usage or document errors.
ke       Evaluate an Einstein family (ODE residual, region inequalities,
         completeness) and emit the (tau, w, f, c, residual, s) curve.
catalog  List the built-in structures or show one entry.

The environment variable FRAME_KAHLER_THREADS (default 1) caps the worker
threads used to pre-evaluate fields over the grid; results are identical for
any setting.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import catalog as catalog_mod
from .catalog import CatalogEntry, SchemaError, coordinate_crosscheck, load, parse_document
from .central import (
    central_curvature,
    conformal_scalar,
    conformal_scalar_closed_form,
    csc_verdict,
    expected_q,
    laplacian_self_test,
    left_invariance_check,
    ricci_endomorphism_eigenvalues,
)
from .fields import CScalarField, DomainError, FieldError, exp, log_abs, variable
from .frames import (
    consistency_suite,
    curvature,
    grid_points,
    grid_spec_string,
    koszul_connection,
    max_abs_on_grid,
    sectional_curvature,
)
from .kahler import (
    CASE_CENTRAL,
    CASE_WARPED,
    K,
    T,
    X,
    Y,
    build_kahler,
    check_admissible,
    cross_route_ricci_residual,
    exterior_d_two_form,
    gamma_forms,
    j_image,
    kahler_form_closed,
    ricci_form,
    ricci_form_imag_residual,
    ricci_form_real,
)
from .reporting import VerificationReport
from .warped import (
    WarpedFamily,
    adaptive_simpson,
    completeness,
    einstein_verdict,
    family_alpha_negative,
    family_alpha_zero,
    family_implicit_tan,
    fiber_consistency,
    ke_ode_residual,
    quotient_gauss_check,
    solve_implicit_w,
)

TOL_TIGHT = 1e-9
TOL_FRAME = 1e-8
TOL_CROSS = 1e-7
TOL_CHART = 1e-6


def thread_cap() -> int:
    raw = os.environ.get("FRAME_KAHLER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _prewarm(fields, grid):
    """Evaluate shared fields over the grid, optionally in parallel; the
    per-field caches make later checks cheap and results identical."""
    threads = thread_cap()
    if threads <= 1:
        for f in fields:
            for p in grid:
                f.at(p)
        return

    def work(f):
        for p in grid:
            f.at(p)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, fields))


# ---------------------------------------------------------------------------
# suite runners


def _gamma_closed_form_residual_central(A, gf, grid):
    """Engine gamma forms against the constant-coefficient displays of the
    commuting (central) case."""
    S = A.structure
    a, b = A.constants.a, A.constants.b
    alpha, beta = A.constants.alpha, A.constants.beta
    fp = A.f_prime()
    fpp = fp.partial(A.tau_index)
    h1 = fpp / (2.0 * fp)  # f''/2f'
    h2 = fp / (2.0 * A.f)  # f'/2f
    zero = S.zero()
    czero = CScalarField(zero, zero)
    i_a = A.iota / (2.0 * a * a)
    dxi = S.dd(X, A.iota)
    dyi = S.dd(Y, A.iota)
    inv2i = 1.0 / (2.0 * A.iota)
    expected = {
        (0, 0): [h1 * complex(a, -b), h1 * complex(b, a), czero, czero],
        (0, 1): [czero, czero, h2 * complex(a, -b), h2 * complex(b, a)],
        (1, 0): [czero, czero, i_a * complex(a, b), i_a * complex(b, -a)],
        (1, 1): [
            h2 * complex(a, -b) + complex(0.0, alpha),
            h2 * complex(b, a) + complex(0.0, beta),
            CScalarField(inv2i * dxi, -(inv2i * dyi)),
            CScalarField(inv2i * dyi, inv2i * dxi),
        ],
    }
    worst = 0.0
    for (i, j), coeffs in expected.items():
        for u in range(4):
            worst = max(worst, max_abs_on_grid(gf.forms[i][j](u) - coeffs[u], grid))
    return worst


def _gamma_closed_form_residual_warped(A, kahler, gf, grid):
    """Engine gamma forms against the tau-dependent displays of the warped
    case."""
    S = A.structure
    ti = A.tau_index
    f, w = A.f, A.w
    fp, wp = f.partial(ti), w.partial(ti)
    c = kahler.g[K][K]
    cp = c.partial(ti)
    halfc = cp / (2.0 * c)
    wow = wp / w
    h = fp / (2.0 * f) + wp / (2.0 * w)
    zero = S.zero()
    czero = CScalarField(zero, zero)
    logi = log_abs(A.iota_bar)
    dx_log = S.dd(X, logi)
    dy_log = S.dd(Y, logi)
    mix = (fp * A.iota + f * wp * A.iota_bar / (w * w)) / (2.0 * c)
    expected = {
        (0, 0): [
            CScalarField(halfc, halfc + wow),
            CScalarField(-halfc, halfc + wow),
            czero,
            czero,
        ],
        (0, 1): [czero, czero, CScalarField(h, h), CScalarField(-h, h)],
        (1, 0): [czero, czero, CScalarField(mix, -mix), CScalarField(-mix, -mix)],
        (1, 1): [
            CScalarField(h - wow, h + A.constants.alpha / w),
            CScalarField(-h + wow, h),
            CScalarField(0.5 * dx_log, -0.5 * dy_log),
            CScalarField(0.5 * dy_log, 0.5 * dx_log),
        ],
    }
    worst = 0.0
    for (i, j), coeffs in expected.items():
        for u in range(4):
            worst = max(worst, max_abs_on_grid(gf.forms[i][j](u) - coeffs[u], grid))
    return worst


def _shared_kahler_checks(entry: CatalogEntry, grid, report: VerificationReport):
    """Checks common to both cases; returns the built objects for reuse, or
    None when the structural gates already failed (curvature analysis of
    inconsistent frame data would be meaningless)."""
    A = entry.data
    report.extend(consistency_suite(A.structure, grid))
    report.extend(check_admissible(A, grid))
    if not report.passed:
        report.add("structural_gates", 1.0, 0.0, passed=False,
                   note="frame data inconsistent; curvature analysis skipped")
        return None

    kahler = build_kahler(A)
    mask = kahler.region_mask(grid)
    report.add(
        "region_nonempty",
        0.0 if all(mask) else 1.0,
        0.0,
        passed=all(mask),
        note="%d of %d grid points inside the region" % (sum(mask), len(grid)),
    )
    worst = 0.0
    for p in grid:
        m = np.array([[fld.at(p) for fld in row] for row in kahler.g])
        eig = np.linalg.eigvalsh(m)
        worst = max(worst, max(0.0, -float(eig[0])))
    report.add("kahler_positive_definite", worst, 0.0, passed=worst == 0.0)

    _prewarm([fld for row in kahler.g for fld in row], grid)
    conn_k = koszul_connection(kahler.structure)
    report.add("kahler_torsion_free", conn_k.torsion_residual(grid), TOL_FRAME)
    report.add("kahler_metric_compatible", conn_k.compatibility_residual(grid), TOL_FRAME)

    gf = gamma_forms(A, kahler, conn_k)
    report.add("gamma_reconstruction", gf.reconstruction_residual(grid), TOL_TIGHT)

    rho_c = ricci_form(A, gf)
    report.add("ricci_form_real", ricci_form_imag_residual(rho_c, grid), TOL_TIGHT)
    rho = ricci_form_real(rho_c)

    curv_k = curvature(kahler.structure, conn_k)
    report.add("ricci_forms_vs_tensor", cross_route_ricci_residual(rho, curv_k, grid), TOL_CROSS)
    report.add("curvature_pair_symmetry", curv_k.pair_symmetry_residual(grid), TOL_CROSS)
    report.add("curvature_first_bianchi", curv_k.first_bianchi_residual(grid), TOL_CROSS)
    report.add("ricci_symmetric", curv_k.ricci_symmetry_residual(grid), TOL_CROSS)

    report.extend(kahler_form_closed(A, kahler, grid, TOL_FRAME))
    d_rho = exterior_d_two_form(A.structure, rho)
    report.add("d_rho", max(max_abs_on_grid(f, grid) for f in d_rho.values()), TOL_CROSS)

    worst = 0.0
    for u in range(4):
        for v in range(4):
            ju, su = j_image(u)
            jv, sv = j_image(v)
            worst = max(worst, max_abs_on_grid(rho(ju, jv) * (su * sv) - rho(u, v), grid))
    report.add("rho_J_invariant", worst, TOL_FRAME)

    return kahler, conn_k, gf, rho, curv_k


def run_central_suite(entry: CatalogEntry, grid=None) -> tuple:
    """Full verification of a central-case entry; returns (report, curves)."""
    A = entry.data
    if A.case != CASE_CENTRAL:
        raise ValueError("entry %r is not a central-case structure" % entry.entry_id)
    grid = grid if grid is not None else entry.grid()
    report = VerificationReport(
        suite="central:%s" % entry.entry_id,
        grid_spec=grid_spec_string(A.kset, entry.grid_box),
    )
    shared = _shared_kahler_checks(entry, grid, report)
    if shared is None:
        return report, None
    kahler, conn_k, gf, rho, curv_k = shared
    S = A.structure
    a, b = A.constants.a, A.constants.b

    report.add("gamma_closed_forms", _gamma_closed_form_residual_central(A, gf, grid), TOL_TIGHT,
               source="reported")

    # gK(k,k) = gK(T,T) = a^2 f'
    fp = A.f_prime()
    worst = max(
        max_abs_on_grid(kahler.g[K][K] - (a * a) * fp, grid),
        max_abs_on_grid(kahler.g[T][T] - (a * a) * fp, grid),
    )
    report.add("kahler_vertical_value", worst, TOL_FRAME, source="reported")

    # twist-like values of the induced metric: gK(k,[x,y]) = -iota b f',
    # gK(T,[x,y]) = iota a f'
    SK = kahler.structure
    worst = max_abs_on_grid(SK.g_of_bracket(K, X, Y) - (-b) * A.iota * fp, grid)
    report.add("induced_twist_k", worst, TOL_FRAME, source="derived")
    worst = max_abs_on_grid(SK.g_of_bracket(T, X, Y) - a * A.iota * fp, grid)
    report.add("induced_twist_T", worst, TOL_FRAME, source="derived")

    # rho vanishes on the vertical field pairs and on mixed pairs
    worst_v = max_abs_on_grid(rho(K, T), grid)
    report.add("rho_vanishes_on_vertical", worst_v, TOL_TIGHT, source="reported")
    worst_m = max(
        max_abs_on_grid(rho(K, X), grid),
        max_abs_on_grid(rho(K, Y), grid),
        max_abs_on_grid(rho(T, X), grid),
        max_abs_on_grid(rho(T, Y), grid),
    )
    report.add("rho_vanishes_mixed", worst_m, TOL_TIGHT, source="reported")

    # rho(x,y) closed form
    logi = log_abs(A.iota)
    lap_h = S.dd(X, S.dd(X, logi)) + S.dd(Y, S.dd(Y, logi))
    factor = (a * a + b * b - b * A.constants.alpha + a * A.constants.beta) / (a * a)
    rho_xy_expected = A.iota * factor - 0.5 * lap_h
    report.add("rho_xy_closed_form", max_abs_on_grid(rho(X, Y) - rho_xy_expected, grid), TOL_CROSS,
               source="reported")

    # Ricci endomorphism: vertical kernel and central curvature
    worst = 0.0
    for u in (K, T):
        for v in range(4):
            worst = max(worst, max_abs_on_grid(curv_k.ricci[u][v], grid))
    report.add("ricci_vertical_kernel", worst, TOL_FRAME, source="reported")
    det_field = central_curvature(A, kahler, curv_k)
    report.add("central_curvature_zero", max_abs_on_grid(det_field, grid), TOL_FRAME,
               source="reported")

    verdict = csc_verdict(A, grid, kahler, conn_k, curv_k)
    report.add(
        "csc_verdicts_agree",
        0.0 if verdict.verdicts_agree else 1.0,
        0.0,
        passed=verdict.verdicts_agree,
        note="s~ spread %.3e; twist-equation residual %.3e" % (verdict.s_tilde_spread, verdict.pde_residual),
    )
    report.add(
        "central_summary",
        0.0,
        0.0,
        passed=True,
        note=json.dumps(verdict.to_dict(), sort_keys=True),
    )

    iota_constant = verdict.q is not None
    tau = variable(A.kset, A.kset.names[A.tau_index])
    if iota_constant:
        q = expected_q(A.constants)
        qe = q * exp(-tau)
        worst = 0.0
        for u in (X, Y):
            worst = max(worst, max_abs_on_grid(curv_k.ricci[u][u] - qe * kahler.g[u][u], grid))
        report.add("ricci_horizontal_eigenvalue", worst, TOL_CROSS, source="derived",
                   note="q = %.6g" % q)
        report.add("scalar_curvature_2q", max_abs_on_grid(curv_k.scalar - 2.0 * qe, grid),
                   TOL_FRAME, source="reported")
        worst = 0.0
        for p in grid:
            lam_vals = ricci_endomorphism_eigenvalues(kahler, curv_k, p)
            qv = q * math.exp(-p[A.tau_index])
            expected_vals = np.sort(np.array([0.0, 0.0, qv, qv]))
            worst = max(worst, float(np.max(np.abs(lam_vals - expected_vals))))
        report.add("ricci_eigenvalues", worst, TOL_CROSS, source="derived")

        closed = conformal_scalar_closed_form(A.constants)
        parts = conformal_scalar(A, kahler, conn_k, curv_k)
        report.add("conformal_scalar_routes", max_abs_on_grid(parts["s_tilde"] - closed, grid),
                   TOL_CROSS, source="derived", note="closed form %.6g" % closed)
        report.add("conformal_scalar_two_laplacians",
                   max_abs_on_grid(parts["s_tilde"] - parts["s_tilde_alt"], grid), TOL_CROSS)

        li_report, _ = left_invariance_check(A, kahler, grid)
        report.extend(li_report, prefix="left_invariance.")

    report.extend(laplacian_self_test(A, kahler, conn_k, grid))

    # expectations recorded on the entry
    exp_tw = entry.expected.get("twist")
    if exp_tw is not None:
        report.add("expected_twist", max_abs_on_grid(A.iota - exp_tw.value, grid), TOL_FRAME,
                   source=exp_tw.source)
    exp_ric = entry.expected.get("ric_xx")
    if exp_ric is not None:
        report.add("expected_ric_xx", max_abs_on_grid(curv_k.ricci[X][X] - exp_ric.value, grid),
                   TOL_CROSS, source=exp_ric.source)
    exp_q = entry.expected.get("q")
    if exp_q is not None and verdict.q is not None:
        report.add("expected_q", abs(verdict.q - exp_q.value), TOL_FRAME, source=exp_q.source)
    exp_st = entry.expected.get("s_tilde")
    if exp_st is not None:
        report.add("expected_s_tilde", abs(verdict.s_tilde_mean - exp_st.value), TOL_CROSS,
                   source=exp_st.source, note="spread %.3e" % verdict.s_tilde_spread)
    exp_csc = entry.expected.get("csc")
    if exp_csc is not None:
        report.add("expected_csc", 0.0 if verdict.is_csc == exp_csc.value else 1.0, 0.0,
                   passed=verdict.is_csc == exp_csc.value, source=exp_csc.source)
    if entry.expected.get("ricci_flat") is not None:
        report.add("expected_ricci_flat", curv_k.max_ricci(grid), TOL_FRAME,
                   source=entry.expected["ricci_flat"].source)
    if entry.expected.get("flat") is not None:
        report.add("expected_flat", curv_k.max_component(grid), TOL_FRAME,
                   source=entry.expected["flat"].source)

    if entry.chart is not None:
        report.extend(coordinate_crosscheck(entry), prefix="chart.")

    curves = _central_curves(entry, grid, verdict, curv_k)
    return report, curves


def _central_curves(entry, grid, verdict, curv_k):
    header = list(entry.data.kset.names) + ["s_tilde", "s_K", "central_curvature"]
    rows = []
    for p in grid:
        rows.append(
            list(p)
            + [
                verdict.s_tilde.at(p),
                curv_k.scalar.at(p),
                verdict.central_curvature.at(p),
            ]
        )
    return header, rows


def run_ke_suite(entry: CatalogEntry, grid=None) -> tuple:
    """Full verification of a warped-case entry; returns (report, curves)."""
    A = entry.data
    if A.case != CASE_WARPED:
        raise ValueError("entry %r is not a warped-case structure" % entry.entry_id)
    grid = grid if grid is not None else entry.grid()
    report = VerificationReport(
        suite="ke:%s" % entry.entry_id,
        grid_spec=grid_spec_string(A.kset, entry.grid_box),
    )
    fam, fiber = entry.family, entry.fiber
    fiber_grid = grid_points(fiber.structure.kset, entry.grid_box)
    report.extend(fiber_consistency(fiber, fiber_grid), prefix="fiber.")

    shared = _shared_kahler_checks(entry, grid, report)
    if shared is None:
        return report, None
    kahler, conn_k, gf, rho, curv_k = shared

    report.add("gamma_closed_forms", _gamma_closed_form_residual_warped(A, kahler, gf, grid),
               TOL_TIGHT, source="reported")

    lam = fam.lam
    ev = einstein_verdict(A, lam, grid, fam=fam, fiber=fiber, fiber_grid=fiber_grid, C=fam.C)
    report.extend(ev, prefix="einstein.")

    # region inequalities in the warped reduction: f > 0 and (fw)' > 0
    tau_grid = sorted({(p[0],) for p in grid})
    fw = fam.f * fam.w
    fwp = fw.partial(0)
    min_f = min(fam.f.at(p) for p in tau_grid)
    min_fwp = min(fwp.at(p) for p in tau_grid)
    report.add("region_f_positive", max(0.0, -min_f), 0.0, passed=min_f > 0.0,
               note="min f = %.6g" % min_f)
    report.add("region_fw_increasing", max(0.0, -min_fwp), 0.0, passed=min_fwp > 0.0,
               note="min (fw)' = %.6g" % min_fwp)

    report.extend(quotient_gauss_check(fiber, lam, fam.C, fiber_grid), prefix="fiber.")

    exp_c = entry.expected.get("c_constant")
    if exp_c is not None:
        c_field = fam.c_field()
        report.add("expected_c_constant", max_abs_on_grid(c_field - exp_c.value, tau_grid),
                   TOL_TIGHT, source=exp_c.source)
    exp_kt = entry.expected.get("sectional_kT")
    exp_xk = entry.expected.get("sectional_xk")
    if exp_kt is not None or exp_xk is not None:
        if exp_kt is not None:
            K_kT = sectional_curvature(kahler.structure, curv_k, K, T)
            report.add("expected_sectional_kT", max_abs_on_grid(K_kT - exp_kt.value, grid),
                       TOL_FRAME, source=exp_kt.source)
        if exp_xk is not None:
            K_xk = sectional_curvature(kahler.structure, curv_k, X, K)
            report.add("expected_sectional_xk", max_abs_on_grid(K_xk - exp_xk.value, grid),
                       TOL_FRAME, source=exp_xk.source)
        if exp_kt is not None and exp_xk is not None:
            gap = abs(exp_kt.value - exp_xk.value)
            report.add("sectional_values_differ", 0.0, 0.0, passed=gap > 1e-6,
                       note="|K(k,T) - K(x,k)| = %.6g" % gap)
    if entry.expected.get("ricci_flat") is not None:
        report.add("expected_ricci_flat", curv_k.max_ricci(grid), TOL_CROSS,
                   source=entry.expected["ricci_flat"].source)
    if entry.expected.get("flat") is not None:
        report.add("expected_flat", curv_k.max_component(grid), TOL_CROSS,
                   source=entry.expected["flat"].source)

    exp_x0 = entry.expected.get("x_at_tau0")
    if exp_x0 is not None:
        tau0 = entry.expected["tau0"].value
        x0 = solve_implicit_w(tau0, exp_x0.value)
        report.add("implicit_root_at_tau0", abs(x0 - exp_x0.value), 1e-12, source=exp_x0.source)
    exp_sec = entry.expected.get("sectional_xy_nonzero")
    if exp_sec is not None:
        tau0 = entry.expected["tau0"].value
        K_xy = sectional_curvature(kahler.structure, curv_k, X, Y)
        point = (tau0,) + (0.0,) * (A.kset.size - 1)
        value = K_xy.at(point)
        w0 = A.w.at(point)
        wp0 = A.w.partial(0).at(point)
        magnitude = abs((2.0 / w0) * (wp0 - 1.0))
        report.add("sectional_xy_magnitude", abs(abs(value) - magnitude), TOL_CROSS,
                   source=exp_sec.source, note="K(x,y) = %.6g at tau0" % value)
        report.add("sectional_xy_nonzero", 0.0, 0.0, passed=abs(value) > 0.1,
                   note="|K(x,y)| = %.6g > 0.1" % abs(value))

    exp_complete = entry.expected.get("complete")
    if exp_complete is not None:
        cv = completeness(fam)
        report.add(
            "completeness_verdict",
            0.0 if (cv.verdict == "complete") == exp_complete.value else 1.0,
            0.0,
            passed=(cv.verdict == "complete") == exp_complete.value,
            source=exp_complete.source,
            note="s extends to (%.3g, %.3g)" % cv.s_range,
        )

    curves = _ke_curves(tau_grid, fam, A.constants.alpha)
    return report, curves


def _ke_curves(tau_grid, fam: WarpedFamily, alpha: float):
    header = ["tau", "w", "f", "c", "ke_residual", "s"]
    ode = ke_ode_residual(fam, alpha)
    c_field = fam.c_field()

    def integrand(t):
        c = c_field.at((t,))
        return math.sqrt(max(c, 0.0) * 0.5)

    rows = []
    s_val = 0.0
    prev = None
    for p in tau_grid:
        t = p[0]
        if prev is not None:
            s_val += adaptive_simpson(integrand, prev, t, 1e-9)
        prev = t
        rows.append([t, fam.w.at(p), fam.f.at(p), c_field.at(p), ode.at(p), s_val])
    return header, rows


def run_suite(entry: CatalogEntry, suite: str, grid=None) -> tuple:
    if suite == "all":
        suite = "central" if entry.case == CASE_CENTRAL else "ke"
    if suite == "central":
        return run_central_suite(entry, grid)
    if suite == "ke":
        return run_ke_suite(entry, grid)
    raise ValueError("unknown suite %r" % suite)


# ---------------------------------------------------------------------------
# command-line plumbing


def _parse_grid_overrides(specs, entry: CatalogEntry):
    box = dict(entry.grid_box)
    for spec in specs or ():
        try:
            name, rng = spec.split("=", 1)
            lo, hi, n = rng.split(":")
            box[name] = (float(lo), float(hi), int(n))
        except ValueError:
            raise SchemaError("--grid", "expected var=lo:hi:n, got %r" % spec) from None
        if name not in entry.data.kset.names:
            raise SchemaError("--grid", "unknown variable %r" % name)
    return box


def _entry_from_args(args) -> CatalogEntry:
    if getattr(args, "example", None):
        try:
            return load(args.example)
        except KeyError as exc:
            raise SchemaError("--example", str(exc)) from None
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(args.config, "invalid JSON: %s" % exc) from None
        data, fiber, family = parse_document(doc)
        box = catalog_mod.default_grid_box(doc, data)
        return CatalogEntry(
            entry_id=os.path.splitext(os.path.basename(args.config))[0],
            description="user structure from %s" % args.config,
            case=data.case,
            document=doc,
            data=data,
            grid_box=box,
            expected={},
            fiber=fiber,
            family=family,
        )
    raise SchemaError("verify", "need --example or --config")


def _write_report(report: VerificationReport, curves, args):
    fmt = getattr(args, "format", "json") or "json"
    out = getattr(args, "out", None)
    if out:
        if fmt in ("json", "both"):
            path = out if fmt == "json" else out + ".json"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(report.to_json())
        if fmt in ("csv", "both"):
            path = out if fmt == "csv" else out + ".csv"
            with open(path, "w", encoding="utf-8") as fh:
                if curves is not None:
                    header, rows = curves
                    fh.write(",".join(header) + "\n")
                    for row in rows:
                        fh.write(",".join("%.17g" % v if isinstance(v, float) else str(v) for v in row) + "\n")
                else:
                    fh.write(report.to_csv())


def cmd_verify(args) -> int:
    entry = _entry_from_args(args)
    if args.suite != "all":
        wanted = CASE_CENTRAL if args.suite == "central" else CASE_WARPED
        if entry.case != wanted:
            raise SchemaError("--suite", "entry %r is a %s-case structure" % (entry.entry_id, entry.case))
    box = _parse_grid_overrides(args.grid, entry)
    entry.grid_box = box
    grid = grid_points(entry.data.kset, box)
    start = time.time()
    report, curves = run_suite(entry, args.suite, grid)
    report.duration_s = time.time() - start
    if args.tol and args.tol != 1.0:
        for c in report.checks:
            c.passed = c.residual <= c.tol * args.tol if c.tol > 0 else c.passed
    report.print_lines()
    print("(%.2fs)" % report.duration_s, file=sys.stderr)
    _write_report(report, curves, args)
    return 0 if report.passed else 1


_FAMILY_BUILDERS = {
    "alpha0": lambda args: family_alpha_zero(args.lam, args.a1, args.a2, args.interval),
    "alphaneg": lambda args: family_alpha_negative(args.alpha, args.interval),
    "alpha_minus2": lambda args: family_implicit_tan(args.interval),
}


def cmd_ke(args) -> int:
    if args.family not in _FAMILY_BUILDERS:
        raise SchemaError("--family", "unknown family %r" % args.family)
    try:
        lo, hi = args.interval.split(":")
        args.interval = (float(lo), float(hi))
    except ValueError:
        raise SchemaError("--interval", "expected lo:hi, got %r" % args.interval) from None
    try:
        fam = _FAMILY_BUILDERS[args.family](args)
    except ValueError as exc:
        raise SchemaError("--family", str(exc)) from None
    fam.lam = args.lam
    fam.C = args.C
    alpha = {"alpha0": 0.0, "alphaneg": args.alpha, "alpha_minus2": -2.0}[args.family]

    start = time.time()
    report = VerificationReport(suite="ke-family:%s" % args.family,
                                grid_spec="tau=%g:%g:%d" % (args.interval + (args.n,)))
    # curve sampling stays on a finite window even when the admissible
    # interval is unbounded (completeness integrates over the true interval)
    lo = args.interval[0] if math.isfinite(args.interval[0]) else -8.0
    hi = args.interval[1] if math.isfinite(args.interval[1]) else 8.0
    tau_grid = [(float(t),) for t in np.linspace(lo, hi, args.n)]
    ode = ke_ode_residual(fam, alpha)
    report.add("ke_ode_residual", max_abs_on_grid(ode, tau_grid), TOL_TIGHT)
    min_f = min(fam.f.at(p) for p in tau_grid)
    fwp = (fam.f * fam.w).partial(0)
    min_fwp = min(fwp.at(p) for p in tau_grid)
    report.add("region_f_positive", max(0.0, -min_f), 0.0, passed=min_f > 0.0)
    report.add("region_fw_increasing", max(0.0, -min_fwp), 0.0, passed=min_fwp > 0.0)
    if args.complete:
        cv = completeness(fam)
        report.add("completeness", 0.0, 0.0, passed=True,
                   note="verdict %s; s extends to (%.4g, %.4g)" % ((cv.verdict,) + cv.s_range))

    # flatness flag of the induced metric over a reference fiber
    from .frames import curvature as _curvature
    from .warped import lift_fiber, make_fiber

    fiber = make_fiber(alpha, "-2")
    lifted = lift_fiber(fiber, fam.w, fam.f)
    sub = [(t,) for t in np.linspace(lo, hi, 9)]
    km = build_kahler(lifted)
    curv = _curvature(km.structure, koszul_connection(km.structure))
    max_R = curv.max_component(sub)
    report.add("flatness_flag", 0.0, 0.0, passed=True,
               note="flat=%s (max |R| = %.3e)" % ("true" if max_R <= 1e-7 else "false", max_R))

    report.duration_s = time.time() - start
    report.print_lines()

    curves = _ke_curves(tau_grid, fam, alpha)
    _write_report(report, curves, args)
    return 0 if report.passed else 1


def cmd_catalog(args) -> int:
    if args.action == "list":
        for eid in catalog_mod.catalog_ids():
            entry = load(eid)
            print("%-22s %s" % (eid, entry.description))
        return 0
    entry = load(args.id)
    print("id:          %s" % entry.entry_id)
    print("description: %s" % entry.description)
    print("case:        %s" % entry.case)
    cs = entry.data.constants
    print("constants:   a=%g b=%g alpha=%g beta=%g ell=%g" % (cs.a, cs.b, cs.alpha, cs.beta, cs.ell_gradient))
    if entry.family is not None:
        print("family:      lambda=%g C=%g interval=%s" % (entry.family.lam, entry.family.C, list(entry.family.interval)))
        print("  f: %s" % entry.document["family"]["f"])
        print("  w: %s" % entry.document["family"]["w"])
    print("expected:")
    for key, exp_val in sorted(entry.expected.items()):
        note = " (%s)" % exp_val.note if exp_val.note else ""
        print("  %-22s %-10r source=%s%s" % (key, exp_val.value, exp_val.source, note))
    print("document:")
    print(json.dumps(entry.document, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frame-kahler",
        description="Frame-level curvature engine and Kahler-metric verifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--example", help="catalog entry id")
    p_verify.add_argument("--config", help="path to a structure document (JSON)")
    p_verify.add_argument("--suite", choices=["central", "ke", "all"], default="all")
    p_verify.add_argument("--grid", action="append", metavar="var=lo:hi:n",
                          help="override an evaluation axis (repeatable)")
    p_verify.add_argument("--out", help="report output path")
    p_verify.add_argument("--format", choices=["json", "csv", "both"], default="json")
    p_verify.add_argument("--tol", type=float, default=1.0,
                          help="multiplier applied to every check tolerance")
    p_verify.set_defaults(func=cmd_verify)

    p_ke = sub.add_parser("ke", help="evaluate an Einstein family")
    p_ke.add_argument("--family", required=True, choices=["alpha0", "alphaneg", "alpha_minus2"])
    p_ke.add_argument("--alpha", type=float, default=-1.0, help="bracket constant (alphaneg family)")
    p_ke.add_argument("--lam", "--lambda", dest="lam", type=float, default=0.0, help="Einstein constant")
    p_ke.add_argument("--C", type=float, default=0.0, help="integration constant")
    p_ke.add_argument("--a1", type=float, default=1.0)
    p_ke.add_argument("--a2", type=float, default=0.0)
    p_ke.add_argument("--interval", default="-1:1", metavar="lo:hi")
    p_ke.add_argument("--n", type=int, default=33, help="curve sample count")
    p_ke.add_argument("--complete", action="store_true", help="run the completeness analysis")
    p_ke.add_argument("--out", help="report output path")
    p_ke.add_argument("--format", choices=["json", "csv", "both"], default="csv")
    p_ke.set_defaults(func=cmd_ke)

    p_cat = sub.add_parser("catalog", help="list or show built-in structures")
    p_cat.add_argument("action", choices=["list", "show"])
    p_cat.add_argument("id", nargs="?")
    p_cat.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "catalog" and args.action == "show" and not args.id:
        parser.error("catalog show needs an entry id")
    try:
        return args.func(args)
    except SchemaError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (FieldError, DomainError, ArithmeticError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except KeyError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
