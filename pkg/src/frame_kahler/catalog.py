"""Built-in example structures and the JSON structure format.

Each catalog entry stores its defining document (the same JSON-serializable
schema accepted from user files), the constructed admissible data, a default
evaluation box, and a table of expected values.  Every expectation carries
its source: ``reported`` for values quoted from the originating analysis,
``direct`` for immediate consequences of the definitions, and ``derived``
for values computed here by an independent oracle.

The gravitational plane wave additionally carries a coordinate chart; a
finite-difference cross-check of the chart against the abstract frame data
ties the frame presentation back to an honest coordinate realization.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import Const, KSet, ScalarField, make_closed_form
from .frames import FrameStructure, grid_points
from .kahler import (
    CASE_CENTRAL,
    CASE_WARPED,
    AdmissibleConstants,
    AdmissibleData,
    K,
    T,
    X,
    Y,
)
from .reporting import VerificationReport
from .warped import (
    FiberData,
    WarpedFamily,
    implicit_tan_field,
    lift_fiber,
    make_fiber,
    TAU_KSET,
)

__all__ = [
    "SchemaError",
    "Expectation",
    "CatalogEntry",
    "CoordinateChart",
    "catalog_ids",
    "load",
    "parse_structure",
    "parse_document",
    "serialize_structure",
    "ppwave_from_shift",
    "planewave_chart",
    "coordinate_crosscheck",
]

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """A structure document violates the schema; carries the failing path."""

    def __init__(self, path: str, message: str):
        super().__init__("%s: %s" % (path, message))
        self.path = path


@dataclass(frozen=True)
class Expectation:
    """An expected value with the provenance of the expectation."""

    value: object
    source: str  # "reported" | "direct" | "derived"
    note: str = ""


@dataclass
class CatalogEntry:
    entry_id: str
    description: str
    case: str
    document: dict
    data: AdmissibleData
    grid_box: dict
    expected: dict
    fiber: Optional[FiberData] = None
    family: Optional[WarpedFamily] = None
    chart: Optional["CoordinateChart"] = None

    def grid(self):
        return grid_points(self.data.kset, self.grid_box)


# ---------------------------------------------------------------------------
# document parsing


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise SchemaError("%s.%s" % (path, key) if path else key, "missing")
    return doc[key]


def _parse_pair_key(key: str, frames: tuple, path: str):
    parts = key.split(",")
    if len(parts) != 2:
        raise SchemaError("%s.%s" % (path, key), "expected a 'frame,frame' key")
    for p in parts:
        if p not in frames:
            raise SchemaError("%s.%s" % (path, key), "unknown frame name %r" % p)
    return frames.index(parts[0]), frames.index(parts[1])


def _parse_expr(text, kset: KSet, path: str) -> ScalarField:
    if isinstance(text, (int, float)):
        return Const(kset, float(text))
    if not isinstance(text, str):
        raise SchemaError(path, "expected an expression string")
    try:
        return make_closed_form(text, kset)
    except Exception as exc:
        raise SchemaError(path, "bad expression %r: %s" % (text, exc)) from None


def _central_from_document(doc: dict) -> AdmissibleData:
    kset = KSet(tuple(_require(doc, "kset", "")))
    frames = tuple(_require(doc, "frames", ""))
    if len(frames) != 4 or len(set(frames)) != 4:
        raise SchemaError("frames", "need 4 distinct frame names, got %r" % (frames,))

    zero = Const(kset, 0.0)
    g = [[zero] * 4 for _ in range(4)]
    raw_g = _require(doc, "g", "")
    seen = {}
    for key, expr in raw_g.items():
        a, b = _parse_pair_key(key, frames, "g")
        if (b, a) in seen and seen[(b, a)] != expr:
            raise SchemaError("g.%s" % key, "conflicts with the symmetric entry %r" % seen[(b, a)])
        seen[(a, b)] = expr
        fld = _parse_expr(expr, kset, "g.%s" % key)
        g[a][b] = fld
        g[b][a] = fld

    C = [[[zero] * 4 for _ in range(4)] for _ in range(4)]
    raw_br = _require(doc, "brackets", "")
    seen = {}
    for key, coeffs in raw_br.items():
        a, b = _parse_pair_key(key, frames, "brackets")
        if a == b:
            raise SchemaError("brackets.%s" % key, "bracket of a frame with itself")
        if (b, a) in seen:
            raise SchemaError("brackets.%s" % key, "both orders of the pair given")
        seen[(a, b)] = coeffs
        if not isinstance(coeffs, dict):
            raise SchemaError("brackets.%s" % key, "expected {frame: expression}")
        for cname, expr in coeffs.items():
            if cname not in frames:
                raise SchemaError("brackets.%s.%s" % (key, cname), "unknown frame name")
            c = frames.index(cname)
            fld = _parse_expr(expr, kset, "brackets.%s.%s" % (key, cname))
            C[a][b][c] = fld
            C[b][a][c] = -fld

    raw_D = _require(doc, "D", "")
    D = [[zero] * kset.size for _ in range(4)]
    for name in frames:
        if name not in raw_D:
            raise SchemaError("D.%s" % name, "missing derivative-table row")
    for name, row in raw_D.items():
        if name not in frames:
            raise SchemaError("D.%s" % name, "unknown frame name")
        a = frames.index(name)
        if not isinstance(row, dict):
            raise SchemaError("D.%s" % name, "expected {variable: expression}")
        for vname, expr in row.items():
            if vname not in kset.names:
                raise SchemaError("D.%s.%s" % (name, vname), "unknown variable name")
            D[a][kset.index(vname)] = _parse_expr(expr, kset, "D.%s.%s" % (name, vname))

    raw_const = _require(doc, "constants", "")
    for key in ("a", "b", "alpha", "beta"):
        if key not in raw_const:
            raise SchemaError("constants.%s" % key, "missing")
    constants = AdmissibleConstants(
        a=float(raw_const["a"]),
        b=float(raw_const["b"]),
        alpha=float(raw_const["alpha"]),
        beta=float(raw_const["beta"]),
        ell_gradient=float(raw_const.get("ell", 1.0)),
    )

    f = _parse_expr(_require(doc, "f", ""), kset, "f")
    structure = FrameStructure(kset, frames, g, C, D)
    if "iota" in doc:
        iota = _parse_expr(doc["iota"], kset, "iota")
    else:
        iota = structure.g_of_bracket(K, X, Y)
    return AdmissibleData(
        structure=structure,
        constants=constants,
        f=f,
        iota=iota,
        case=CASE_CENTRAL,
        tau_index=0,
    )


def _fiber_from_document(doc: dict) -> FiberData:
    plane_vars = tuple(doc.get("kset", ()))
    if "alpha" not in doc:
        raise SchemaError("fiber.alpha", "missing")
    if "iota" not in doc:
        raise SchemaError("fiber.iota", "missing")
    iota = doc["iota"]
    if isinstance(iota, (int, float)):
        iota = repr(float(iota))
    try:
        return make_fiber(float(doc["alpha"]), iota, plane_vars)
    except Exception as exc:
        raise SchemaError("fiber", str(exc)) from None


def _interval_bound(v, path):
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return math.inf
        if v == "-inf":
            return -math.inf
        raise SchemaError(path, "bad interval bound %r" % v)
    return float(v)


def _family_from_document(doc: dict, fiber: FiberData) -> WarpedFamily:
    fam = _require(doc, "family", "")
    f = _parse_expr(_require(fam, "f", "family"), TAU_KSET, "family.f")
    raw_w = _require(fam, "w", "family")
    if isinstance(raw_w, dict):
        if "implicit_tan_seed" not in raw_w:
            raise SchemaError("family.w", "expected an expression or {'implicit_tan_seed': number}")
        x = implicit_tan_field(TAU_KSET, 0, float(raw_w["implicit_tan_seed"]))
        from .fields import tan as _tan

        w = -_tan(x)
    else:
        w = _parse_expr(raw_w, TAU_KSET, "family.w")
    interval_raw = fam.get("interval", [-1.0, 1.0])
    interval = (
        _interval_bound(interval_raw[0], "family.interval"),
        _interval_bound(interval_raw[1], "family.interval"),
    )
    return WarpedFamily(
        f=f,
        w=w,
        lam=float(fam.get("lambda", 0.0)),
        C=float(fam.get("C", 0.0)),
        interval=interval,
    )


def parse_document(doc: dict):
    """Parse a structure document.

    Returns (AdmissibleData, fiber, family); fiber and family are None for
    central documents."""
    if not isinstance(doc, dict):
        raise SchemaError("", "document must be a JSON object")
    case = _require(doc, "case", "")
    if case == CASE_CENTRAL:
        return _central_from_document(doc), None, None
    if case == CASE_WARPED:
        fiber = _fiber_from_document(_require(doc, "fiber", ""))
        family = _family_from_document(doc, fiber)
        data = lift_fiber(fiber, family.w, family.f)
        return data, fiber, family
    raise SchemaError("case", "expected 'central' or 'warped', got %r" % case)


def parse_structure(doc: dict) -> AdmissibleData:
    """Parse a structure document into admissible data (both cases)."""
    data, _, _ = parse_document(doc)
    return data


def serialize_structure(entry: CatalogEntry) -> dict:
    """The JSON-serializable document defining an entry."""
    return copy.deepcopy(entry.document)


def default_grid_box(doc: dict, data: AdmissibleData) -> dict:
    box = {}
    for name, spec in doc.get("grid", {}).items():
        if name not in data.kset.names:
            raise SchemaError("grid.%s" % name, "unknown variable name")
        lo, hi, n = spec
        box[name] = (float(lo), float(hi), int(n))
    for name in data.kset.names:
        box.setdefault(name, (-1.0, 1.0, 5))
    return box


# ---------------------------------------------------------------------------
# built-in entries


def _doc_s3xr() -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "case": "central",
        "kset": ["tau"],
        "frames": ["k", "T", "x", "y"],
        "g": {"k,T": "1", "T,T": "-1", "x,x": "1", "y,y": "1"},
        "brackets": {
            "k,x": {"y": "-2"},
            "k,y": {"x": "2"},
            "x,y": {"k": "-2", "T": "-2"},
        },
        "D": {"k": {"tau": "1"}, "T": {"tau": "-1"}, "x": {}, "y": {}},
        "constants": {"a": 1, "b": -1, "alpha": -2, "beta": 0, "ell": 1},
        "f": "exp(tau)",
        "grid": {"tau": [-1.0, 1.0, 5]},
    }


def _doc_planewave() -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "case": "central",
        "kset": ["u"],
        "frames": ["k", "T", "x", "y"],
        "g": {"k,T": "-1", "x,x": "1", "y,y": "1"},
        "brackets": {
            "k,x": {"y": "-1"},
            "k,y": {"x": "1"},
            "x,y": {"T": "2"},
        },
        "D": {"k": {"u": "-1"}, "T": {}, "x": {}, "y": {}},
        "constants": {"a": -1, "b": 0, "alpha": -1, "beta": 0, "ell": 1},
        "f": "exp(u)",
        "grid": {"u": [-1.0, 1.0, 5]},
    }


def _doc_ppwave(iota_expr: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "case": "central",
        "kset": ["tau", "x", "y"],
        "frames": ["k", "T", "x", "y"],
        "g": {"k,T": "1", "T,T": "-1", "x,x": "1", "y,y": "1"},
        "brackets": {
            "x,y": {"k": iota_expr, "T": iota_expr},
        },
        "D": {
            "k": {"tau": "1"},
            "T": {"tau": "-1"},
            "x": {"x": "1"},
            "y": {"y": "1"},
        },
        "constants": {"a": 1, "b": -1, "alpha": 0, "beta": 0, "ell": 1},
        "f": "exp(tau)",
        "iota": iota_expr,
        "grid": {"tau": [-0.5, 0.5, 3], "x": [-0.6, 0.6, 4], "y": [-0.6, 0.6, 4]},
    }


def _doc_warped(alpha, iota_expr, f_expr, w_spec, lam, C, interval, tau_box, fiber_vars=()):
    return {
        "schema_version": SCHEMA_VERSION,
        "case": "warped",
        "fiber": {"kset": list(fiber_vars), "alpha": alpha, "iota": iota_expr},
        "family": {"f": f_expr, "w": w_spec, "lambda": lam, "C": C, "interval": list(interval)},
        "grid": {"tau": list(tau_box)},
    }


def _entry_s3xr() -> CatalogEntry:
    doc = _doc_s3xr()
    data, _, _ = parse_document(doc)
    expected = {
        "twist": Expectation(-2.0, "reported"),
        "q": Expectation(0.0, "reported", "-(a^2+b^2-b*alpha+a*beta)/a^2 with a=1, b=-1, alpha=-2"),
        "s_tilde": Expectation(3.0, "derived", "closed form cross-checked against the conformal route"),
        "ricci_flat": Expectation(True, "reported"),
        "flat": Expectation(True, "reported"),
        "csc": Expectation(True, "reported"),
    }
    return CatalogEntry(
        entry_id="s3xr",
        description="Product of the round 3-sphere with a line; induced metric is flat",
        case=CASE_CENTRAL,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
    )


def _entry_planewave() -> CatalogEntry:
    doc = _doc_planewave()
    data, _, _ = parse_document(doc)
    expected = {
        "twist": Expectation(-2.0, "reported"),
        "ric_xx": Expectation(-2.0, "reported", "equals the twist"),
        "q": Expectation(-1.0, "derived", "q formula with a=-1, b=0, alpha=-1, beta=0"),
        "s_tilde": Expectation(-0.5, "derived", "closed form cross-checked against the conformal route"),
        "csc": Expectation(True, "reported"),
        "left_invariant": Expectation(True, "reported"),
    }
    return CatalogEntry(
        entry_id="planewave",
        description="Gravitational plane wave with its rotating null frame; k is Killing",
        case=CASE_CENTRAL,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
        chart=planewave_chart(),
    )


def _entry_ppwave(iota_expr: str = "-2") -> CatalogEntry:
    doc = _doc_ppwave(iota_expr)
    data, _, _ = parse_document(doc)
    expected = {
        "q": Expectation(-2.0, "derived", "q formula with a=1, b=-1, alpha=beta=0; constant twist only"),
        "s_tilde": Expectation(-1.0, "reported", "constant twist only"),
        "csc": Expectation(True, "reported", "constant twist only"),
    }
    if iota_expr != "-2":
        expected = {}
    return CatalogEntry(
        entry_id="ppwave",
        description="Line times a truncated pp-wave 3-metric; twist profile is a parameter",
        case=CASE_CENTRAL,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
    )


def _entry_warped_alpha0() -> CatalogEntry:
    doc = _doc_warped(
        alpha=0.0,
        iota_expr="-2",
        f_expr="1",
        w_spec="(exp(-(-3)*tau) + 1.5)^(1/3)",
        lam=-3.0,
        C=0.0,
        interval=(-1.0, 1.0),
        tau_box=(-1.0, 1.0, 5),
    )
    data, fiber, family = parse_document(doc)
    expected = {
        "einstein_lambda": Expectation(-3.0, "derived", "solution family of the tau-ODE"),
    }
    return CatalogEntry(
        entry_id="warped_alpha0",
        description="Warped product over a flat-type fiber (alpha=0), Einstein with lambda=-3",
        case=CASE_WARPED,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
        fiber=fiber,
        family=family,
    )


def _entry_warped_alphaneg() -> CatalogEntry:
    doc = _doc_warped(
        alpha=-1.0,
        iota_expr="-2",
        f_expr="tau^(-0.5)",
        w_spec="tau",
        lam=0.0,
        C=0.0,
        interval=(0.2, 1.4),
        tau_box=(0.2, 1.4, 5),
    )
    data, fiber, family = parse_document(doc)
    expected = {
        "einstein_lambda": Expectation(0.0, "derived", "solution family of the tau-ODE"),
        "ricci_flat": Expectation(True, "derived"),
        "flat": Expectation(True, "reported"),
    }
    return CatalogEntry(
        entry_id="warped_alphaneg",
        description="Warped product, alpha=-1, Ricci-flat scaling solution f = tau^(-1/2), w = tau",
        case=CASE_WARPED,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
        fiber=fiber,
        family=family,
    )


def _entry_warped_alpha_minus2() -> CatalogEntry:
    tau0 = 1.0 - math.pi / 4.0
    doc = _doc_warped(
        alpha=-2.0,
        iota_expr="-2",
        f_expr="1",
        w_spec={"implicit_tan_seed": -math.pi / 4.0},
        lam=0.0,
        C=0.0,
        interval=(0.05, 1.0),
        tau_box=(0.05, 1.0, 5),
    )
    data, fiber, family = parse_document(doc)
    expected = {
        "einstein_lambda": Expectation(0.0, "derived"),
        "ricci_flat": Expectation(True, "reported"),
        "x_at_tau0": Expectation(-math.pi / 4.0, "reported", "root of x = tau + tan(x) at tau0 = 1 - pi/4"),
        "tau0": Expectation(tau0, "reported"),
        "sectional_xy_nonzero": Expectation(True, "reported", "magnitude (2/w)|w' - 1| at tau0"),
    }
    return CatalogEntry(
        entry_id="warped_alpha_minus2",
        description="Warped product over the round-sphere-type fiber (alpha=-2); Ricci flat, not flat",
        case=CASE_WARPED,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
        fiber=fiber,
        family=family,
    )


def _entry_warped_complete() -> CatalogEntry:
    doc = _doc_warped(
        alpha=0.0,
        iota_expr="-2",
        f_expr="1",
        w_spec="exp(tau)",
        lam=-3.0,
        C=0.0,
        interval=("-inf", "inf"),
        tau_box=(-1.0, 1.0, 5),
    )
    data, fiber, family = parse_document(doc)
    expected = {
        "einstein_lambda": Expectation(-3.0, "derived"),
        "c_constant": Expectation(1.0, "reported", "c = -lambda/3"),
        "sectional_kT": Expectation(-2.0, "reported", "2 lambda / 3"),
        "sectional_xk": Expectation(-0.5, "reported", "lambda / 6"),
        "complete": Expectation(True, "reported"),
    }
    return CatalogEntry(
        entry_id="warped_complete",
        description="Complete Einstein example: f = 1, w = e^tau, lambda = -3, constant c = 1",
        case=CASE_WARPED,
        document=doc,
        data=data,
        grid_box=default_grid_box(doc, data),
        expected=expected,
        fiber=fiber,
        family=family,
    )


_BUILDERS = {
    "s3xr": _entry_s3xr,
    "planewave": _entry_planewave,
    "ppwave": _entry_ppwave,
    "warped_alpha0": _entry_warped_alpha0,
    "warped_alphaneg": _entry_warped_alphaneg,
    "warped_alpha_minus2": _entry_warped_alpha_minus2,
    "warped_complete": _entry_warped_complete,
}


def catalog_ids():
    return list(_BUILDERS)


def load(entry_id: str, **params) -> CatalogEntry:
    """Load a catalog entry; ``ppwave`` accepts iota=<expression>."""
    builder = _BUILDERS.get(entry_id)
    if builder is None:
        raise KeyError("unknown catalog id %r (have %s)" % (entry_id, ", ".join(_BUILDERS)))
    if entry_id == "ppwave" and "iota" in params:
        return _entry_ppwave(params.pop("iota"))
    if params:
        raise TypeError("unexpected parameters %r for entry %r" % (sorted(params), entry_id))
    return builder()


def ppwave_from_shift(k_expr: str, h_expr: str) -> CatalogEntry:
    """pp-wave entry built from the two shift functions of the fiber frame:
    the twist is d_x(h) - d_y(k) on the plane slice."""
    kset = KSet(("tau", "x", "y"))
    k_field = make_closed_form(k_expr, kset)
    h_field = make_closed_form(h_expr, kset)
    iota = h_field.partial(1) - k_field.partial(2)

    base = _entry_ppwave("-2")
    template, _, _ = parse_document(_doc_ppwave("0"))
    S = template.structure
    zero = Const(kset, 0.0)
    C = [[[zero] * 4 for _ in range(4)] for _ in range(4)]
    C[X][Y][K] = C[X][Y][T] = iota
    C[Y][X][K] = C[Y][X][T] = -iota
    structure = FrameStructure(kset, S.frame_names, S.g, C, S.D)
    data = AdmissibleData(
        structure=structure,
        constants=template.constants,
        f=template.f,
        iota=iota,
        case=CASE_CENTRAL,
    )
    return CatalogEntry(
        entry_id="ppwave",
        description=base.description,
        case=CASE_CENTRAL,
        document={"shift_k": k_expr, "shift_h": h_expr},
        data=data,
        grid_box=base.grid_box,
        expected={"twist_is_shift_curl": Expectation(True, "direct", "iota = d_x h - d_y k")},
    )


# ---------------------------------------------------------------------------
# coordinate oracle for the plane wave


@dataclass
class CoordinateChart:
    """Coordinate realization: metric and frame fields as functions of a
    coordinate point, plus the projection onto the k-set variables."""

    coord_names: tuple
    metric_fn: Callable
    frame_fns: list
    kset_point: Callable


def planewave_chart(include_potential: bool = True) -> CoordinateChart:
    """Chart (u, v, x, y) with metric
    -(x^2+y^2) du^2 + du dv + dv du + dx^2 + dy^2 and the rotating frame.

    ``include_potential=False`` drops the du^2 term (a deliberately broken
    variant for mutation tests: k stops being null)."""

    def metric(p):
        u, v, x, y = p
        m = np.zeros((4, 4))
        if include_potential:
            m[0, 0] = -(x * x + y * y)
        m[0, 1] = m[1, 0] = 1.0
        m[2, 2] = m[3, 3] = 1.0
        return m

    frames = [
        lambda p: np.array([-1.0, 0.0, -p[3], p[2]]),  # k = -du - y dx + x dy
        lambda p: np.array([0.0, 1.0, 0.0, 0.0]),      # T = dv
        lambda p: np.array([0.0, -p[3], 1.0, 0.0]),    # x = -y dv + dx
        lambda p: np.array([0.0, p[2], 0.0, 1.0]),     # y = x dv + dy
    ]
    return CoordinateChart(
        coord_names=("u", "v", "x", "y"),
        metric_fn=metric,
        frame_fns=frames,
        kset_point=lambda p: (p[0],),
    )


def _fd_bracket(chart: CoordinateChart, a: int, b: int, p: np.ndarray, h: float) -> np.ndarray:
    """[e_a, e_b]^mu = e_a^nu d_nu e_b^mu - e_b^nu d_nu e_a^mu by central
    differences of the coordinate coefficient functions."""
    Xa = chart.frame_fns[a](p)
    Xb = chart.frame_fns[b](p)
    n = len(p)
    out = np.zeros(n)
    for nu in range(n):
        hp = np.array(p, dtype=float)
        hm = np.array(p, dtype=float)
        hp[nu] += h
        hm[nu] -= h
        dXb = (chart.frame_fns[b](hp) - chart.frame_fns[b](hm)) / (2 * h)
        dXa = (chart.frame_fns[a](hp) - chart.frame_fns[a](hm)) / (2 * h)
        out += Xa[nu] * dXb - Xb[nu] * dXa
    return out


def coordinate_crosscheck(
    entry: CatalogEntry,
    chart: Optional[CoordinateChart] = None,
    points=None,
    h: float = 1e-5,
    tol: float = 1e-6,
) -> VerificationReport:
    """Compare a coordinate chart against the abstract frame data.

    Metric values, bracket coefficients (finite-differenced and re-expanded
    in the frame), the nullity of k and the twist are all matched at a
    sample of coordinate points."""
    chart = chart or entry.chart
    if chart is None:
        raise ValueError("entry %r has no coordinate chart" % entry.entry_id)
    report = VerificationReport(suite="coordinate-crosscheck")
    S = entry.data.structure
    if points is None:
        points = [
            np.array([u, v, x, y])
            for u in (-0.8, 0.0, 0.8)
            for v in (-0.5, 0.5)
            for x in (0.3, 1.1)
            for y in (-0.7, 0.4)
        ]

    worst_g = worst_c = worst_null = worst_twist = 0.0
    for p in points:
        kp = chart.kset_point(p)
        G = chart.metric_fn(p)
        E = np.array([chart.frame_fns[a](p) for a in range(4)])
        g_frame = E @ G @ E.T
        for a in range(4):
            for b in range(4):
                worst_g = max(worst_g, abs(g_frame[a, b] - S.g[a][b].at(kp)))
        worst_null = max(worst_null, abs(g_frame[0, 0]))

        M = E.T  # columns are the frame fields
        for a in range(4):
            for b in range(a + 1, 4):
                br = _fd_bracket(chart, a, b, p, h)
                coeffs = np.linalg.solve(M, br)
                for c in range(4):
                    worst_c = max(worst_c, abs(coeffs[c] - S.C[a][b][c].at(kp)))
        br_xy = _fd_bracket(chart, X, Y, p, h)
        iota_chart = float(chart.frame_fns[K](p) @ G @ br_xy)
        worst_twist = max(worst_twist, abs(iota_chart - entry.data.iota.at(kp)))

    report.add("metric_values", worst_g, tol)
    report.add("bracket_coefficients", worst_c, tol)
    report.add("k_null", worst_null, tol)
    report.add("twist", worst_twist, tol)
    return report
