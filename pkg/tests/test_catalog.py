"""Catalog entries, the document schema, and the coordinate oracle."""

import json
import math

import pytest

from frame_kahler import catalog
from frame_kahler.catalog import (
    SchemaError,
    coordinate_crosscheck,
    load,
    parse_document,
    parse_structure,
    planewave_chart,
    ppwave_from_shift,
    serialize_structure,
)
from frame_kahler.frames import consistency_suite, max_abs_on_grid
from frame_kahler.kahler import check_admissible


class TestLoad:
    def test_seven_entries(self):
        assert len(catalog.catalog_ids()) == 7

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            load("nope")

    def test_all_entries_consistent_and_admissible(self, entries):
        for eid, entry in entries.items():
            grid = entry.grid()
            assert consistency_suite(entry.data.structure, grid).passed, eid
            assert check_admissible(entry.data, grid).passed, eid

    def test_s3xr_constants(self, entries):
        cs = entries["s3xr"].data.constants
        assert (cs.a, cs.b, cs.alpha, cs.beta) == (1.0, -1.0, -2.0, 0.0)
        assert entries["s3xr"].data.iota.at((0.0,)) == pytest.approx(-2.0)

    def test_planewave_constants(self, entries):
        cs = entries["planewave"].data.constants
        assert (cs.a, cs.b, cs.alpha, cs.beta) == (-1.0, 0.0, -1.0, 0.0)
        assert entries["planewave"].data.iota.at((0.0,)) == pytest.approx(-2.0)

    def test_ppwave_defaults(self, entries):
        cs = entries["ppwave"].data.constants
        assert (cs.a, cs.b, cs.alpha, cs.beta) == (1.0, -1.0, 0.0, 0.0)

    def test_ppwave_iota_parameter(self):
        entry = load("ppwave", iota="-sech(x)^2")
        pt = (0.0, 0.3, 0.0)
        assert entry.data.iota.at(pt) == pytest.approx(-1.0 / math.cosh(0.3) ** 2)

    def test_expectations_carry_sources(self, entries):
        for entry in entries.values():
            for key, exp in entry.expected.items():
                assert exp.source in ("reported", "direct", "derived"), (entry.entry_id, key)


class TestRoundTrip:
    @pytest.mark.parametrize("eid", ["s3xr", "planewave", "ppwave", "warped_alphaneg", "warped_complete"])
    def test_serialize_parse_reproduces_fields(self, entries, eid):
        entry = entries[eid]
        doc = serialize_structure(entry)
        json.loads(json.dumps(doc))  # JSON-stable
        data2 = parse_structure(doc)
        grid = entry.grid()
        S1, S2 = entry.data.structure, data2.structure
        worst = 0.0
        for a in range(4):
            for b in range(4):
                worst = max(worst, max_abs_on_grid(S1.g[a][b] - S2.g[a][b], grid))
                for c in range(4):
                    worst = max(worst, max_abs_on_grid(S1.C[a][b][c] - S2.C[a][b][c], grid))
            for i in range(S1.kset.size):
                worst = max(worst, max_abs_on_grid(S1.D[a][i] - S2.D[a][i], grid))
        worst = max(worst, max_abs_on_grid(entry.data.f - data2.f, grid))
        worst = max(worst, max_abs_on_grid(entry.data.iota - data2.iota, grid))
        assert worst <= 1e-12


class TestSchemaErrors:
    def test_missing_d_row_named(self, entries):
        doc = serialize_structure(entries["s3xr"])
        del doc["D"]["x"]
        with pytest.raises(SchemaError) as err:
            parse_structure(doc)
        assert "D.x" in str(err.value)

    def test_conflicting_symmetric_metric(self, entries):
        doc = serialize_structure(entries["s3xr"])
        doc["g"]["T,k"] = "5"
        with pytest.raises(SchemaError):
            parse_structure(doc)

    def test_duplicate_frame_names(self, entries):
        doc = serialize_structure(entries["s3xr"])
        doc["frames"] = ["k", "k", "x", "y"]
        with pytest.raises(SchemaError):
            parse_structure(doc)

    def test_bad_expression_positional(self, entries):
        doc = serialize_structure(entries["s3xr"])
        doc["f"] = "exp(nope)"
        with pytest.raises(SchemaError) as err:
            parse_structure(doc)
        assert "f" in str(err.value)

    def test_unknown_case(self):
        with pytest.raises(SchemaError):
            parse_structure({"case": "weird"})

    def test_missing_fiber_key(self, entries):
        doc = serialize_structure(entries["warped_complete"])
        del doc["fiber"]["iota"]
        with pytest.raises(SchemaError) as err:
            parse_structure(doc)
        assert "fiber" in str(err.value)

    def test_warped_document_parses_to_lift(self, entries):
        doc = serialize_structure(entries["warped_complete"])
        data, fiber, family = parse_document(doc)
        assert data.case == "warped"
        assert fiber is not None and family is not None
        assert family.lam == -3.0


class TestCoordinateOracle:
    def test_planewave_chart_matches(self, entries):
        rep = coordinate_crosscheck(entries["planewave"])
        assert rep.passed
        assert max(c.residual for c in rep.checks) <= 1e-6

    def test_dropped_potential_flagged(self, entries):
        broken = planewave_chart(include_potential=False)
        rep = coordinate_crosscheck(entries["planewave"], chart=broken)
        assert not rep.passed
        assert any(c.check_id == "k_null" for c in rep.failed_checks())

    def test_degenerate_shift_twist_inadmissible(self):
        entry = ppwave_from_shift("0", "0")
        rep = check_admissible(entry.data, entry.grid())
        assert not rep.passed
        assert any(c.check_id == "twist_nonvanishing" for c in rep.failed_checks())

    def test_shift_twist_formula(self):
        entry = ppwave_from_shift("x*y^2", "3*x")
        # iota = d_x(3x) - d_y(x y^2) = 3 - 2 x y
        pt = (0.0, 0.5, -0.4)
        assert entry.data.iota.at(pt) == pytest.approx(3.0 - 2.0 * 0.5 * (-0.4))

    def test_entry_without_chart_rejects_crosscheck(self, entries):
        with pytest.raises(ValueError):
            coordinate_crosscheck(entries["s3xr"])
