"""Shared fixtures and finite-difference oracles for the test suite.

The engine carries derivatives exactly; every derivative-dependent claim in
the tests is cross-checked against central finite differences computed here,
so the oracle never shares code with the path it verifies.
"""

import pytest

from frame_kahler import catalog
from frame_kahler.frames import curvature, koszul_connection
from frame_kahler.kahler import (
    build_kahler,
    gamma_forms,
    ricci_form,
    ricci_form_real,
)


def central_diff(fn, point, i, h=1e-5):
    """Central finite difference of a point function along coordinate i."""
    lo = list(point)
    hi = list(point)
    lo[i] -= h
    hi[i] += h
    return (fn(tuple(hi)) - fn(tuple(lo))) / (2.0 * h)


def second_diff(fn, point, i, j, h=1e-4):
    """Second mixed central difference."""
    if i == j:
        lo = list(point)
        hi = list(point)
        lo[i] -= h
        hi[i] += h
        return (fn(tuple(hi)) - 2.0 * fn(tuple(point)) + fn(tuple(lo))) / (h * h)
    return central_diff(lambda p: central_diff(fn, p, j, h), tuple(point), i, h)


def fd_plane_laplacian(fn, point, ix, iy, h=1e-4):
    return second_diff(fn, point, ix, ix, h) + second_diff(fn, point, iy, iy, h)


@pytest.fixture(scope="session")
def entries():
    """All catalog entries, loaded once."""
    return {eid: catalog.load(eid) for eid in catalog.catalog_ids()}


class BuiltEntry:
    """Catalog entry with its induced metric and both curvature routes."""

    def __init__(self, entry):
        self.entry = entry
        self.data = entry.data
        self.grid = entry.grid()
        self.kahler = build_kahler(entry.data)
        self.conn_k = koszul_connection(self.kahler.structure)
        self.gforms = gamma_forms(entry.data, self.kahler, self.conn_k)
        self.rho = ricci_form_real(ricci_form(entry.data, self.gforms))
        self.curv_k = curvature(self.kahler.structure, self.conn_k)


@pytest.fixture(scope="session")
def built(entries):
    cache = {}

    def get(eid):
        if eid not in cache:
            cache[eid] = BuiltEntry(entries[eid])
        return cache[eid]

    return get
