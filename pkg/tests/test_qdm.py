from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import FIXTURES, datum, solutions, table
from kintegral.orbifold_data import DataError
from kintegral.qdm import (CorrelatorTable, DubrovinConnection, FundamentalSolution,
                           HomogeneityError, LocusError, MissingCorrelatorError, NonFlatError, QuantumProduct,
                           adjoint, cy_j_shape_check, divisor_indices, euler_axiom_check, j_function, load_table,
                           opposite_project, residue_product, table_from_potential, unitarity_check, wdvv_check)

TOL = 1e-10


def coeffs(s, row, col):
    return {k: v[row, col] for k, v in s.terms.items() if v[row, col] != 0}


# -- products against oracles ---------------------------------------------------

def test_p1_j_function_matches_closed_form():
    qp, L, _ = solutions("p1", "p1_table", 4)
    J = j_function(L)
    want = oracles.p1_j_coefficients(4)
    got = {(e[0], z): tuple(v) for (e, z), v in J.terms.items()}
    expected = {(d, z): v for d, per in want.items() for z, v in per.items() if any(v)}
    assert got == expected


def test_p2_big_product_counts_plane_curves():
    # (pt o pt, pt) = sum_d N_d q^d t^(3d-4) / (3d-4)!
    qp, _, _ = solutions("p2", "p2_table", 8)
    N = oracles.kontsevich(3)
    got = coeffs(qp.A[2], 0, 2)
    want = {((3 * d - 4, d), 0): N[d] / factorial(3 * d - 4) for d in (2, 3)}
    assert got == want


def test_quintic_yukawa_coupling():
    # basis class 2 is H^2/5, so H o H = (sum_d <H,H,H>_d q^d) phi_2 + ...
    qp, _, _ = solutions("quintic", "quintic_table", 3, ())
    got = coeffs(qp.A[1], 2, 1)
    raw = oracles.quintic_table(3)["entries"]
    want = {((e["d"][0],), 0): Fraction(e["value"]) for e in raw}
    assert got == want


def test_c3z3_table_matches_mirror_oracle():
    d = datum("c3z3")
    inv = oracles.c3z3_invariants(20)
    t = table("c3z3", "c3z3_table")
    for (ins, dual, _), v in t.entries.items():
        assert v == inv[len(ins) + 1]


@pytest.mark.parametrize("spec,tname,order,dirs", [
    ("p1", "p1_table", 6, None), ("p2", "p2_table", 9, None), ("quintic", "quintic_table", 3, ()),
    ("c3z3", "c3z3_table", 9, (1,)),
])
def test_wdvv_flatness_unitarity(spec, tname, order, dirs):
    qp, L, Lt = solutions(spec, tname, order, dirs)
    assert wdvv_check(qp, TOL)["pass"]
    assert DubrovinConnection(qp).flatness(TOL)["pass"]
    assert unitarity_check(L, Lt, TOL)["pass"]
    assert euler_axiom_check(qp, TOL)["pass"]


@given(st.integers(3, 9))
@settings(max_examples=7, deadline=None)
def test_p2_flat_at_every_order(order):
    qp = QuantumProduct(table("p2", "p2_table"), datum("p2"), order)
    assert DubrovinConnection(qp).flatness(TOL)["pass"]


def test_c2_dual_solution_is_exponential():
    # at first order L~ = 1 - (tau o)^dagger / z with the classical product
    d = datum("c2z3")
    twisted = [i for i, c in enumerate(d.basis) if c.sector != d.untwisted.label]
    qp = QuantumProduct(CorrelatorTable({}, 0, 1), d, 1, directions=twisted)
    Lt = FundamentalSolution(DubrovinConnection(qp, dual=True))
    P = d.pairing
    for i in twisted:
        e = tuple(1 if j == twisted.index(i) else 0 for j in range(len(twisted)))
        got = Lt.series.terms[(e, -1)]
        want = -adjoint(qp.A[i].terms[(tuple([0] * len(twisted)), 0)], P)
        assert (got == want).all()


def test_cy_j_shape_and_flat_coordinate():
    qp, L, Lt = solutions("c3z3", "c3z3_table", 9, (1,))
    assert cy_j_shape_check(L, Lt, TOL)["pass"]
    flat = opposite_project(L, Lt)
    assert {k: list(v) for k, v in flat.terms.items()} == {((1,), 0): [0, -1, 0]}


def test_shape_check_needs_calabi_yau():
    _, L, _ = solutions("p1", "p1_table", 4)
    with pytest.raises(LocusError):
        cy_j_shape_check(L)


def test_p1_flat_coordinate_is_zero():
    # without t-directions the flat coordinate of P^1 vanishes identically
    _, L, _ = solutions("p1", "p1_table", 4)
    assert opposite_project(L).terms == {}


def test_residue_product_p2():
    qp, _, _ = solutions("p2", "p2_table", 6)
    assert residue_product(qp, TOL)["pass"]


# -- negative controls --------------------------------------------------------------

def test_perturbed_table_breaks_wdvv_and_flatness():
    d = datum("p2")
    bad = table("p2", "p2_table").perturbed(avoid=divisor_indices(d))
    qp = QuantumProduct(bad, d, 6, directions=[2])
    assert not wdvv_check(qp, TOL)["pass"]
    assert not DubrovinConnection(qp).flatness(TOL)["pass"]
    with pytest.raises(NonFlatError):
        FundamentalSolution(DubrovinConnection(qp))


def test_missing_correlators_are_listed():
    t = CorrelatorTable.from_json(oracles.p2_table(1), datum("p2"))
    with pytest.raises(MissingCorrelatorError) as info:
        QuantumProduct(t, datum("p2"), 5)
    assert ((2, 2, 2, 2, 2), None, (2,)) in info.value.needed


def test_flipped_grading_is_not_flat():
    qp, _, _ = solutions("p1", "p1_table", 4)
    conn = DubrovinConnection(qp, mu=-datum("p1").mu_matrix(False))
    assert not conn.flatness(TOL)["pass"]
    with pytest.raises(NonFlatError):
        FundamentalSolution(conn)


def test_inhomogeneous_entry_is_rejected():
    obj = {"nef_basis": 1, "entries": [{"insertions": [1, 1], "d": [1], "value": "1"}]}
    with pytest.raises(HomogeneityError):
        CorrelatorTable.from_json(obj, datum("p2"))


def test_conflicting_duplicates_are_rejected():
    e = {"insertions": [1, 1, 1], "d": [1], "value": "1"}
    with pytest.raises(DataError, match="/entries/1"):
        CorrelatorTable.from_json({"nef_basis": 1, "entries": [e, dict(e, value="2")]}, datum("p1"))


def test_fixed_direction_is_refused():
    with pytest.raises(DataError):
        QuantumProduct(table("p2", "p2_table"), datum("p2"), 3, directions=[1])


# -- tables --------------------------------------------------------------------------

def test_table_json_round_trip():
    t = load_table(FIXTURES / "p2_table.json", datum("p2"))
    assert CorrelatorTable.from_json(t.to_json(), datum("p2")).entries == t.entries


def test_table_from_potential_reproduces_fixture():
    d = datum("c3z3")
    inv = oracles.c3z3_invariants(18)
    t = table_from_potential(d, 1, {m: v / factorial(m) for m, v in inv.items()})
    assert t.entries == table("c3z3", "c3z3_table").entries


def test_potential_rejects_wrong_degree():
    # 1_(g) has degree 2 so every power is homogeneous; along the degree-4 class none is
    table_from_potential(datum("c3z3"), 1, {4: Fraction(1)})
    with pytest.raises(HomogeneityError):
        table_from_potential(datum("c3z3"), 2, {3: Fraction(1)})
