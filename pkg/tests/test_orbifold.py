from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES, datum
from kintegral.algebra import as_vector, rank
from kintegral.orbifold_data import DataError, condition_checks, datum_from_json, load_datum


def quotient(n, weights):
    return datum_from_json({"kind": "quotient", "group": {"cyclic": n}, "weights": list(weights)})


# -- ages and the inertia stack -----------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_a_n_twisted_ages_are_one(n):
    d = datum(f"c2z{n}")
    assert [s.age for s in d.sectors] == [0] + [1] * (n - 1)
    assert all(s.dim == 0 for s in d.sectors[1:])


def test_c3z3_ages_and_involution():
    d = datum("c3z3")
    ages = {s.label: s.age for s in d.sectors}
    assert ages == {"0": 0, "g": 1, "g^2": 2}
    assert d.sector("g").inv == "g^2"
    assert d.cr_degrees() == [0, 2, 4]


def test_weighted_projective_line_sector():
    d = datum("p12")
    assert d.sector("1/2").age == Fraction(1, 2)
    assert d.pairing[2, 2] == Fraction(1, 2)


@given(st.integers(2, 7), st.lists(st.integers(0, 6), min_size=1, max_size=3))
def test_age_codimension_identity(n, weights):
    # oracle: iota(g) + iota(g^-1) = number of directions moved by g
    d = quotient(n, weights)
    for s in d.sectors:
        partner = d.sector(s.inv)
        moved = sum(1 for w in weights if (w * d.sectors.index(s)) % n)
        assert s.age + partner.age == moved
        assert s.dim == len(weights) - moved


@given(st.integers(2, 6), st.lists(st.integers(1, 5), min_size=2, max_size=3))
def test_pairing_is_nondegenerate(n, weights):
    d = quotient(n, weights)
    assert rank(d.pairing) == len(d.basis)


@pytest.mark.parametrize("name", ["p1", "p2", "p12", "quintic"])
def test_compact_pairing_symmetric_and_unit(name):
    d = datum(name)
    assert (d.pairing == d.pairing.T).all()
    one = d.unit_all()
    for i in range(d.rank):
        e = as_vector([1 if j == i else 0 for j in range(d.rank)])
        assert (d.mul(one, e) == e).all()


def test_quintic_cup_product():
    d = datum("quintic")
    H = as_vector([0, 1, 0, 0])
    HH = d.mul(H, H)
    assert list(HH) == [0, 0, 5, 0]
    assert list(d.mul(HH, H)) == [0, 0, 0, 5]


# -- group data ---------------------------------------------------------------

@given(st.integers(2, 7), st.data())
def test_decompose_inverts_virtual_character(n, data):
    G = quotient(n, [1, n - 1]).group
    combo = {r: data.draw(st.integers(-3, 3)) for r in G.irreducibles}
    combo = {k: v for k, v in combo.items() if v}
    assert G.decompose(G.virtual_character(combo)) == combo


@pytest.mark.parametrize("n", [2, 3, 5])
def test_regular_character(n):
    G = quotient(n, [1, n - 1]).group
    chi = G.virtual_character("reg")
    assert chi[0] == n and all(c == 0 for c in chi[1:])


def test_special_flag():
    assert quotient(3, [1, 1, 1]).group.special
    assert not quotient(3, [1, 1]).group.special


# -- conditions and errors ------------------------------------------------------

def test_condition_checks_on_quotient():
    r = condition_checks(quotient(5, [1, 2, 2]))
    assert r["uniqueness_opposite"] and r["uniqueness_dilaton"]


@pytest.mark.parametrize("bad,pointer", [
    ({"kind": "quotient", "group": {"cyclic": 0}, "weights": [1]}, "/group/cyclic"),
    ({"kind": "quotient", "group": {"cyclic": 2}, "weights": []}, "/weights"),
])
def test_bad_quotients_raise_data_error(bad, pointer):
    with pytest.raises(DataError, match=pointer):
        datum_from_json(bad)


def test_age_violation_is_reported(tmp_path):
    obj = json.loads((FIXTURES / "p12.json").read_text())
    obj["sectors"][1]["age"] = "1/3"
    with pytest.raises(DataError):
        datum_from_json(obj)


def test_load_datum_names_from_file():
    assert load_datum(FIXTURES / "c2z2.json").name == "[C^2/Z_2]"
