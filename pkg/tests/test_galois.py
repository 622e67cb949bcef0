from __future__ import annotations

import json

import mpmath
import pytest

from conftest import FIXTURES, datum
from kintegral.algebra import as_matrix, max_abs, to_numeric
from kintegral.galois import (ExternalTransform, galois_on_sol, galois_power_order, load_transform,
                              power_identity_check, sol_pairing_matrix, tensor_line_bundle_check,
                              validate_transform, z_monodromy)
from kintegral.gamma_frame import skyscraper, structure_sheaf

TOL = 1e-10
ALL = ["p1", "p12", "p2", "quintic", "c2z2", "c2z3", "c2z4", "c3z3"]


def small(m) -> bool:
    return max_abs(to_numeric(m)) < TOL


@pytest.mark.parametrize("name", ALL)
def test_pairing_is_galois_invariant(name):
    d = datum(name)
    S = sol_pairing_matrix(d)
    for lb in d.line_bundles:
        G = galois_on_sol(lb.name, d)
        assert small(G.T @ S @ G - S)


@pytest.mark.parametrize("name", ALL)
def test_monodromy_commutes_with_galois(name):
    d = datum(name)
    M = z_monodromy(d)
    for lb in d.line_bundles:
        G = galois_on_sol(lb.name, d)
        assert small(G @ M - M @ G)


@pytest.mark.parametrize("n", [3, 4])
def test_galois_is_a_homomorphism_on_characters(n):
    d = datum(f"c2z{n}")
    G1 = galois_on_sol("L_rho_1", d)
    G2 = galois_on_sol("L_rho_2", d)
    assert small(G1 @ G1 - G2)


def test_p1_monodromy():
    # (-1) e^{-2 pi i rho} with rho = c_1 = 2 omega
    M = z_monodromy(datum("p1"))
    expected = as_matrix([[-1, 0], [4j * mpmath.pi, -1]])
    assert small(M - expected)


def test_cy3_quotient_monodromy_is_minus_identity():
    M = z_monodromy(datum("c3z3"))
    assert small(M + as_matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


@pytest.mark.parametrize("name", ALL)
def test_power_identity(name):
    d = datum(name)
    for lb in d.line_bundles:
        assert power_identity_check(lb.name, d, TOL)["pass"]


def test_power_order_on_weighted_line():
    assert galois_power_order("O(1)", datum("p12")) == 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_tensor_twist_on_skyscrapers(n):
    d = datum(f"c2z{n}")
    for lb in d.line_bundles:
        for rho in d.group.irreducibles:
            assert tensor_line_bundle_check(lb.name, skyscraper(d, {rho: 1}), d, TOL)["pass"]


@pytest.mark.parametrize("name", ["p1", "p2", "p12"])
def test_tensor_twist_on_structure_sheaf(name):
    d = datum(name)
    assert tensor_line_bundle_check("O(1)", structure_sheaf(d), d, TOL)["pass"]


# -- external transforms ---------------------------------------------------------

def test_identity_transform_passes():
    U = load_transform(FIXTURES / "p1_identity.json")
    r = validate_transform(U, datum("p1"), datum("p1"), tol=TOL)
    assert r["pass"]


def test_pairing_violating_transform_fails_pairing_only():
    U = ExternalTransform.from_json({"matrix": [[[[0, 3]], []], [[], [[0, 1]]]]})
    r = validate_transform(U, datum("p1"), datum("p1"), tol=TOL)
    assert not r["pass"]
    assert r["checks"]["pairing"]["pass"] is False
    assert r["checks"]["degree"]["pass"]


def test_degree_mixing_transform_fails_degree():
    U = ExternalTransform.from_json({"matrix": [[[[0, 1]], [[0, 1]]], [[], [[0, 1]]]]})
    r = validate_transform(U, datum("p1"), datum("p1"), tol=TOL)
    assert r["checks"]["degree"]["pass"] is False


def test_transform_json_round_trip(tmp_path):
    obj = json.loads((FIXTURES / "p1_identity.json").read_text())
    U = ExternalTransform.from_json(obj)
    assert U.z_lo == 0 and U.z_hi == 0


def test_dimension_mismatch_is_an_error():
    U = load_transform(FIXTURES / "p1_identity.json")
    with pytest.raises(Exception):
        validate_transform(U, datum("p1"), datum("quintic"))
