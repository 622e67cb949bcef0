"""CLI reports against frozen golden files.

Set KINTEGRAL_REGEN=1 to rewrite tests/golden after an intended change.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import mpmath
import pytest

from conftest import FIXTURES
from kintegral import __version__
from kintegral.cli import main, run

GOLDEN = Path(__file__).parent / "golden"
F = str(FIXTURES)

CASES = {
    "inertia_c3z3": ["inertia", "--spec", f"{F}/c3z3.json"],
    "inertia_c2z2": ["inertia", "--spec", f"{F}/c2z2.json"],
    "inertia_p12": ["inertia", "--spec", f"{F}/p12.json"],
    "pairing_p2": ["pairing", "--spec", f"{F}/p2.json"],
    "pairing_c2z4": ["pairing", "--spec", f"{F}/c2z4.json"],
    "gamma_p1": ["gamma", "--spec", f"{F}/p1.json", "--class", "T"],
    "todd_p2": ["todd", "--spec", f"{F}/p2.json", "--class", "T"],
    "chern_c2z2_reg": ["chern", "--spec", f"{F}/c2z2.json", "--class", "sky:reg"],
    "chi_p2_o2": ["chi", "--spec", f"{F}/p2.json", "--class", "O(2)"],
    "chi_p12_o3": ["chi", "--spec", f"{F}/p12.json", "--class", "O(3)"],
    "psi_p1_pt": ["psi", "--spec", f"{F}/p1.json", "--class", "pt"],
    "mukai_p2": ["mukai-check", "--spec", f"{F}/p2.json", "--class", "O(1)", "--class2", "O(-1)"],
    "galois_p1": ["galois", "--spec", f"{F}/p1.json"],
    "galois_c2z3": ["galois", "--spec", f"{F}/c2z3.json"],
    "monodromy_p1": ["monodromy", "--spec", f"{F}/p1.json"],
    "hl_c3z3": ["hl-check", "--spec", f"{F}/c3z3.json"],
    "hl_pair": ["hl-check", "--pair", f"{F}/hl_pair.json"],
    "jordan_pair": ["jordan", "--pair", f"{F}/hl_pair.json"],
    "jordan_quintic": ["jordan", "--spec", f"{F}/quintic.json"],
    "qprod_p1": ["qprod", "--spec", f"{F}/p1.json", "--correlators", f"{F}/p1_table.json", "--order", "3"],
    "wdvv_p2": ["wdvv", "--spec", f"{F}/p2.json", "--correlators", f"{F}/p2_table.json", "--order", "6"],
    "flatness_quintic": ["flatness", "--spec", f"{F}/quintic.json", "--correlators", f"{F}/quintic_table.json",
                         "--order", "3", "--directions", ""],
    "lfun_p1": ["lfun", "--spec", f"{F}/p1.json", "--correlators", f"{F}/p1_table.json", "--order", "2"],
    "jfun_c3z3": ["jfun", "--spec", f"{F}/c3z3.json", "--correlators", f"{F}/c3z3_table.json", "--order", "6",
                  "--directions", "1"],
    "flatcoord_c3z3": ["flatcoord", "--spec", f"{F}/c3z3.json", "--correlators", f"{F}/c3z3_table.json",
                       "--order", "6", "--directions", "1"],
    "charge_c2z3": ["charge", "--spec", f"{F}/c2z3.json", "--correlators", f"{F}/c2_empty_table.json",
                    "--order", "1", "--directions", "1,2", "--class", "sky:rho_1"],
    "charge_c3z3": ["charge", "--spec", f"{F}/c3z3.json", "--correlators", f"{F}/c3z3_table.json", "--order", "6",
                    "--directions", "1", "--class", "sky:rho_1", "--pots", f"{F}/c3z3_potential.json"],
    "period_quintic": ["period", "--spec", f"{F}/quintic.json", "--correlators", f"{F}/quintic_table.json",
                       "--order", "3", "--directions", "", "--class", "pt"],
    "predict_localp2": ["predict", "--spec", f"{F}/c3z3.json", "--fm", f"{F}/localp2.json",
                        "--pots", f"{F}/c3z3_potential.json", "--order", "8"],
    "predict_a1": ["predict", "--spec", f"{F}/c2z2.json", "--fm", f"{F}/a1.json", "--order", "2"],
    "validate_u_p1": ["validate-u", "--spec", f"{F}/p1.json", "--u", f"{F}/p1_identity.json"],
}


def same(a, b) -> bool:
    """Structural equality; numeric strings agree to 40 digits."""
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(same(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, str) and isinstance(b, str) and a != b:
        try:
            x, y = mpmath.mpmathify(a), mpmath.mpmathify(b)
        except (ValueError, TypeError):
            return False
        return abs(x - y) <= mpmath.mpf("1e-40") * max(1, abs(x))
    return a == b


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, text = run(CASES[name])
    path = GOLDEN / f"{name}.json"
    if os.environ.get("KINTEGRAL_REGEN"):
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(text)
    assert code == 0, text
    assert same(json.loads(text), json.loads(path.read_text()))


def test_every_fixture_has_a_golden_report():
    used = {Path(a).name for argv in CASES.values() for a in argv if a.endswith(".json")}
    assert {p.name for p in FIXTURES.glob("*.json")} <= used


def test_reports_are_byte_identical():
    argv = CASES["jfun_c3z3"]
    assert run(argv)[1] == run(argv)[1]


def test_digest_ignores_paths(tmp_path):
    copy = tmp_path / "spec.json"
    copy.write_text((FIXTURES / "p1.json").read_text())
    a = json.loads(run(["pairing", "--spec", f"{F}/p1.json"])[1])
    b = json.loads(run(["pairing", "--spec", str(copy)])[1])
    assert a["inputs_digest"] == b["inputs_digest"]


# -- exit codes ------------------------------------------------------------------------

def test_failed_check_exits_one(tmp_path):
    table = json.loads((FIXTURES / "p2_table.json").read_text())
    # shift N_2 in the <pt,...,pt> entry of degree 2
    for e in table["entries"]:
        if e["d"] == [2] and set(e["insertions"]) == {2}:
            e["value"] = str(int(e["value"]) + 1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(table))
    code, text = run(["wdvv", "--spec", f"{F}/p2.json", "--correlators", str(bad), "--order", "6",
                      "--directions", "2"])
    report = json.loads(text)
    assert code == 1 and report["pass"] is False


def test_schema_violation_exits_two_with_pointer(tmp_path):
    obj = json.loads((FIXTURES / "c3z3.json").read_text())
    obj["weights"][0] = "one"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, text = run(["inertia", "--spec", str(bad)])
    assert code == 2 and json.loads(text)["pointer"] == "/weights/0"


def test_unreadable_input_exits_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["inertia", "--spec", str(bad)])[0] == 2
    assert run(["inertia", "--spec", str(tmp_path / "absent.json")])[0] == 2


def test_missing_correlators_exit_two():
    code, text = run(["wdvv", "--spec", f"{F}/p2.json", "--correlators", f"{F}/p2_table.json", "--order", "16"])
    err = json.loads(text)
    assert code == 2 and err["missing"]


def test_period_off_the_calabi_yau_locus_exits_two():
    code, _ = run(["period", "--spec", f"{F}/p1.json", "--correlators", f"{F}/p1_table.json", "--order", "2"])
    assert code == 2


def test_missing_flag_exits_two():
    code, text = run(["qprod", "--spec", f"{F}/p1.json"])
    assert code == 2 and "--correlators" in json.loads(text)["error"]


def test_main_writes_errors_to_stderr(capsys):
    assert main(["inertia", "--spec", "/nonexistent.json"]) == 2
    out = capsys.readouterr()
    assert out.out == "" and "error" in json.loads(out.err)


def test_out_flag_writes_file(tmp_path):
    target = tmp_path / "r.json"
    assert main(["pairing", "--spec", f"{F}/p1.json", "--out", str(target)]) == 0
    assert json.loads(target.read_text())["command"] == "pairing"


# -- presentation ----------------------------------------------------------------------

def test_schema_dump():
    code, text = run(["--schema", "fm"])
    assert code == 0 and json.loads(text)["type"] == "object"


def test_table_rendering():
    code, text = run(["chi", "--spec", f"{F}/p2.json", "--class", "O(2)", "--table"])
    assert code == 0 and any(line.startswith("pass") for line in text.splitlines())


def test_timing_is_opt_in():
    assert "timing_seconds" not in json.loads(run(CASES["pairing_p2"])[1])
    assert "timing_seconds" in json.loads(run(CASES["pairing_p2"] + ["--timing"])[1])


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "kintegral.cli", "--version"], capture_output=True, text=True)
    assert out.stdout.strip() == f"kintegral {__version__}"
