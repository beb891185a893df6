import csv
import io
import json

import pytest
from hypothesis import given

from clihelp import GOLDEN, ROOT, golden_cases, run_cli, transcript
from conftest import roof_divisors
from toriceq.schema import dump_divisor, load_divisor, parse_divisor

CASES = list(golden_cases())
DIVISORS = ["canonical_p1", "example2", "tent", "log2_scenario"]


@pytest.mark.parametrize("name,argv", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv):
    expected = (GOLDEN / f"{name}.txt").read_text(encoding="utf-8")
    assert transcript(argv) == expected


@pytest.mark.parametrize("name,argv", CASES, ids=[c[0] for c in CASES])
def test_deterministic_across_formats(name, argv):
    for fmt in ("text", "csv", "structured"):
        a = run_cli(argv + ["--format", fmt])
        b = run_cli(argv + ["--format", fmt])
        assert a == b


@pytest.mark.parametrize("scen", DIVISORS)
def test_round_trip_is_a_fixed_point(scen):
    once = dump_divisor(load_divisor(ROOT / "scenarios" / f"{scen}.json"))
    twice = dump_divisor(parse_divisor(json.loads(once)))
    assert once == twice


@given(roof_divisors())
def test_round_trip_random(D):
    text = dump_divisor(D)
    E = parse_divisor(json.loads(text))
    assert E == D and dump_divisor(E) == text


def test_analyze_examples():
    code, out, _ = run_cli(["analyze", "scenarios/canonical_p1.json"])
    assert code == 0 and "mu_ess: 0\n" in out and "  nef: yes" in out and "  semipositive: yes" in out
    code, out, _ = run_cli(["analyze", "scenarios/example2.json"])
    assert "Zhang equality attained" in out
    code, out, _ = run_cli(["analyze", "scenarios/tent.json"])
    assert "mu_ess: 1/2\n" in out and "verdict: Zhang inequality strict" in out


def test_equidist_examples():
    code, out, _ = run_cli(["equidist", "scenarios/tent.json"])
    assert code == 0 and "verdict: NOT WIDE" in out and "witness: (1)" in out
    code, out, _ = run_cli(["equidist", "scenarios/canonical_p1.json", "--along", "scenarios/canonical_p1.json"])
    assert "derivative: 0\n" in out
    code, out, _ = run_cli(["equidist", "scenarios/log2_scenario.json", "--poly", "x - 1/2"])
    assert code == 0 and "eligible: yes" in out


def test_dynamics_and_demo_examples():
    code, out, _ = run_cli(["dynamics", "--semiabelian", "1", "1", "2"])
    assert code == 0 and "index_set:\n  - (1, 1)\n" in out
    code, out, _ = run_cli(["dynamics", "scenarios/semiabelian_1_1_2.json", "--nmax", "3", "--format", "structured"])
    rep = json.loads(out)
    assert rep["index_set"] == [["1", "1"]]
    code, out, _ = run_cli(["demo", "scenarios/canonical_p1.json", "--length", "10", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["h_D"] for r in rows] == ["log(2)"] + [f"1/{k}*log(2)" for k in range(2, 11)]
    code, out, _ = run_cli(["demo", "scenarios/log2_scenario.json", "--length", "10", "--format", "structured"])
    rep = json.loads(out)
    assert rep["summary"]["final_gap"] == "1/10*log(2)"


def test_intersect_self_is_chi_volume():
    code, out, _ = run_cli(["intersect", "scenarios/example2.json"])
    assert code == 0 and out == "arithmetic_intersection: 1\n"


def test_out_flag(tmp_path):
    target = tmp_path / "r.txt"
    code, out, _ = run_cli(["analyze", "scenarios/tent.json", "--out", str(target)])
    assert code == 0 and out == ""
    assert target.read_text() == run_cli(["analyze", "scenarios/tent.json"])[1]


def _write(tmp_path, text):
    p = tmp_path / "d.json"
    p.write_text(text)
    return str(p)


def test_exit_codes(tmp_path):
    code, _, err = run_cli(["analyze", _write(tmp_path, '{"dim": 1,\n "mode": "q",\n "support": }')])
    assert code == 2 and "line 3" in err
    assert run_cli(["analyze", str(tmp_path / "missing.json")])[0] == 2
    assert run_cli(["analyze", _write(tmp_path, '{"dim": 1, "mode": "q"}')])[0] == 2
    bad = {
        "dim": 1,
        "mode": "q",
        "support": {"polytope": [["0"], ["1"]]},
        "places": [
            {
                "name": "inf",
                "kind": "archimedean",
                "weight": "1",
                "datum": {
                    "type": "metric",
                    "combine": "max",
                    "pieces": [{"gradient": ["0"], "constant": "0"}, {"gradient": ["1"], "constant": "0"}],
                },
            }
        ],
    }
    code, _, err = run_cli(["analyze", _write(tmp_path, json.dumps(bad))])
    assert code == 3 and "inf" in err
    code, _, err = run_cli(["demo", "scenarios/example2.json"])
    assert code == 4
    code, _, _ = run_cli(["demo", "scenarios/tent.json"])
    assert code == 4
    code, _, _ = run_cli(["equidist", "scenarios/canonical_p1.json", "--poly", "x +* 2"])
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        run_cli(["analyze"])
    assert exc.value.code == 2
