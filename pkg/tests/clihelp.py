"""In-process CLI runner and the golden case table (shared with scripts/regen_golden.py)."""
import contextlib
import io
import os
from pathlib import Path

from toriceq.cli import main

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ("canonical_p1", "example2", "tent", "log2_scenario")
COMMANDS = ("analyze", "equidist", "demo")
GOLDEN = ROOT / "tests" / "golden"


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    cwd = os.getcwd()
    os.chdir(ROOT)  # golden files record relative paths
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(list(argv))
    finally:
        os.chdir(cwd)
    return code, out.getvalue(), err.getvalue()


def golden_cases():
    for cmd in COMMANDS:
        for scen in SCENARIOS:
            yield f"{cmd}__{scen}", [cmd, f"scenarios/{scen}.json"]


def transcript(argv) -> str:
    code, out, err = run_cli(argv)
    return f"$ toriceq {' '.join(argv)}\nexit: {code}\n--- stdout\n{out}--- stderr\n{err}"
