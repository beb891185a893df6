"""Rewrite tests/golden/*.txt from the current CLI. Review the diff before committing."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from clihelp import GOLDEN, golden_cases, transcript  # noqa: E402


def main():
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in golden_cases():
        path = GOLDEN / f"{name}.txt"
        path.write_text(transcript(argv), encoding="utf-8")
        print(path.relative_to(GOLDEN.parents[1]))


if __name__ == "__main__":
    main()
