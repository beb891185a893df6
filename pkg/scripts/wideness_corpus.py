"""Wideness statistics on a seeded PA corpus: vertex test verdicts and decay-probe ratios."""
import argparse
import sys
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from test_acceptance import probe_verdict  # noqa: E402
from toriceq.corpus import random_corpus  # noqa: E402
from toriceq.equidist import is_wide  # noqa: E402
from toriceq.toric import Place, Roof, ToricAdelicDivisor  # noqa: E402


@dataclass
class Config:
    seed: int = 404
    count: int = 100
    dims: tuple = (1, 2)


def run(cfg: Config):
    t0 = time.perf_counter()
    tally = Counter()
    for f in random_corpus(cfg.seed, cfg.count, cfg.dims):
        exact = f.domain.is_full_dim and is_wide(ToricAdelicDivisor(f.domain, [(Place("v"), Roof(f))])).wide
        not_wide, monotone = probe_verdict(f)
        tally[(f.ambient, "wide" if exact else "not wide", "agree" if exact != not_wide else "DISAGREE")] += 1
        tally["non-monotone"] += not monotone
    for key, n in sorted(tally.items(), key=str):
        print(f"{key}: {n}")
    print(f"{cfg.count} functions in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--count", type=int, default=Config.count)
    a = ap.parse_args()
    run(Config(a.seed, a.count))
