"""Seeded random instances: rational polytopes, PA concave functions, toric divisors."""
from __future__ import annotations

import random
from fractions import Fraction

from .concave import PAConcave
from .exactgeom import Polytope, hull
from .toric import Place, Roof, ToricAdelicDivisor

__all__ = ["rational", "random_polytope", "random_pa", "random_roof_divisor", "random_corpus"]


def rational(rng: random.Random, lo=-3, hi=3, dens=(1, 2, 3)) -> Fraction:
    den = rng.choice(dens)
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_polytope(rng: random.Random, d: int, npts: int | None = None, full=True, span=3) -> Polytope:
    while True:
        n = npts or rng.randint(d + 1, d + 4)
        pts = [tuple(rational(rng, -span, span) for _ in range(d)) for _ in range(n)]
        P = hull(pts)
        if not full or P.is_full_dim:
            return P


def random_pa(rng: random.Random, d: int, domain: Polytope | None = None, kind: str | None = None) -> PAConcave:
    """Random PA concave function.

    ``kind``: "pieces" (min of random affine forms), "nodes" (random heights
    at random points), "tent" (kink at an interior point), "plateau"
    (truncated at a level so the maximum is attained on a full-dimensional set).
    """
    kind = kind or rng.choice(["pieces", "nodes", "tent", "plateau"])
    C = domain or random_polytope(rng, d)
    if kind == "nodes":
        verts = list(C.vertices)
        pts = verts + [tuple(sum(v[i] for v in verts) / len(verts) for i in range(d))]
        for _ in range(rng.randint(0, 3)):
            w = [Fraction(rng.randint(1, 4)) for _ in verts]
            s = sum(w)
            pts.append(tuple(sum(wi * v[i] for wi, v in zip(w, verts)) / s for i in range(d)))
        return PAConcave.from_nodes((p, rational(rng, -2, 2)) for p in dict.fromkeys(pts))
    pieces = []
    for _ in range(rng.randint(1, 4)):
        pieces.append((tuple(rational(rng, -2, 2, (1, 2)) for _ in range(d)), rational(rng, -2, 2)))
    if kind == "tent":
        # min of forms vanishing at a centroid-like point with gradients summing around 0
        verts = C.vertices
        x0 = tuple(sum(v[i] for v in verts) / len(verts) for i in range(d))
        grads = [tuple(rational(rng, -2, 2, (1,)) for _ in range(d)) for _ in range(rng.randint(1, 3))]
        grads.append(tuple(-sum(g[i] for g in grads) for i in range(d)))
        c = rational(rng, -1, 1)
        pieces = [(g, c - sum(gi * xi for gi, xi in zip(g, x0))) for g in grads]
    f = PAConcave.from_pieces(C, pieces)
    if kind == "plateau":
        from .concave import maximize

        vals = sorted({h for _, h in f.nodes})
        mu = maximize(f).mu
        lo = vals[0]
        if lo < mu:
            level = lo + (mu - lo) * Fraction(rng.randint(1, 3), 4)
            f = PAConcave.from_pieces(C, [(p.gradient, p.constant) for p in f.pieces] + [((0,) * d, level)])
    return f


def random_roof_divisor(rng: random.Random, d: int, nplaces: int | None = None) -> ToricAdelicDivisor:
    C = random_polytope(rng, d)
    k = nplaces or rng.randint(1, 3)
    places = []
    for i in range(k):
        w = Fraction(rng.randint(1, 3), rng.randint(1, 2))
        places.append((Place(f"v{i}", weight=w), Roof(random_pa(rng, d, C))))
    return ToricAdelicDivisor(C, places)


def random_corpus(seed: int, count: int, dims=(1, 2)) -> list[PAConcave]:
    rng = random.Random(seed)
    return [random_pa(rng, rng.choice(dims)) for _ in range(count)]
