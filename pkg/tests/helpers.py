"""Shared instance generators for the test-suite."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from eppa.errors import TriangleViolation
from eppa.metric import validate_space
from eppa.scalar import Scalar

CORPUS_DISTANCES = (Scalar(1), Scalar(Fraction(3, 2)), Scalar(2))


def random_space(rng: random.Random, max_points: int = 4):
    """A random metric space on 2..max_points points with distances in {1, 3/2, 2}."""
    while True:
        n = rng.randint(2, max_points)
        d = [[Scalar(0)] * n for _ in range(n)]
        for i, j in itertools.combinations(range(n), 2):
            d[i][j] = d[j][i] = rng.choice(CORPUS_DISTANCES)
        try:
            return validate_space([f"p{i}" for i in range(n)], d)
        except TriangleViolation:
            continue


def random_partial_isometry(rng: random.Random, space, max_domain: int = 2) -> dict:
    n = len(space)
    while True:
        k = rng.randint(1, min(max_domain, n))
        dom = rng.sample(range(n), k)
        img = rng.sample(range(n), k)
        m = dict(zip(dom, img))
        if all(space.d[a][b] == space.d[m[a]][m[b]] for a, b in itertools.combinations(dom, 2)):
            return m


def metric_corpus(seed: int, count: int):
    """Deterministic list of (space, maps) instances: at most 4 points, at most 2 maps."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        space = random_space(rng)
        maps = [random_partial_isometry(rng, space) for _ in range(rng.randint(1, 2))]
        out.append((space, maps))
    return out


def metric_envelope(space, maps) -> dict:
    return {
        "kind": "metric",
        "payload": {
            "points": list(space.labels),
            "d": [[str(v) for v in row] for row in space.d],
            "partial_isometries": [{"map": {space.labels[a]: space.labels[b] for a, b in m.items()}}
                                   for m in maps],
        },
        "options": {},
    }


E1_ENVELOPE = {
    "kind": "metric",
    "payload": {"points": ["x", "y"], "d": [["0", "1"], ["1", "0"]],
                "partial_isometries": [{"map": {"x": "y"}}]},
    "options": {},
}


# ----------------------------------------------------------------------
# measure algebras

SQRT2 = Scalar(0, 1, 2)


def rational_atom_multisets(max_atoms: int = 4, max_den: int = 12):
    """Every multiset of at most max_atoms fractions with denominators <= max_den summing to 1."""
    fracs = sorted({Fraction(p, q) for q in range(1, max_den + 1) for p in range(1, q + 1)})
    allowed = set(fracs)

    def grow(k, total, lo):
        if k == 1:
            if total in allowed and total >= lo:
                yield (total,)
            return
        for f in fracs:
            if f < lo:
                continue
            if f * k > total:
                break
            for rest in grow(k - 1, total - f, f):
                yield (f,) + rest

    return [ms for k in range(1, max_atoms + 1) for ms in grow(k, Fraction(1), Fraction(0))]


def discrete_algebra(measures):
    from eppa.malg import Algebra, CellSpace
    return Algebra.discrete(CellSpace({f"a{i}": m for i, m in enumerate(measures)}))


def random_quadratic_algebra(rng: random.Random):
    """2..4 atoms with measures in Q(sqrt 2), at least one irrational, often with a repeated measure."""
    while True:
        k = rng.randint(2, 4)
        parts = [Scalar(Fraction(rng.randint(1, 6), rng.choice([8, 12, 16])))
                 + SQRT2 * Fraction(rng.randint(-2, 2), rng.choice([16, 32])) for _ in range(k - 1)]
        if k >= 3 and rng.random() < 0.5:
            parts[1] = parts[0]
        last = Scalar(1)
        for p in parts:
            last = last - p
        ms = parts + [last]
        if all(m.sign() > 0 for m in ms) and not all(m.is_rational for m in ms):
            return discrete_algebra(ms)


def random_cell_automorphism(rng: random.Random):
    """A partition P of a cell space with repeated cell measures and a random measure-preserving g."""
    from eppa.malg import Algebra, CellSpace
    while True:
        values = [Scalar(Fraction(1, rng.choice([8, 12, 16]))) + SQRT2 * Fraction(rng.randint(-1, 1), 64)
                  for _ in range(rng.randint(1, 3))]
        counts = [rng.randint(1, 4) for _ in values]
        used = Scalar(0)
        for v, c in zip(values, counts):
            used = used + v * c
        rest = Scalar(1) - used
        if rest.sign() <= 0:
            continue
        measures = {}
        for vi, (v, c) in enumerate(zip(values, counts)):
            for j in range(c):
                measures[f"v{vi}_{j}"] = v
        measures["rest"] = rest
        space = CellSpace(measures)
        names = list(space)
        rng.shuffle(names)
        k = rng.randint(1, min(4, len(names)))
        cuts = sorted(rng.sample(range(1, len(names)), k - 1))
        atoms = [frozenset(names[a:b]) for a, b in zip([0] + cuts, cuts + [len(names)])]
        P = Algebra(space, tuple(atoms))
        g = {}
        for vi, c in enumerate(counts):
            group = [f"v{vi}_{j}" for j in range(c)]
            image = group[:]
            rng.shuffle(image)
            g.update(zip(group, image))
        g["rest"] = "rest"
        return P, g


# ----------------------------------------------------------------------
# inner-product spaces


def random_gram(rng: random.Random, n: int):
    """L L^T for a random integer lower-triangular L with nonzero diagonal."""
    L = [[Scalar(rng.randint(-2, 2)) if j < i else (Scalar(rng.choice([1, 1, 2])) if j == i else Scalar(0))
          for j in range(n)] for i in range(n)]
    return [[sum((L[i][k] * L[j][k] for k in range(n)), Scalar(0)) for j in range(n)] for i in range(n)]


def random_vector(rng: random.Random, n: int, quadratic: bool = False):
    v = [Scalar(rng.randint(-3, 3)) for _ in range(n)]
    if quadratic:
        v[rng.randrange(n)] = v[0] + SQRT2 * rng.randint(1, 2)
    return tuple(v)


def random_independent(rng: random.Random, n: int, k: int, quadratic: bool = False):
    from eppa.hilbert import rank
    while True:
        vs = [random_vector(rng, n, quadratic and rng.random() < 0.5) for _ in range(k)]
        if rank(vs) == k:
            return vs


def random_partial_map(rng: random.Random, n: int):
    """A random positive-definite space and a Gram-preserving map on k <= n independent vectors."""
    from eppa.hilbert import QuadraticSpace, mat_vec, reflection
    quadratic = rng.random() < 0.3
    space = QuadraticSpace.standard(n) if quadratic else QuadraticSpace(random_gram(rng, n))
    k = rng.randint(1, n)
    domain = random_independent(rng, n, k, quadratic)
    images = list(domain)
    for _ in range(rng.randint(1, 3)):
        w = random_vector(rng, n, quadratic)
        if all(x == 0 for x in w):
            continue
        r = reflection(space, w)
        images = [mat_vec(r, v) for v in images]
    return space, domain, images
