"""Finite metric spaces and extension of partial isometries.

Given a finite metric space X and partial isometries phi_1..phi_n,
:func:`extend_isometries` builds a finite metric space Y, an isometric
embedding X -> Y and isometries of Y extending each phi_i.  Y is the set of
classes of X x Q under the relation induced by the partial maps, where Q is
a finite quotient of the free group F_n that keeps every nontrivial short
chain away from the identity.
"""

from __future__ import annotations

import functools
import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from . import freegroup as fg
from .errors import (
    InvariantError,
    MalformedInputError,
    TriangleViolation,
    UnsupportedInstanceError,
)
from .scalar import Scalar, as_scalar, format_scalar

__all__ = [
    "FiniteMetricSpace",
    "Chain",
    "ExtensionResult",
    "validate_space",
    "validate_partial_isometry",
    "reachable_pairs",
    "enumerate_chains",
    "chain_distance",
    "cancel_step",
    "extend_isometries",
    "chain_oracle",
    "verify_extension",
    "amalgamate",
    "isometries_of",
    "check_independence",
]


@dataclass(frozen=True)
class FiniteMetricSpace:
    labels: tuple
    d: tuple  # tuple of tuples of Scalar

    def __len__(self):
        return len(self.labels)

    @property
    def points(self) -> range:
        return range(len(self.labels))

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise MalformedInputError(f"unknown point {label!r}") from None

    @property
    def delta(self) -> Scalar | None:
        """Minimum nonzero distance; None stands for +infinity on one point."""
        vals = [self.d[i][j] for i in self.points for j in self.points if i < j]
        return min(vals) if vals else None

    @property
    def diameter(self) -> Scalar:
        vals = [self.d[i][j] for i in self.points for j in self.points if i < j]
        return max(vals) if vals else Scalar(0)

    @property
    def M(self) -> int:
        """Least integer M with M*delta > diameter."""
        delta = self.delta
        if delta is None:
            return 1
        m = 1
        while m * delta <= self.diameter:
            m += 1
        return m

    def subspace(self, labels) -> "FiniteMetricSpace":
        idx = [self.index(x) for x in labels]
        return FiniteMetricSpace(tuple(labels), tuple(tuple(self.d[i][j] for j in idx) for i in idx))

    def to_json(self) -> dict:
        return {"points": list(self.labels), "d": [[format_scalar(v) for v in row] for row in self.d]}


def validate_space(labels, d=None) -> FiniteMetricSpace:
    """Check the metric axioms exactly and return the space.

    Accepts either ``(labels, matrix)`` or a single mapping with ``points``
    and ``d`` keys.
    """
    if d is None:
        if isinstance(labels, FiniteMetricSpace):
            labels, d = labels.labels, labels.d
        else:
            labels, d = labels["points"], labels["d"]
    labels = tuple(labels)
    n = len(labels)
    if n == 0:
        raise MalformedInputError("empty metric space")
    if len(set(labels)) != n:
        raise MalformedInputError("point labels are not distinct")
    if len(d) != n or any(len(row) != n for row in d):
        raise MalformedInputError("distance matrix is not square")
    mat = tuple(tuple(as_scalar(v) for v in row) for row in d)
    for i in range(n):
        if mat[i][i] != 0:
            raise MalformedInputError(f"d({labels[i]},{labels[i]}) is not zero")
        for j in range(n):
            if mat[i][j] != mat[j][i]:
                raise MalformedInputError(f"distance between {labels[i]} and {labels[j]} is not symmetric")
            if i != j and mat[i][j].sign() <= 0:
                raise MalformedInputError(f"distance between {labels[i]} and {labels[j]} is not positive")
    for i, j, k in itertools.product(range(n), repeat=3):
        if mat[i][k] > mat[i][j] + mat[j][k]:
            raise TriangleViolation((labels[i], labels[j], labels[k]))
    return FiniteMetricSpace(labels, mat)


def validate_partial_isometry(space: FiniteMetricSpace, mapping: Mapping) -> dict:
    """Convert a label or index mapping to an index dict and check it."""
    out = {}
    for k, v in mapping.items():
        i = k if isinstance(k, int) else space.index(k)
        j = v if isinstance(v, int) else space.index(v)
        if not (0 <= i < len(space) and 0 <= j < len(space)):
            raise MalformedInputError(f"map entry {k}->{v} out of range")
        out[i] = j
    if len(set(out.values())) != len(out):
        raise MalformedInputError("partial isometry is not injective")
    for a, b in itertools.combinations(out, 2):
        if space.d[a][b] != space.d[out[a]][out[b]]:
            raise MalformedInputError(
                f"map does not preserve d({space.labels[a]},{space.labels[b]})")
    return out


# ----------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Chain:
    """Chain z_0; (z_1, z_1'), ..., (z_m, z_m') from z_0 to z_m."""

    start: int
    pairs: tuple

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def end(self) -> int:
        return self.pairs[-1][0]

    def z(self, i: int) -> int:
        return self.start if i == 0 else self.pairs[i - 1][0]

    def zp(self, i: int) -> int:
        return self.pairs[i - 1][1]


def chain_distance(chain: Chain, space: FiniteMetricSpace) -> Scalar:
    total = Scalar(0)
    for i in range(chain.m):
        total = total + space.d[chain.z(i)][chain.zp(i + 1)]
    return total


def reachable_pairs(maps, npoints: int) -> list:
    aut = fg.OrbitAutomaton(maps, npoints)
    return [(z, zp) for z in range(npoints) for zp in range(npoints) if aut.reachable(z, zp)]


def enumerate_chains(space: FiniteMetricSpace, maps, x: int, y: int, max_m: int) -> Iterator[Chain]:
    """All chains from x to y with 1 <= m <= max_m, ordered by m then pairs."""
    pairs = reachable_pairs(maps, len(space))
    last = [p for p in pairs if p[0] == y]
    for m in range(1, max_m + 1):
        for head in itertools.product(pairs, repeat=m - 1):
            for tail in last:
                yield Chain(x, head + (tail,))


def is_realization(maps, chain: Chain, words) -> bool:
    return len(words) == chain.m and all(
        fg.apply_word(maps, w, z) == zp for w, (z, zp) in zip(words, chain.pairs))


def cancel_step(maps, chain: Chain, words, i: int):
    """Remove a cancelling letter between realization words i and i+1 (1-based).

    Requires ``words[i-1] = v a`` and ``words[i] = a^-1 v'``.  Returns the
    new chain and realization; distance and product are unchanged.
    """
    if not 1 <= i < chain.m:
        raise MalformedInputError("cancellation index out of range")
    wi, wj = tuple(words[i - 1]), tuple(words[i])
    if not wi or not wj or wj[0] != -wi[-1]:
        raise MalformedInputError("words do not cancel at this position")
    a = wi[-1]
    vi, vj = wi[:-1], wj[1:]
    zi, _ = chain.pairs[i - 1]
    zj, _ = chain.pairs[i]
    new_zi = fg.apply_word(maps, (a,), zi)
    new_zjp = fg.apply_word(maps, vj, zj)
    if new_zi is None or new_zjp is None:
        raise MalformedInputError("words are not a realization of the chain")
    pairs = list(chain.pairs)
    pairs[i - 1] = (new_zi, pairs[i - 1][1])
    pairs[i] = (pairs[i][0], new_zjp)
    new_words = list(words)
    new_words[i - 1] = vi
    new_words[i] = vj
    return Chain(chain.start, tuple(pairs)), tuple(tuple(w) for w in new_words)


# ----------------------------------------------------------------------
# the extension


@dataclass
class ExtensionResult:
    space: FiniteMetricSpace
    maps: list
    quotient: fg.FiniteQuotient
    elements: list
    classes: list  # each a sorted tuple of (point, element index)
    dY: "DistanceTable"
    perms: list  # per generator, class index -> class index
    embedding: list  # point -> class index
    certificate: dict = field(default_factory=dict)

    def class_of(self, point: int, element_index: int) -> int:
        return self._lookup[(point, element_index)]

    def __post_init__(self):
        self._lookup = {member: k for k, cls in enumerate(self.classes) for member in cls}


def _signatures(pairs, max_m: int):
    for m in range(1, max_m + 1):
        yield from itertools.product(pairs, repeat=m)


def classify_chains(space, maps, max_m: int | None = None) -> tuple:
    """Triviality of every pair sequence of length <= M.

    Returns (trivial, nontrivial): ``trivial`` maps signatures to witnesses.
    """
    max_m = space.M if max_m is None else max_m
    npoints = len(space)
    pairs = reachable_pairs(maps, npoints)
    trivial = {}
    nontrivial = []
    if not maps:
        return {s: tuple(() for _ in s) for s in _signatures(pairs, max_m)}, []
    for sig in _signatures(pairs, max_m):
        res = fg.benois_trivial(maps, sig, npoints)
        if res.trivial:
            trivial[sig] = res.witness
        else:
            nontrivial.append(sig)
    return trivial, nontrivial


def find_quotient(space, maps, nontrivial, budget_order=fg.DEFAULT_BUDGET_ORDER,
                  max_degree=fg.DEFAULT_MAX_DEGREE, joint_degree=None):
    """Finite quotient separating every signature in ``nontrivial``.

    A single symmetric-group quotient separating everything is tried first
    (up to ``joint_degree``, default ``max_degree``); otherwise signatures are separated one at a
    time, skipping those already separated by an earlier factor, and the
    factors are combined into a direct product.
    """
    n = len(maps)
    npoints = len(space)
    log = {"joint": None, "factors": []}
    if not nontrivial:
        return fg.FiniteQuotient.trivial(n), log, []
    try:
        joint_degree = max_degree if joint_degree is None else min(joint_degree, max_degree)
        res = fg.search_quotient(maps, nontrivial, n, joint_degree, npoints, budget_order)
        log["joint"] = {"tried_degrees": res.tried_degrees, "candidates": res.candidates_tried}
        factors = [res.quotient]
        log["factors"].append({"found_for": None, "tried_degrees": res.tried_degrees,
                               "quotient": res.quotient.to_json()})
        separated_by = [0] * len(nontrivial)
    except fg.SeparationBudgetError:
        factors = []
        separated_by = []
        for sig in nontrivial:
            hit = None
            for k, q in enumerate(factors):
                if not fg.product_contains_identity(maps, q, sig, npoints, budget_order):
                    hit = k
                    break
            if hit is None:
                res = fg.search_quotient(maps, [sig], n, max_degree, npoints, budget_order)
                factors.append(res.quotient)
                log["factors"].append({"found_for": [list(p) for p in sig], "tried_degrees": res.tried_degrees,
                                       "quotient": res.quotient.to_json()})
                hit = len(factors) - 1
            separated_by.append(hit)
    quotient = fg.combine_quotients(factors, n, budget_order)
    return quotient, log, separated_by


def equivalence_classes(space, maps, quotient, elements):
    index = {g: k for k, g in enumerate(elements)}
    parent = {}

    def find(a):
        while parent.get(a, a) != a:
            parent[a] = parent.get(parent[a], parent[a])
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    for i, m in enumerate(maps):
        gen_inv = quotient.letter_image(-(i + 1))
        for x, y in m.items():
            for k, g in enumerate(elements):
                # (x, w) ~ (phi_i(x), w a_i^-1)
                union((x, k), (y, index[quotient.mul(g, gen_inv)]))
    groups = {}
    for x in space.points:
        for k in range(len(elements)):
            groups.setdefault(find((x, k)), []).append((x, k))
    classes = sorted(tuple(sorted(v)) for v in groups.values())
    return classes


_by_value = functools.cmp_to_key(lambda u, v: (u - v).sign())


class DistanceTable:
    """Square matrix of exact distances stored as ranks into sorted distinct values.

    ``table[a][b]`` returns a :class:`Scalar`; ``ranks`` is an integer array
    and ``values`` lists the distinct entries in increasing order.
    """

    def __init__(self, values: Sequence[Scalar], ranks):
        self.values = list(values)
        self.ranks = np.asarray(ranks, dtype=np.int64)

    @classmethod
    def from_rows(cls, rows) -> "DistanceTable":
        rows = [[as_scalar(v) for v in row] for row in rows]
        values = sorted({v for row in rows for v in row}, key=_by_value)
        rank = {v: r for r, v in enumerate(values)}
        ranks = np.array([[rank[v] for v in row] for row in rows], dtype=np.int64).reshape(len(rows), len(rows))
        return cls(values, ranks)

    def __len__(self):
        return len(self.ranks)

    def __getitem__(self, a):
        if isinstance(a, tuple):
            return self.values[self.ranks[a]]
        return [self.values[r] for r in self.ranks[a]]

    def sum_table(self):
        """T[i, j] = largest rank whose value is at most values[i] + values[j]."""
        values = self.values
        T = np.empty((len(values), len(values)), dtype=np.int64)
        for i, u in enumerate(values):
            for j, v in enumerate(values):
                T[i, j] = _count_at_most(values, u + v) - 1
        return T

    def to_rows(self) -> list:
        return [[format_scalar(self.values[r]) for r in row] for row in self.ranks.tolist()]


def _count_at_most(values, s) -> int:
    lo, hi = 0, len(values)
    while lo < hi:
        mid = (lo + hi) // 2
        if values[mid] <= s:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _shortest_paths(nclasses: int, adj: list, cap: Scalar) -> DistanceTable:
    """Exact all-pairs shortest paths, capped at ``cap``.

    Rational weights are scaled to integers and handed to scipy's Dijkstra;
    floating point is exact there while every path length stays below 2**53.
    Quadratic weights use a pure-Python Dijkstra on exact scalars.
    """
    weights = [w for row in adj for w in row.values()]
    if all(w.is_rational for w in weights) and cap.is_rational:
        scale = math.lcm(cap.a.denominator, *(w.a.denominator for w in weights))
        cap_int = int(cap.a * scale)
        if cap_int * max(nclasses, 1) < 2 ** 52:
            rows, cols, data = [], [], []
            for v, row in enumerate(adj):
                for u, w in row.items():
                    rows.append(v)
                    cols.append(u)
                    data.append(float(w.a * scale))
            graph = csr_matrix((data, (rows, cols)), shape=(nclasses, nclasses))
            dist = csgraph_dijkstra(graph, directed=True, limit=cap_int + 0.5)
            dist = np.where(np.isinf(dist), cap_int, dist)
            ints = np.minimum(np.rint(dist).astype(np.int64), cap_int)
            uniq, ranks = np.unique(ints, return_inverse=True)
            values = [Scalar(Fraction(int(v), scale)) for v in uniq]
            return DistanceTable(values, ranks.reshape(nclasses, nclasses))
    out = []
    for s in range(nclasses):
        dist = {s: Scalar(0)}
        heap = [(_Key(dist[s]), s)]
        done = set()
        while heap:
            dv, v = heapq.heappop(heap)
            dv = dv.value
            if v in done:
                continue
            done.add(v)
            if dv >= cap:
                break
            for u, w in adj[v].items():
                nd = dv + w
                if u not in dist or nd < dist[u]:
                    dist[u] = nd
                    heapq.heappush(heap, (_Key(nd), u))
        out.append([cap if t not in dist or dist[t] > cap else dist[t] for t in range(nclasses)])
    return DistanceTable.from_rows(out)


@functools.total_ordering
class _Key:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __lt__(self, other):
        return self.value < other.value

    def __eq__(self, other):
        return self.value == other.value


def extend_isometries(space: FiniteMetricSpace, maps: Sequence[Mapping], budget_order: int = fg.DEFAULT_BUDGET_ORDER,
                      max_degree: int = fg.DEFAULT_MAX_DEGREE, joint_degree: int | None = None) -> ExtensionResult:
    """Finite metric extension on which every partial isometry becomes total."""
    maps = [validate_partial_isometry(space, m) for m in maps]
    n = len(maps)
    M = space.M
    trivial, nontrivial = classify_chains(space, maps, M)
    quotient, qlog, separated_by = find_quotient(space, maps, nontrivial, budget_order, max_degree, joint_degree)
    elements = quotient.elements(budget_order)
    classes = equivalence_classes(space, maps, quotient, elements)
    lookup = {member: k for k, cls in enumerate(classes) for member in cls}

    cap = space.diameter
    adj = [dict() for _ in classes]
    for k in range(len(elements)):
        for p in space.points:
            cp = lookup[(p, k)]
            for q in space.points:
                if p == q:
                    continue
                cq = lookup[(q, k)]
                if cp == cq:
                    raise InvariantError("two points of one fibre collapsed", (space.labels[p], space.labels[q], k))
                w = space.d[p][q]
                if cq not in adj[cp] or w < adj[cp][cq]:
                    adj[cp][cq] = w
    dY = _shortest_paths(len(classes), adj, cap)

    e_index = 0
    embedding = [lookup[(x, e_index)] for x in space.points]
    perms = []
    for i in range(n):
        gen = quotient.letter_image(i + 1)
        perm = []
        for cls in classes:
            targets = {lookup[(x, quotient.index(quotient.mul(gen, elements[k])))] for x, k in cls}
            if len(targets) != 1:
                raise InvariantError("generator action is not well defined on a class", cls)
            perm.append(targets.pop())
        perms.append(perm)

    certificate = {
        "M": M,
        "delta": None if space.delta is None else format_scalar(space.delta),
        "diameter": format_scalar(cap),
        "chains_considered": len(trivial) + len(nontrivial),
        "trivial": [{"pairs": [list(p) for p in sig], "witness": [list(w) for w in wit]}
                    for sig, wit in trivial.items()],
        "nontrivial": [{"pairs": [list(p) for p in sig], "separated_by": separated_by[k]}
                       for k, sig in enumerate(nontrivial)],
        "separation": qlog,
        "quotient": quotient.to_json(),
        "quotient_order": len(elements),
    }
    result = ExtensionResult(space, maps, quotient, elements, classes, dY, perms, embedding, certificate)
    problems = check_result(space, maps, result)
    if problems:
        raise InvariantError("extension failed its own verification", problems[0])
    return result


def check_result(space, maps, result: ExtensionResult) -> list:
    """Metric axioms, isometric embedding and isometric extensions; returns problems."""
    problems = []
    dY = result.dY
    k = len(dY)
    cap = space.diameter
    values, R, T = dY.values, dY.ranks, dY.sum_table()
    zero = Scalar(0)
    if values and values[0].sign() < 0:
        problems.append(("negative distance", values[0]))
    zero_rank = next((r for r, v in enumerate(values) if v == zero), None)
    diag = np.diag(R)
    if k and (zero_rank is None or (diag != zero_rank).any()):
        problems.append(("nonzero self distance", int(np.argmax(diag != zero_rank)) if zero_rank is not None else 0))
    if (R != R.T).any():
        a, b = map(int, np.argwhere(R != R.T)[0])
        problems.append(("asymmetric", a, b))
    off = ~np.eye(k, dtype=bool)
    if zero_rank is not None and ((R == zero_rank) & off).any():
        a, b = map(int, np.argwhere((R == zero_rank) & off)[0])
        problems.append(("nonpositive distance", a, b))
    if values and values[-1] > cap:
        problems.append(("exceeds diameter", format_scalar(values[-1])))
    for b in range(k):
        bound = T[R[:, b][:, None], R[b, :][None, :]]
        bad = R > bound
        if bad.any():
            a, c = map(int, np.argwhere(bad)[0])
            problems.append(("triangle", a, b, c))
            break
    emb = result.embedding
    for x in space.points:
        for y in space.points:
            if dY[emb[x], emb[y]] != space.d[x][y]:
                problems.append(("embedding distorts", space.labels[x], space.labels[y]))
    for i, perm in enumerate(result.perms):
        if sorted(perm) != list(range(k)):
            problems.append(("not a permutation", i))
            continue
        P = np.asarray(perm, dtype=np.int64)
        moved = R[P[:, None], P[None, :]]
        if (moved != R).any():
            a, b = map(int, np.argwhere(moved != R)[0])
            problems.append(("not an isometry", i, a, b))
        for x, y in maps[i].items():
            if perm[emb[x]] != emb[y]:
                problems.append(("does not extend map", i, space.labels[x]))
    return problems


# ----------------------------------------------------------------------
# independent verification through chains


def _integer_scale(space) -> int | None:
    """Common denominator turning every distance into an integer, if all are rational."""
    flat = [v for row in space.d for v in row]
    if not all(v.is_rational for v in flat):
        return None
    return math.lcm(*(v.a.denominator for v in flat)) if flat else 1


def chain_oracle(space, maps, quotient: fg.FiniteQuotient, x: int, depth: int):
    """Minimal chain distances from x, grouped by endpoint and product image.

    Returns ``best`` mapping (y, element) to ``(distance, m, back)`` where
    ``back`` reconstructs one optimal chain with fewest pairs.  Chains use at
    most ``depth`` pairs.  Distances are scalars; rational spaces are
    searched with integers scaled by a common denominator.
    """
    npoints = len(space)
    pairs = reachable_pairs(maps, npoints)
    images = {p: fg.orbit_image(maps, quotient, p[0], p[1], npoints) for p in pairs}
    scale = _integer_scale(space)
    if scale is None:
        d = space.d
        zero = Scalar(0)
    else:
        d = [[int(v.a * scale) for v in row] for row in space.d]
        zero = 0
    e = quotient.identity
    best: dict = {}
    frontier = {(x, e): (zero, 0, None)}
    for _ in range(depth):
        new_frontier = {}
        for (z, g), (val, m, _) in frontier.items():
            for pair in pairs:
                z1, z1p = pair
                cost = val + d[z][z1p]
                key = (cost, m + 1)
                for h in images[pair]:
                    state = (z1, quotient.mul(g, h))
                    cur = best.get(state)
                    if cur is None or key < cur[:2]:
                        entry = (cost, m + 1, ((z, g), pair, h))
                        best[state] = entry
                        new_frontier[state] = entry
        if not new_frontier:
            break
        frontier = new_frontier
    if scale is not None:
        best = {k: (Scalar(Fraction(v[0], scale)), v[1], v[2]) for k, v in best.items()}
    return best


def _rebuild(best, x, state, quotient):
    pairs = []
    hs = []
    while True:
        _, m, back = best[state]
        prev, pair, h = back
        pairs.append(pair)
        hs.append(h)
        if m == 1:
            break
        state = prev
    return Chain(x, tuple(reversed(pairs))), list(reversed(hs))


@dataclass
class VerificationReport:
    ok: bool
    checked: int
    mismatches: list
    chain_failures: list
    inconclusive: int = 0

    def __bool__(self):
        return self.ok


def verify_extension(space, maps, result: ExtensionResult, oracle_depth: int = 8,
                     elements: Sequence[int] | None = None) -> VerificationReport:
    """Recompute d_Y([x,e],[y,w]) as minimal chain distances and compare.

    ``elements`` restricts the checked w to the given element indices.
    """
    maps = [dict(m) for m in maps]
    quotient = result.quotient
    cap = space.diameter
    elems = result.elements
    wanted = range(len(elems)) if elements is None else elements
    mismatches, shape_failures = [], []
    inconclusive = 0
    checked = 0
    e = quotient.identity
    for x in space.points:
        best = chain_oracle(space, maps, quotient, x, oracle_depth)
        for y in space.points:
            for k in wanted:
                g = elems[k]
                hit = best.get((y, g))
                oracle = cap if hit is None or hit[0] > cap else hit[0]
                engine = result.dY[result.class_of(x, 0), result.class_of(y, k)]
                checked += 1
                if oracle != engine:
                    if oracle_depth < space.M and oracle > engine:
                        inconclusive += 1
                        continue
                    mismatches.append({"x": space.labels[x], "y": space.labels[y], "w": k,
                                       "chain_value": format_scalar(oracle), "d_Y": format_scalar(engine)})
                    continue
                if hit is None or hit[0] > cap:
                    continue
                chain, hs = _rebuild(best, x, (y, g), quotient)
                for i in range(1, chain.m):
                    if chain.z(i) == chain.zp(i + 1):
                        shape_failures.append(("repeated point", space.labels[x], space.labels[y], k, i))
                    if chain.pairs[i - 1][0] == chain.pairs[i - 1][1] and hs[i - 1] == e:
                        shape_failures.append(("trivial link", space.labels[x], space.labels[y], k, i))
                if g == e and (chain.m != 1 or hit[0] != space.d[x][y]):
                    shape_failures.append(("not a single link", space.labels[x], space.labels[y], chain.m))
    ok = not mismatches and not shape_failures
    return VerificationReport(ok, checked, mismatches, shape_failures, inconclusive)


# ----------------------------------------------------------------------
# amalgamation and independence


def amalgamate(B: FiniteMetricSpace, C: FiniteMetricSpace, A: Sequence) -> FiniteMetricSpace:
    """Free amalgam of B and C over the common labels A (shortest-path metric)."""
    A = list(A)
    if not A:
        raise UnsupportedInstanceError("amalgamation over an empty subspace is not defined")
    for a in A:
        B.index(a)
        C.index(a)
    for a, b in itertools.combinations(A, 2):
        if B.d[B.index(a)][B.index(b)] != C.d[C.index(a)][C.index(b)]:
            raise MalformedInputError(f"B and C disagree on d({a},{b})")
    cset = [c for c in C.labels if c not in A]
    rename = {}
    taken = set(B.labels)
    for c in cset:
        name = c
        while name in taken:
            name = f"{name}'"
        rename[c] = name
        taken.add(name)
    labels = list(B.labels) + [rename[c] for c in cset]
    nb = len(B)
    size = len(labels)
    mat = [[Scalar(0)] * size for _ in range(size)]
    for i in range(nb):
        for j in range(nb):
            mat[i][j] = B.d[i][j]
    for i, c in enumerate(cset):
        ci = C.index(c)
        for j, c2 in enumerate(cset):
            mat[nb + i][nb + j] = C.d[ci][C.index(c2)]
        for bi, b in enumerate(B.labels):
            if b in A:
                v = C.d[ci][C.index(b)]
            else:
                v = min(B.d[bi][B.index(a)] + C.d[C.index(a)][ci] for a in A)
            mat[nb + i][bi] = mat[bi][nb + i] = v
    return validate_space(labels, mat)


def isometries_of(space: FiniteMetricSpace, subset: Sequence[int], fixed_set: Sequence[int] = ()) -> Iterator[dict]:
    """Every distance-preserving bijection of ``subset`` mapping ``fixed_set`` onto itself."""
    subset = list(subset)
    fixed_set = set(fixed_set)

    def extend(k, current, used):
        if k == len(subset):
            yield dict(current)
            return
        x = subset[k]
        for y in subset:
            if y in used or ((x in fixed_set) != (y in fixed_set)):
                continue
            if all(space.d[x][x2] == space.d[y][y2] for x2, y2 in current.items()):
                current[x] = y
                used.add(y)
                yield from extend(k + 1, current, used)
                del current[x]
                used.discard(y)

    yield from extend(0, {}, set())


@dataclass
class IndependenceReport:
    independent: bool
    pairs_checked: int
    witness: tuple | None = None

    def __bool__(self):
        return self.independent


def check_independence(D: FiniteMetricSpace, B: Sequence, C: Sequence, A: Sequence) -> IndependenceReport:
    """Exhaustive check that B and C are independent over A inside D."""
    b = [D.index(x) if not isinstance(x, int) else x for x in B]
    c = [D.index(x) if not isinstance(x, int) else x for x in C]
    a = [D.index(x) if not isinstance(x, int) else x for x in A]
    if not set(a) <= set(b) & set(c):
        raise MalformedInputError("A must lie inside both B and C")
    union = sorted(set(b) | set(c))
    psis = list(isometries_of(D, c, a))
    checked = 0
    for phi in isometries_of(D, b, a):
        for psi in psis:
            if any(phi[p] != psi[p] for p in a):
                continue
            checked += 1
            merged = dict(phi)
            clash = any(p in merged and merged[p] != q for p, q in psi.items())
            merged.update(psi)
            bad = clash or sorted(merged.values()) != union or any(
                D.d[p][q] != D.d[merged[p]][merged[q]] for p in union for q in union)
            if bad:
                return IndependenceReport(False, checked, (
                    {D.labels[k]: D.labels[v] for k, v in phi.items()},
                    {D.labels[k]: D.labels[v] for k, v in psi.items()}))
    return IndependenceReport(True, checked)
