"""Brute-force oracles that share no search code with the engines.

These are deliberately naive: they enumerate words and homomorphisms
directly and exist only to cross-check the saturation and separation
results on small inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .freegroup import apply_word, reduce_word

__all__ = [
    "words_between",
    "factorization_oracle",
    "check_witness",
    "separating_witness",
    "OracleVerdict",
    "classify_with_oracle",
]


def words_between(maps: Sequence[Mapping], x, y, max_len: int) -> list:
    """Every reduced word w of length <= max_len with w(x) = y, shortest first.

    Words act rightmost letter first, so they are grown by prepending letters
    while the action stays defined.
    """
    n = len(maps)
    letters = [i for k in range(1, n + 1) for i in (k, -k)]
    out = []
    level = [((), x)]
    for length in range(max_len + 1):
        out.extend(w for w, p in level if p == y)
        if length == max_len:
            break
        nxt = []
        for w, p in level:
            for a in letters:
                if w and w[0] == -a:
                    continue
                q = apply_word(maps, (a,), p)
                if q is not None:
                    nxt.append(((a,) + w, q))
        level = nxt
    return out


def factorization_oracle(maps: Sequence[Mapping], pairs: Sequence[tuple], depth: int):
    """Words w_i with w_i(z_i) = z_i', total length <= depth, multiplying to e.

    Returns the words or None if no such factorization exists within depth.
    """
    if depth < 0:
        return None
    m = len(pairs)
    if m == 0:
        return ()
    cache: dict = {}
    options = []
    for pair in pairs:
        if pair not in cache:
            cache[pair] = words_between(maps, pair[0], pair[1], depth)
        options.append(cache[pair])
    # layer i: reduced product of w_1..w_i -> (least total length, words)
    layer = {(): (0, ())}
    for i, opts in enumerate(options):
        nxt: dict = {}
        for prod, (used, words) in layer.items():
            for w in opts:
                total = used + len(w)
                if total > depth:
                    continue
                p = reduce_word(prod + w)
                # the rest must cancel p, which needs at least len(p) more letters
                if i == m - 1 and p:
                    continue
                if total + len(p) > depth and i < m - 1:
                    continue
                cur = nxt.get(p)
                if cur is None or total < cur[0]:
                    nxt[p] = (total, words + (w,))
        layer = nxt
    hit = layer.get(())
    return None if hit is None else hit[1]


def check_witness(maps: Sequence[Mapping], pairs: Sequence[tuple], words: Sequence[Sequence[int]]) -> bool:
    """Each w_i sends z_i to z_i' and the product reduces to the empty word."""
    if len(words) != len(pairs):
        return False
    for (z, zp), w in zip(pairs, words):
        if apply_word(maps, w, z) != zp:
            return False
    return reduce_word([a for w in words for a in w]) == ()


def _perm_mul(p, q):
    return tuple(p[i] for i in q)


def _perm_inv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def _image_set(maps, gens, x, y):
    """Images of all words sending x to y, by closing a set of (point, permutation) states."""
    degree = len(gens[0]) if gens else 1
    e = tuple(range(degree))
    invs = [_perm_inv(g) for g in gens]
    states = {(x, e)}
    stack = [(x, e)]
    while stack:
        p, g = stack.pop()
        for i, m in enumerate(maps):
            if p in m:
                s = (m[p], _perm_mul(gens[i], g))
                if s not in states:
                    states.add(s)
                    stack.append(s)
            for a, b in m.items():
                if b == p:
                    s = (a, _perm_mul(invs[i], g))
                    if s not in states:
                        states.add(s)
                        stack.append(s)
    return {g for p, g in states if p == y}


def separating_witness(maps: Sequence[Mapping], pairs: Sequence[tuple], max_degree: int = 4,
                       cache: dict | None = None):
    """Generator images in some S_m (m <= max_degree) keeping e out of the product, or None.

    ``cache`` may be shared between calls on the same maps.
    """
    n = len(maps)
    cache = {} if cache is None else cache
    for degree in range(1, max_degree + 1):
        perms = list(itertools.permutations(range(degree)))
        e = tuple(range(degree))
        for gens in itertools.product(perms, repeat=n):
            product = {e}
            for z, zp in pairs:
                key = (gens, z, zp)
                img = cache.get(key)
                if img is None:
                    img = cache[key] = _image_set(maps, gens, z, zp)
                product = {_perm_mul(a, b) for a in product for b in img}
                if not product:
                    break
            if e not in product:
                return gens
    return None


@dataclass
class OracleVerdict:
    pairs: tuple
    engine_trivial: bool
    oracle: str  # "trivial", "nontrivial" or "inconclusive"
    agrees: bool | None  # None when inconclusive
    witness_ok: bool | None = None


def classify_with_oracle(maps, pairs, engine_trivial: bool, engine_witness, depth: int,
                         separation_degree: int = 4, cache: dict | None = None) -> OracleVerdict:
    """Compare an engine triviality verdict with the bounded oracles.

    A factorization within ``depth`` proves triviality.  Nontriviality is
    only claimed when a small symmetric-group image separates the chain.
    """
    pairs = tuple(tuple(p) for p in pairs)
    witness_ok = check_witness(maps, pairs, engine_witness) if engine_trivial else None
    if depth <= 0 and pairs:
        return OracleVerdict(pairs, engine_trivial, "inconclusive", None, witness_ok)
    found = factorization_oracle(maps, pairs, depth)
    if found is not None:
        return OracleVerdict(pairs, engine_trivial, "trivial", engine_trivial and bool(witness_ok), witness_ok)
    if separating_witness(maps, pairs, separation_degree, cache) is not None:
        return OracleVerdict(pairs, engine_trivial, "nontrivial", not engine_trivial, witness_ok)
    return OracleVerdict(pairs, engine_trivial, "inconclusive", None, witness_ok)
