"""Free groups acting on finite spaces through partial maps.

Letters are nonzero integers: ``i`` stands for the generator ``a_i`` and
``-i`` for its inverse (generators are 1-based).  A word acts on points
rightmost letter first, so ``apply_word(maps, (1, 2), x)`` is
``phi_1(phi_2(x))``.

Partial maps are given as a sequence of dicts ``{point: image}``, one per
generator; points are small non-negative integers.

Finite quotients are direct products of symmetric groups.  An element is
stored as one flat permutation tuple on the disjoint union of the factor
domains, so multiplication is a single tuple composition,
``(p*q)[k] = p[q[k]]``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import BudgetError, MalformedInputError, PreconditionError, SeparationBudgetError

Word = tuple  # tuple[int, ...], freely reduced
Pair = tuple  # (z, z') with some word w satisfying w(z) = z'

DEFAULT_BUDGET_ORDER = 10_000
DEFAULT_MAX_DEGREE = 6


# ----------------------------------------------------------------------
# words


def reduce_word(letters: Iterable[int], n: int | None = None) -> Word:
    out: list[int] = []
    for c in letters:
        c = int(c)
        if c == 0 or (n is not None and abs(c) > n):
            raise MalformedInputError(f"letter {c} is not a generator index for n={n}")
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def inverse_word(w: Sequence[int]) -> Word:
    return tuple(-c for c in reversed(w))


def multiply_words(*words: Sequence[int]) -> Word:
    return reduce_word(itertools.chain.from_iterable(words))


def format_word(w: Sequence[int]) -> str:
    if not w:
        return "e"
    return " ".join(f"a{c}" if c > 0 else f"a{-c}^-1" for c in w)


def _step(maps, inverses, letter: int, x):
    if letter > 0:
        return maps[letter - 1].get(x)
    return inverses[-letter - 1].get(x)


def _inverses(maps):
    return [{v: k for k, v in m.items()} for m in maps]


def apply_word(maps: Sequence[Mapping], w: Sequence[int], x):
    """Endpoint of ``w`` applied to ``x``, or None when undefined."""
    inverses = _inverses(maps)
    for letter in reversed(w):
        if abs(letter) > len(maps) or letter == 0:
            raise MalformedInputError(f"letter {letter} out of range")
        x = _step(maps, inverses, letter, x)
        if x is None:
            return None
    return x


class OrbitAutomaton:
    """Labelled graph with an edge ``x --a_i--> phi_i(x)`` for each domain point."""

    def __init__(self, maps: Sequence[Mapping], npoints: int):
        self.maps = [dict(m) for m in maps]
        self.inverses = _inverses(self.maps)
        self.npoints = npoints
        self.n = len(self.maps)
        for m, inv in zip(self.maps, self.inverses):
            if len(inv) != len(m):
                raise MalformedInputError("partial map is not injective")
        self._components = None

    def step(self, letter: int, x):
        return _step(self.maps, self.inverses, letter, x)

    def letters(self):
        return [i for k in range(1, self.n + 1) for i in (k, -k)]

    def moves(self, x):
        """(letter, target) for every letter whose map is defined at x."""
        out = []
        for letter in self.letters():
            y = self.step(letter, x)
            if y is not None:
                out.append((letter, y))
        return out

    def component(self, x) -> int:
        if self._components is None:
            comp = {}
            label = 0
            for start in range(self.npoints):
                if start in comp:
                    continue
                comp[start] = label
                stack = [start]
                while stack:
                    p = stack.pop()
                    for _, q in self.moves(p):
                        if q not in comp:
                            comp[q] = label
                            stack.append(q)
                label += 1
            self._components = comp
        return self._components[x]

    def reachable(self, x, y) -> bool:
        """True iff T_x^y is nonempty."""
        return self.component(x) == self.component(y)

    def some_word(self, x, y) -> Word | None:
        """A shortest word w with w(x) = y."""
        prev = {x: None}
        queue = deque([x])
        while queue:
            p = queue.popleft()
            if p == y:
                break
            for letter, q in self.moves(p):
                if q not in prev:
                    prev[q] = (p, letter)
                    queue.append(q)
        if y not in prev:
            return None
        letters = []
        p = y
        while prev[p] is not None:
            p, letter = prev[p]
            letters.append(letter)
        # letters were applied in order, the last applied is leftmost
        return tuple(letters)


# ----------------------------------------------------------------------
# triviality of products of coset sets


@dataclass(frozen=True)
class BenoisResult:
    trivial: bool
    witness: tuple | None = None  # tuple of reduced words, one per pair

    def __bool__(self):
        return self.trivial


def benois_trivial(maps: Sequence[Mapping], pairs: Sequence[Pair], npoints: int | None = None) -> BenoisResult:
    """Decide whether the identity lies in ``T_{z_1}^{z_1'} ... T_{z_m}^{z_m'}``.

    The product is recognised by the concatenation of reading automata for
    the factors; the automaton is then saturated with epsilon moves for
    every cancelling pair ``a ... a^-1``.  On success the derivation is
    unfolded into one word per factor.
    """
    pairs = [tuple(p) for p in pairs]
    m = len(pairs)
    if m == 0:
        return BenoisResult(True, ())
    if npoints is None:
        npoints = 1 + max([max(p) for p in pairs] + [max(list(mp) + list(mp.values()), default=0) for mp in maps])
    aut = OrbitAutomaton(maps, npoints)
    if not all(aut.reachable(z, zp) for z, zp in pairs):
        # an empty factor makes the product empty
        return BenoisResult(False)

    # Reading automaton for T_x^y: start at y, read letters left to right,
    # a_i moves s to phi_i^{-1}(s), accept at x.
    def read(letter, s):
        return aut.step(-letter, s)

    states = [(layer, p) for layer in range(m) for p in range(npoints)]
    edges: dict = {}
    for layer, p in states:
        for letter in aut.letters():
            q = read(letter, p)
            if q is not None:
                edges.setdefault((layer, p), []).append((letter, (layer, q)))
    start = (0, pairs[0][1])
    accept = (m - 1, pairs[m - 1][0])

    reason: dict = {}
    succ: dict = {s: set() for s in states}
    pred: dict = {s: set() for s in states}
    work: deque = deque()

    def add(p, q, why):
        if q in succ[p]:
            return
        succ[p].add(q)
        pred[q].add(p)
        reason[(p, q)] = why
        work.append((p, q))

    for s in states:
        add(s, s, ("refl",))
    for layer in range(m - 1):
        add((layer, pairs[layer][0]), (layer + 1, pairs[layer + 1][1]), ("layer",))

    # incoming edges by (target, letter) for the cancellation rule
    incoming: dict = {}
    for p, outs in edges.items():
        for letter, r in outs:
            incoming.setdefault(r, []).append((p, letter))

    while work:
        p, q = work.popleft()
        # transitivity on both sides
        for r in list(succ[q]):
            add(p, r, ("trans", q))
        for o in list(pred[p]):
            add(o, q, ("trans", p))
        # cancellation: o --a--> p =eps=> q --a^-1--> t
        for o, letter in incoming.get(p, ()):
            for l2, t in edges.get(q, ()):
                if l2 == -letter:
                    add(o, t, ("cancel", letter, p, q))
        if accept in succ[start]:
            break

    if accept not in succ[start]:
        return BenoisResult(False)

    # Unfold the derivation into (layer, letter) events.
    def unfold(p, q, out):
        stack = [(p, q)]
        while stack:
            item = stack.pop()
            if item[0] == "emit":
                out.append(item[1])
                continue
            p, q = item
            why = reason[(p, q)]
            kind = why[0]
            if kind == "trans":
                r = why[1]
                stack.append((r, q))
                stack.append((p, r))
            elif kind == "cancel":
                _, letter, r, s = why
                # o --letter--> r, ..., s --(-letter)--> q
                stack.append(("emit", (s[0], -letter)))
                stack.append((r, s))
                stack.append(("emit", (p[0], letter)))
        return out

    events = unfold(start, accept, [])
    per_layer: list[list[int]] = [[] for _ in range(m)]
    for layer, letter in events:
        per_layer[layer].append(letter)
    witness = tuple(reduce_word(ws) for ws in per_layer)
    return BenoisResult(True, witness)


# ----------------------------------------------------------------------
# finite quotients


def _compose(p, q):
    return tuple(p[i] for i in q)


def _invert(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


@dataclass(frozen=True)
class FiniteQuotient:
    """Homomorphism from F_n onto the subgroup of a product of symmetric groups.

    ``generators[i]`` is a tuple holding one permutation per factor.
    """

    degrees: tuple
    generators: tuple  # per generator: tuple of per-factor permutations
    n: int = field(default=-1)

    def __post_init__(self):
        n = len(self.generators) if self.n < 0 else self.n
        object.__setattr__(self, "n", n)
        if len(self.generators) != n:
            raise MalformedInputError("generator count does not match n")
        for g in self.generators:
            if len(g) != len(self.degrees):
                raise MalformedInputError("generator image has the wrong number of factors")
            for perm, deg in zip(g, self.degrees):
                if sorted(perm) != list(range(deg)):
                    raise MalformedInputError(f"{perm} is not a permutation of degree {deg}")
        object.__setattr__(self, "_flat", tuple(self._flatten(g) for g in self.generators))
        object.__setattr__(self, "_flat_inv", tuple(_invert(p) for p in self._flat))
        object.__setattr__(self, "_cache", {})

    @classmethod
    def trivial(cls, n: int) -> "FiniteQuotient":
        return cls((), tuple(() for _ in range(n)), n)

    @classmethod
    def single(cls, perms: Sequence[Sequence[int]]) -> "FiniteQuotient":
        """Quotient in S_m given one permutation per generator."""
        degree = len(perms[0]) if perms else 0
        return cls((degree,), tuple((tuple(p),) for p in perms), len(perms))

    def _flatten(self, parts):
        out = []
        offset = 0
        for perm, deg in zip(parts, self.degrees):
            out.extend(offset + v for v in perm)
            offset += deg
        return tuple(out)

    def unflatten(self, flat) -> tuple:
        parts = []
        offset = 0
        for deg in self.degrees:
            parts.append(tuple(v - offset for v in flat[offset:offset + deg]))
            offset += deg
        return tuple(parts)

    @property
    def identity(self):
        return tuple(range(sum(self.degrees)))

    def mul(self, p, q):
        return _compose(p, q)

    def inv(self, p):
        return _invert(p)

    def letter_image(self, letter: int):
        return self._flat[letter - 1] if letter > 0 else self._flat_inv[-letter - 1]

    def image(self, w: Sequence[int]):
        g = self.identity
        for letter in reversed(w):
            g = _compose(self.letter_image(letter), g)
        return g

    def elements(self, bound: int = DEFAULT_BUDGET_ORDER) -> list:
        """Materialise the group in breadth-first order from the identity."""
        key = ("elements",)
        cached = self._cache.get(key)
        if cached is not None:
            if len(cached) > bound:
                raise BudgetError(f"quotient order {len(cached)} exceeds bound {bound}")
            return cached
        e = self.identity
        seen = {e: 0}
        order = [e]
        queue = deque([e])
        while queue:
            g = queue.popleft()
            for s in self._flat:
                h = _compose(s, g)
                if h not in seen:
                    seen[h] = len(order)
                    order.append(h)
                    if len(order) > bound:
                        raise BudgetError(f"quotient order exceeds bound {bound}")
                    queue.append(h)
        self._cache[key] = order
        self._cache[("index",)] = seen
        return order

    def index(self, g) -> int:
        self.elements()
        return self._cache[("index",)][g]

    def order(self, bound: int = DEFAULT_BUDGET_ORDER) -> int:
        return len(self.elements(bound))

    def to_json(self) -> dict:
        return {
            "degrees": list(self.degrees),
            "generators": [[list(p) for p in g] for g in self.generators],
        }

    @classmethod
    def from_json(cls, data: Mapping, n: int | None = None) -> "FiniteQuotient":
        gens = tuple(tuple(tuple(p) for p in g) for g in data["generators"])
        return cls(tuple(data["degrees"]), gens, len(gens) if n is None else n)


def orbit_image(maps: Sequence[Mapping], quotient: FiniteQuotient, x, y, npoints=None,
                bound: int = DEFAULT_BUDGET_ORDER) -> frozenset:
    """Image of T_x^y in the quotient, as a set of flat permutations."""
    return _orbit_images_from(maps, quotient, x, npoints, bound).get(y, frozenset())


def _orbit_images_from(maps, quotient: FiniteQuotient, x, npoints=None, bound=DEFAULT_BUDGET_ORDER):
    key = ("orbit", id(maps), x)
    cache = quotient._cache
    hit = cache.get(key)
    if hit is not None and hit[0] is maps:
        return hit[1]
    inverses = _inverses(maps)
    e = quotient.identity
    seen = {(x, e)}
    queue = deque([(x, e)])
    found: dict = {}
    limit = bound * (npoints or 64)
    while queue:
        p, g = queue.popleft()
        found.setdefault(p, set()).add(g)
        for i in range(len(maps)):
            q = maps[i].get(p)
            if q is not None:
                state = (q, _compose(quotient._flat[i], g))
                if state not in seen:
                    seen.add(state)
                    queue.append(state)
            q = inverses[i].get(p)
            if q is not None:
                state = (q, _compose(quotient._flat_inv[i], g))
                if state not in seen:
                    seen.add(state)
                    queue.append(state)
        if len(seen) > limit:
            raise BudgetError(f"orbit search exceeds bound {bound}")
    result = {p: frozenset(gs) for p, gs in found.items()}
    cache[key] = (maps, result)
    return result


def setwise_product(quotient: FiniteQuotient, left: Iterable, right: Iterable) -> frozenset:
    right = list(right)
    return frozenset(_compose(a, b) for a in left for b in right)


def product_contains_identity(maps, quotient: FiniteQuotient, pairs: Sequence[Pair], npoints=None,
                              bound: int = DEFAULT_BUDGET_ORDER, prefix_cache: dict | None = None) -> bool:
    """Whether the identity lies in Img(T_1)...Img(T_m)."""
    images = [orbit_image(maps, quotient, z, zp, npoints, bound) for z, zp in pairs]
    if any(not s for s in images):
        return False
    e = quotient.identity
    if len(images) == 1:
        return e in images[0]
    pairs = tuple(tuple(p) for p in pairs)
    head = pairs[:-1]
    prefix = None if prefix_cache is None else prefix_cache.get(head)
    if prefix is None:
        prefix = images[0]
        for k in range(1, len(images) - 1):
            sub = pairs[:k + 1]
            cached = None if prefix_cache is None else prefix_cache.get(sub)
            if cached is None:
                cached = setwise_product(quotient, prefix, images[k])
                if prefix_cache is not None:
                    prefix_cache[sub] = cached
            prefix = cached
        if prefix_cache is not None:
            prefix_cache[head] = prefix
    last_inv = {_invert(g) for g in images[-1]}
    return not prefix.isdisjoint(last_inv)


def _cycle_type(p) -> tuple:
    seen = [False] * len(p)
    lengths = []
    for s in range(len(p)):
        k = 0
        while not seen[s]:
            seen[s] = True
            s = p[s]
            k += 1
        if k:
            lengths.append(k)
    return tuple(sorted(lengths))


def _conjugate(c, c_inv, g) -> tuple:
    return tuple(c[g[c_inv[k]]] for k in range(len(g)))


def _candidates(n: int, degree: int) -> Iterator[tuple]:
    """Generator-image tuples in lexicographic order, one per conjugacy orbit.

    Whether a homomorphism separates a chain depends only on its image up to
    simultaneous conjugation, and the lexicographically least tuple of an
    orbit is met first.  So the first success among these representatives is
    also the first success of the full lexicographic enumeration.
    """
    perms = list(itertools.permutations(range(degree)))
    if n == 0:
        yield ()
        return
    seen_types = set()
    for g in perms:
        ctype = _cycle_type(g)
        if ctype in seen_types:
            continue
        seen_types.add(ctype)
        centralizer = [(c, _invert(c)) for c in perms if _compose(c, g) == _compose(g, c)]
        seen = set()
        for rest in itertools.product(perms, repeat=n - 1):
            if rest in seen:
                continue
            yield (g,) + rest
            if len(centralizer) > 1:
                for c, c_inv in centralizer:
                    seen.add(tuple(_conjugate(c, c_inv, h) for h in rest))


@dataclass
class SeparationResult:
    quotient: FiniteQuotient
    tried_degrees: list
    candidates_tried: int


def search_quotient(maps, signatures: Sequence[Sequence[Pair]], n: int, max_degree: int = DEFAULT_MAX_DEGREE,
                    npoints=None, bound: int = DEFAULT_BUDGET_ORDER, min_degree: int = 1) -> SeparationResult:
    """First homomorphism F_n -> S_m (by m, then lexicographically) separating every signature."""
    tried = []
    count = 0
    signatures = [tuple(tuple(p) for p in s) for s in signatures]
    # largest first-failure cache: try the signature that failed last time first
    last_fail = 0
    for degree in range(min_degree, max_degree + 1):
        tried.append(degree)
        for gens in _candidates(n, degree):
            count += 1
            q = FiniteQuotient.single(gens) if n else FiniteQuotient.trivial(0)
            prefix_cache: dict = {}
            ok = True
            order = [last_fail] + [k for k in range(len(signatures)) if k != last_fail] if signatures else []
            try:
                for k in order:
                    if product_contains_identity(maps, q, signatures[k], npoints, bound, prefix_cache):
                        ok = False
                        last_fail = k
                        break
                if ok:
                    q.elements(bound)
            except BudgetError:
                ok = False  # image group too large for the budget: not acceptable
            if ok:
                return SeparationResult(q, tried, count)
    raise SeparationBudgetError(max_degree)


def separate_chain(maps, pairs: Sequence[Pair], n: int | None = None, max_degree: int = DEFAULT_MAX_DEGREE,
                   npoints=None, bound: int = DEFAULT_BUDGET_ORDER) -> SeparationResult:
    """Finite quotient whose image of ``T_1...T_m`` misses the identity."""
    n = len(maps) if n is None else n
    if benois_trivial(maps, pairs, npoints).trivial:
        raise PreconditionError("cannot separate: identity lies in product")
    return search_quotient(maps, [pairs], n, max_degree, npoints, bound)


def combine_quotients(quotients: Sequence[FiniteQuotient], n: int | None = None,
                      bound: int = DEFAULT_BUDGET_ORDER) -> FiniteQuotient:
    """Direct product; its kernel is the intersection of the factor kernels."""
    if not quotients:
        if n is None:
            raise MalformedInputError("empty combine needs n")
        return FiniteQuotient.trivial(n)
    n = quotients[0].n if n is None else n
    if any(q.n != n for q in quotients):
        raise MalformedInputError("quotients over different free groups")
    degrees = tuple(d for q in quotients for d in q.degrees)
    gens = tuple(tuple(p for q in quotients for p in q.generators[i]) for i in range(n))
    out = FiniteQuotient(degrees, gens, n)
    out.elements(bound)
    return out
