"""Finite measure algebras with exact measures.

A :class:`CellSpace` is a finite set of named cells with positive measures
summing to one.  An :class:`Algebra` groups the cells into atoms.  Cells are
split lazily; a piece of cell ``c`` is named ``c.0``, ``c.1``, ... so every
refinement remembers where its cells came from.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    MalformedInputError,
    PreconditionError,
    SaturationBoundError,
    UnsupportedInstanceError,
)
from .scalar import Scalar, as_scalar, format_scalar

__all__ = [
    "CellSpace",
    "Algebra",
    "DistanceMatrix",
    "carve",
    "refines",
    "good_check",
    "identically_partitioned",
    "independence_step",
    "extend_partial_automorphisms",
    "verify_extension_malg",
    "partial_automorphisms",
    "matrix_of_automorphism",
    "p_additive",
    "realize_matrix",
    "independent_amalgam",
    "check_independence_malg",
]

ZERO = Scalar(0)
ONE = Scalar(1)


def _total(values: Iterable[Scalar]) -> Scalar:
    out = ZERO
    for v in values:
        out = out + v
    return out


class CellSpace:
    """Immutable mapping of cell names to positive measures summing to 1."""

    __slots__ = ("_measures",)

    def __init__(self, measures: Mapping[str, object], check_total: bool = True):
        ms = {str(k): as_scalar(v) for k, v in measures.items()}
        for name, v in ms.items():
            if v.sign() <= 0:
                raise MalformedInputError(f"cell {name!r} has non-positive measure {v}")
        if check_total and _total(ms.values()) != 1:
            raise MalformedInputError("cell measures do not sum to 1")
        object.__setattr__(self, "_measures", ms)

    def __setattr__(self, name, value):
        raise AttributeError("CellSpace is immutable")

    def __getitem__(self, name: str) -> Scalar:
        return self._measures[name]

    def __contains__(self, name) -> bool:
        return name in self._measures

    def __iter__(self):
        return iter(self._measures)

    def __len__(self):
        return len(self._measures)

    def items(self):
        return self._measures.items()

    def measure(self, cells: Iterable[str]) -> Scalar:
        return _total(self._measures[c] for c in cells)

    def split(self, parts: Mapping[str, Sequence[Scalar]]) -> tuple["CellSpace", dict]:
        """Split cells into pieces of the given measures.

        Returns the new space and a dict mapping each split cell to the list
        of its piece names.
        """
        out = {}
        names = {}
        for c, v in self._measures.items():
            pieces = parts.get(c)
            if not pieces or len(pieces) == 1:
                out[c] = v
                continue
            if _total(pieces) != v:
                raise MalformedInputError(f"pieces of {c!r} do not add up to its measure")
            names[c] = []
            for k, p in enumerate(pieces):
                child = f"{c}.{k}"
                out[child] = p
                names[c].append(child)
        return CellSpace(out, check_total=False), names

    def ancestor(self, cell: str) -> str:
        """The cell of this space that ``cell`` descends from."""
        name = cell
        while name not in self._measures:
            if "." not in name:
                raise MalformedInputError(f"cell {cell!r} does not descend from this space")
            name = name.rsplit(".", 1)[0]
        return name

    def to_json(self) -> dict:
        return {k: format_scalar(v) for k, v in self._measures.items()}


@dataclass(frozen=True)
class Algebra:
    """Finite algebra: a partition of the cells of ``space`` into atoms."""

    space: CellSpace
    atoms: tuple  # tuple of frozensets of cell names

    def __post_init__(self):
        atoms = tuple(frozenset(a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        seen = set()
        for a in atoms:
            if not a:
                raise MalformedInputError("empty atom")
            if seen & a:
                raise MalformedInputError("atoms overlap")
            seen |= a
            for c in a:
                if c not in self.space:
                    raise MalformedInputError(f"unknown cell {c!r}")
        if seen != set(self.space):
            raise MalformedInputError("atoms do not cover every cell")

    @classmethod
    def from_json(cls, data: Mapping) -> "Algebra":
        space = CellSpace(data["cells"])
        return cls(space, tuple(frozenset(a) for a in data["atoms"]))

    def to_json(self) -> dict:
        return {"cells": self.space.to_json(), "atoms": [sorted(a) for a in self.atoms]}

    @classmethod
    def discrete(cls, space: CellSpace) -> "Algebra":
        return cls(space, tuple(frozenset([c]) for c in space))

    def measure(self, atom_index: int) -> Scalar:
        return self.space.measure(self.atoms[atom_index])

    @property
    def measures(self) -> list:
        return [self.measure(k) for k in range(len(self.atoms))]

    def element_measure(self, atom_indices: Iterable[int]) -> Scalar:
        return _total(self.measure(k) for k in atom_indices)

    def cells_of(self, atom_indices: Iterable[int]) -> frozenset:
        out = set()
        for k in atom_indices:
            out |= self.atoms[k]
        return frozenset(out)

    def lift(self, space: CellSpace) -> "Algebra":
        """The same algebra expressed over a refinement of its cell space."""
        groups = [set() for _ in self.atoms]
        owner = {c: k for k, a in enumerate(self.atoms) for c in a}
        for c in space:
            groups[owner[self.space.ancestor(c)]].add(c)
        return Algebra(space, tuple(frozenset(g) for g in groups))


def carve(space: CellSpace, cells: Sequence[str], targets: Sequence[Scalar]) -> tuple[CellSpace, list]:
    """Cut the union of ``cells`` into consecutive pieces of measures ``targets``.

    The targets must sum to the measure of the union; zero targets give empty
    pieces.  Returns the refined space and one list of cell names per target.
    """
    targets = [as_scalar(t) for t in targets]
    if any(t.sign() < 0 for t in targets):
        raise MalformedInputError("negative target measure")
    if _total(targets) != space.measure(cells):
        raise MalformedInputError("targets do not add up to the carved measure")
    segments: dict = {c: [] for c in cells}  # cell -> [(target index, amount)]
    queue = list(cells)
    left = space[queue[0]] if queue else ZERO
    ci = 0
    for t_index, t in enumerate(targets):
        need = t
        while need.sign() > 0:
            take = need if need <= left else left
            segments[queue[ci]].append((t_index, take))
            need = need - take
            left = left - take
            if left.sign() == 0 and ci + 1 < len(queue):
                ci += 1
                left = space[queue[ci]]
    parts = {c: [amt for _, amt in segs] for c, segs in segments.items() if len(segs) > 1}
    new_space, names = space.split(parts)
    groups: list = [[] for _ in targets]
    for c, segs in segments.items():
        if len(segs) == 1:
            groups[segs[0][0]].append(c)
        else:
            for (t_index, _), child in zip(segs, names[c]):
                groups[t_index].append(child)
    return new_space, groups


def refines(fine: Algebra, coarse: Algebra) -> bool:
    """Whether ``fine`` is a refinement of ``coarse`` (cells may be split)."""
    try:
        owner = {c: k for k, a in enumerate(coarse.atoms) for c in a}
        sums = {c: ZERO for c in coarse.space}
        for c in fine.space:
            root = coarse.space.ancestor(c)
            sums[root] = sums[root] + fine.space[c]
        if any(sums[c] != coarse.space[c] for c in coarse.space):
            return False
        for atom in fine.atoms:
            if len({owner[coarse.space.ancestor(c)] for c in atom}) != 1:
                return False
    except MalformedInputError:
        return False
    return True


def _atoms_inside(coarse: Algebra, fine: Algebra) -> list:
    """For each coarse atom, the indices of fine atoms it contains."""
    owner = {c: k for k, a in enumerate(coarse.atoms) for c in a}
    inside: list = [[] for _ in coarse.atoms]
    for j, atom in enumerate(fine.atoms):
        k = owner[coarse.space.ancestor(next(iter(atom)))]
        inside[k].append(j)
    return inside


def _profile(fine: Algebra, atom_indices) -> Counter:
    return Counter(fine.measure(j) for j in atom_indices)


@dataclass
class GoodReport:
    good: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.good


def good_check(A: Algebra, B: Algebra) -> GoodReport:
    """Whether every two equal-measure atoms of A are identically partitioned by B."""
    if not refines(B, A):
        raise MalformedInputError("second algebra does not refine the first")
    inside = _atoms_inside(A, B)
    profiles = [_profile(B, inside[k]) for k in range(len(A.atoms))]
    ms = A.measures
    for i, j in itertools.combinations(range(len(A.atoms)), 2):
        if ms[i] == ms[j] and profiles[i] != profiles[j]:
            return GoodReport(False, (i, j, _fmt_profile(profiles[i]), _fmt_profile(profiles[j])))
    return GoodReport(True)


def _fmt_profile(profile: Counter) -> list:
    return sorted((format_scalar(v) for v in profile.elements()))


def identically_partitioned(A: Algebra, B: Algebra, first: Iterable[int], second: Iterable[int]) -> bool:
    """Whether two elements of A (given as atom index sets) get equal B-piece multisets."""
    inside = _atoms_inside(A, B)
    p1 = _profile(B, [j for k in first for j in inside[k]])
    p2 = _profile(B, [j for k in second for j in inside[k]])
    return p1 == p2


# ----------------------------------------------------------------------
# good extensions


def _split_by_profile(alg: Algebra, rules: Mapping[Scalar, Sequence[Scalar]]) -> Algebra:
    """Split every atom whose measure has a rule into pieces of the listed measures."""
    space = alg.space
    new_atoms: list = []
    pending = []
    for k, atom in enumerate(alg.atoms):
        mu = alg.measure(k)
        pieces = rules.get(mu)
        if pieces is None or len(pieces) == 1:
            new_atoms.append([sorted(atom)])
            continue
        pending.append((len(new_atoms), sorted(atom), pieces))
        new_atoms.append(None)
    for slot, cells, pieces in pending:
        space, groups = carve(space, cells, pieces)
        new_atoms[slot] = groups
    # cells carved later may have split cells named in earlier groups: relocate by ancestry
    flat = [g for groups in new_atoms for g in groups]
    owner = {}
    for idx, group in enumerate(flat):
        for c in group:
            owner[c] = idx
    regroup: list = [set() for _ in flat]
    for c in space:
        name = c
        while name not in owner:
            name = name.rsplit(".", 1)[0]
        regroup[owner[name]].add(c)
    return Algebra(space, tuple(frozenset(g) for g in regroup))


def independence_step(alg: Algebra, first: Sequence[int], second: Sequence[int]) -> Algebra:
    """Refine so that two disjoint equal-measure unions of atoms become identically partitioned.

    ``first`` and ``second`` are atom indices of ``alg``.  Atom measures
    inside ``first`` (R) and inside ``second`` (S) must be disjoint sets.
    Every atom of measure r in R is cut into pieces r*s/a for s in S
    (with multiplicity), and every atom of measure s in S into s*r/a.
    """
    first, second = list(first), list(second)
    if not first or not second or set(first) & set(second):
        raise PreconditionError("the two elements must be nonempty and disjoint")
    a = alg.element_measure(first)
    if a != alg.element_measure(second):
        raise PreconditionError("the two elements have different measures")
    R = [alg.measure(k) for k in first]
    S = [alg.measure(k) for k in second]
    if set(R) & set(S):
        raise PreconditionError("atom measures inside the two elements overlap")
    rules = {}
    for r in set(R):
        rules[r] = [r * s / a for s in S]
    for s in set(S):
        rules[s] = [s * r / a for r in R]
    return _split_by_profile(alg, rules)


def _disjoint_equal_pairs(alg: Algebra) -> list:
    k = len(alg.atoms)
    ms = alg.measures
    masks = range(1, 1 << k)
    mu = {m: _total(ms[i] for i in range(k) if m >> i & 1) for m in masks}
    pairs = []
    for s in masks:
        for t in masks:
            if s < t and not (s & t) and mu[s] == mu[t]:
                pairs.append(([i for i in range(k) if s >> i & 1], [i for i in range(k) if t >> i & 1]))
    return pairs


def extend_partial_automorphisms(A: Algebra, max_atoms: int = 10) -> Algebra:
    """A refinement B of A such that every partial automorphism of A extends to B.

    Rational atom measures use the uniform refinement into cells of measure
    1/N.  Otherwise each pair of disjoint equal-measure elements of A is made
    identically partitioned in turn by :func:`independence_step`, after
    cancelling atoms of equal measure common to both sides.
    """
    ms = A.measures
    if all(m.is_rational for m in ms):
        N = math.lcm(*(m.a.denominator for m in ms))
        unit = Scalar(Fraction(1, N))
        space = A.space
        groups_per_atom = []
        for k, atom in enumerate(A.atoms):
            count = int(ms[k].a * N)
            space, groups = carve(space, sorted(atom), [unit] * count)
            groups_per_atom.append(groups)
        return _regroup(space, [g for gs in groups_per_atom for g in gs])
    if len(A.atoms) > max_atoms:
        raise UnsupportedInstanceError(f"{len(A.atoms)} atoms exceed the limit of {max_atoms}")
    current = A
    for first, second in _disjoint_equal_pairs(A):
        inside = _atoms_inside(A, current)
        f = [j for k in first for j in inside[k]]
        s = [j for k in second for j in inside[k]]
        pf, ps = _profile(current, f), _profile(current, s)
        if pf == ps:
            continue
        common = pf & ps
        f = _drop_profile(current, f, common)
        s = _drop_profile(current, s, common)
        if not f or not s:
            raise UnsupportedInstanceError("pair cannot be balanced after cancelling common atoms")
        current = independence_step(current, f, s)
    return current


def _drop_profile(alg: Algebra, indices: list, common: Counter) -> list:
    left = Counter(common)
    out = []
    for j in indices:
        m = alg.measure(j)
        if left[m] > 0:
            left[m] -= 1
        else:
            out.append(j)
    return out


def _regroup(space: CellSpace, groups: list) -> Algebra:
    owner = {}
    for idx, group in enumerate(groups):
        for c in group:
            owner[c] = idx
    regroup: list = [set() for _ in groups]
    for c in space:
        name = c
        while name not in owner:
            name = name.rsplit(".", 1)[0]
        regroup[owner[name]].add(c)
    return Algebra(space, tuple(frozenset(g) for g in regroup if g))


# ----------------------------------------------------------------------
# partial automorphisms


def _set_partitions(items: list):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[head] + part[k]] + part[k + 1:]
        yield [[head]] + part


@dataclass(frozen=True)
class PartialAut:
    """Measure-preserving bijection between the blocks of two subalgebras of A."""

    dom: tuple  # blocks, each a tuple of atom indices
    rng: tuple
    mapping: tuple  # mapping[k] = index into rng of the image of dom[k]

    def to_json(self) -> dict:
        return {"dom": [list(b) for b in self.dom], "rng": [list(b) for b in self.rng],
                "map": {str(k): v for k, v in enumerate(self.mapping)}}


def partial_automorphisms(A: Algebra):
    """Every partial automorphism between subalgebras of A (given by atom blocks)."""
    k = len(A.atoms)
    parts = [tuple(tuple(sorted(b)) for b in sorted(p)) for p in _set_partitions(list(range(k)))]
    parts.sort()
    for P in parts:
        pm = [A.element_measure(b) for b in P]
        for Q in parts:
            if len(Q) != len(P):
                continue
            qm = [A.element_measure(b) for b in Q]
            if sorted(pm, key=float) != sorted(qm, key=float) and Counter(pm) != Counter(qm):
                continue
            for perm in itertools.permutations(range(len(Q))):
                if all(pm[i] == qm[perm[i]] for i in range(len(P))):
                    yield PartialAut(P, Q, perm)


@dataclass
class MalgReport:
    ok: bool
    checked: int
    failure: dict | None = None

    def __bool__(self):
        return self.ok


def verify_extension_malg(A: Algebra, B: Algebra) -> MalgReport:
    """Exhaustively extend every partial automorphism of A to an automorphism of B."""
    if not refines(B, A):
        raise MalformedInputError("second algebra does not refine the first")
    inside = _atoms_inside(A, B)
    bm = B.measures
    checked = 0
    for pa in partial_automorphisms(A):
        checked += 1
        perm = {}
        for i, block in enumerate(pa.dom):
            src = [j for a in block for j in inside[a]]
            dst = [j for a in pa.rng[pa.mapping[i]] for j in inside[a]]
            match = _match_by_measure(src, dst, bm)
            if match is None:
                return MalgReport(False, checked, {"partial_automorphism": pa.to_json(),
                                                   "block": list(block)})
            perm.update(match)
        # the assembled map must be a measure-preserving bijection carrying blocks correctly
        if sorted(perm) != list(range(len(B.atoms))) or sorted(perm.values()) != list(range(len(B.atoms))):
            return MalgReport(False, checked, {"partial_automorphism": pa.to_json(), "reason": "not a bijection"})
        for i, block in enumerate(pa.dom):
            image = {perm[j] for a in block for j in inside[a]}
            target = {j for a in pa.rng[pa.mapping[i]] for j in inside[a]}
            if image != target:
                return MalgReport(False, checked, {"partial_automorphism": pa.to_json(), "block": list(block)})
    return MalgReport(True, checked)


def _match_by_measure(src, dst, measures):
    if len(src) != len(dst):
        return None
    pool: dict = {}
    for j in dst:
        pool.setdefault(measures[j], []).append(j)
    out = {}
    for j in src:
        bucket = pool.get(measures[j])
        if not bucket:
            return None
        out[j] = bucket.pop(0)
    return out


# ----------------------------------------------------------------------
# distance matrices


@dataclass(frozen=True)
class DistanceMatrix:
    entries: tuple  # k x k Scalars

    @classmethod
    def of(cls, rows) -> "DistanceMatrix":
        return cls(tuple(tuple(as_scalar(v) for v in row) for row in rows))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __len__(self):
        return len(self.entries)

    def epsilon(self, P: Algebra, i: int, j: int) -> Scalar:
        """Half of mu(A_i) + mu(A_j) - e_ij."""
        return (P.measure(i) + P.measure(j) - self.entries[i][j]) / 2

    def to_json(self) -> list:
        return [[format_scalar(v) for v in row] for row in self.entries]


def _image(g: Mapping[str, str], cells) -> frozenset:
    return frozenset(g[c] for c in cells)


def matrix_of_automorphism(P: Algebra, g: Mapping[str, str]) -> DistanceMatrix:
    """e_ij = mu(A_i symmetric-difference g(A_j)) for a cell permutation g."""
    space = P.space
    if set(g) != set(space) or set(g.values()) != set(space):
        raise MalformedInputError("g is not a permutation of the cells")
    for c, d in g.items():
        if space[c] != space[d]:
            raise MalformedInputError(f"g does not preserve the measure of {c!r}")
    k = len(P.atoms)
    rows = []
    for i in range(k):
        row = []
        for j in range(k):
            moved = _image(g, P.atoms[j])
            row.append(space.measure(P.atoms[i] ^ moved))
        rows.append(tuple(row))
    return DistanceMatrix(tuple(rows))


def p_additive(E: DistanceMatrix, P: Algebra) -> bool:
    k = len(P.atoms)
    if len(E) != k or any(len(r) != k for r in E.entries):
        raise MalformedInputError("matrix size does not match the partition")
    ms = P.measures
    for i in range(k):
        if E[i, i].sign() < 0:
            return False
        for j in range(k):
            if E[i, j].sign() < 0 or E[i, j] > ms[i] + ms[j]:
                return False
    for i in range(k):
        rows = _total(ms[i] + ms[j] - E[i, j] for j in range(k) if j != i)
        cols = _total(ms[i] + ms[j] - E[j, i] for j in range(k) if j != i)
        if E[i, i] != rows or E[i, i] != cols:
            return False
    return True


@dataclass
class Realization:
    space: CellSpace
    atoms: tuple  # A_i lifted to the new space
    saturating: tuple  # C_i lifted
    blocks: tuple  # B_i

    def measure(self, cells) -> Scalar:
        return self.space.measure(cells)


def realize_matrix(P: Algebra, C: Sequence[Iterable[str]], E: DistanceMatrix) -> Realization:
    """Partition (B_1..B_k) with mu(B_i) = mu(A_i) and mu(B_i sym-diff A_j) = e_ij.

    Mass only moves inside the sets C_i: the piece of C_i handed to B_j has
    measure half of mu(A_j) + mu(A_i) - e_ji.
    """
    k = len(P.atoms)
    C = [frozenset(c) for c in C]
    if len(C) != k:
        raise PreconditionError("need one set C_i per atom")
    for i in range(k):
        if not C[i] or not C[i] <= P.atoms[i]:
            raise PreconditionError(f"C_{i} must be a nonempty set of cells of atom {i}")
    cm = [P.space.measure(c) for c in C]
    if any(m != cm[0] for m in cm):
        raise PreconditionError("the sets C_i must have equal measure")
    if not p_additive(E, P):
        raise PreconditionError("matrix is not additive for this partition")
    for i in range(k):
        if not E[i, i] < 2 * cm[0]:
            raise PreconditionError(f"e_{i}{i} must be below 2*mu(C)")
    eps = [[E.epsilon(P, j, i) if j != i else ZERO for i in range(k)] for j in range(k)]
    space = P.space
    pieces: dict = {}
    for i in range(k):
        targets = [eps[j][i] for j in range(k) if j != i]
        moved = _total(targets)
        if moved > cm[i]:
            raise SaturationBoundError(f"mass leaving C_{i} exceeds mu(C_{i})")
        space, groups = carve(space, sorted(C[i]), targets + [cm[i] - moved])
        others = [j for j in range(k) if j != i]
        for j, grp in zip(others, groups):
            pieces[(j, i)] = grp  # D_ji, inside C_i, handed to B_j
    A_new = P.lift(space).atoms
    C_new = []
    for i in range(k):
        C_new.append(frozenset(c for c in space if space.ancestor(c) in space and _descends(c, C[i])))
    resolved = {key: frozenset(_expand(space, grp)) for key, grp in pieces.items()}
    blocks = []
    for i in range(k):
        leaving = frozenset().union(*(resolved[(j, i)] for j in range(k) if j != i)) if k > 1 else frozenset()
        arriving = frozenset().union(*(resolved[(i, j)] for j in range(k) if j != i)) if k > 1 else frozenset()
        blocks.append((A_new[i] - leaving) | arriving)
    return Realization(space, tuple(A_new), tuple(C_new), tuple(blocks))


def _descends(cell: str, roots: frozenset) -> bool:
    name = cell
    while True:
        if name in roots:
            return True
        if "." not in name:
            return False
        name = name.rsplit(".", 1)[0]


def _expand(space: CellSpace, cells) -> list:
    """Current cells descending from any of ``cells``."""
    roots = frozenset(cells)
    return [c for c in space if _descends(c, roots)]


# ----------------------------------------------------------------------
# independent amalgamation


@dataclass
class Amalgam:
    space: CellSpace
    A: Algebra
    B: Algebra
    C: Algebra  # the independent copy C'
    copy_of: tuple  # copy_of[k] = index of the C-atom that C'-atom k copies


def independent_amalgam(A: Algebra, B: Algebra, C: Algebra) -> Amalgam:
    """Move C inside each atom of A so that it becomes independent from B."""
    if not (refines(B, A) and refines(C, A)):
        raise PreconditionError("A must be contained in both B and C")
    inB = _atoms_inside(A, B)
    inC = _atoms_inside(A, C)
    space = B.space
    groups_for: dict = {}
    for a in range(len(A.atoms)):
        ma = A.measure(a)
        for b in inB[a]:
            mb = B.measure(b)
            targets = [mb * C.measure(c) / ma for c in inC[a]]
            space, groups = carve(space, sorted(B.atoms[b]), targets)
            for c, grp in zip(inC[a], groups):
                groups_for[(b, c)] = grp
    resolved = {key: frozenset(_expand(space, grp)) for key, grp in groups_for.items()}
    c_atoms = []
    copy_of = []
    for c in range(len(C.atoms)):
        cells = frozenset().union(*(v for (b, c2), v in resolved.items() if c2 == c))
        c_atoms.append(cells)
        copy_of.append(c)
    return Amalgam(space, A.lift(space), B.lift(space), Algebra(space, tuple(c_atoms)), tuple(copy_of))


def _automorphisms(alg: Algebra, base_inside: list):
    """Measure-preserving atom permutations of ``alg`` that permute the base blocks."""
    ms = alg.measures
    nb = len(base_inside)
    base_m = [_total(ms[j] for j in blk) for blk in base_inside]
    for sigma in itertools.permutations(range(nb)):
        if any(base_m[i] != base_m[sigma[i]] for i in range(nb)):
            continue
        choices = []
        for i in range(nb):
            src, dst = base_inside[i], base_inside[sigma[i]]
            if len(src) != len(dst):
                break
            opts = [dict(zip(src, p)) for p in itertools.permutations(dst)
                    if all(ms[s] == ms[t] for s, t in zip(src, p))]
            if not opts:
                break
            choices.append(opts)
        else:
            for combo in itertools.product(*choices):
                perm = {}
                for part in combo:
                    perm.update(part)
                yield sigma, perm


def check_independence_malg(A: Algebra, B: Algebra, C: Algebra) -> bool:
    """Exhaustive independence of B and C over A on a common cell space.

    For every automorphism pair of B and C that agree on A, the union must
    preserve the measure of every intersection b & c.
    """
    inB = _atoms_inside(A, B)
    inC = _atoms_inside(A, C)
    space = B.space
    meet = {(b, c): space.measure(B.atoms[b] & C.atoms[c])
            for b in range(len(B.atoms)) for c in range(len(C.atoms))}
    c_autos = list(_automorphisms(C, inC))
    for sigma, phi in _automorphisms(B, inB):
        for tau, psi in c_autos:
            if sigma != tau:
                continue
            for (b, c), v in meet.items():
                if meet[(phi[b], psi[c])] != v:
                    return False
    return True
