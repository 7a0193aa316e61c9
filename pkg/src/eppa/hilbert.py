"""Finite-dimensional inner-product spaces over exact scalars.

Vectors are tuples of :class:`Scalar` coordinates and the inner product is
``<u, v> = u^T G v`` for a symmetric positive-definite Gram matrix ``G``.
Nothing here ever normalizes a vector: square roots need not exist in the
scalar field, so orthogonal bases stay unnormalized and isometries are built
from reflections, which only need field operations.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import CapacityError, MalformedInputError, PreconditionError, RankError
from .scalar import Scalar, as_scalar, format_scalar

__all__ = [
    "QuadraticSpace",
    "PartialLinearIsometry",
    "gram_schmidt",
    "rank",
    "reflection",
    "witt_extend",
    "WittResult",
    "orthogonal_amalgam",
    "Amalgam",
    "orthogonal_complement",
    "check_perp_independence",
    "PerpReport",
    "mat_mul",
    "mat_vec",
    "transpose",
    "identity",
]

ZERO = Scalar(0)
ONE = Scalar(1)

Vector = tuple
Matrix = tuple  # tuple of row tuples


def _vec(v) -> Vector:
    return tuple(as_scalar(x) for x in v)


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A)) if A else ()


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return tuple(tuple(_dot(row, col) for col in Bt) for row in A)


def mat_vec(A: Matrix, v: Vector) -> Vector:
    return tuple(_dot(row, v) for row in A)


def _dot(u, v) -> Scalar:
    out = ZERO
    for a, b in zip(u, v):
        if a and b:
            out = out + a * b
    return out


def _sub(u, v) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def _axpy(c, u, v) -> Vector:
    """c*u + v."""
    return tuple(c * a + b for a, b in zip(u, v))


def _is_zero(v) -> bool:
    return not any(v)


def _echelon_rank(rows: Sequence[Vector]) -> int:
    rows = [list(r) for r in rows]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c].inverse()
        for i in range(r + 1, len(rows)):
            if rows[i][c]:
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def rank(vectors: Sequence[Sequence]) -> int:
    return _echelon_rank([_vec(v) for v in vectors])


class QuadraticSpace:
    """Coordinate space with an exact positive-definite Gram matrix."""

    __slots__ = ("gram", "dim")

    def __init__(self, gram):
        G = tuple(tuple(as_scalar(x) for x in row) for row in gram)
        n = len(G)
        if any(len(row) != n for row in G):
            raise MalformedInputError("Gram matrix is not square")
        for i in range(n):
            for j in range(i):
                if G[i][j] != G[j][i]:
                    raise MalformedInputError(f"Gram matrix is not symmetric at ({i}, {j})")
        # positive definite iff every pivot of symmetric elimination is positive
        rows = [list(r) for r in G]
        for c in range(n):
            if rows[c][c].sign() <= 0:
                raise MalformedInputError("Gram matrix is not positive definite")
            inv = rows[c][c].inverse()
            for i in range(c + 1, n):
                if rows[i][c]:
                    f = rows[i][c] * inv
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "dim", n)

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticSpace is immutable")

    @classmethod
    def standard(cls, n: int) -> "QuadraticSpace":
        return cls(identity(n))

    def inner(self, u, v) -> Scalar:
        return _dot(u, mat_vec(self.gram, v))

    def norm2(self, u) -> Scalar:
        return self.inner(u, u)

    def gram_of(self, vectors) -> Matrix:
        vs = [_vec(v) for v in vectors]
        return tuple(tuple(self.inner(u, v) for v in vs) for u in vs)

    def is_isometry(self, M: Matrix) -> bool:
        return mat_mul(mat_mul(transpose(M), self.gram), M) == self.gram

    def basis(self, i: int) -> Vector:
        return tuple(ONE if k == i else ZERO for k in range(self.dim))

    def to_json(self) -> dict:
        return {"dim": self.dim, "gram": [[format_scalar(x) for x in row] for row in self.gram]}


def _project_out(space: QuadraticSpace, v: Vector, basis: Sequence[Vector], norms: Sequence[Scalar]) -> Vector:
    for b, nb in zip(basis, norms):
        c = space.inner(v, b) / nb
        if c:
            v = _axpy(-c, b, v)
    return v


def gram_schmidt(space: QuadraticSpace, vectors: Sequence[Sequence]) -> list:
    """Orthogonal (unnormalized) basis with the same span and a unit-triangular change of basis."""
    out, norms = [], []
    for v in vectors:
        v = _vec(v)
        if len(v) != space.dim:
            raise MalformedInputError("vector length does not match the dimension")
        w = _project_out(space, v, out, norms)
        if _is_zero(w):
            raise RankError("input vectors are linearly dependent")
        out.append(w)
        norms.append(space.norm2(w))
    return out


def _orthogonal_span(space: QuadraticSpace, vectors, start=(), start_norms=()) -> list:
    """Orthogonal basis extending ``start`` by the parts of ``vectors`` outside its span."""
    basis, norms = list(start), list(start_norms)
    new = []
    for v in vectors:
        w = _project_out(space, _vec(v), basis, norms)
        if not _is_zero(w):
            basis.append(w)
            norms.append(space.norm2(w))
            new.append(w)
    return new


def orthogonal_complement(space: QuadraticSpace, outer, inner) -> list:
    """Orthogonal basis of ``outer`` minus ``inner`` (the part of span(outer) orthogonal to span(inner))."""
    base = _orthogonal_span(space, inner)
    norms = [space.norm2(b) for b in base]
    return _orthogonal_span(space, outer, base, norms)


def _contains(outer, inner) -> bool:
    outer = [_vec(v) for v in outer]
    return _echelon_rank(outer + [_vec(v) for v in inner]) == _echelon_rank(outer)


@dataclass(frozen=True)
class PartialLinearIsometry:
    """Linear map sending ``domain[j]`` to ``images[j]``, preserving the Gram matrix."""

    domain: tuple
    images: tuple

    @classmethod
    def build(cls, space: QuadraticSpace, domain, images) -> "PartialLinearIsometry":
        domain = tuple(_vec(v) for v in domain)
        images = tuple(_vec(v) for v in images)
        if len(domain) != len(images):
            raise MalformedInputError("domain and image lists differ in length")
        if any(len(v) != space.dim for v in domain + images):
            raise MalformedInputError("vector length does not match the dimension")
        if domain and _echelon_rank(list(domain)) != len(domain):
            raise RankError("domain vectors are linearly dependent")
        if space.gram_of(domain) != space.gram_of(images):
            raise MalformedInputError("map does not preserve inner products")
        return cls(domain, images)

    def to_json(self) -> dict:
        return {"domain": [[format_scalar(x) for x in v] for v in self.domain],
                "images": [[format_scalar(x) for x in v] for v in self.images]}


def reflection(space: QuadraticSpace, w) -> Matrix:
    """Matrix of v -> v - 2 <v, w> / <w, w> * w."""
    w = _vec(w)
    nw = space.norm2(w)
    if nw.sign() <= 0:
        raise PreconditionError("cannot reflect in the zero vector")
    Gw = mat_vec(space.gram, w)  # <v, w> = v . Gw
    n = space.dim
    return tuple(
        tuple((ONE if i == j else ZERO) - 2 * w[i] * Gw[j] / nw for j in range(n))
        for i in range(n)
    )


@dataclass(frozen=True)
class WittResult:
    matrix: Matrix
    reflections: tuple  # reflection vectors, applied first to last

    def to_json(self) -> dict:
        return {"matrix": [[format_scalar(x) for x in row] for row in self.matrix],
                "reflections": [[format_scalar(x) for x in w] for w in self.reflections]}


def witt_extend(space: QuadraticSpace, phi: PartialLinearIsometry) -> WittResult:
    """Isometry of the whole space extending ``phi``, as a product of reflections.

    Domain vectors are matched one at a time.  If M already sends u_1..u_{j-1}
    correctly, w = M u_j - v_j is orthogonal to every earlier image because
    M is an isometry and phi preserves inner products; so the reflection in w
    fixes the earlier images and swaps M u_j with v_j (they have equal norm).
    """
    if space.gram_of(phi.domain) != space.gram_of(phi.images):
        raise MalformedInputError("map does not preserve inner products")
    M = identity(space.dim)
    used = []
    for u, v in zip(phi.domain, phi.images):
        w = _sub(mat_vec(M, u), v)
        if _is_zero(w):
            continue
        M = mat_mul(reflection(space, w), M)
        used.append(w)
    return WittResult(M, tuple(used))


@dataclass(frozen=True)
class Amalgam:
    space: QuadraticSpace  # the ambient space, possibly enlarged
    D: tuple  # basis of the copy of B minus C, orthogonal to A
    witness: PartialLinearIsometry  # C + D onto B, identity on C
    extended: bool  # whether fresh coordinates were added

    def to_json(self) -> dict:
        return {"space": self.space.to_json(),
                "D": [[format_scalar(x) for x in v] for v in self.D],
                "witness": self.witness.to_json(), "extended": self.extended}


def _pad(v, n) -> Vector:
    return tuple(v) + (ZERO,) * (n - len(v))


def _square_ratio(num: Scalar, den: Scalar) -> Scalar | None:
    try:
        return (num / den).sqrt()
    except Exception:  # mixed discriminants: no root inside this field
        return None


def _small_combinations(k: int, limit: int = 2):
    """Nonzero integer coefficient vectors with entries in [-limit, limit], by size."""
    vecs = [c for c in itertools.product(range(-limit, limit + 1), repeat=k) if any(c)]
    vecs.sort(key=lambda c: (sum(abs(x) for x in c), [abs(x) for x in c], [-x for x in c]))
    return vecs


def orthogonal_amalgam(space: QuadraticSpace, A, B, C, search_limit: int = 2) -> Amalgam:
    """A copy D of B minus C that is orthogonal to A, with C + D isometric to B over C.

    Vectors of A-perp with exactly the required norms are searched among
    small integer combinations of an orthogonal basis of A-perp.  When the
    field offers no such vectors, fresh orthogonal coordinates with the
    required norms are appended to the ambient space.
    """
    A = [_vec(v) for v in A]
    B = [_vec(v) for v in B]
    C = [_vec(v) for v in C]
    if not (_contains(A, C) and _contains(B, C)):
        raise PreconditionError("C must be contained in both A and B")
    rA, rB, rC = _echelon_rank(A) if A else 0, _echelon_rank(B) if B else 0, _echelon_rank(C) if C else 0
    if space.dim < rA + rB - rC:
        raise CapacityError(f"ambient dimension {space.dim} is below {rA + rB - rC}")
    c_basis = _orthogonal_span(space, C)
    c_norms = [space.norm2(c) for c in c_basis]
    target = _orthogonal_span(space, B, c_basis, c_norms)  # orthogonal basis of B minus C
    needed = [space.norm2(t) for t in target]
    if not target:
        return Amalgam(space, (), PartialLinearIsometry(tuple(c_basis), tuple(c_basis)), False)
    a_basis = _orthogonal_span(space, A)
    a_norms = [space.norm2(a) for a in a_basis]
    perp = _orthogonal_span(space, [space.basis(i) for i in range(space.dim)], a_basis, a_norms)
    D = _search_in(space, perp, needed, search_limit)
    extended = D is None
    if extended:
        n, k = space.dim, len(target)
        gram = [list(_pad(row, n + k)) for row in space.gram]
        for i in range(k):
            gram.append([ZERO] * n + [needed[i] if j == i else ZERO for j in range(k)])
        space = QuadraticSpace(gram)
        D = [tuple(ONE if j == n + i else ZERO for j in range(n + k)) for i in range(k)]
        c_basis = [_pad(c, n + k) for c in c_basis]
        target = [_pad(t, n + k) for t in target]
    witness = PartialLinearIsometry.build(space, list(c_basis) + list(D), list(c_basis) + list(target))
    return Amalgam(space, tuple(D), witness, extended)


def _search_in(space, perp: list, needed: list, limit: int):
    """Pairwise orthogonal vectors in span(perp) with the given norms, or None."""
    found: list = []
    found_norms: list = []
    pool = list(perp)
    for norm in needed:
        hit = None
        for coeffs in _small_combinations(len(pool), limit) if pool else ():
            v = tuple(ZERO for _ in range(space.dim))
            for c, p in zip(coeffs, pool):
                if c:
                    v = _axpy(Scalar(c), p, v)
            v = _project_out(space, v, found, found_norms)
            if _is_zero(v):
                continue
            t = _square_ratio(norm, space.norm2(v))
            if t is not None:
                hit = tuple(t * x for x in v)
                break
        if hit is None:
            return None
        found.append(hit)
        found_norms.append(norm)
        # keep searching inside the orthogonal complement of what was chosen
        pool = _orthogonal_span(space, pool, found, found_norms)
    return found


@dataclass
class PerpReport:
    independent: bool
    perpendicular: bool
    pairs_checked: int
    witness: object = None

    def __bool__(self):
        return self.independent


def _random_isometry_on(space: QuadraticSpace, basis: Sequence[Vector], rng: random.Random, steps: int = 2) -> Matrix:
    """Product of random reflections in vectors of span(basis); it fixes span(basis)-perp."""
    M = identity(space.dim)
    for _ in range(steps):
        if not basis:
            break
        coeffs = [rng.randint(-2, 2) for _ in basis]
        if not any(coeffs):
            coeffs[0] = 1
        w = tuple(ZERO for _ in range(space.dim))
        for c, b in zip(coeffs, basis):
            if c:
                w = _axpy(Scalar(c), b, w)
        M = mat_mul(reflection(space, w), M)
    return M


def check_perp_independence(space: QuadraticSpace, A, B, C, samples: int = 8, seed: int = 0) -> PerpReport:
    """Whether A minus C is orthogonal to B minus C, confirmed on sampled automorphism pairs.

    Each sampled pair is an automorphism of A and one of B that agree on C.
    Their union, defined on C + (A minus C) + (B minus C), must preserve
    inner products, and its extension by :func:`witt_extend` must be an
    isometry of the ambient space.
    """
    A = [_vec(v) for v in A]
    B = [_vec(v) for v in B]
    C = [_vec(v) for v in C]
    if not (_contains(A, C) and _contains(B, C)):
        raise PreconditionError("C must be contained in both A and B")
    c_basis = _orthogonal_span(space, C)
    c_norms = [space.norm2(c) for c in c_basis]
    a_rest = _orthogonal_span(space, A, c_basis, c_norms)
    b_rest = _orthogonal_span(space, B, c_basis, c_norms)
    for a in a_rest:
        for b in b_rest:
            if space.inner(a, b):
                return PerpReport(False, False, 0, (a, b))
    rng = random.Random(seed)
    domain = c_basis + a_rest + b_rest
    checked = 0
    for _ in range(samples):
        on_c = _random_isometry_on(space, c_basis, rng)
        on_a = _random_isometry_on(space, a_rest, rng)
        on_b = _random_isometry_on(space, b_rest, rng)
        # phi = on_a * on_c restricted to A, psi = on_b * on_c restricted to B; they agree on C
        images = ([mat_vec(on_c, c) for c in c_basis]
                  + [mat_vec(on_a, mat_vec(on_c, a)) for a in a_rest]
                  + [mat_vec(on_b, mat_vec(on_c, b)) for b in b_rest])
        checked += 1
        if space.gram_of(domain) != space.gram_of(images):
            return PerpReport(False, True, checked, "union does not preserve inner products")
        ext = witt_extend(space, PartialLinearIsometry(tuple(domain), tuple(images)))
        if not space.is_isometry(ext.matrix) or any(mat_vec(ext.matrix, u) != v for u, v in zip(domain, images)):
            return PerpReport(False, True, checked, "extension fails")
    return PerpReport(True, True, checked)
