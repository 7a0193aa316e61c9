"""Refining a finite measure algebra so partial automorphisms extend.

One atom of irrational measure a = sqrt(2)/4 has the same measure as the
union of two atoms of measures a/3 and 2a/3.  Exchanging those two elements
is a partial automorphism, but no permutation of the atoms realizes it.
After refinement both sides are cut into pieces of the same measures, and
the exchange extends.
"""

from fractions import Fraction

from eppa.malg import (
    Algebra,
    CellSpace,
    DistanceMatrix,
    extend_partial_automorphisms,
    good_check,
    identically_partitioned,
    independent_amalgam,
    matrix_of_automorphism,
    p_additive,
    realize_matrix,
    verify_extension_malg,
)
from eppa.scalar import Scalar, format_scalar

a = Scalar(0, 1, 2) / 4
A = Algebra.discrete(CellSpace({"a": a, "b": a / 3, "c": 2 * a / 3, "d": 1 - 2 * a}))
B = extend_partial_automorphisms(A)
print("atom measures after refinement:", [format_scalar(m) for m in B.measures])
print("equal atoms split alike:", good_check(A, B).good)
print("{a} and {b, c} split alike:", identically_partitioned(A, B, [0], [1, 2]))
report = verify_extension_malg(A, B)
print(f"every partial automorphism extends: {report.ok} ({report.checked} checked)")

# a cell permutation and its matrix of symmetric differences
cells = {f"c{i}": Fraction(1, 8) for i in range(8)}
P = Algebra(CellSpace(cells), (frozenset(f"c{i}" for i in range(4)), frozenset(f"c{i}" for i in range(4, 8))))
g = {c: c for c in cells}
g.update(c0="c4", c4="c0")
E = matrix_of_automorphism(P, g)
print("\nswapping one eighth across the halves gives", E.to_json(), "additive:", p_additive(E, P))

# moving mass 1/16 between two halves through small sets C_1 and C_2
P = Algebra(CellSpace({"a": "3/8", "c1": "1/8", "b": "3/8", "c2": "1/8"}),
            (frozenset({"a", "c1"}), frozenset({"b", "c2"})))
E = DistanceMatrix.of([["1/8", "7/8"], ["7/8", "1/8"]])
real = realize_matrix(P, [["c1"], ["c2"]], E)
print("realized symmetric differences:",
      [format_scalar(real.measure(real.blocks[i] ^ real.atoms[j])) for i in range(2) for j in range(2)])

# an independent copy of a halving over the trivial algebra
space = CellSpace({"l": "1/2", "r": "1/2"})
whole = Algebra(space, (frozenset(space),))
halves = Algebra(space, (frozenset({"l"}), frozenset({"r"})))
am = independent_amalgam(whole, halves, halves)
print("intersections with the independent copy:",
      [format_scalar(am.space.measure(b & c)) for b in am.B.atoms for c in am.C.atoms])
