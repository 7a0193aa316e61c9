"""A slightly larger run: four points, two partial isometries.

Shows how chains are split into trivial ones (with a free-group witness)
and nontrivial ones that a finite permutation group must separate.
"""

from fractions import Fraction

from eppa.metric import check_result, classify_chains, extend_isometries, validate_space
from eppa.oracles import check_witness
from eppa.scalar import Scalar

one, mid, two = Scalar(1), Scalar(Fraction(3, 2)), Scalar(2)
labels = ["p", "q", "r", "s"]
d = [
    [Scalar(0), one, mid, two],
    [one, Scalar(0), one, mid],
    [mid, one, Scalar(0), one],
    [two, mid, one, Scalar(0)],
]
space = validate_space(labels, d)
maps = [{0: 1, 1: 2}, {2: 3}]  # p -> q -> r shifts along the path; r -> s

trivial, nontrivial = classify_chains(space, maps)
print(f"{len(trivial)} trivial chain signatures, {len(nontrivial)} nontrivial ones")
sig, words = next(iter(trivial.items()))
print(f"example trivial signature {sig} with witness words {words}: valid = {check_witness(maps, sig, words)}")

result = extend_isometries(space, maps)
print(f"\nquotient order {result.quotient.order()}, {len(result.classes)} classes in Y")
log = result.certificate["separation"]
print("a single joint search found nothing, so factors were combined:" if log["joint"] is None
      else f"joint search succeeded: {log['joint']}")
for factor in log["factors"][:5]:
    print(f"  signature {factor['found_for']} separated in degree {factor['tried_degrees'][-1]}")
print(f"  ... {len(log['factors'])} factors in all")
print(f"\nall metric and isometry checks pass: {check_result(space, maps, result) == []}")
