"""Extending a single partial isometry of a two-point space.

X has two points at distance 1 and one partial map sends x to y.  The map
cannot be an isometry of X itself, so the library builds a larger finite
space Y in which it becomes one.
"""

from eppa.metric import extend_isometries, validate_space, verify_extension
from eppa.scalar import Scalar, format_scalar

space = validate_space(["x", "y"], [[Scalar(0), Scalar(1)], [Scalar(1), Scalar(0)]])
maps = [{0: 1}]
print(f"delta = {space.delta}, diameter = {space.diameter}, chains up to length M = {space.M}")

result = extend_isometries(space, maps)
cert = result.certificate
print(f"\nchains considered: {cert['chains_considered']}")
print(f"quotient of the free group used: order {result.quotient.order()}")

print("\nclasses of Y (point, quotient element):")
for k, cls in enumerate(result.classes):
    members = ", ".join(f"({space.labels[p]}, {g})" for p, g in cls)
    print(f"  class {k}: {members}")

print("\ndistances in Y:")
for a in range(len(result.classes)):
    print("  " + "  ".join(format_scalar(result.dY[a, b]) for b in range(len(result.classes))))

print(f"\nthe map becomes the class permutation {result.perms[0]}")
print(f"x and y sit in classes {result.embedding[0]} and {result.embedding[1]}")

report = verify_extension(space, maps, result)
print(f"\nindependent chain recomputation: {report.checked} distances checked, ok = {report.ok}")
