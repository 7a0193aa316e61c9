"""Extending partial linear isometries by reflections, with exact scalars."""

from eppa.hilbert import (
    PartialLinearIsometry,
    QuadraticSpace,
    check_perp_independence,
    gram_schmidt,
    mat_vec,
    orthogonal_amalgam,
    witt_extend,
)
from eppa.scalar import Scalar, format_scalar


def show(v):
    return "(" + ", ".join(format_scalar(x) for x in v) + ")"


def vec(*xs):
    return tuple(Scalar(x) for x in xs)


space = QuadraticSpace.standard(3)
print("orthogonalized:", [show(v) for v in gram_schmidt(space, [vec(1, 1, 0), vec(0, 1, 1)])])

phi = PartialLinearIsometry.build(space, [vec(1, 1, 0)], [vec(0, 1, 1)])
res = witt_extend(space, phi)
print(f"\n{len(res.reflections)} reflection(s) give an isometry of the whole space:")
for row in res.matrix:
    print("  ", show(row))
print("sends (1,1,0) to", show(mat_vec(res.matrix, vec(1, 1, 0))), "| preserves the Gram matrix:",
      space.is_isometry(res.matrix))

A, B, C = [vec(1, 0, 0), vec(0, 1, 0)], [vec(1, 0, 0), vec(1, 1, 1)], [vec(1, 0, 0)]
am = orthogonal_amalgam(space, A, B, C)
print(f"\ncopy of B over C orthogonal to A: D = {[show(d) for d in am.D]}, ambient enlarged: {am.extended}")
pad = am.space.dim - space.dim
A2 = [v + (Scalar(0),) * pad for v in A]
C2 = [v + (Scalar(0),) * pad for v in C]
print("A and C+D independent over C:", check_perp_independence(am.space, A2, list(am.witness.domain), C2).independent)
