import random
from fractions import Fraction

import pytest

from eppa.errors import MalformedInputError, PreconditionError
from eppa.malg import (
    Algebra,
    CellSpace,
    DistanceMatrix,
    carve,
    check_independence_malg,
    extend_partial_automorphisms,
    good_check,
    identically_partitioned,
    independence_step,
    independent_amalgam,
    matrix_of_automorphism,
    p_additive,
    realize_matrix,
    refines,
    verify_extension_malg,
)
from eppa.scalar import Scalar

from helpers import (
    SQRT2,
    discrete_algebra,
    random_cell_automorphism,
    random_quadratic_algebra,
    rational_atom_multisets,
)

F = Fraction
S = Scalar


def grouped(cells: dict, atoms):
    return Algebra(CellSpace(cells), tuple(frozenset(a) for a in atoms))


def eight_cells():
    """Two atoms of measure 1/2 made of eight cells of 1/8."""
    cells = {f"c{i}": F(1, 8) for i in range(8)}
    return grouped(cells, [[f"c{i}" for i in range(4)], [f"c{i}" for i in range(4, 8)]])


def test_cell_space_rejects_bad_measures():
    with pytest.raises(MalformedInputError):
        CellSpace({"a": F(1, 2)})
    with pytest.raises(MalformedInputError):
        CellSpace({"a": 1, "b": 0})


def test_carve_conserves_measure():
    space = CellSpace({"a": F(1, 3), "b": F(2, 3)})
    new, groups = carve(space, ["a", "b"], [S(F(1, 4)), S(F(1, 2)), S(F(1, 4))])
    assert [new.measure(g) for g in groups] == [S(F(1, 4)), S(F(1, 2)), S(F(1, 4))]
    assert new.measure(list(new)) == S(1)


def test_good_check_examples():
    A = discrete_algebra([F(1, 2), F(1, 2)])
    assert good_check(A, A).good
    B = grouped({"a0.0": F(1, 4), "a0.1": F(1, 4), "a1.0": F(1, 3), "a1.1": F(1, 6)},
                [["a0.0"], ["a0.1"], ["a1.0"], ["a1.1"]])
    report = good_check(A, B)
    assert not report.good and report.witness[:2] == (0, 1)
    thirds = discrete_algebra([F(1, 3)] * 3)
    halves = grouped({f"a{i}.{j}": F(1, 6) for i in range(3) for j in range(2)},
                     [[f"a{i}.{j}"] for i in range(3) for j in range(2)])
    assert good_check(thirds, halves).good


def test_good_check_requires_a_refinement():
    A = discrete_algebra([F(1, 2), F(1, 2)])
    B = grouped({"x": F(1, 2), "y": F(1, 2)}, [["x"], ["y"]])
    assert not refines(B, A)
    with pytest.raises(MalformedInputError):
        good_check(A, B)


def test_rational_input_gets_the_uniform_refinement():
    A = discrete_algebra([F(1, 2), F(1, 4), F(1, 4)])
    B = extend_partial_automorphisms(A)
    assert sorted(B.measures) == [S(F(1, 4))] * 4
    assert refines(B, A)


def test_no_equal_pairs_leaves_the_algebra_alone():
    half_root = SQRT2 / 2
    A = discrete_algebra([half_root, S(1) - half_root])
    assert extend_partial_automorphisms(A).atoms == A.atoms


def test_two_equal_irrational_atoms_become_identically_partitioned():
    a = SQRT2 / 4
    A = discrete_algebra([a, a, S(1) - 2 * a])
    B = extend_partial_automorphisms(A)
    assert identically_partitioned(A, B, [0], [1])
    assert good_check(A, B).good
    assert verify_extension_malg(A, B).ok


def test_independence_step_example():
    a = SQRT2 / 4
    A = discrete_algebra([a, a / 3, 2 * a / 3, S(1) - 2 * a])
    B = independence_step(A, [0], [1, 2])
    assert identically_partitioned(A, B, [0], [1, 2])
    inside_first = sorted((B.measure(j) for j in range(len(B.atoms)) if B.atoms[j] <= _descendants(B, "a0")),
                          key=float)
    assert inside_first == [a / 3, 2 * a / 3]
    # the outside atom has a measure outside R and S and stays whole
    assert any(atom == frozenset({"a3"}) for atom in B.atoms)


def _descendants(alg, root):
    return frozenset(c for c in alg.space if c == root or c.startswith(root + "."))


def test_independence_step_rejects_bad_pairs():
    A = discrete_algebra([F(1, 2), F(1, 2)])
    with pytest.raises(PreconditionError):
        independence_step(A, [0], [0])
    with pytest.raises(PreconditionError):
        independence_step(A, [0], [1])  # R and S share the measure 1/2


def test_verify_extension_transposition():
    A = discrete_algebra([F(1, 3)] * 3)
    report = verify_extension_malg(A, A)
    assert report.ok and report.checked > 0


def test_verify_extension_reports_failure_on_a_bad_refinement():
    A = discrete_algebra([F(1, 2), F(1, 2)])
    B = grouped({"a0.0": F(1, 4), "a0.1": F(1, 4), "a1.0": F(1, 3), "a1.1": F(1, 6)},
                [["a0.0"], ["a0.1"], ["a1.0"], ["a1.1"]])
    report = verify_extension_malg(A, B)
    assert not report.ok and report.failure is not None


def test_rational_algebras_with_small_denominators_sample():
    multisets = rational_atom_multisets(3, 6)
    for ms in multisets:
        A = discrete_algebra(ms)
        B = extend_partial_automorphisms(A)
        assert good_check(A, B).good and verify_extension_malg(A, B).ok


def test_quadratic_algebras():
    rng = random.Random(1)
    for _ in range(10):
        A = random_quadratic_algebra(rng)
        B = extend_partial_automorphisms(A)
        assert sum(B.measures, S(0)) == S(1)
        assert good_check(A, B).good and verify_extension_malg(A, B).ok


def test_matrix_examples():
    P = eight_cells()
    ident = {c: c for c in P.space}
    assert matrix_of_automorphism(P, ident).entries == ((S(0), S(1)), (S(1), S(0)))
    swap = {f"c{i}": f"c{(i + 4) % 8}" for i in range(8)}
    assert matrix_of_automorphism(P, swap).entries == ((S(1), S(0)), (S(0), S(1)))
    move = dict(ident, c0="c4", c4="c0")
    E = matrix_of_automorphism(P, move)
    assert E.entries == ((S(F(1, 4)), S(F(3, 4))), (S(F(3, 4)), S(F(1, 4))))
    assert p_additive(E, P) and p_additive(matrix_of_automorphism(P, ident), P)
    bumped = DistanceMatrix.of([[E[0, 0] + S(F(1, 100)), E[0, 1]], [E[1, 0], E[1, 1]]])
    assert not p_additive(bumped, P)


def test_matrix_of_automorphism_rejects_measure_changes():
    P = grouped({"a": F(1, 4), "b": F(3, 4)}, [["a"], ["b"]])
    with pytest.raises(MalformedInputError):
        matrix_of_automorphism(P, {"a": "b", "b": "a"})


def test_random_automorphisms_are_additive():
    rng = random.Random(2)
    for _ in range(50):
        P, g = random_cell_automorphism(rng)
        assert p_additive(matrix_of_automorphism(P, g), P)


def _check_realization(P, E, real):
    k = len(P.atoms)
    for i in range(k):
        assert real.measure(real.blocks[i]) == P.measure(i)
        for j in range(k):
            assert real.measure(real.blocks[i] ^ real.atoms[j]) == E[i, j]
            if i != j:
                assert not real.blocks[i] & real.blocks[j]
                assert real.blocks[i] & real.atoms[j] <= real.saturating[j]
        assert real.atoms[i] - real.blocks[i] <= real.saturating[i]


def test_realize_matrix_transfer_example():
    P = grouped({"a": F(3, 8), "c1": F(1, 8), "b": F(3, 8), "c2": F(1, 8)}, [["a", "c1"], ["b", "c2"]])
    E = DistanceMatrix.of([[F(1, 8), F(7, 8)], [F(7, 8), F(1, 8)]])
    assert E.epsilon(P, 0, 1) == S(F(1, 16))
    real = realize_matrix(P, [["c1"], ["c2"]], E)
    _check_realization(P, E, real)
    assert real.measure(real.blocks[0] - real.atoms[0]) == S(F(1, 16))


def test_realize_matrix_without_motion_and_bounds():
    P = grouped({"a": F(3, 8), "c1": F(1, 8), "b": F(3, 8), "c2": F(1, 8)}, [["a", "c1"], ["b", "c2"]])
    E = DistanceMatrix.of([[0, 1], [1, 0]])
    real = realize_matrix(P, [["c1"], ["c2"]], E)
    assert [real.measure(b ^ a) for b, a in zip(real.blocks, real.atoms)] == [S(0), S(0)]
    with pytest.raises(PreconditionError):
        realize_matrix(P, [["c1"], ["c2"]], DistanceMatrix.of([[F(1, 4), F(3, 4)], [F(3, 4), F(1, 4)]]))


def _saturated_instance(rng):
    """k atoms of measure 1/k, each holding a set C_i of m equal subcells, and a shuffle of the subcells."""
    k, m = rng.randint(2, 4), rng.randint(1, 4)
    c = rng.choice([S(F(1, 4 * k)), SQRT2 / (4 * k)])
    cells, atoms, sats = {}, [], []
    for i in range(k):
        sub = [f"c{i}_{j}" for j in range(m)]
        cells.update({name: c / m for name in sub})
        cells[f"r{i}"] = S(F(1, k)) - c
        atoms.append(sub + [f"r{i}"])
        sats.append(sub)
    P = grouped(cells, atoms)
    pool = [name for sub in sats for name in sub]
    image = pool[:]
    rng.shuffle(image)
    g = {name: name for name in cells}
    g.update(zip(pool, image))
    return P, sats, g, c


def test_realize_matrix_reproduces_random_automorphism_matrices():
    rng = random.Random(4)
    done = 0
    for _ in range(200):
        P, sats, g, c = _saturated_instance(rng)
        E = matrix_of_automorphism(P, g)
        if any(not E[i, i] < 2 * c for i in range(len(P.atoms))):
            continue
        _check_realization(P, E, realize_matrix(P, sats, E))
        done += 1
    assert done >= 50


def test_independent_amalgam_of_two_halvings():
    space = CellSpace({"l": F(1, 2), "r": F(1, 2)})
    A = Algebra(space, (frozenset({"l", "r"}),))
    B = Algebra(space, (frozenset({"l"}), frozenset({"r"})))
    am = independent_amalgam(A, B, B)
    for b in am.B.atoms:
        for c in am.C.atoms:
            assert am.space.measure(b & c) == S(F(1, 4))
    assert check_independence_malg(am.A, am.B, am.C)
    assert not check_independence_malg(A, B, B)


def test_independent_amalgam_keeps_type_and_product_rule():
    rng = random.Random(6)
    for _ in range(20):
        P, _ = random_cell_automorphism(rng)
        names = sorted(P.space)
        rng.shuffle(names)
        cut = rng.randint(1, len(names) - 1) if len(names) > 1 else 1
        C = Algebra(P.space, tuple(frozenset(x) for x in (names[:cut], names[cut:]) if x))
        A = Algebra(P.space, (frozenset(P.space),))
        am = independent_amalgam(A, P, C)
        assert [am.C.measure(k) for k in range(len(am.C.atoms))] == C.measures
        for b in am.B.atoms:
            for c in am.C.atoms:
                assert am.space.measure(b & c) == am.space.measure(b) * am.space.measure(c)


def test_independent_amalgam_over_a_contained_algebra():
    space = CellSpace({"l": F(1, 3), "r": F(2, 3)})
    A = Algebra(space, (frozenset({"l"}), frozenset({"r"})))
    am = independent_amalgam(A, A, A)
    assert [am.C.measure(k) for k in range(2)] == [S(F(1, 3)), S(F(2, 3))]
