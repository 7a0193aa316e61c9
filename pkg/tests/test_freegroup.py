import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eppa import freegroup as fg
from eppa.errors import BudgetError, MalformedInputError, PreconditionError, SeparationBudgetError
from eppa.oracles import check_witness, factorization_oracle

from helpers import metric_corpus

E1_MAPS = [{0: 1}]  # x = 0, y = 1, phi_1: x -> y
Z3 = fg.FiniteQuotient.single([(1, 2, 0)])  # a_1 -> +1 mod 3


def test_reduce_word_examples():
    assert fg.reduce_word([1, -1]) == ()
    assert fg.reduce_word([1, 2, -2, 1]) == (1, 1)
    with pytest.raises(MalformedInputError):
        fg.reduce_word([3], n=2)


@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12))
def test_reduce_word_is_idempotent_and_drops_pairs(letters):
    once = fg.reduce_word(letters)
    assert fg.reduce_word(once) == once
    assert (len(letters) - len(once)) % 2 == 0
    assert all(once[k] != -once[k + 1] for k in range(len(once) - 1))


def test_apply_word_on_running_example():
    assert fg.apply_word(E1_MAPS, (1,), 0) == 1
    assert fg.apply_word(E1_MAPS, (1,), 1) is None
    assert fg.apply_word(E1_MAPS, (-1, 1), 0) == 0


def test_orbit_image_on_running_example():
    elems = Z3.elements()
    plus_one = Z3.image((1,))
    assert fg.orbit_image(E1_MAPS, Z3, 0, 1, 2) == {plus_one}
    assert fg.orbit_image(E1_MAPS, Z3, 0, 0, 2) == {elems[0]}
    assert fg.orbit_image([{0: 1}], Z3, 0, 2, 3) == frozenset()


def test_benois_examples():
    res = fg.benois_trivial(E1_MAPS, [(0, 1), (1, 0)], 2)
    assert res.trivial and check_witness(E1_MAPS, [(0, 1), (1, 0)], res.witness)
    assert not fg.benois_trivial(E1_MAPS, [(0, 1)], 2).trivial
    res = fg.benois_trivial(E1_MAPS, [(0, 0)], 2)
    assert res.trivial and res.witness == ((),)


def test_separate_chain_examples():
    res = fg.separate_chain(E1_MAPS, [(0, 1)], npoints=2)
    assert res.quotient.degrees == (2,) and res.quotient.generators == (((1, 0),),)
    # product {a_1 a_1}: a chain through the loop-free map x->y->z twice
    maps = [{0: 1, 1: 2}]
    res = fg.separate_chain(maps, [(0, 2)], npoints=3)
    assert res.tried_degrees == [1, 2, 3]
    assert res.quotient.order() == 3
    with pytest.raises(PreconditionError):
        fg.separate_chain(E1_MAPS, [(0, 1), (1, 0)], npoints=2)


def test_separation_budget_names_last_degree():
    with pytest.raises(SeparationBudgetError) as info:
        fg.separate_chain([{0: 1, 1: 2}], [(0, 2)], npoints=3, max_degree=2)
    assert info.value.last_degree == 2


def test_combine_examples():
    z2 = fg.FiniteQuotient.single([(1, 0)])
    assert fg.combine_quotients([z2]).order() == 2
    both = fg.combine_quotients([z2, Z3])
    assert both.order() == 6
    assert both.generators == (((1, 0), (1, 2, 0)),)
    assert fg.combine_quotients([], n=1).order() == 1


def test_budget_error_on_large_quotient():
    s5 = fg.FiniteQuotient.single([(1, 2, 3, 4, 0), (1, 0, 2, 3, 4)])
    with pytest.raises(BudgetError):
        s5.elements(50)


def test_quotient_json_round_trip():
    q = fg.combine_quotients([fg.FiniteQuotient.single([(1, 0), (0, 1)]), fg.FiniteQuotient.single([(1, 2, 0), (0, 2, 1)])])
    assert fg.FiniteQuotient.from_json(q.to_json()) == q


def _random_quotient(rng, n, degree):
    perms = list(itertools.permutations(range(degree)))
    return fg.FiniteQuotient.single([rng.choice(perms) for _ in range(n)])


def test_orbit_images_compose_and_loops_form_subgroups():
    rng = random.Random(5)
    for space, maps in metric_corpus(11, 15):
        q = _random_quotient(rng, len(maps), 4)
        n = len(space)
        for x, y, z in itertools.product(range(n), repeat=3):
            left = fg.orbit_image(maps, q, y, z, n)
            right = fg.orbit_image(maps, q, x, y, n)
            assert fg.setwise_product(q, left, right) <= fg.orbit_image(maps, q, x, z, n)
        for x in range(n):
            loops = fg.orbit_image(maps, q, x, x, n)
            assert q.identity in loops
            assert fg.setwise_product(q, loops, loops) <= loops
            assert {q.inv(g) for g in loops} <= loops


def test_reduced_enumeration_finds_the_lexicographically_first_quotient():
    """Skipping conjugate candidates never changes the accepted quotient."""
    def first_by_full_enumeration(maps, signatures, max_degree):
        for degree in range(1, max_degree + 1):
            perms = list(itertools.permutations(range(degree)))
            for gens in itertools.product(perms, repeat=len(maps)):
                q = fg.FiniteQuotient.single(gens)
                if not any(fg.product_contains_identity(maps, q, s) for s in signatures):
                    return gens
        return None

    from eppa.metric import classify_chains

    for space, maps in metric_corpus(3, 12):
        _, nontrivial = classify_chains(space, maps)
        expected = first_by_full_enumeration(maps, nontrivial, 4)
        try:
            found = fg.search_quotient(maps, nontrivial, len(maps), 4, len(space)).quotient
            found = tuple(g[0] for g in found.generators)
        except SeparationBudgetError:
            found = None
        assert found == expected


def test_benois_agrees_with_factorization_oracle_on_short_chains():
    for space, maps in metric_corpus(21, 10):
        pairs = [(a, b) for a in range(len(space)) for b in range(len(space))]
        for sig in itertools.chain(((p,) for p in pairs), itertools.product(pairs, repeat=2)):
            res = fg.benois_trivial(maps, sig, len(space))
            found = factorization_oracle(maps, sig, 8)
            if found is not None:
                assert res.trivial
            if res.trivial:
                assert check_witness(maps, sig, res.witness)
