"""Tally search: enumeration order oracles, the p = 23 hand-computed case,
plant-and-recover rounds, and worker-count independence."""

import math
import random

import pytest

from selftally.errors import TallyInfeasibleError
from selftally.groups import EC, IA, derive_params, make_group
from selftally.protocol import blind_vote, gen_keypair, mpc_keys_cached
from selftally.tally import (
    aggregate_product,
    check_tally,
    count_vectors,
    enumerate_counts,
    packed_exponent,
    rank_counts,
    search_tally,
    unrank_counts,
)


# ---------------------------------------------------------------------------
# enumeration

def test_enumerate_3_2_oracle():
    assert list(enumerate_counts(3, 2)) == [(3, 0), (2, 1), (1, 2), (0, 3)]
    assert count_vectors(3, 2) == 4
    assert count_vectors(3, 2) <= math.comb(4, 2)  # coarser bound


def test_enumerate_edges():
    assert list(enumerate_counts(0, 4)) == [(0, 0, 0, 0)]
    assert list(enumerate_counts(5, 1)) == [(5,)]


@pytest.mark.parametrize("n,k", [(3, 3), (6, 3), (5, 4), (0, 2), (7, 2)])
def test_enumeration_complete_and_ordered(n, k):
    seen = list(enumerate_counts(n, k))
    assert len(seen) == count_vectors(n, k)
    assert len(set(seen)) == len(seen)
    assert all(sum(c) == n for c in seen)
    assert seen == sorted(seen, reverse=True)  # descending lexicographic


@pytest.mark.parametrize("n,k", [(6, 3), (5, 4), (9, 2)])
def test_rank_unrank_roundtrip(n, k):
    for rank, counts in enumerate(enumerate_counts(n, k)):
        assert unrank_counts(rank, n, k) == list(counts)
        assert rank_counts(counts, k) == rank


# ---------------------------------------------------------------------------
# aggregate and check on the p = 23 oracle

def p23_three_votes():
    grp = make_group(derive_params(IA, "test-small", 3, 3))
    privates = [3, 4, 5]
    pubs = [grp.exp(grp.generator, x) for x in privates]
    keys = mpc_keys_cached(grp, pubs)
    votes = [blind_vote(grp, x, m, c)
             for x, m, c in zip(privates, keys, (1, 1, 2))]
    return grp, votes


def test_aggregate_product_p23():
    grp, votes = p23_three_votes()
    product = aggregate_product(grp, votes)
    assert product == 8  # blinding keys cancel: 5^2 * 4 = 100 = 8 mod 23
    assert packed_exponent((2, 1, 0), grp.params.m) == 6
    assert grp.exp(grp.generator, 6) == 8


def test_aggregate_empty_and_permuted():
    grp, votes = p23_three_votes()
    assert aggregate_product(grp, []) == grp.identity
    assert aggregate_product(grp, votes[::-1]) == aggregate_product(grp, votes)


def test_check_tally_p23():
    grp, votes = p23_three_votes()
    product = aggregate_product(grp, votes)
    assert check_tally(grp, (2, 1, 0), product)
    assert not check_tally(grp, (3, 0, 0), product)  # 5^3 = 10, not 8
    assert grp.exp(grp.generator, packed_exponent((3, 0, 0), 2)) == 10
    assert check_tally(grp, (0, 0, 0), grp.identity)
    assert not check_tally(grp, (2, 1), product)       # wrong length
    assert not check_tally(grp, (2, 1, -2), product)


def test_check_tally_curve():
    grp = make_group(derive_params(EC, "test-small", 4, 3))
    rng = random.Random(3)
    privates = [grp.random_scalar(rng) for _ in range(4)]
    pubs = [grp.to_affine(grp.exp(grp.generator, x)) for x in privates]
    keys = mpc_keys_cached(grp, pubs)
    choices = (2, 3, 2, 1)
    votes = [blind_vote(grp, x, m, c) for x, m, c in zip(privates, keys, choices)]
    product = aggregate_product(grp, votes)
    assert check_tally(grp, (1, 2, 1), product)
    assert not check_tally(grp, (2, 1, 1), product)


# ---------------------------------------------------------------------------
# search

def test_search_p23_case():
    grp, votes = p23_three_votes()
    product = aggregate_product(grp, votes)
    result = search_tally(grp.params, product, 3)
    assert result.counts == (2, 1, 0)
    assert result.iterations <= 4
    assert result.n_effective == 3


def test_search_exhaustive_unique_on_tiny_curve():
    params = derive_params(EC, "test-small", 6, 3)
    grp = make_group(params)
    planted = (2, 3, 1)
    product = grp.identity
    for ct, f in zip(planted, params.choice_generators):
        product = grp.op(product, grp.exp(f, ct))
    result = search_tally(params, product, 6, exhaustive=True)
    assert result.counts == planted
    assert result.iterations == count_vectors(6, 3)


@pytest.mark.parametrize("backend,profile", [(EC, "test-small"), (IA, "production")])
def test_plant_and_recover(backend, profile):
    params = derive_params(backend, profile, 7, 4)
    grp = make_group(params)
    rng = random.Random(11)
    for _ in range(4):
        counts = [0] * params.k
        for _ in range(7):
            counts[rng.randrange(params.k)] += 1
        product = grp.identity
        for ct, f in zip(counts, params.choice_generators):
            if ct:
                product = grp.op(product, grp.exp(f, ct))
        result = search_tally(params, product, 7)
        assert result.counts == tuple(counts)
        assert result.iterations <= count_vectors(7, params.k)


def test_search_result_worker_invariant():
    params = derive_params(EC, "test-small", 10, 3)
    grp = make_group(params)
    planted = (4, 1, 5)
    product = grp.identity
    for ct, f in zip(planted, params.choice_generators):
        product = grp.op(product, grp.exp(f, ct))
    one = search_tally(params, product, 10, workers=1)
    four = search_tally(params, product, 10, workers=4)
    assert one.counts == four.counts == planted
    assert four.workers == 4
    assert four.iterations <= count_vectors(10, 3)


def test_search_infeasible():
    params = derive_params(EC, "test-small", 4, 3)
    grp = make_group(params)
    bogus = grp.to_affine(grp.exp(grp.generator, 4242))
    with pytest.raises(TallyInfeasibleError):
        search_tally(params, bogus, 4)


def test_search_zero_voters():
    params = derive_params(IA, "test-small", 3, 3)
    result = search_tally(params, 1, 0)
    assert result.counts == (0, 0, 0)
    assert result.iterations == 1
