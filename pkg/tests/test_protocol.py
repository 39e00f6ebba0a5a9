"""Key synchronization, blinding, and repair; hand-computed oracles on the
p = 23 group, randomized checks on the other backends."""

import random

import pytest

from selftally.errors import (
    ChoiceRangeError,
    PrivacyPreconditionError,
    RepairError,
    SelfShareError,
)
from selftally.groups import EC, IA, derive_params, make_group
from selftally.protocol import (
    BlindedVote,
    blind_vote,
    gen_keypair,
    mpc_keys_cached,
    mpc_keys_naive,
    prove_pairwise_key,
    repair_blinded_vote,
    verify_pairwise_key,
)


def ia_group(n=3, k=3):
    return make_group(derive_params(IA, "test-small", n, k))


def tiny_group(n=3, k=3):
    return make_group(derive_params(EC, "test-small", n, k))


def keys_from_privates(grp, privates):
    return [grp.to_affine(grp.exp(grp.generator, x)) for x in privates]


# ---------------------------------------------------------------------------
# keypairs

def test_keypair_deterministic_under_seed():
    grp = tiny_group()
    k1 = gen_keypair(grp, random.Random(42))
    k2 = gen_keypair(grp, random.Random(42))
    assert k1 == k2


def test_keypair_consistency():
    grp = ia_group()
    kp = gen_keypair(grp, random.Random(1))
    assert grp.exp(grp.generator, kp.x) == kp.pub
    assert grp.exp(grp.generator, 9) == 11  # 5**9 mod 23


# ---------------------------------------------------------------------------
# synchronized keys

def test_mpc_keys_p23_oracle():
    grp = ia_group()
    pubs = keys_from_privates(grp, [3, 4, 5])
    assert pubs == [10, 4, 20]
    naive = mpc_keys_naive(grp, pubs)
    assert [m.h for m in naive] == [21, 12, 17]
    cached = mpc_keys_cached(grp, pubs)
    assert naive == cached


def test_mpc_requires_three_keys():
    grp = ia_group()
    pubs = keys_from_privates(grp, [3, 4])
    with pytest.raises(PrivacyPreconditionError):
        mpc_keys_naive(grp, pubs)
    with pytest.raises(PrivacyPreconditionError):
        mpc_keys_cached(grp, pubs)


@pytest.mark.parametrize("n", [3, 6, 50])
def test_cached_equals_naive_and_blinding_keys_cancel(n):
    grp = ia_group(n=max(n, 3), k=2) if n <= 30 else make_group(
        derive_params(IA, "test-small", n, 2))
    rng = random.Random(n)
    privates = [grp.random_scalar(rng) for _ in range(n)]
    pubs = keys_from_privates(grp, privates)
    naive = mpc_keys_naive(grp, pubs)
    cached = mpc_keys_cached(grp, pubs)
    assert [m.h for m in naive] == [m.h for m in cached]
    prod = grp.identity
    for x, m in zip(privates, naive):
        prod = grp.op(prod, grp.exp(m.h, x))
    assert grp.is_identity(prod)


def test_blinding_keys_cancel_on_curve():
    for n in (3, 6):
        grp = tiny_group(n=n, k=2)
        rng = random.Random(n)
        privates = [grp.random_scalar(rng) for _ in range(n)]
        pubs = keys_from_privates(grp, privates)
        keys = mpc_keys_cached(grp, pubs)
        prod = grp.identity
        for x, m in zip(privates, keys):
            prod = grp.op(prod, grp.exp(m.h, x))
        assert grp.is_identity(prod)


def test_mpc_operation_counts():
    n = 50
    grp = make_group(derive_params(IA, "test-small", n, 2))
    rng = random.Random(0)
    pubs = keys_from_privates(grp, [grp.random_scalar(rng) for _ in range(n)])

    grp.counter_reset()
    mpc_keys_naive(grp, pubs)
    naive_muls = grp.counter.mul
    assert naive_muls >= n * (n - 1)

    grp.counter_reset()
    mpc_keys_cached(grp, pubs)
    cached_muls = grp.counter.mul
    assert cached_muls <= 3 * n + 10
    assert cached_muls < naive_muls


# ---------------------------------------------------------------------------
# blinding

def test_blind_vote_p23_oracle():
    grp = ia_group()
    privates = [3, 4, 5]
    pubs = keys_from_privates(grp, privates)
    keys = mpc_keys_cached(grp, pubs)
    # blinding keys 5^{x_i y_i}
    bks = [grp.exp(m.h, x) for x, m in zip(privates, keys)]
    assert bks == [15, 13, 21]
    assert grp.op(grp.op(15, 13), 21) == 1
    vote = blind_vote(grp, privates[0], keys[0], 1)
    assert vote.value == 6  # 15 * 5 mod 23


def test_blind_vote_choice_range():
    grp = ia_group()
    keys = mpc_keys_cached(grp, keys_from_privates(grp, [3, 4, 5]))
    with pytest.raises(ChoiceRangeError):
        blind_vote(grp, 3, keys[0], 0)
    with pytest.raises(ChoiceRangeError):
        blind_vote(grp, 3, keys[0], grp.params.k + 1)


# ---------------------------------------------------------------------------
# privacy boundary (two- and three-party structure)

def test_two_party_blinding_keys_are_mutual_inverses():
    grp = ia_group()
    rng = random.Random(77)
    for _ in range(100):
        x1, x2 = grp.random_scalar(rng), grp.random_scalar(rng)
        X1, X2 = keys_from_privates(grp, [x1, x2])
        h1 = grp.inv(X2)      # only later key, inverted
        h2 = X1               # only earlier key
        bk1 = grp.exp(h1, x1)
        bk2 = grp.exp(h2, x2)
        assert grp.is_identity(grp.op(bk1, bk2))


def test_three_party_blinding_keys_not_pairwise_inverse():
    # needs a group large enough that accidental cancellation of
    # exponents is negligible; the order-22 group is not
    grp = tiny_group()
    rng = random.Random(78)
    for _ in range(100):
        privates = [grp.random_scalar(rng) for _ in range(3)]
        pubs = keys_from_privates(grp, privates)
        keys = mpc_keys_cached(grp, pubs)
        bks = [grp.exp(m.h, x) for x, m in zip(privates, keys)]
        for i in range(3):
            for j in range(i + 1, 3):
                assert not grp.is_identity(grp.op(bks[i], bks[j]))


# ---------------------------------------------------------------------------
# pairwise keys and repair

def test_pairwise_key_p23_oracle():
    grp = ia_group()
    from selftally.protocol import EphemeralKeypair
    kp1 = EphemeralKeypair(x=3, pub=grp.exp(grp.generator, 3))
    X2 = grp.exp(grp.generator, 4)
    share = prove_pairwise_key(grp, kp1, 1, 2, X2, random.Random(5))
    assert share.key == 18  # 5**12 mod 23
    assert verify_pairwise_key(grp, share, kp1.pub, X2)
    assert share.invert is False  # 2 > 1, key multiplied back in


def test_pairwise_key_rejects_self():
    grp = ia_group()
    kp = gen_keypair(grp, random.Random(0))
    with pytest.raises(SelfShareError):
        prove_pairwise_key(grp, kp, 2, 2, kp.pub, random.Random(1))


def test_pairwise_key_forged_material_rejected():
    for grp in (ia_group(), tiny_group()):
        kp1 = gen_keypair(grp, random.Random(1))
        kp2 = gen_keypair(grp, random.Random(2))
        share = prove_pairwise_key(grp, kp1, 1, 2, kp2.pub, random.Random(3))
        assert verify_pairwise_key(grp, share, kp1.pub, kp2.pub)
        from dataclasses import replace
        forged = replace(share, key=grp.to_affine(grp.op(share.key, grp.generator)))
        assert not verify_pairwise_key(grp, forged, kp1.pub, kp2.pub)


def full_run(grp, privates, choices):
    """All honest blinded votes for the given private keys."""
    pubs = keys_from_privates(grp, privates)
    keys = mpc_keys_cached(grp, pubs)
    return pubs, keys, [
        blind_vote(grp, x, m, c) for x, m, c in zip(privates, keys, choices)]


def test_repair_matches_fresh_smaller_run():
    grp = tiny_group(n=6, k=3)
    rng = random.Random(13)
    privates = [grp.random_scalar(rng) for _ in range(6)]
    choices = [1, 2, 3, 1, 2, 1]
    pubs, keys, votes = full_run(grp, privates, choices)

    faulty = 3  # 1-based
    kps = [None] + privates
    repaired = []
    for i, vote in enumerate(votes, start=1):
        if i == faulty:
            continue
        from selftally.protocol import EphemeralKeypair
        kp = EphemeralKeypair(x=privates[i - 1], pub=pubs[i - 1])
        share = prove_pairwise_key(grp, kp, i, faulty, pubs[faulty - 1],
                                   random.Random(100 + i))
        assert verify_pairwise_key(grp, share, pubs[i - 1], pubs[faulty - 1])
        repaired.append(repair_blinded_vote(grp, vote, [share], [faulty]))

    # oracle: a fresh five-party world with the same surviving keys
    small = tiny_group(n=5, k=3)
    surviving = [x for i, x in enumerate(privates, 1) if i != faulty]
    surviving_choices = [c for i, c in enumerate(choices, 1) if i != faulty]
    _, _, fresh = full_run(small, surviving, surviving_choices)
    for rv, fv in zip(repaired, fresh):
        assert grp.canonical_bytes(rv.value) == small.canonical_bytes(fv.value)


def test_two_round_repair_equals_one_round():
    grp = ia_group(n=6, k=2)
    rng = random.Random(17)
    privates = [grp.random_scalar(rng) for _ in range(6)]
    pubs, keys, votes = full_run(grp, privates, [1, 2, 1, 2, 1, 2])
    from selftally.protocol import EphemeralKeypair

    i = 1
    kp = EphemeralKeypair(x=privates[0], pub=pubs[0])
    mk = lambda j, seed: prove_pairwise_key(grp, kp, i, j, pubs[j - 1],
                                            random.Random(seed))
    two_rounds = repair_blinded_vote(
        grp, repair_blinded_vote(grp, votes[0], [mk(3, 1)], [3]),
        [mk(5, 2)], [5])
    one_round = repair_blinded_vote(grp, votes[0], [mk(3, 3), mk(5, 4)], [3, 5])
    assert two_rounds.value == one_round.value
    assert two_rounds.repaired_for == (3, 5)


def test_repair_validations():
    grp = ia_group(n=6, k=2)
    rng = random.Random(19)
    privates = [grp.random_scalar(rng) for _ in range(6)]
    pubs, keys, votes = full_run(grp, privates, [1] * 6)
    from selftally.protocol import EphemeralKeypair
    kp = EphemeralKeypair(x=privates[0], pub=pubs[0])
    share3 = prove_pairwise_key(grp, kp, 1, 3, pubs[2], random.Random(1))

    assert repair_blinded_vote(grp, votes[0], [], []).value == votes[0].value

    with pytest.raises(RepairError):   # duplicate share
        repair_blinded_vote(grp, votes[0], [share3, share3], [3])
    with pytest.raises(RepairError):   # share for a non-faulty index
        repair_blinded_vote(grp, votes[0], [share3], [4])
    with pytest.raises(RepairError):   # faulty set not fully covered
        repair_blinded_vote(grp, votes[0], [share3], [3, 5])
    done = repair_blinded_vote(grp, votes[0], [share3], [3])
    with pytest.raises(RepairError):   # already repaired in an earlier round
        repair_blinded_vote(grp, done, [share3], [3])
