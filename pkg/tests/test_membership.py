"""Disjunctive membership proofs: completeness for every choice on both
backends, challenge domain separation, and mutation-fuzzing soundness."""

import random
from dataclasses import replace

import pytest

from selftally.groups import EC, IA, derive_params, make_group
from selftally.protocol import (
    EphemeralKeypair,
    MembershipProof,
    blind_vote,
    decode_membership_proof,
    encode_membership_proof,
    fiat_shamir_challenge,
    gen_keypair,
    mpc_keys_cached,
    prove_membership,
    verify_membership,
)


def honest_setup(grp, n, seed):
    rng = random.Random(seed)
    keypairs = [gen_keypair(grp, rng) for _ in range(n)]
    keys = mpc_keys_cached(grp, [kp.pub for kp in keypairs])
    return keypairs, keys


def prove_one(grp, seed=0, choice=1, n=3):
    keypairs, keys = honest_setup(grp, n, seed)
    vote = blind_vote(grp, keypairs[0].x, keys[0], choice)
    proof = prove_membership(grp, keypairs[0], keys[0], vote, choice,
                             random.Random(seed + 1))
    return keypairs[0], keys[0], vote, proof


# ---------------------------------------------------------------------------
# completeness

def test_p23_every_choice_verifies():
    grp = make_group(derive_params(IA, "test-small", 3, 3))
    for choice in (1, 2, 3):
        kp, mk, vote, proof = prove_one(grp, seed=choice, choice=choice)
        assert verify_membership(grp, proof, kp.pub, mk.h, vote.value)


def test_tiny_curve_every_choice_verifies():
    grp = make_group(derive_params(EC, "test-small", 4, 3))
    for choice in (1, 2, 3):
        kp, mk, vote, proof = prove_one(grp, seed=choice, choice=choice, n=4)
        assert verify_membership(grp, proof, kp.pub, mk.h, vote.value)
        assert verify_membership(grp, proof, kp.pub, mk.h, vote.value,
                                 use_hints=True)


def test_secp256k1_verifies_with_and_without_hints():
    grp = make_group(derive_params(EC, "production", 3, 2))
    kp, mk, vote, proof = prove_one(grp, seed=5, choice=2)
    assert proof.hints
    assert verify_membership(grp, proof, kp.pub, mk.h, vote.value, use_hints=True)
    assert verify_membership(grp, proof, kp.pub, mk.h, vote.value, use_hints=False)


def test_randomized_prover_differs_but_both_verify():
    grp = make_group(derive_params(IA, "test-small", 3, 3))
    keypairs, keys = honest_setup(grp, 3, 9)
    vote = blind_vote(grp, keypairs[0].x, keys[0], 2)
    p1 = prove_membership(grp, keypairs[0], keys[0], vote, 2, random.Random(1))
    p2 = prove_membership(grp, keypairs[0], keys[0], vote, 2, random.Random(2))
    assert encode_membership_proof(grp, p1) != encode_membership_proof(grp, p2)
    assert verify_membership(grp, p1, keypairs[0].pub, keys[0].h, vote.value)
    assert verify_membership(grp, p2, keypairs[0].pub, keys[0].h, vote.value)


def test_wrong_statement_rejected():
    grp = make_group(derive_params(EC, "test-small", 3, 2))
    kp, mk, vote, proof = prove_one(grp, seed=3, choice=1)
    other = gen_keypair(grp, random.Random(99))
    assert not verify_membership(grp, proof, other.pub, mk.h, vote.value)


# ---------------------------------------------------------------------------
# wire format

def test_proof_roundtrip():
    for params in (derive_params(IA, "test-small", 3, 3),
                   derive_params(EC, "test-small", 3, 3)):
        grp = make_group(params)
        kp, mk, vote, proof = prove_one(grp, seed=4, choice=3)
        data = encode_membership_proof(grp, proof)
        assert decode_membership_proof(grp, data) == proof
        with pytest.raises(ValueError):
            decode_membership_proof(grp, data + b"\x00")
        with pytest.raises(ValueError):
            decode_membership_proof(grp, b"\x09" + data[1:])


# ---------------------------------------------------------------------------
# challenge plumbing

def test_challenge_deterministic_and_domain_separated():
    grp = make_group(derive_params(IA, "test-small", 3, 3))
    items = [5, 4, 3]
    assert fiat_shamir_challenge(grp, 0x01, items) == fiat_shamir_challenge(grp, 0x01, items)
    assert fiat_shamir_challenge(grp, 0x01, items) != fiat_shamir_challenge(grp, 0x02, items)


def test_challenge_sensitive_to_items():
    grp = make_group(derive_params(EC, "production", 3, 2))
    g = grp.generator
    a = grp.to_affine(grp.exp(g, 123))
    b = grp.to_affine(grp.exp(g, 456))
    diffs = sum(
        fiat_shamir_challenge(grp, 0x01, [a, b]) != fiat_shamir_challenge(grp, 0x01, [a, grp.to_affine(grp.exp(g, 456 + i))])
        for i in range(1, 6))
    assert diffs == 5
    with pytest.raises(ValueError):
        fiat_shamir_challenge(grp, 0x01, [])


# ---------------------------------------------------------------------------
# soundness by mutation fuzzing

def mutate_proof(grp, proof, rng):
    """Replace one field of the proof with a fresh random value."""
    k = grp.params.k
    kind = rng.choice(
        ["a", "b", "r", "d"] + (["hint"] if proof.hints else []))
    if kind in ("r", "d"):
        l = rng.randrange(k)
        vals = list(getattr(proof, kind))
        old = vals[l]
        while vals[l] == old:
            vals[l] = rng.randrange(grp.order)
        return replace(proof, **{kind: tuple(vals)})
    if kind == "hint":
        l = rng.randrange(len(proof.hints))
        vals = list(proof.hints)
        vals[l] = (vals[l] + rng.randrange(1, 1000)) % grp.params.field_prime
        return replace(proof, hints=tuple(vals))
    l = rng.randrange(k)
    vals = list(getattr(proof, kind))
    old = vals[l]
    while grp.eq(vals[l], old) if grp.backend == "ec" else vals[l] == old:
        s = rng.randrange(1, grp.order)
        vals[l] = grp.to_affine(grp.exp(grp.generator, s))
    return replace(proof, **{kind: tuple(vals)})


def test_mutated_proofs_rejected_ec():
    grp = make_group(derive_params(EC, "production", 3, 3))
    kp, mk, vote, proof = prove_one(grp, seed=11, choice=2)
    assert verify_membership(grp, proof, kp.pub, mk.h, vote.value, use_hints=True)
    rng = random.Random(1234)
    for _ in range(60):
        bad = mutate_proof(grp, proof, rng)
        assert not verify_membership(grp, bad, kp.pub, mk.h, vote.value,
                                     use_hints=True)


def test_mutated_proofs_rejected_ia():
    grp = make_group(derive_params(IA, "production", 3, 3))
    kp, mk, vote, proof = prove_one(grp, seed=12, choice=1)
    assert verify_membership(grp, proof, kp.pub, mk.h, vote.value)
    rng = random.Random(4321)
    for _ in range(60):
        bad = mutate_proof(grp, proof, rng)
        assert not verify_membership(grp, bad, kp.pub, mk.h, vote.value)


def test_checksum_tamper_rejected():
    grp = make_group(derive_params(IA, "test-small", 3, 3))
    kp, mk, vote, proof = prove_one(grp, seed=13, choice=2)
    d = list(proof.d)
    d[0] = (d[0] + 1) % grp.order
    assert not verify_membership(grp, replace(proof, d=tuple(d)),
                                 kp.pub, mk.h, vote.value)


def test_malformed_elements_rejected():
    grp = make_group(derive_params(EC, "production", 3, 2))
    kp, mk, vote, proof = prove_one(grp, seed=14, choice=1)
    bad_point = (1, 2, 1)  # not on secp256k1
    assert not verify_membership(
        grp, replace(proof, a=(bad_point,) + proof.a[1:]),
        kp.pub, mk.h, vote.value)
    assert not verify_membership(
        grp, replace(proof, r=(grp.order,) + proof.r[1:]),
        kp.pub, mk.h, vote.value)


# ---------------------------------------------------------------------------
# verification cost accounting

def test_affine_transform_counts_per_branch():
    params = derive_params(EC, "production", 3, 3)
    kp, mk, vote, proof = prove_one(make_group(params), seed=15, choice=2)
    k = params.k

    jac = make_group(params, coords="jacobi")
    assert verify_membership(jac, proof, kp.pub, mk.h, vote.value)
    no_hints = jac.counter.snapshot()
    assert no_hints.inv <= 3 * k
    assert no_hints.affine == 3 * k

    hinted = make_group(params, coords="jacobi")
    assert verify_membership(hinted, proof, kp.pub, mk.h, vote.value,
                             use_hints=True)
    assert hinted.counter.inv == 0
    assert hinted.counter.affine == 3 * k

    aff = make_group(params, coords="affine")
    assert verify_membership(aff, proof, kp.pub, mk.h, vote.value)
    assert hinted.counter.inv < aff.counter.inv
    assert no_hints.inv < aff.counter.inv
