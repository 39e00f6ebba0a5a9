"""Participant and authority side cryptography.

Covers ephemeral keypairs, the pairwise-cancelling key synchronization
round, vote blinding, the 1-of-k disjunctive membership proof attached to
every blinded vote, the counter-party key proofs used for fault recovery,
and the vote repair that excises faulty participants.

All functions are pure over immutable inputs; randomness comes from a
caller-owned ``random.Random`` so runs are reproducible under a fixed
seed.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .errors import (
    ChoiceRangeError,
    InvalidHintError,
    PrivacyPreconditionError,
    RepairError,
    SelfShareError,
)
from .groups.curve import CurveGroup

MEMBERSHIP_TAG = 0x01
RECOVERY_TAG = 0x02

WIRE_VERSION = 0x01


@dataclass(frozen=True)
class EphemeralKeypair:
    x: int          # private scalar
    pub: object     # group element, generator ** x


@dataclass(frozen=True)
class MpcKey:
    index: int      # 1-based participant index
    h: object       # synchronized public key for that participant


@dataclass(frozen=True)
class BlindedVote:
    index: int
    value: object   # blinding key times the chosen generator
    repaired_for: tuple = ()  # faulty indices already inverted out


@dataclass(frozen=True)
class MembershipProof:
    """One commitment/response tuple per choice.

    ``hints`` carries the field inverses a verifier running in Jacobi
    coordinates needs for its affine transformations, in the exact order
    it will request them; empty on the integer backend.
    """

    a: tuple
    b: tuple
    r: tuple
    d: tuple
    hints: tuple = ()


@dataclass(frozen=True)
class RecoveryShare:
    """Counter-party key material for one (honest, faulty) pair.

    ``invert`` records whether the key is divided out of or multiplied
    into the blinded vote, which follows from the index order.
    """

    honest: int
    faulty: int
    key: object     # pairwise key, X_faulty ** x_honest
    r: int
    m1: object
    m2: object
    invert: bool


# ---------------------------------------------------------------------------
# challenges

def fiat_shamir_challenge(grp, domain_tag: int, items: Sequence) -> int:
    """SHA-256 over the tagged transcript, reduced mod the exponent order.

    Elements are serialized canonically (always normalized affine), so
    the challenge is independent of internal coordinates.
    """
    if not items:
        raise ValueError("empty transcript")
    h = hashlib.sha256()
    h.update(bytes([domain_tag]))
    for item in items:
        if isinstance(item, tuple) or grp.backend == "ia" and isinstance(item, int):
            h.update(grp.canonical_bytes(item))
        elif isinstance(item, int):
            h.update(grp.scalar_bytes(item))
        else:
            raise TypeError(f"cannot hash {item!r}")
    grp.counter.hashes += 1
    return int.from_bytes(h.digest(), "big") % grp.order


# ---------------------------------------------------------------------------
# keys

def gen_keypair(grp, rng: random.Random) -> EphemeralKeypair:
    x = grp.random_scalar(rng)
    # published values are always normalized so every party computes on
    # the exact same representation
    return EphemeralKeypair(x=x, pub=grp.to_affine(grp.exp(grp.generator, x)))


def mpc_keys_naive(grp, pubkeys: Sequence) -> list[MpcKey]:
    """Reference computation: each key from scratch, no reuse.

    Participant i receives the product of all earlier public keys
    divided by the product of all later ones; the induced private
    exponents cancel pairwise across the roster, which is what makes the
    final tally self-decoding.
    """
    n = len(pubkeys)
    if n < 3:
        raise PrivacyPreconditionError(
            f"need at least 3 registered keys, got {n}")
    keys = []
    for i in range(n):
        left = grp.identity
        for j in range(i):
            left = grp.op(left, pubkeys[j])
        right = grp.identity
        for j in range(i + 1, n):
            right = grp.op(right, pubkeys[j])
        h = grp.to_affine(grp.op(left, grp.inv(right)))
        keys.append(MpcKey(index=i + 1, h=h))
    return keys


def mpc_keys_cached(grp, pubkeys: Sequence) -> list[MpcKey]:
    """Same output as :func:`mpc_keys_naive` in ~3n group operations.

    The left prefix product is accumulated while iterating; every right
    suffix product is pre-computed up front, while processing the first
    participant, instead of being rebuilt (or divided down) per step.
    """
    n = len(pubkeys)
    if n < 3:
        raise PrivacyPreconditionError(
            f"need at least 3 registered keys, got {n}")
    suffix = [grp.identity] * (n + 1)
    for j in range(n - 1, 0, -1):
        suffix[j] = grp.op(pubkeys[j], suffix[j + 1])
    keys = []
    left = grp.identity
    for i in range(n):
        if i > 0:
            left = grp.op(left, pubkeys[i - 1])
        h = grp.to_affine(grp.op(left, grp.inv(suffix[i + 1])))
        keys.append(MpcKey(index=i + 1, h=h))
    return keys


# ---------------------------------------------------------------------------
# voting

def blind_vote(grp, x: int, mpc_key: MpcKey, choice: int) -> BlindedVote:
    """Multiply the blinding key into the generator for ``choice``."""
    k = grp.params.k
    if not 1 <= choice <= k:
        raise ChoiceRangeError(f"choice {choice} outside 1..{k}")
    f = grp.params.choice_generators[choice - 1]
    return BlindedVote(index=mpc_key.index,
                       value=grp.to_affine(grp.op(grp.exp(mpc_key.h, x), f)))


def prove_membership(grp, keypair: EphemeralKeypair, mpc_key: MpcKey,
                     vote: BlindedVote, choice: int,
                     rng: random.Random) -> MembershipProof:
    """Disjunctive proof that the blinded vote holds one valid choice.

    Every branch except the real one is simulated with random responses;
    the real branch's response is fixed after the challenge so the
    per-branch challenges sum to it.
    """
    k = grp.params.k
    if not 1 <= choice <= k:
        raise ChoiceRangeError(f"choice {choice} outside 1..{k}")
    order = grp.order
    g = grp.generator
    x_pub, h, B = keypair.pub, mpc_key.h, vote.value

    a: list = [None] * k
    b: list = [None] * k
    r: list = [0] * k
    d: list = [0] * k
    v = choice - 1
    w = grp.random_scalar(rng)

    for l in range(k):
        if l == v:
            a[l] = grp.to_affine(grp.exp(g, w))
            b[l] = grp.to_affine(grp.exp(h, w))
            continue
        r[l] = grp.random_scalar(rng)
        d[l] = grp.random_scalar(rng)
        a[l] = grp.to_affine(
            grp.op(grp.exp(g, r[l]), grp.exp(x_pub, order - d[l])))
        quot = grp.op(B, grp.inv(grp.params.choice_generators[l]))
        b[l] = grp.to_affine(
            grp.op(grp.exp(h, r[l]), grp.exp(quot, order - d[l])))

    c = fiat_shamir_challenge(
        grp, MEMBERSHIP_TAG, _membership_transcript(x_pub, h, B, a, b))
    d[v] = (c - sum(d) % order) % order
    r[v] = (w + keypair.x * d[v]) % order

    proof = MembershipProof(a=tuple(a), b=tuple(b), r=tuple(r), d=tuple(d))
    if grp.backend == "ec":
        # replay a Jacobi-mode verifier once to pre-compute the inversion
        # hints it will ask for, in order
        scratch = CurveGroup(grp.params, coords="jacobi")
        record: list = []
        ok = _membership_check(scratch, proof, x_pub, h, B, record=record)
        assert ok, "freshly generated proof must verify"
        proof = replace(proof, hints=tuple(record))
    return proof


def _membership_transcript(x_pub, h, B, a, b) -> list:
    items = [x_pub, h, B]
    for al, bl in zip(a, b):
        items.append(al)
        items.append(bl)
    return items


def verify_membership(grp, proof: MembershipProof, x_pub, h, B,
                      use_hints: bool = False) -> bool:
    """Board-side validation of a blinded vote's membership proof."""
    hints = iter(proof.hints) if use_hints and proof.hints else None
    try:
        return _membership_check(grp, proof, x_pub, h, B, hints=hints)
    except InvalidHintError:
        return False


def _membership_check(grp, proof, x_pub, h, B, hints=None, record=None) -> bool:
    k = grp.params.k
    if not (len(proof.a) == len(proof.b) == len(proof.r) == len(proof.d) == k):
        return False
    for el in (x_pub, h, B, *proof.a, *proof.b):
        if not grp.is_valid_element(el):
            return False
    for s in (*proof.r, *proof.d):
        if not grp.is_valid_scalar(s):
            return False

    order = grp.order
    c = fiat_shamir_challenge(
        grp, MEMBERSHIP_TAG,
        _membership_transcript(x_pub, h, B, proof.a, proof.b))
    if sum(proof.d) % order != c:
        return False

    g = grp.generator
    gens = grp.params.choice_generators
    if grp.backend == "ia":
        for l in range(k):
            rl, dl = proof.r[l], proof.d[l]
            if grp.exp(g, rl) != grp.op(proof.a[l], grp.exp(x_pub, dl)):
                return False
            quot = grp.op(B, grp.inv(gens[l]))
            if grp.exp(h, rl) != grp.op(proof.b[l], grp.exp(quot, dl)):
                return False
        return True

    # curve form, rearranged so each side is one joint multiplication:
    #   r*G - d*X        == a
    #   r*H + d*F        == b + d*V
    neg_x = grp.inv(x_pub)
    for l in range(k):
        rl, dl = proof.r[l], proof.d[l]
        lhs1 = grp.to_affine(grp.simul_exp(g, rl, neg_x, dl),
                             hint=_next_hint(hints), record=record)
        if lhs1 != proof.a[l]:
            return False
        lhs2 = grp.to_affine(grp.simul_exp(h, rl, gens[l], dl),
                             hint=_next_hint(hints), record=record)
        rhs2 = grp.to_affine(grp.op(proof.b[l], grp.exp(B, dl)),
                             hint=_next_hint(hints), record=record)
        if lhs2 != rhs2:
            return False
    return True


def _next_hint(hints) -> Optional[int]:
    if hints is None:
        return None
    return next(hints, None)


# ---------------------------------------------------------------------------
# fault recovery

def prove_pairwise_key(grp, keypair: EphemeralKeypair, own_index: int,
                       other_index: int, other_pub,
                       rng: random.Random) -> RecoveryShare:
    """Produce the shared pairwise key with a proof it matches both
    public keys (a standard equal-discrete-log proof)."""
    if own_index == other_index:
        raise SelfShareError(f"participant {own_index} sharing with itself")
    key = grp.exp(other_pub, keypair.x)
    w = grp.random_scalar(rng)
    m1 = grp.to_affine(grp.exp(grp.generator, w))
    m2 = grp.to_affine(grp.exp(other_pub, w))
    c = fiat_shamir_challenge(grp, RECOVERY_TAG,
                              [keypair.pub, other_pub, m1, m2])
    r = (w + c * keypair.x) % grp.order
    return RecoveryShare(honest=own_index, faulty=other_index,
                         key=grp.to_affine(key), r=r, m1=m1, m2=m2,
                         invert=other_index < own_index)


def verify_pairwise_key(grp, share: RecoveryShare, honest_pub, faulty_pub) -> bool:
    for el in (honest_pub, faulty_pub, share.key, share.m1, share.m2):
        if not grp.is_valid_element(el):
            return False
    if not grp.is_valid_scalar(share.r):
        return False
    if share.invert != (share.faulty < share.honest):
        return False
    c = fiat_shamir_challenge(grp, RECOVERY_TAG,
                              [honest_pub, faulty_pub, share.m1, share.m2])
    g = grp.generator
    if grp.backend == "ia":
        if grp.exp(g, share.r) != grp.op(share.m1, grp.exp(honest_pub, c)):
            return False
        return grp.exp(faulty_pub, share.r) == grp.op(share.m2, grp.exp(share.key, c))
    # r*G - c*A == m1  and  r*B - c*C == m2
    lhs1 = grp.to_affine(grp.simul_exp(g, share.r, grp.inv(honest_pub), c))
    if lhs1 != share.m1:
        return False
    lhs2 = grp.to_affine(grp.simul_exp(faulty_pub, share.r, grp.inv(share.key), c))
    return lhs2 == share.m2


def repair_blinded_vote(grp, vote: BlindedVote,
                        shares: Sequence[RecoveryShare],
                        faulty_indices: Sequence[int]) -> BlindedVote:
    """Invert the faulty participants' key material out of a blinded vote.

    Shares must cover the newly declared faulty set exactly and must not
    duplicate an index repaired in an earlier round.  Whether a pairwise
    key is multiplied in or divided out follows from the index order of
    the pair, mirroring how the key entered the blinding exponent.
    """
    expected = set(faulty_indices)
    seen: set[int] = set()
    for share in shares:
        if share.honest != vote.index:
            raise RepairError(
                f"share for participant {share.honest} applied to vote {vote.index}")
        if share.faulty == vote.index:
            raise RepairError("participant cannot repair against itself")
        if share.faulty in seen:
            raise RepairError(f"duplicate share for faulty {share.faulty}")
        if share.faulty not in expected:
            raise RepairError(f"share for non-faulty index {share.faulty}")
        if share.faulty in vote.repaired_for:
            raise RepairError(f"index {share.faulty} already repaired")
        seen.add(share.faulty)
    if seen != expected:
        missing = sorted(expected - seen)
        raise RepairError(f"missing shares for faulty indices {missing}")

    value = vote.value
    for share in sorted(shares, key=lambda s: s.faulty):
        if share.faulty < vote.index:
            value = grp.op(value, grp.inv(share.key))
        else:
            value = grp.op(value, share.key)
    return BlindedVote(index=vote.index, value=value,
                       repaired_for=vote.repaired_for + tuple(sorted(seen)))


# ---------------------------------------------------------------------------
# wire encodings (version-prefixed, fixed field order)

def encode_membership_proof(grp, proof: MembershipProof) -> bytes:
    out = bytearray([WIRE_VERSION])
    for l in range(grp.params.k):
        out += grp.canonical_bytes(proof.a[l])
        out += grp.canonical_bytes(proof.b[l])
    for l in range(grp.params.k):
        out += grp.scalar_bytes(proof.r[l])
        out += grp.scalar_bytes(proof.d[l])
    out += len(proof.hints).to_bytes(2, "big")
    fw = grp.params.element_width
    for hint in proof.hints:
        out += hint.to_bytes(fw, "big")
    return bytes(out)


def decode_membership_proof(grp, data: bytes) -> MembershipProof:
    if not data or data[0] != WIRE_VERSION:
        raise ValueError("bad proof version")
    k = grp.params.k
    ew = _encoded_element_width(grp)
    sw = grp.params.scalar_width
    fw = grp.params.element_width
    pos = 1
    a, b, r, d = [], [], [], []
    for _ in range(k):
        a.append(grp.element_from_bytes(data[pos:pos + ew])); pos += ew
        b.append(grp.element_from_bytes(data[pos:pos + ew])); pos += ew
    for _ in range(k):
        r.append(_scalar_from(grp, data[pos:pos + sw])); pos += sw
        d.append(_scalar_from(grp, data[pos:pos + sw])); pos += sw
    n_hints = int.from_bytes(data[pos:pos + 2], "big"); pos += 2
    hints = []
    for _ in range(n_hints):
        hints.append(int.from_bytes(data[pos:pos + fw], "big")); pos += fw
    if pos != len(data):
        raise ValueError("trailing bytes in proof")
    return MembershipProof(a=tuple(a), b=tuple(b), r=tuple(r), d=tuple(d),
                           hints=tuple(hints))


def encode_recovery_share(grp, share: RecoveryShare) -> bytes:
    out = bytearray([WIRE_VERSION])
    out += share.honest.to_bytes(2, "big")
    out += share.faulty.to_bytes(2, "big")
    out.append(1 if share.invert else 0)
    out += grp.canonical_bytes(share.key)
    out += grp.canonical_bytes(share.m1)
    out += grp.canonical_bytes(share.m2)
    out += grp.scalar_bytes(share.r)
    return bytes(out)


def decode_recovery_share(grp, data: bytes) -> RecoveryShare:
    if not data or data[0] != WIRE_VERSION:
        raise ValueError("bad share version")
    ew = _encoded_element_width(grp)
    sw = grp.params.scalar_width
    pos = 1
    honest = int.from_bytes(data[pos:pos + 2], "big"); pos += 2
    faulty = int.from_bytes(data[pos:pos + 2], "big"); pos += 2
    invert = bool(data[pos]); pos += 1
    key = grp.element_from_bytes(data[pos:pos + ew]); pos += ew
    m1 = grp.element_from_bytes(data[pos:pos + ew]); pos += ew
    m2 = grp.element_from_bytes(data[pos:pos + ew]); pos += ew
    r = _scalar_from(grp, data[pos:pos + sw]); pos += sw
    if pos != len(data):
        raise ValueError("trailing bytes in share")
    return RecoveryShare(honest=honest, faulty=faulty, key=key, r=r,
                         m1=m1, m2=m2, invert=invert)


def _encoded_element_width(grp) -> int:
    if grp.backend == "ia":
        return grp.params.element_width
    return 2 * grp.params.element_width


def _scalar_from(grp, data: bytes) -> int:
    s = int.from_bytes(data, "big")
    if not grp.is_valid_scalar(s):
        raise ValueError("scalar out of range")
    return s
