"""Integer-arithmetic backend: the multiplicative group modulo a safe prime.

Exponent arithmetic is carried out modulo p - 1.  The bundled production
moduli are the well-known 1024-bit and 2048-bit MODP safe primes with
generator 2; the test-small profile fixes p = 23, g = 5 so unit tests can
brute-force the entire group.
"""

from __future__ import annotations

import random

from .counter import OpCounter
from .params import GroupParams

# Test-small modulus: p = 2*11 + 1, g = 5 is a primitive root.
TEST_SMALL_P = 23
TEST_SMALL_G = 5

# 1024-bit MODP safe prime (Oakley group 2), generator 2.
MODP_1024 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381FFFFFFFFFFFFFFFF",
    16,
)

# 2048-bit MODP safe prime (group 14), generator 2.
MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)

MODP_PRIMES = {1024: MODP_1024, 2048: MODP_2048}
MODP_GENERATOR = 2


def is_probable_prime(n: int, rounds: int = 32) -> bool:
    """Miller-Rabin with bases drawn deterministically from n."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_safe_prime(p: int) -> bool:
    return is_probable_prime(p) and is_probable_prime((p - 1) // 2)


class IntegerGroup:
    """Metered operations over residues in [1, p-1]."""

    backend = "ia"

    def __init__(self, params: GroupParams, counter: OpCounter | None = None):
        self.params = params
        self.p = params.p
        self.order = params.exponent_order
        self.generator = params.g
        self.counter = counter if counter is not None else OpCounter()

    # -- element basics ------------------------------------------------

    @property
    def identity(self) -> int:
        return 1

    def is_identity(self, a: int) -> bool:
        return a == 1

    def is_valid_element(self, a) -> bool:
        return isinstance(a, int) and 1 <= a <= self.p - 1

    def is_valid_scalar(self, s) -> bool:
        return isinstance(s, int) and 0 <= s < self.order

    def random_scalar(self, rng: random.Random) -> int:
        """Uniform in [1, order-1]."""
        return rng.randrange(1, self.order)

    def eq(self, a: int, b: int) -> bool:
        return a == b

    # -- metered group law ----------------------------------------------

    def op(self, a: int, b: int) -> int:
        self.counter.mul += 1
        return a * b % self.p

    def inv(self, a: int) -> int:
        self.counter.inv += 1
        return pow(a, -1, self.p)

    def exp(self, base: int, s: int) -> int:
        # a modular exponentiation is metered as one unit, the way a
        # bignum library (or an EVM precompile) would price it
        self.counter.exp += 1
        return pow(base, s % self.order, self.p)

    def simul_exp(self, P: int, s1: int, Q: int, s2: int) -> int:
        """P^s1 * Q^s2 by one interleaved square-and-multiply ladder."""
        self.counter.exp += 1
        s1 %= self.order
        s2 %= self.order
        pq = self.op(P, Q)
        table = (None, Q, P, pq)
        acc = 1
        for i in range(max(s1.bit_length(), s2.bit_length()) - 1, -1, -1):
            if acc != 1:
                self.counter.dbl += 1  # chain squaring
                acc = acc * acc % self.p
            digit = (((s1 >> i) & 1) << 1) | ((s2 >> i) & 1)
            if digit:
                acc = self.op(acc, table[digit])
        return acc

    # -- normalization and hints ----------------------------------------

    def to_affine(self, a: int, hint: int | None = None,
                  record: list | None = None) -> int:
        """Residues carry no projective form; pass-through."""
        return a

    def verify_inverse_hint(self, x: int, hint: int) -> bool:
        self.counter.field_mul += 1
        return x * hint % self.p == 1

    # -- encoding --------------------------------------------------------

    def canonical_bytes(self, a) -> bytes:
        if isinstance(a, int):
            return a.to_bytes(self.params.element_width, "big")
        raise TypeError(f"not an element: {a!r}")

    def scalar_bytes(self, s: int) -> bytes:
        return s.to_bytes(self.params.scalar_width, "big")

    def element_from_bytes(self, data: bytes) -> int:
        a = int.from_bytes(data, "big")
        if not self.is_valid_element(a):
            raise ValueError("residue out of range")
        return a

    # -- counter control --------------------------------------------------

    def counter_snapshot(self) -> OpCounter:
        return self.counter.snapshot()

    def counter_reset(self) -> None:
        self.counter.reset()
