"""Elliptic-curve backend: short Weierstrass y^2 = x^3 + a*x + b over F_p.

Points are kept in Jacobi coordinates (X, Y, Z) with x = X/Z^2 and
y = Y/Z^3; the point at infinity is represented with Z = 0 and affine
points carry Z = 1.  The group context runs in one of two modes:

  * ``jacobi``  -- operation results stay projective.  Comparing a
    computed point against a received affine point then costs one
    Jacobi-to-affine transformation (one field inversion and four field
    multiplications), which a caller may replace by a pre-computed
    inverse hint checked with a single field multiplication.
  * ``affine``  -- every operation result is normalized immediately,
    paying the inversion per operation.  This mode exists as the cost
    baseline the meter compares against.

The default production curve is secp256k1; a tiny explicitly-listed
curve of prime order 9851 is bundled so tests can enumerate the whole
group.
"""

from __future__ import annotations

import random

from ..errors import InvalidHintError
from .counter import OpCounter
from .params import CurveSpec, GroupParams

SECP256K1 = CurveSpec(
    field_prime=0XFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F,
    a=0,
    b=7,
    gx=0X79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0X483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    nn=0XFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
    hh=1,
)

# y^2 = x^3 + x + 28 over F_10007; the group order 9851 is prime, so
# every finite point generates and exhaustive oracles stay cheap.
TINY_CURVE = CurveSpec(
    field_prime=10007,
    a=1,
    b=28,
    gx=2,
    gy=4582,
    nn=9851,
    hh=1,
)

INFINITY = (0, 1, 0)

Point = tuple  # (X, Y, Z)


def is_infinity(pt: Point) -> bool:
    return pt[2] == 0


def on_curve(spec: CurveSpec, pt: Point) -> bool:
    """Projective curve-equation check: Y^2 = X^3 + a*X*Z^4 + b*Z^6."""
    if is_infinity(pt):
        return True
    p = spec.field_prime
    x, y, z = pt
    if not (0 <= x < p and 0 <= y < p and 0 <= z < p):
        return False
    z2 = z * z % p
    z4 = z2 * z2 % p
    return y * y % p == (x * x % p * x + spec.a * x % p * z4 + spec.b * z4 % p * z2) % p


def jac_neg(spec: CurveSpec, pt: Point) -> Point:
    if is_infinity(pt):
        return pt
    return (pt[0], (-pt[1]) % spec.field_prime, pt[2])


def jac_double(spec: CurveSpec, pt: Point) -> Point:
    if is_infinity(pt) or pt[1] == 0:
        return INFINITY
    p = spec.field_prime
    x, y, z = pt
    y2 = y * y % p
    s = 4 * x * y2 % p
    if spec.a == 0:
        m = 3 * x * x % p
    else:
        z2 = z * z % p
        m = (3 * x * x + spec.a * z2 * z2) % p
    x3 = (m * m - 2 * s) % p
    y3 = (m * (s - x3) - 8 * y2 * y2) % p
    z3 = 2 * y * z % p
    return (x3, y3, z3)


def jac_add(spec: CurveSpec, a: Point, b: Point) -> Point:
    if is_infinity(a):
        return b
    if is_infinity(b):
        return a
    p = spec.field_prime
    x1, y1, z1 = a
    x2, y2, z2 = b
    if z2 == 1:  # mixed addition, skips half the rescaling
        u1, s1 = x1, y1
    else:
        z2z2 = z2 * z2 % p
        u1 = x1 * z2z2 % p
        s1 = y1 * z2z2 % p * z2 % p
    if z1 == 1:
        u2, s2 = x2, y2
    else:
        z1z1 = z1 * z1 % p
        u2 = x2 * z1z1 % p
        s2 = y2 * z1z1 % p * z1 % p
    if u1 == u2:
        if s1 != s2:
            return INFINITY
        return jac_double(spec, a)
    h = (u2 - u1) % p
    r = (s2 - s1) % p
    h2 = h * h % p
    h3 = h2 * h % p
    v = u1 * h2 % p
    x3 = (r * r - h3 - 2 * v) % p
    y3 = (r * (v - x3) - s1 * h3) % p
    z3 = h if z1 == 1 else h * z1 % p
    if z2 != 1:
        z3 = z3 * z2 % p
    return (x3, y3, z3)


def jac_normalize(spec: CurveSpec, pt: Point) -> Point:
    """Unmetered normalization to Z = 1 (serialization and tests)."""
    if is_infinity(pt) or pt[2] == 1:
        return pt
    p = spec.field_prime
    zi = pow(pt[2], -1, p)
    zi2 = zi * zi % p
    return (pt[0] * zi2 % p, pt[1] * zi2 % p * zi % p, 1)


def jac_eq(spec: CurveSpec, a: Point, b: Point) -> bool:
    """Cross-multiplied equality, no inversions."""
    if is_infinity(a) or is_infinity(b):
        return is_infinity(a) and is_infinity(b)
    p = spec.field_prime
    x1, y1, z1 = a
    x2, y2, z2 = b
    z1z1 = z1 * z1 % p
    z2z2 = z2 * z2 % p
    if x1 * z2z2 % p != x2 * z1z1 % p:
        return False
    return y1 * z2z2 % p * z2 % p == y2 * z1z1 % p * z1 % p


def jac_mul(spec: CurveSpec, scalar: int, pt: Point) -> Point:
    """Unmetered double-and-add (parameter derivation and oracles)."""
    acc = INFINITY
    for i in range(scalar.bit_length() - 1, -1, -1):
        if not is_infinity(acc):
            acc = jac_double(spec, acc)
        if (scalar >> i) & 1:
            acc = jac_add(spec, acc, pt)
    return acc


class CurveGroup:
    """Metered curve operations; coords is 'jacobi' or 'affine'."""

    backend = "ec"

    def __init__(self, params: GroupParams, coords: str = "jacobi",
                 counter: OpCounter | None = None):
        if coords not in ("jacobi", "affine"):
            raise ValueError(f"unknown coordinate mode: {coords}")
        self.params = params
        self.spec = params.curve
        self.coords = coords
        self.order = params.exponent_order
        self.generator = (params.curve.gx, params.curve.gy, 1)
        self.counter = counter if counter is not None else OpCounter()

    # -- element basics ------------------------------------------------

    @property
    def identity(self) -> Point:
        return INFINITY

    def is_identity(self, a: Point) -> bool:
        return is_infinity(a)

    def is_valid_element(self, a) -> bool:
        return (isinstance(a, tuple) and len(a) == 3
                and all(isinstance(c, int) for c in a)
                and on_curve(self.spec, a)
                and (a[2] != 0 or a == INFINITY))

    def is_valid_scalar(self, s) -> bool:
        return isinstance(s, int) and 0 <= s < self.order

    def random_scalar(self, rng: random.Random) -> int:
        return rng.randrange(1, self.order)

    def eq(self, a: Point, b: Point) -> bool:
        return jac_eq(self.spec, a, b)

    # -- metered group law ----------------------------------------------

    def _settle(self, pt: Point) -> Point:
        """Apply the coordinate policy to an operation result."""
        if self.coords == "affine":
            return self.to_affine(pt)
        return pt

    def op(self, a: Point, b: Point) -> Point:
        self.counter.mul += 1
        return self._settle(jac_add(self.spec, a, b))

    def inv(self, a: Point) -> Point:
        # point negation is coordinate negation; no field inversion
        return jac_neg(self.spec, a)

    def _chain_double(self, a: Point) -> Point:
        self.counter.dbl += 1
        return self._settle(jac_double(self.spec, a))

    def exp(self, base: Point, s: int) -> Point:
        self.counter.exp += 1
        s %= self.order
        acc = INFINITY
        for i in range(s.bit_length() - 1, -1, -1):
            if not is_infinity(acc):
                acc = self._chain_double(acc)
            if (s >> i) & 1:
                acc = self.op(acc, base)
        return acc

    def simul_exp(self, P: Point, s1: int, Q: Point, s2: int) -> Point:
        """s1*P + s2*Q sharing a single doubling chain."""
        self.counter.exp += 1
        s1 %= self.order
        s2 %= self.order
        pq = self.op(P, Q)
        table = (None, Q, P, pq)
        acc = INFINITY
        for i in range(max(s1.bit_length(), s2.bit_length()) - 1, -1, -1):
            if not is_infinity(acc):
                acc = self._chain_double(acc)
            digit = (((s1 >> i) & 1) << 1) | ((s2 >> i) & 1)
            if digit:
                acc = self.op(acc, table[digit])
        return acc

    # -- normalization and hints ----------------------------------------

    def to_affine(self, a: Point, hint: int | None = None,
                  record: list | None = None) -> Point:
        """Normalize to Z = 1.

        With no hint this costs one field inversion (recorded into
        ``record`` when given, so a prover can replay the verifier and
        collect hints).  With a hint, a single multiplication checks
        z * hint == 1 and the inversion is skipped; a bad hint raises
        InvalidHintError.
        """
        if is_infinity(a) or a[2] == 1:
            return a
        p = self.spec.field_prime
        x, y, z = a
        if hint is not None:
            self.counter.field_mul += 1
            if z * hint % p != 1:
                raise InvalidHintError("inverse hint does not match")
            zi = hint
        else:
            self.counter.inv += 1
            zi = pow(z, -1, p)
            if record is not None:
                record.append(zi)
        self.counter.field_mul += 4
        self.counter.affine += 1
        zi2 = zi * zi % p
        return (x * zi2 % p, y * zi2 % p * zi % p, 1)

    def verify_inverse_hint(self, x: int, hint: int) -> bool:
        self.counter.field_mul += 1
        return x * hint % self.spec.field_prime == 1

    # -- encoding --------------------------------------------------------

    def canonical_bytes(self, a) -> bytes:
        w = self.params.element_width
        if isinstance(a, tuple):
            if is_infinity(a):
                return bytes(2 * w)
            ax, ay, _ = jac_normalize(self.spec, a)
            return ax.to_bytes(w, "big") + ay.to_bytes(w, "big")
        raise TypeError(f"not an element: {a!r}")

    def scalar_bytes(self, s: int) -> bytes:
        return s.to_bytes(self.params.scalar_width, "big")

    def element_from_bytes(self, data: bytes) -> Point:
        w = self.params.element_width
        if len(data) != 2 * w:
            raise ValueError("bad point encoding length")
        if data == bytes(2 * w):
            return INFINITY
        pt = (int.from_bytes(data[:w], "big"),
              int.from_bytes(data[w:], "big"), 1)
        if not on_curve(self.spec, pt):
            raise ValueError("point not on curve")
        return pt

    # -- counter control --------------------------------------------------

    def counter_snapshot(self) -> OpCounter:
        return self.counter.snapshot()

    def counter_reset(self) -> None:
        self.counter.reset()
