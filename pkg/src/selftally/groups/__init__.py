"""Group backends with a uniform interface and an operation cost meter.

Two interchangeable backends implement the same surface: integer
arithmetic modulo a safe prime ("ia") and a short-Weierstrass elliptic
curve ("ec") with selectable affine or Jacobi internal coordinates.
"""

from __future__ import annotations

from ..errors import ParameterOverflowError, PrivacyPreconditionError
from .counter import OpCounter
from .curve import (
    INFINITY,
    SECP256K1,
    TINY_CURVE,
    CurveGroup,
    CurveSpec,
    jac_mul,
    jac_normalize,
    on_curve,
)
from .modp import (
    MODP_GENERATOR,
    MODP_PRIMES,
    TEST_SMALL_G,
    TEST_SMALL_P,
    IntegerGroup,
    is_probable_prime,
    is_safe_prime,
)
from .params import (
    EC,
    IA,
    PROFILE_PRODUCTION,
    PROFILE_TEST_SMALL,
    GroupParams,
    format_params_doc,
    parse_params_doc,
)

__all__ = [
    "EC", "IA", "PROFILE_PRODUCTION", "PROFILE_TEST_SMALL",
    "GroupParams", "CurveSpec", "OpCounter",
    "IntegerGroup", "CurveGroup",
    "derive_params", "make_group", "validate_params",
    "format_params_doc", "parse_params_doc",
    "SECP256K1", "TINY_CURVE", "MODP_PRIMES",
]


def smallest_packing_exponent(n: int) -> int:
    """Smallest m with 2**m > n."""
    m = 1
    while (1 << m) <= n:
        m += 1
    return m


def derive_params(backend_kind: str, security_profile: str, n: int, k: int,
                  *, ia_bits: int = 1024, p: int | None = None,
                  g: int | None = None,
                  curve: CurveSpec | None = None) -> GroupParams:
    """Agree on shared parameters for n participants and k choices.

    The per-choice generators are the common generator raised to
    2**((i-1)*m), computed by repeated squaring.  Overrides: a custom
    (p, g) pair for the IA backend (checked for safe primality) or a
    custom CurveSpec for EC.
    """
    if n < 3:
        raise PrivacyPreconditionError(
            f"need at least 3 participants for vote privacy, got {n}")
    if k < 2:
        raise ValueError(f"need at least 2 choices, got {k}")
    if security_profile not in (PROFILE_TEST_SMALL, PROFILE_PRODUCTION):
        raise ValueError(f"unknown security profile: {security_profile}")

    m = smallest_packing_exponent(n)

    if backend_kind == IA:
        if p is None:
            if security_profile == PROFILE_TEST_SMALL:
                p, g = TEST_SMALL_P, TEST_SMALL_G
            else:
                if ia_bits not in MODP_PRIMES:
                    raise ValueError(f"no bundled safe prime of {ia_bits} bits")
                p, g = MODP_PRIMES[ia_bits], MODP_GENERATOR
        else:
            if g is None:
                raise ValueError("custom modulus requires a generator")
            if not is_safe_prime(p):
                raise ValueError(f"{p} is not a safe prime")
            if pow(g, 2, p) == 1 or g % p in (0, 1):
                raise ValueError("generator has order <= 2")
        order = p - 1
        _check_exponent_budget(k, m, order)
        gens = tuple(pow(g, _packing_exponent(i, m, order), p)
                     for i in range(k))
        if len(set(gens)) != k:
            raise ParameterOverflowError(
                "choice generators collide in this group")
        return GroupParams(backend_kind=IA, profile=security_profile,
                           n=n, k=k, m=m, exponent_order=order,
                           p=p, g=g, choice_generators=gens)

    if backend_kind == EC:
        if curve is None:
            curve = TINY_CURVE if security_profile == PROFILE_TEST_SMALL else SECP256K1
        order = curve.nn
        _check_exponent_budget(k, m, order)
        base = (curve.gx, curve.gy, 1)
        gens = tuple(
            jac_normalize(curve, jac_mul(curve, _packing_exponent(i, m, order), base))
            for i in range(k))
        if len(set(gens)) != k:
            raise ParameterOverflowError(
                "choice generators collide in this group")
        return GroupParams(backend_kind=EC, profile=security_profile,
                           n=n, k=k, m=m, exponent_order=order,
                           curve=curve, choice_generators=gens)

    raise ValueError(f"unknown backend kind: {backend_kind}")


def _packing_exponent(index: int, m: int, order: int) -> int:
    """2**(index*m) reduced into exponent arithmetic by repeated squaring."""
    e = 1
    for _ in range(index * m):
        e = (e * 2) % order
    return e


def _check_exponent_budget(k: int, m: int, order: int) -> None:
    # k*m*(k-1) is a coarse proxy for how much packed-exponent room the
    # tally needs; groups too small for it cannot decode counts uniquely
    if k * m * (k - 1) > order:
        raise ParameterOverflowError(
            f"k={k}, m={m} exceeds the exponent budget of a group of order {order}")


def make_group(params: GroupParams, coords: str = "jacobi",
               counter: OpCounter | None = None):
    """Build a metered operations context over shared parameters.

    Contexts are cheap; give each worker or each verification scope its
    own so counters never race.
    """
    if params.backend_kind == IA:
        return IntegerGroup(params, counter=counter)
    return CurveGroup(params, coords=coords, counter=counter)


def validate_params(params: GroupParams) -> None:
    """Check every structural invariant; raises ValueError on failure."""
    n, k, m = params.n, params.k, params.m
    if not ((1 << m) > n and (1 << (m - 1)) <= n):
        raise ValueError("m is not the smallest integer with 2**m > n")
    if len(params.choice_generators) != k:
        raise ValueError("wrong number of choice generators")
    if len(set(params.choice_generators)) != k:
        raise ValueError("choice generators not pairwise distinct")

    if params.backend_kind == IA:
        if not is_safe_prime(params.p):
            raise ValueError("modulus is not a safe prime")
        if params.exponent_order != params.p - 1:
            raise ValueError("exponent order must be p - 1")
        if pow(params.g, 2, params.p) == 1 or params.g % params.p in (0, 1):
            raise ValueError("generator has order <= 2")
        for i, f in enumerate(params.choice_generators):
            e = _packing_exponent(i, m, params.exponent_order)
            if pow(params.g, e, params.p) != f:
                raise ValueError(f"choice generator {i + 1} inconsistent")
    else:
        spec = params.curve
        base = (spec.gx, spec.gy, 1)
        if not on_curve(spec, base):
            raise ValueError("base point not on curve")
        if jac_mul(spec, spec.nn, base) != INFINITY:
            raise ValueError("base point order is not nn")
        if params.exponent_order != spec.nn:
            raise ValueError("exponent order must be the base point order")
        for i, f in enumerate(params.choice_generators):
            e = _packing_exponent(i, m, params.exponent_order)
            expect = jac_normalize(spec, jac_mul(spec, e, base))
            if expect != f:
                raise ValueError(f"choice generator {i + 1} inconsistent")
