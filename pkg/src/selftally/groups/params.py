"""Shared algebraic parameters agreed on before an election starts.

A parameter set fixes the backend (integer residues modulo a safe prime,
or a short-Weierstrass curve), the common generator, the modulus used for
exponent arithmetic, and the per-choice generators that pack votes into a
single group element so the final tally decodes uniquely.
"""

from __future__ import annotations

from dataclasses import dataclass

IA = "ia"
EC = "ec"

PROFILE_TEST_SMALL = "test-small"
PROFILE_PRODUCTION = "production"


@dataclass(frozen=True)
class CurveSpec:
    """Short-Weierstrass curve y^2 = x^3 + a*x + b over F_p."""

    field_prime: int
    a: int
    b: int
    gx: int
    gy: int
    nn: int  # order of the base point
    hh: int  # cofactor


@dataclass(frozen=True)
class GroupParams:
    """Everything the board and all participants must share.

    choice_generators[i] encodes choice i+1; it equals the common
    generator raised to 2**(i*m), where m is the smallest integer with
    2**m > n, so that packed exponents of per-choice counts never
    collide.
    """

    backend_kind: str  # IA or EC
    profile: str
    n: int
    k: int
    m: int
    exponent_order: int
    p: int | None = None  # IA modulus (safe prime)
    g: int | None = None  # IA generator
    curve: CurveSpec | None = None
    choice_generators: tuple = ()

    @property
    def field_prime(self) -> int:
        if self.backend_kind == IA:
            return self.p
        return self.curve.field_prime

    @property
    def element_width(self) -> int:
        """Byte width of one encoded coordinate/residue."""
        return (self.field_prime.bit_length() + 7) // 8

    @property
    def scalar_width(self) -> int:
        return (self.exponent_order.bit_length() + 7) // 8


def format_params_doc(params: GroupParams) -> str:
    """Render parameters as a flat key = value document (decimal ints)."""
    lines = [
        f"backend_kind = {params.backend_kind.upper()}",
        f"profile = {params.profile}",
    ]
    if params.backend_kind == IA:
        lines += [f"p = {params.p}", f"g = {params.g}"]
    else:
        c = params.curve
        lines += [
            f"field_prime = {c.field_prime}",
            f"curve_a = {c.a}",
            f"curve_b = {c.b}",
            f"g_x = {c.gx}",
            f"g_y = {c.gy}",
            f"nn = {c.nn}",
            f"hh = {c.hh}",
        ]
    lines += [
        f"exponent_order = {params.exponent_order}",
        f"n = {params.n}",
        f"k = {params.k}",
        f"m = {params.m}",
    ]
    for i, f in enumerate(params.choice_generators, start=1):
        if params.backend_kind == IA:
            lines.append(f"f_{i} = {f}")
        else:
            lines.append(f"f_{i}_x = {f[0]}")
            lines.append(f"f_{i}_y = {f[1]}")
    return "\n".join(lines) + "\n"


def parse_params_doc(text: str) -> GroupParams:
    """Inverse of :func:`format_params_doc`."""
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()

    kind = fields["backend_kind"].lower()
    n = int(fields["n"])
    k = int(fields["k"])
    m = int(fields["m"])
    order = int(fields["exponent_order"])
    profile = fields.get("profile", PROFILE_PRODUCTION)

    if kind == IA:
        gens = tuple(int(fields[f"f_{i}"]) for i in range(1, k + 1))
        return GroupParams(
            backend_kind=IA, profile=profile, n=n, k=k, m=m,
            exponent_order=order, p=int(fields["p"]), g=int(fields["g"]),
            choice_generators=gens,
        )
    curve = CurveSpec(
        field_prime=int(fields["field_prime"]),
        a=int(fields["curve_a"]),
        b=int(fields["curve_b"]),
        gx=int(fields["g_x"]),
        gy=int(fields["g_y"]),
        nn=int(fields["nn"]),
        hh=int(fields["hh"]),
    )
    gens = tuple(
        (int(fields[f"f_{i}_x"]), int(fields[f"f_{i}_y"]), 1)
        for i in range(1, k + 1)
    )
    return GroupParams(
        backend_kind=EC, profile=profile, n=n, k=k, m=m,
        exponent_order=order, curve=curve, choice_generators=gens,
    )
