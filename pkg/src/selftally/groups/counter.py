"""Operation counter used as the cost meter for board-side work."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class OpCounter:
    """Running tally of algebraic work.

    mul:       group multiplications / point additions
    exp:       exponentiations / scalar multiplications
    dbl:       point doublings (and chain squarings in joint exponentiation)
    inv:       field inversions
    field_mul: field multiplications metered outside the group law
               (affine transforms and inverse-hint checks)
    hashes:    hash invocations
    affine:    Jacobi-to-affine transformations
    """

    mul: int = 0
    exp: int = 0
    dbl: int = 0
    inv: int = 0
    field_mul: int = 0
    hashes: int = 0
    affine: int = 0

    def snapshot(self) -> "OpCounter":
        return OpCounter(**asdict(self))

    def reset(self) -> None:
        self.mul = self.exp = self.dbl = self.inv = 0
        self.field_mul = self.hashes = self.affine = 0

    def merge(self, other: "OpCounter") -> None:
        self.mul += other.mul
        self.exp += other.exp
        self.dbl += other.dbl
        self.inv += other.inv
        self.field_mul += other.field_mul
        self.hashes += other.hashes
        self.affine += other.affine

    def delta(self, earlier: "OpCounter") -> "OpCounter":
        """Counts accumulated since ``earlier`` was snapshot."""
        return OpCounter(
            mul=self.mul - earlier.mul,
            exp=self.exp - earlier.exp,
            dbl=self.dbl - earlier.dbl,
            inv=self.inv - earlier.inv,
            field_mul=self.field_mul - earlier.field_mul,
            hashes=self.hashes - earlier.hashes,
            affine=self.affine - earlier.affine,
        )

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def total(self) -> int:
        return (self.mul + self.exp + self.dbl + self.inv
                + self.field_mul + self.hashes + self.affine)
