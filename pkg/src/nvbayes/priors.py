from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InvalidParameterError


class PriorKind(str, Enum):
    FLAT = "flat"
    JEFFREYS = "jeffreys"
    CONJUGATE = "conjugate"


@dataclass(frozen=True)
class Prior:
    """Prior over rho. ``rho0``/``sigma0_sq`` only matter for the Gaussian (conjugate) kind."""

    kind: PriorKind = PriorKind.FLAT
    rho0: float = 0.5
    sigma0_sq: float = float("inf")

    def __post_init__(self):
        object.__setattr__(self, "kind", PriorKind(self.kind))
        if self.kind is PriorKind.CONJUGATE:
            if not 0.0 <= self.rho0 <= 1.0:
                raise InvalidParameterError(f"rho0={self.rho0!r} outside [0, 1]")
            if not self.sigma0_sq > 0:
                raise InvalidParameterError(f"sigma0_sq={self.sigma0_sq!r} must be > 0")

    @classmethod
    def flat(cls) -> "Prior":
        return cls(PriorKind.FLAT)

    @classmethod
    def jeffreys(cls) -> "Prior":
        return cls(PriorKind.JEFFREYS)

    @classmethod
    def conjugate(cls, rho0: float, sigma0_sq: float) -> "Prior":
        return cls(PriorKind.CONJUGATE, rho0, sigma0_sq)

    @classmethod
    def from_name(cls, name: str, rho0: float = 0.5, sigma0_sq: float = float("inf")) -> "Prior":
        kind = PriorKind(name.lower())
        if kind is PriorKind.CONJUGATE:
            return cls.conjugate(rho0, sigma0_sq)
        return cls(kind)
