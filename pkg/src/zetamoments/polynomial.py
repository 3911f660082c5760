"""The moment polynomial ``P_k(x) = sum_r c_r x^(k^2 - r)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from gmpy2 import mpfr

PROVENANCES = ("computed", "ingested-from-paper", "method1")


@dataclass
class MomentPolynomial:
    """Coefficients ``c_0..c_{k^2}`` with per-coefficient stable digit counts.

    ``coefficients`` may be shorter than ``k^2 + 1`` only for partial
    (method-1) data; :attr:`is_complete` tells the two apart.
    """

    k: int
    coefficients: List[object]
    stable_digits: Optional[List[Optional[int]]] = None
    provenance: str = "computed"
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if len(self.coefficients) > self.k * self.k + 1:
            raise ValueError("too many coefficients for k")
        if self.stable_digits is not None and len(self.stable_digits) != len(self.coefficients):
            raise ValueError("stable_digits must match coefficients")

    @property
    def degree(self) -> int:
        return self.k * self.k

    @property
    def is_complete(self) -> bool:
        return len(self.coefficients) == self.degree + 1

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, r: int):
        return self.coefficients[r]

    def evaluate(self, x):
        """Horner evaluation in the precision of the coefficients."""
        x = mpfr(x)
        acc = mpfr(0)
        for c in self.coefficients:
            acc = acc * x + c
        return acc

    def with_stable_digits(self, digits: Sequence[int]) -> "MomentPolynomial":
        return MomentPolynomial(self.k, list(self.coefficients), list(digits), self.provenance, dict(self.metadata))
