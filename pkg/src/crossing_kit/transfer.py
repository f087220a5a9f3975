"""2x2 transfer matrices exchanged between predictors and extractors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class TransferMatrix:
    """Map from incoming to outgoing leading WKB coefficients.

    ``kind`` records the provenance: "predicted" (closed-form asymptotics)
    or "extracted" (read off a numerical solution).
    """

    entries: np.ndarray
    h: float
    kind: str

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (2, 2):
            raise ValidationError("transfer matrix must be 2x2")
        object.__setattr__(self, "entries", e)
        if self.kind not in ("predicted", "extracted"):
            raise ValidationError(f"unknown transfer matrix kind {self.kind!r}")

    @property
    def t11(self) -> complex:
        return complex(self.entries[0, 0])

    @property
    def t12(self) -> complex:
        return complex(self.entries[0, 1])

    @property
    def t21(self) -> complex:
        return complex(self.entries[1, 0])

    @property
    def t22(self) -> complex:
        return complex(self.entries[1, 1])

    def apply(self, alpha: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(alpha, dtype=complex)

    def entrywise_abs_diff(self, other: "TransferMatrix") -> np.ndarray:
        return np.abs(self.entries - other.entries)

    def max_abs_diff(self, other: "TransferMatrix") -> float:
        return float(self.entrywise_abs_diff(other).max())
