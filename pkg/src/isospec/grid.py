"""Evaluation grids shared by the deformation, verification and CLI layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPACINGS = ("uniform", "chebyshev-clustered")


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    count: int
    spacing: str = "uniform"

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"grid needs finite lo < hi, got {self.lo}:{self.hi}")
        if int(self.count) < 2:
            raise ValueError("grid count must be at least 2")
        if self.spacing not in SPACINGS:
            raise ValueError(f"spacing must be one of {SPACINGS}")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def parse(cls, text: str, spacing: str = "uniform") -> "GridSpec":
        """Parse ``lo:hi:count``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like lo:hi:count, got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValueError(f"bad grid {text!r}: {exc}") from None
        return cls(lo, hi, count, spacing)

    def points(self) -> np.ndarray:
        if self.spacing == "uniform":
            return np.linspace(self.lo, self.hi, self.count)
        # Chebyshev-Lobatto points mapped onto [lo, hi], ascending
        k = np.arange(self.count)
        t = -np.cos(np.pi * k / (self.count - 1))
        return 0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * t

    def with_count(self, count: int) -> "GridSpec":
        return GridSpec(self.lo, self.hi, count, self.spacing)

    def __str__(self):
        return f"{self.lo:g}:{self.hi:g}:{self.count}"
