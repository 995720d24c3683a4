"""Half-open time intervals and the uniform cell grid used for discretization.

Intervals ``[lo, hi)`` index every flow increment in the package.  A
``Grid`` chops the horizon ``[0, T)`` into ``n`` equal cells; cell ``i``
(1-based) covers ``[(i-1)*delta, i*delta)``.  Grid alignment is an error,
never a silent snap: convergence studies rely on endpoints meaning what
they say.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AlignmentError

# Absolute slack allowed when checking that an endpoint is a cell multiple.
ALIGNMENT_TOL = 1e-9


@dataclass(frozen=True)
class Interval:
    """Half-open time interval ``[lo, hi)`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise ValueError(f"interval requires lo < hi, got [{self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def shift(self, t: float) -> "Interval":
        return Interval(self.lo + t, self.hi + t)

    def overlap(self, other: "Interval") -> float:
        """Lebesgue measure of the intersection with ``other``."""
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return hi - lo if hi > lo else 0.0

    def intersection(self, other: "Interval") -> "Interval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return Interval(lo, hi) if hi > lo else None

    def disjoint(self, other: "Interval") -> bool:
        return self.overlap(other) == 0.0

    def strictly_before(self, other: "Interval") -> bool:
        """Every point of self precedes every point of other."""
        return self.hi <= other.lo


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of ``[0, horizon)`` into ``n`` cells."""

    n: int
    horizon: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"grid needs at least one cell, got {self.n}")
        if not self.horizon > 0:
            raise ValueError(f"grid horizon must be positive, got {self.horizon}")

    @property
    def delta(self) -> float:
        return self.horizon / self.n

    def _aligned_index(self, x: float, what: str) -> int:
        k = round(x / self.delta)
        if abs(x - k * self.delta) > ALIGNMENT_TOL:
            raise AlignmentError(
                f"{what} {x} is not a multiple of the cell width {self.delta}"
            )
        return k

    def cells(self, interval: Interval) -> range:
        """1-based indices of the cells covered by a grid-aligned interval."""
        lo = self._aligned_index(interval.lo, "interval endpoint")
        hi = self._aligned_index(interval.hi, "interval endpoint")
        if lo < 0 or hi > self.n:
            raise AlignmentError(
                f"interval [{interval.lo}, {interval.hi}) leaves the horizon "
                f"[0, {self.horizon})"
            )
        return range(lo + 1, hi + 1)

    def is_aligned(self, interval: Interval) -> bool:
        try:
            self.cells(interval)
        except AlignmentError:
            return False
        return True
