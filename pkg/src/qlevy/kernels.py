"""Deformation kernels q and the double integrals they enter.

A kernel is a symmetric function ``q(t) = q(-t)`` with ``|q| <= 1``; it
weights the crossing terms of every moment formula in the package.  The
menu is small on purpose: ``constant`` (the classical one-parameter
deformation), ``exponential`` (a smooth non-constant example) and
``tabulated`` (arbitrary user data, linearly interpolated).

Spec-string grammar (used by the CLI and config files):

    const:<q0>
    exp:<q0>,<lambda>          q(t) = q0 * exp(-lambda*|t|)
    table:<path>               CSV with header ``t,q``, rows for t >= 0
                               in strictly increasing order

``double_integral`` evaluates ``int_I int_J q(s-t) ds dt`` either on the
cell grid (matching the discretized Fock computation number for number)
or by Gauss-Legendre quadrature for continuum-accurate values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import KernelSpecError
from .grids import Grid, Interval

__all__ = [
    "QKernel",
    "ConstantKernel",
    "ExponentialKernel",
    "TabulatedKernel",
    "GridQuad",
    "GaussQuad",
    "parse_kernel",
    "load_table_kernel",
    "describe",
    "sample_grid",
    "double_integral",
]


class QKernel:
    """Base class for deformation kernels.  Subclasses are frozen values."""

    def value(self, t):
        """Evaluate q at t (scalar or ndarray); symmetric and in [-1, 1]."""
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)


@dataclass(frozen=True)
class ConstantKernel(QKernel):
    q0: float

    def __post_init__(self) -> None:
        if not abs(self.q0) <= 1:
            raise KernelSpecError(f"constant kernel needs |q0| <= 1, got {self.q0}")

    def value(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.full(t.shape, self.q0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ExponentialKernel(QKernel):
    q0: float
    lam: float

    def __post_init__(self) -> None:
        if not abs(self.q0) <= 1:
            raise KernelSpecError(f"exponential kernel needs |q0| <= 1, got {self.q0}")
        if not self.lam >= 0:
            raise KernelSpecError(f"exponential rate must be >= 0, got {self.lam}")

    def value(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = self.q0 * np.exp(-self.lam * np.abs(t))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TabulatedKernel(QKernel):
    """Piecewise-linear kernel from samples at t >= 0, reflected evenly.

    Outside the sampled range the nearest sample value is held.  Values
    are clamped to [-1, 1] after interpolation so overshoot can never
    violate the admissibility bound.
    """

    ts: tuple[float, ...]
    qs: tuple[float, ...]
    source: str = ""

    def __post_init__(self) -> None:
        if len(self.ts) != len(self.qs) or not self.ts:
            raise KernelSpecError("tabulated kernel needs matching, nonempty samples")
        if self.ts[0] < 0:
            raise KernelSpecError("tabulated kernel samples must have t >= 0")
        if any(b <= a for a, b in zip(self.ts, self.ts[1:])):
            raise KernelSpecError("tabulated kernel times must be strictly increasing")
        bad = [q for q in self.qs if not abs(q) <= 1]
        if bad:
            raise KernelSpecError(f"tabulated kernel values outside [-1, 1]: {bad}")

    def value(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.interp(np.abs(t), self.ts, self.qs)
        out = np.clip(out, -1.0, 1.0)
        return float(out) if out.ndim == 0 else out


def parse_kernel(spec: str) -> QKernel:
    """Build a kernel from its spec string (see module docstring)."""
    head, sep, rest = spec.partition(":")
    if not sep:
        raise KernelSpecError(f"kernel spec {spec!r} lacks a ':'")
    try:
        if head == "const":
            return ConstantKernel(float(rest))
        if head == "exp":
            parts = rest.split(",")
            if len(parts) != 2:
                raise KernelSpecError(f"exp kernel needs q0,lambda, got {rest!r}")
            return ExponentialKernel(float(parts[0]), float(parts[1]))
        if head == "table":
            return load_table_kernel(rest)
    except KernelSpecError:
        raise
    except ValueError as exc:
        raise KernelSpecError(f"bad number in kernel spec {spec!r}: {exc}") from exc
    raise KernelSpecError(f"unknown kernel family {head!r} in {spec!r}")


def load_table_kernel(path: str) -> TabulatedKernel:
    """Read a ``t,q`` CSV file into a tabulated kernel."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["t", "q"]:
                raise KernelSpecError(f"{path}: expected header 't,q', got {header}")
            ts: list[float] = []
            qs: list[float] = []
            for row in reader:
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise KernelSpecError(f"{path}: malformed row {row}")
                ts.append(float(row[0]))
                qs.append(float(row[1]))
    except OSError as exc:
        raise KernelSpecError(f"cannot read kernel table {path}: {exc}") from exc
    except ValueError as exc:
        raise KernelSpecError(f"bad number in kernel table {path}: {exc}") from exc
    return TabulatedKernel(tuple(ts), tuple(qs), source=path)


def describe(kernel: QKernel) -> str:
    """Canonical spec string of a kernel (round-trips through parse)."""
    if isinstance(kernel, ConstantKernel):
        return f"const:{kernel.q0!r}"
    if isinstance(kernel, ExponentialKernel):
        return f"exp:{kernel.q0!r},{kernel.lam!r}"
    if isinstance(kernel, TabulatedKernel):
        return f"table:{kernel.source or '<inline>'}"
    return repr(kernel)


# ---------------------------------------------------------------------------
# quadrature modes


@dataclass(frozen=True)
class GridQuad:
    """Midpoint-free cell rule: sample q at cell-index offsets (i-j)*delta.

    Reproduces the discretized Fock values on grid-aligned intervals.
    """

    grid: Grid


@dataclass(frozen=True)
class GaussQuad:
    """Gauss-Legendre quadrature with the given number of nodes per panel."""

    order: int

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"quadrature order must be positive, got {self.order}")


@lru_cache(maxsize=None)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def gauss_nodes(interval: Interval, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights scaled to an interval."""
    x, w = _leggauss(order)
    half = 0.5 * interval.length
    mid = 0.5 * (interval.lo + interval.hi)
    return mid + half * x, half * w


def sample_grid(kernel: QKernel, n_cells: int, horizon: float) -> np.ndarray:
    """Matrix of kernel samples q((i-j)*delta) for cells i, j of the grid.

    Symmetric Toeplitz with q(0) on the diagonal.
    """
    grid = Grid(n_cells, horizon)
    offsets = kernel.value(np.arange(n_cells) * grid.delta)
    offsets = np.atleast_1d(np.asarray(offsets, dtype=np.float64))
    idx = np.abs(np.arange(n_cells)[:, None] - np.arange(n_cells)[None, :])
    return offsets[idx]


def _overlap_width(u: np.ndarray, i: Interval, j: Interval) -> np.ndarray:
    """Length of I cap (J+u), the correlation weight of the pair integral."""
    lo = np.maximum(i.lo, j.lo + u)
    hi = np.minimum(i.hi, j.hi + u)
    return np.maximum(hi - lo, 0.0)


def _gauss_pair_integral(
    kernel: QKernel, i: Interval, j: Interval, order: int
) -> float:
    # Reduce the double integral to the 1D correlation form
    #   int q(u) * |I cap (J+u)| du
    # and integrate piecewise between the breakpoints of the weight and
    # of the kernel (u = 0 and, for tabulated kernels, the sample times).
    # Plain tensor quadrature stalls on the |s-t| kink whenever the
    # intervals overlap; the split form converges at machine precision.
    lo_u = i.lo - j.hi
    hi_u = i.hi - j.lo
    breaks = {lo_u, hi_u, i.lo - j.lo, i.hi - j.hi}
    if lo_u < 0.0 < hi_u:
        breaks.add(0.0)
    if isinstance(kernel, TabulatedKernel):
        for t in kernel.ts:
            for s in (t, -t):
                if lo_u < s < hi_u:
                    breaks.add(s)
    pts = sorted(b for b in breaks if lo_u <= b <= hi_u)
    pieces = []
    for a, b in zip(pts, pts[1:]):
        if b <= a:
            continue
        x, w = gauss_nodes(Interval(a, b), order)
        pieces.append(float(np.sum(w * kernel.value(x) * _overlap_width(x, i, j))))
    return math.fsum(pieces)


def double_integral(
    kernel: QKernel,
    i: Interval,
    j: Interval,
    quad: GridQuad | GaussQuad,
) -> float:
    """Approximate ``int_I int_J q(s-t) ds dt``.

    Grid mode sums q at cell-index offsets so that the result matches the
    discretized Fock computation; Gauss mode targets the continuum value.
    """
    if isinstance(quad, GridQuad):
        grid = quad.grid
        ci = np.asarray(grid.cells(i), dtype=np.int64)
        cj = np.asarray(grid.cells(j), dtype=np.int64)
        diffs = (ci[:, None] - cj[None, :]) * grid.delta
        return float(np.sum(kernel.value(diffs)) * grid.delta * grid.delta)
    if isinstance(quad, GaussQuad):
        return _gauss_pair_integral(kernel, i, j, quad.order)
    raise TypeError(f"unknown quadrature mode {quad!r}")
