"""Moments of interval fields as weighted sums over pair partitions.

For a word of intervals ``I_1 .. I_n`` the moment is a sum over all
perfect pairings of the word positions.  Each pair contributes the
Lebesgue overlap of its two intervals; each crossing between two pairs
contributes a deformation factor: the constant ``q0`` for the constant
kernel, or the kernel evaluated between the pair variables, integrated
over the pair supports, in the general case.

The constant engine is exact (up to float rounding); the kernel engine
is quadrature-based and is validated against the discretized Fock
computation, which is the designated ground truth for the general
weight.  Crossing clusters of three or more pairs over overlapping
intervals converge slowly in Gauss mode (diagonal kinks); use grid mode
against the Fock oracle for those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _accel
from .errors import KernelSpecError, SizeLimitError
from .grids import Interval
from .kernels import (
    ConstantKernel,
    GaussQuad,
    GridQuad,
    QKernel,
    double_integral,
    gauss_nodes,
)
from .partitions import PairPartition, enumerate_pair_partitions

__all__ = [
    "MomentPolynomial",
    "MomentRequest",
    "constant_q_moment",
    "mixed_moment_constant",
    "mixed_moment_kernel",
    "moment_polynomial_constant",
    "wick_general",
]

# Tensor quadrature guard: number of pair variables in one word.
MAX_QUAD_PAIRS = 4


@dataclass(frozen=True)
class MomentPolynomial:
    """Polynomial in t with real coefficients, index = degree."""

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        cs = tuple(float(c) for c in self.coeffs)
        if any(not np.isfinite(c) for c in cs):
            raise ValueError(f"coefficients must be finite: {cs}")
        while cs and cs[-1] == 0.0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, d: int) -> float:
        return self.coeffs[d] if 0 <= d < len(self.coeffs) else 0.0

    def __call__(self, t: float) -> float:
        out = 0.0
        for c in reversed(self.coeffs):
            out = out * t + c
        return out


@lru_cache(maxsize=None)
def _pairing_data(n: int) -> tuple[
    tuple[tuple[tuple[int, int], ...], ...],
    tuple[int, ...],
    tuple[tuple[tuple[int, int], ...], ...],
]:
    """Pairings of {1..n} with crossing counts and crossing edges.

    Edges are 0-based pair indices (i, j) whose pairs cross.
    """
    partitions = enumerate_pair_partitions(n)
    pairs = tuple(p.pairs for p in partitions)
    counts = []
    edges = []
    for p in partitions:
        e = []
        ps = p.pairs
        for i in range(len(ps)):
            a, b = ps[i]
            for j in range(i + 1, len(ps)):
                c, d = ps[j]
                if c < b < d:
                    e.append((i, j))
        counts.append(len(e))
        edges.append(tuple(e))
    return pairs, tuple(counts), tuple(edges)


@lru_cache(maxsize=None)
def _crossing_distribution(n: int) -> tuple[int, ...]:
    """Count of pairings of {1..n} by crossing number."""
    _, counts, _ = _pairing_data(n)
    dist = [0] * (max(counts) + 1 if counts else 1)
    for c in counts:
        dist[c] += 1
    return tuple(dist)


def _check_q0(q0: float) -> None:
    if not abs(q0) <= 1:
        raise KernelSpecError(f"constant deformation needs |q0| <= 1, got {q0}")


def constant_q_moment(q0: float, n: int, t: float) -> float:
    """n-th moment of the constant-q flow over [0, t):
    ``t^(n/2) * sum_pairings q0^crossings``; zero for odd n."""
    _check_q0(q0)
    if n < 1:
        raise ValueError(f"moment order must be >= 1, got {n}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if n % 2:
        return 0.0
    dist = _crossing_distribution(n)
    total = math.fsum(count * q0**c for c, count in enumerate(dist))
    return total * t ** (n // 2)


def _overlaps(
    pairs: tuple[tuple[int, int], ...], intervals: Sequence[Interval]
) -> float | None:
    out = 1.0
    for a, b in pairs:
        w = intervals[a - 1].overlap(intervals[b - 1])
        if w == 0.0:
            return None
        out *= w
    return out


def mixed_moment_constant(q0: float, intervals: Sequence[Interval]) -> float:
    """Mixed moment of constant-q fields over a word of intervals."""
    _check_q0(q0)
    n = len(intervals)
    if n % 2:
        return 0.0
    pairs_list, counts, _ = _pairing_data(n)
    terms = []
    for pairs, c in zip(pairs_list, counts):
        w = _overlaps(pairs, intervals)
        if w is not None:
            terms.append(q0**c * w)
    return math.fsum(terms)


def wick_general(
    weight: Callable[[PairPartition], float], intervals: Sequence[Interval]
) -> float:
    """Generalized Wick sum: ``sum_p weight(p) * prod overlaps``."""
    n = len(intervals)
    if n % 2:
        return 0.0
    terms = []
    for p in enumerate_pair_partitions(n):
        w = _overlaps(p.pairs, intervals)
        if w is not None:
            terms.append(weight(p) * w)
    return math.fsum(terms)


def _clusters(k: int, edges: tuple[tuple[int, int], ...]) -> list[list[int]]:
    """Connected components of the crossing graph on k pair variables."""
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return [groups[r] for r in sorted(groups, key=lambda r: min(groups[r]))]


def _pairing_value_kernel(
    kernel: QKernel,
    pairs: tuple[tuple[int, int], ...],
    edges: tuple[tuple[int, int], ...],
    intervals: Sequence[Interval],
    quad: GridQuad | GaussQuad,
) -> float:
    ranges: list[Interval] = []
    for a, b in pairs:
        r = intervals[a - 1].intersection(intervals[b - 1])
        if r is None:
            return 0.0
        ranges.append(r)
    value = 1.0
    for cluster in _clusters(len(pairs), edges):
        cluster_edges = [
            (cluster.index(i), cluster.index(j))
            for i, j in edges
            if i in cluster and j in cluster
        ]
        if len(cluster) == 1:
            r = ranges[cluster[0]]
            if isinstance(quad, GridQuad):
                value *= len(quad.grid.cells(r)) * quad.grid.delta
            else:
                value *= r.length
            continue
        if len(cluster) == 2 and len(cluster_edges) == 1:
            value *= double_integral(
                kernel, ranges[cluster[0]], ranges[cluster[1]], quad
            )
            continue
        nodes: list[np.ndarray] = []
        weights: list[np.ndarray] = []
        for idx in cluster:
            r = ranges[idx]
            if isinstance(quad, GridQuad):
                cells = np.asarray(quad.grid.cells(r), dtype=np.int64)
                x = (cells - 0.5) * quad.grid.delta
                w = np.full(cells.size, quad.grid.delta)
            else:
                x, w = gauss_nodes(r, quad.order)
            nodes.append(np.asarray(x, dtype=np.float64))
            weights.append(np.asarray(w, dtype=np.float64))
        mats = [
            np.asarray(kernel.value(nodes[i][:, None] - nodes[j][None, :]))
            for i, j in cluster_edges
        ]
        value *= _accel.contract_cluster(weights, cluster_edges, mats)
    return value


def mixed_moment_kernel(
    kernel: QKernel,
    intervals: Sequence[Interval],
    quad: GridQuad | GaussQuad,
) -> float:
    """Mixed moment with a general kernel: per pairing, integrate the
    product of crossing factors over the pair supports."""
    n = len(intervals)
    if n % 2:
        return 0.0
    if n // 2 > MAX_QUAD_PAIRS:
        raise SizeLimitError(
            f"quadrature guard: {n // 2} pair variables exceed {MAX_QUAD_PAIRS} "
            f"(word length {n})"
        )
    pairs_list, _, edges_list = _pairing_data(n)
    terms = [
        _pairing_value_kernel(kernel, pairs, edges, intervals, quad)
        for pairs, edges in zip(pairs_list, edges_list)
    ]
    return math.fsum(terms)


def moment_polynomial_constant(q0: float, n: int) -> MomentPolynomial:
    """Moment of the constant-q flow as a polynomial in t: one monomial
    of degree n/2 (the zero polynomial for odd n)."""
    _check_q0(q0)
    if n < 1:
        raise ValueError(f"moment order must be >= 1, got {n}")
    if n % 2:
        return MomentPolynomial(())
    coeff = constant_q_moment(q0, n, 1.0)
    return MomentPolynomial((0.0,) * (n // 2) + (coeff,))


@dataclass(frozen=True)
class MomentRequest:
    """One moment evaluation: a word of intervals, a kernel, an engine mode.

    ``mode`` is either the string ``"exact-constant"`` (constant kernels
    only) or a quadrature mode instance for the kernel engine.
    """

    intervals: tuple[Interval, ...]
    kernel: QKernel
    mode: str | GridQuad | GaussQuad = "exact-constant"

    def __post_init__(self) -> None:
        if not self.intervals:
            raise ValueError("request needs at least one interval")
        if self.mode == "exact-constant" and not isinstance(
            self.kernel, ConstantKernel
        ):
            raise ValueError("exact-constant mode requires a constant kernel")

    def evaluate(self) -> float:
        if self.mode == "exact-constant":
            assert isinstance(self.kernel, ConstantKernel)
            return mixed_moment_constant(self.kernel.q0, self.intervals)
        return mixed_moment_kernel(self.kernel, self.intervals, self.mode)
