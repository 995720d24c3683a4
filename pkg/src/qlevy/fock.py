"""Discretized deformed Fock space: the numerical ground truth.

States are sparse maps from tuples of grid-cell indices (the occupied
cells, in order) to real amplitudes.  Creation prepends a cell index;
annihilation removes one matching occurrence at position ``r`` weighted
by ``delta * prod_{l<r} q[i, j_l]`` with ``q`` sampled at cell offsets,
so the deformation is encoded entirely in the operator action and no
Gram matrix is ever materialized.  The field operator of an interval is
the sum of creation and annihilation over its cells plus an optional
drift multiple of the identity; vacuum expectations are read off as the
empty-tuple amplitude.

Single-cell operators are plain dictionary manipulation and double as
the reference implementation; whole-word moments run on per-level key
arrays with the hot annihilation sweep dispatched to the selected
backend (see ``qlevy._accel``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import _accel
from .errors import DepthCapError
from .grids import Grid, Interval
from .kernels import QKernel, sample_grid

__all__ = [
    "FockVector",
    "ProcessSpec",
    "apply_creation",
    "apply_annihilation",
    "apply_field",
    "vacuum_moment",
    "mixed_vacuum_moment",
]

Key = tuple[int, ...]


@dataclass(frozen=True)
class FockVector:
    """Sparse Fock-space vector with a particle-level cap ``depth``."""

    amplitudes: Mapping[Key, float]
    depth: int

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError(f"depth cap must be >= 0, got {self.depth}")
        clean = {
            k: float(v) for k, v in self.amplitudes.items() if v != 0.0
        }
        for key in clean:
            if len(key) > self.depth:
                raise ValueError(f"tuple {key} exceeds depth cap {self.depth}")
            if any(c < 1 for c in key):
                raise ValueError(f"cell indices must be >= 1: {key}")
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))

    @classmethod
    def vacuum(cls, depth: int) -> "FockVector":
        return cls({(): 1.0}, depth)

    def amplitude(self, key: Key) -> float:
        return self.amplitudes.get(tuple(key), 0.0)

    def __add__(self, other: "FockVector") -> "FockVector":
        if self.depth != other.depth:
            raise ValueError("cannot add vectors with different depth caps")
        out = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            out[k] = out.get(k, 0.0) + v
        return FockVector(out, self.depth)

    def __rmul__(self, scalar: float) -> "FockVector":
        return FockVector(
            {k: scalar * v for k, v in self.amplitudes.items()}, self.depth
        )


@dataclass(frozen=True)
class ProcessSpec:
    """Kernel, grid and drift defining one discretized flow."""

    kernel: QKernel
    grid: Grid
    drift: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.drift):
            raise ValueError(f"drift must be finite, got {self.drift}")


@lru_cache(maxsize=64)
def _q_matrix_cached(kernel: QKernel, n: int, horizon: float) -> np.ndarray:
    mat = sample_grid(kernel, n, horizon)
    mat.flags.writeable = False
    return mat


def _q_matrix(spec: ProcessSpec) -> np.ndarray:
    return _q_matrix_cached(spec.kernel, spec.grid.n, spec.grid.horizon)


def _check_cell(spec: ProcessSpec, i: int) -> None:
    if not 1 <= i <= spec.grid.n:
        raise ValueError(f"cell {i} out of range 1..{spec.grid.n}")


def apply_creation(spec: ProcessSpec, i: int, v: FockVector) -> FockVector:
    """Prepend cell ``i`` to every tuple; tuples past the depth cap drop."""
    _check_cell(spec, i)
    out: dict[Key, float] = {}
    for key, amp in v.amplitudes.items():
        if len(key) < v.depth:
            new = (i,) + key
            out[new] = out.get(new, 0.0) + amp
    return FockVector(out, v.depth)


def apply_annihilation(spec: ProcessSpec, i: int, v: FockVector) -> FockVector:
    """Remove one occurrence of cell ``i`` with the deformed weights."""
    _check_cell(spec, i)
    qmat = _q_matrix(spec)
    delta = spec.grid.delta
    out: dict[Key, float] = {}
    for key, amp in v.amplitudes.items():
        for r, c in enumerate(key):
            if c == i:
                pref = 1.0
                for l in range(r):
                    pref *= qmat[i - 1, key[l] - 1]
                new = key[:r] + key[r + 1 :]
                out[new] = out.get(new, 0.0) + amp * delta * pref
    return FockVector(out, v.depth)


# ---------------------------------------------------------------------------
# per-level array form used by the backend hot path

Levels = list[tuple[np.ndarray, np.ndarray]]


def _empty_level(width: int) -> tuple[np.ndarray, np.ndarray]:
    return np.empty((0, width), dtype=np.int64), np.empty(0, dtype=np.float64)


def _vacuum_levels(depth: int) -> Levels:
    levels: Levels = [
        (np.zeros((1, 0), dtype=np.int64), np.array([1.0]))
    ]
    for k in range(1, depth + 1):
        levels.append(_empty_level(k))
    return levels


def _levels_from_vector(v: FockVector) -> Levels:
    buckets: list[list[tuple[Key, float]]] = [[] for _ in range(v.depth + 1)]
    for key, amp in v.amplitudes.items():
        buckets[len(key)].append((key, amp))
    levels: Levels = []
    for k, bucket in enumerate(buckets):
        if not bucket:
            levels.append(_empty_level(k))
            continue
        bucket.sort()
        keys = np.array([b[0] for b in bucket], dtype=np.int64).reshape(len(bucket), k)
        vals = np.array([b[1] for b in bucket], dtype=np.float64)
        levels.append((keys, vals))
    return levels


def _vector_from_levels(levels: Levels, depth: int) -> FockVector:
    out: dict[Key, float] = {}
    for keys, vals in levels:
        for row, val in zip(keys, vals):
            out[tuple(int(c) for c in row)] = float(val)
    return FockVector(out, depth)


def _merge_level(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic combine: lexicographic sort on the tuple key, then
    # segment sums.  Shared by both backends.
    if keys.shape[0] == 0:
        return keys, vals
    if keys.shape[1] == 0:
        total = np.add.reduce(vals)
        if total == 0.0:
            return _empty_level(0)
        return keys[:1], np.array([total])
    order = np.lexsort(keys.T[::-1])
    sk = keys[order]
    sv = vals[order]
    change = np.any(sk[1:] != sk[:-1], axis=1)
    starts = np.concatenate(([0], np.nonzero(change)[0] + 1))
    out_keys = sk[starts]
    out_vals = np.add.reduceat(sv, starts)
    keep = out_vals != 0.0
    if not np.all(keep):
        out_keys = out_keys[keep]
        out_vals = out_vals[keep]
    return np.ascontiguousarray(out_keys), out_vals


def _apply_field_levels(
    levels: Levels,
    incell: np.ndarray,
    qmat: np.ndarray,
    delta: float,
    drift_amount: float,
    depth: int,
) -> Levels:
    cells = np.nonzero(incell)[0].astype(np.int64) + 1
    new_levels: Levels = []
    for k in range(depth + 1):
        cand_keys: list[np.ndarray] = []
        cand_vals: list[np.ndarray] = []
        # creation from one level below
        if k >= 1:
            src_keys, src_vals = levels[k - 1]
            m = src_keys.shape[0]
            if m and cells.size:
                col = np.repeat(cells, m)
                rep = np.tile(src_keys, (cells.size, 1))
                cand_keys.append(np.column_stack((col, rep)))
                cand_vals.append(np.tile(src_vals, cells.size))
        # annihilation from one level above
        if k + 1 <= depth:
            src_keys, src_vals = levels[k + 1]
            if src_keys.shape[0]:
                ann_keys, ann_vals = _accel.annihilation_candidates(
                    src_keys, src_vals, incell, qmat, delta
                )
                if ann_keys.shape[0]:
                    cand_keys.append(ann_keys)
                    cand_vals.append(ann_vals)
        # drift keeps the level
        if drift_amount != 0.0:
            src_keys, src_vals = levels[k]
            if src_keys.shape[0]:
                cand_keys.append(src_keys)
                cand_vals.append(src_vals * drift_amount)
        if not cand_keys:
            new_levels.append(_empty_level(k))
            continue
        keys = np.concatenate(cand_keys, axis=0)
        vals = np.concatenate(cand_vals)
        new_levels.append(_merge_level(keys, vals))
    return new_levels


def _field_support(spec: ProcessSpec, interval: Interval) -> tuple[np.ndarray, float]:
    cells = spec.grid.cells(interval)
    incell = np.zeros(spec.grid.n, dtype=np.bool_)
    incell[np.asarray(cells) - 1] = True
    drift_amount = spec.drift * (len(cells) * spec.grid.delta)
    return incell, drift_amount


def apply_field(spec: ProcessSpec, interval: Interval, v: FockVector) -> FockVector:
    """One field-operator application: creation + annihilation over the
    interval's cells, plus the drift multiple of the identity."""
    incell, drift_amount = _field_support(spec, interval)
    levels = _levels_from_vector(v)
    levels = _apply_field_levels(
        levels, incell, _q_matrix(spec), spec.grid.delta, drift_amount, v.depth
    )
    return _vector_from_levels(levels, v.depth)


def _word_moment(
    spec: ProcessSpec, word: Sequence[Interval], depth: int | None
) -> float:
    n = len(word)
    needed = (n + 1) // 2
    if depth is None:
        depth = needed
    elif depth < needed:
        raise DepthCapError(
            f"depth cap {depth} cannot hold an order-{n} moment; need >= {needed}"
        )
    supports = [_field_support(spec, interval) for interval in word]
    qmat = _q_matrix(spec)
    delta = spec.grid.delta
    levels = _vacuum_levels(depth)
    for incell, drift_amount in reversed(supports):
        levels = _apply_field_levels(levels, incell, qmat, delta, drift_amount, depth)
    keys0, vals0 = levels[0]
    return float(vals0[0]) if keys0.shape[0] else 0.0


def vacuum_moment(
    spec: ProcessSpec, interval: Interval, n: int, depth: int | None = None
) -> float:
    """Vacuum expectation of the n-th power of the interval field."""
    if n < 1:
        raise ValueError(f"moment order must be >= 1, got {n}")
    return _word_moment(spec, [interval] * n, depth)


def mixed_vacuum_moment(
    spec: ProcessSpec, intervals: Sequence[Interval], depth: int | None = None
) -> float:
    """Vacuum expectation of a product of interval fields,
    applied right to left."""
    if not intervals:
        raise ValueError("word must contain at least one interval")
    return _word_moment(spec, list(intervals), depth)
