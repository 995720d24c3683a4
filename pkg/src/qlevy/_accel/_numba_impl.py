"""Numba @njit implementations of the hot kernels.

Mirrors ``_numpy_impl`` exactly: same candidate ordering and multiply
association in the annihilation sweep, so both backends feed identical
arrays into the shared merge step.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _annihilation_candidates_impl(keys, vals, incell, qmat, delta):
    n_rows, width = keys.shape
    count = 0
    for r in range(width):
        for i in range(n_rows):
            if incell[keys[i, r] - 1]:
                count += 1
    out_keys = np.empty((count, width - 1), dtype=np.int64)
    out_vals = np.empty(count, dtype=np.float64)
    pos = 0
    for r in range(width):
        for i in range(n_rows):
            c = keys[i, r]
            if incell[c - 1]:
                pref = 1.0
                for l in range(r):
                    pref *= qmat[c - 1, keys[i, l] - 1]
                base = vals[i] * delta
                out_vals[pos] = base * pref
                k = 0
                for l in range(width):
                    if l != r:
                        out_keys[pos, k] = keys[i, l]
                        k += 1
                pos += 1
    return out_keys, out_vals


def annihilation_candidates(keys, vals, incell, qmat, delta):
    """Candidate amplitudes produced by annihilating one occupied cell."""
    return _annihilation_candidates_impl(keys, vals, incell, qmat, delta)


@njit(cache=True)
def _contract2(w0, w1, f01, m01):
    total = 0.0
    for a in range(w0.shape[0]):
        wa = w0[a]
        for b in range(w1.shape[0]):
            term = wa * w1[b]
            if f01:
                term *= m01[a, b]
            total += term
    return total


@njit(cache=True)
def _contract3(w0, w1, w2, flags, m01, m02, m12):
    total = 0.0
    for a in range(w0.shape[0]):
        wa = w0[a]
        for b in range(w1.shape[0]):
            wab = wa * w1[b]
            if flags[0]:
                wab *= m01[a, b]
            for c in range(w2.shape[0]):
                term = wab * w2[c]
                if flags[1]:
                    term *= m02[a, c]
                if flags[2]:
                    term *= m12[b, c]
                total += term
    return total


@njit(cache=True)
def _contract4(w0, w1, w2, w3, flags, m01, m02, m03, m12, m13, m23):
    total = 0.0
    for a in range(w0.shape[0]):
        wa = w0[a]
        for b in range(w1.shape[0]):
            wab = wa * w1[b]
            if flags[0]:
                wab *= m01[a, b]
            for c in range(w2.shape[0]):
                wabc = wab * w2[c]
                if flags[1]:
                    wabc *= m02[a, c]
                if flags[3]:
                    wabc *= m12[b, c]
                for d in range(w3.shape[0]):
                    term = wabc * w3[d]
                    if flags[2]:
                        term *= m03[a, d]
                    if flags[4]:
                        term *= m13[b, d]
                    if flags[5]:
                        term *= m23[c, d]
                    total += term
    return total


_DUMMY = np.ones((1, 1), dtype=np.float64)


def contract_cluster(weights, edges, mats):
    """Weighted sum over a tensor grid of products of pairwise factors."""
    m = len(weights)
    if m > 4:
        raise ValueError(f"cluster size {m} exceeds the supported maximum 4")
    # canonical slots: all index pairs of {0..m-1} in lexicographic order
    slots = [(i, j) for i in range(m) for j in range(i + 1, m)]
    flags = np.zeros(len(slots), dtype=np.bool_)
    slot_mats = [_DUMMY] * len(slots)
    for (i, j), mat in zip(edges, mats):
        idx = slots.index((i, j) if i < j else (j, i))
        flags[idx] = True
        slot_mats[idx] = np.ascontiguousarray(mat if i < j else mat.T)
    ws = [np.ascontiguousarray(w, dtype=np.float64) for w in weights]
    if m == 2:
        return float(_contract2(ws[0], ws[1], bool(flags[0]), slot_mats[0]))
    if m == 3:
        return float(_contract3(ws[0], ws[1], ws[2], flags, *slot_mats))
    if m == 4:
        return float(_contract4(ws[0], ws[1], ws[2], ws[3], flags, *slot_mats))
    # m == 1: plain weighted sum
    return float(ws[0].sum())
