"""Pure-numpy implementations of the hot kernels.

Must stay element-for-element compatible with the numba twin in
``_numba_impl``: same candidate ordering (annihilated position outer,
source row inner) and the same multiply association, so that the merged
states match across backends.
"""

from __future__ import annotations

import numpy as np


def annihilation_candidates(
    keys: np.ndarray,
    vals: np.ndarray,
    incell: np.ndarray,
    qmat: np.ndarray,
    delta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate amplitudes produced by annihilating one occupied cell.

    For every stored tuple (row of ``keys``) and every position ``r``
    whose cell lies in the field's support (``incell``), emit the tuple
    with position ``r`` removed, weighted by
    ``val * delta * prod_{l<r} qmat[key[r]-1, key[l]-1]``.
    """
    n_rows, width = keys.shape
    base = vals * delta
    out_keys: list[np.ndarray] = []
    out_vals: list[np.ndarray] = []
    for r in range(width):
        cells_r = keys[:, r]
        rows = np.nonzero(incell[cells_r - 1])[0]
        if rows.size == 0:
            continue
        sel = keys[rows]
        if r == 0:
            pref = np.ones(rows.size, dtype=np.float64)
        else:
            factors = qmat[sel[:, r, None] - 1, sel[:, :r] - 1]
            pref = np.cumprod(factors, axis=1)[:, -1]
        out_vals.append(base[rows] * pref)
        out_keys.append(np.delete(sel, r, axis=1))
    if not out_keys:
        return (
            np.empty((0, width - 1), dtype=np.int64),
            np.empty(0, dtype=np.float64),
        )
    return np.concatenate(out_keys, axis=0), np.concatenate(out_vals)


def contract_cluster(
    weights: list[np.ndarray],
    edges: list[tuple[int, int]],
    mats: list[np.ndarray],
) -> float:
    """Weighted sum over a tensor grid of products of pairwise factors.

    ``weights[i]`` holds the quadrature weights of variable ``i``;
    ``mats[e]`` is the factor matrix of edge ``edges[e]``, indexed by the
    node indices of its two variables.  Returns
    ``sum_x prod_i w_i[x_i] * prod_e M_e[x_{e0}, x_{e1}]``.
    """
    m = len(weights)
    if m > 4:
        raise ValueError(f"cluster size {m} exceeds the supported maximum 4")
    letters = "abcd"[:m]
    subs = list(letters)
    subs += [letters[i] + letters[j] for i, j in edges]
    expr = ",".join(subs) + "->"
    return float(np.einsum(expr, *weights, *mats, optimize=True))
