"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

Two inner loops dominate runtime across the toolkit: contingency counting
(sufficient statistics for scoring and conjugate updates) and row-wise
categorical sampling (ancestral simulation). Both exist twice, as an
``@njit`` kernel and as a vectorized numpy implementation, selected once at
import time. Set ``BNRISK_DISABLE_NUMBA=1`` to force the numpy path; the two
paths are bit-identical for the same inputs (see tests/test_kernels.py and
benchmarks/bench_kernels.py).
"""

import os

import numpy as np

_DISABLED = os.environ.get("BNRISK_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

USE_NUMBA = not _DISABLED


def mixed_radix_strides(cards: np.ndarray) -> np.ndarray:
    """C-order strides for a mixed-radix code: first digit most significant."""
    cards = np.asarray(cards, dtype=np.int64)
    strides = np.ones(len(cards), dtype=np.int64)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return strides


def _family_counts_np(sub: np.ndarray, cards: np.ndarray) -> np.ndarray:
    strides = mixed_radix_strides(cards)
    flat = sub.astype(np.int64) @ strides
    total = int(np.prod(cards))
    counts = np.bincount(flat, minlength=total)
    k = int(cards[-1])
    return counts.reshape(total // k, k)


def _categorical_rows_np(cum: np.ndarray, cfg: np.ndarray, u: np.ndarray) -> np.ndarray:
    rows = cum[cfg]
    states = (rows <= u[:, None]).sum(axis=1)
    k = cum.shape[1]
    np.minimum(states, k - 1, out=states)
    return states.astype(np.int16)


def _prefix_mass_np(flat, cards, row, order, t_idx):
    arr = flat.reshape(tuple(int(c) for c in cards))
    n_ev = len(order)
    k = int(cards[t_idx])
    mass = np.empty((n_ev + 1, k))
    remaining = list(range(len(cards)))
    sub = arr

    def target_vec(sub, remaining):
        t_ax = remaining.index(t_idx)
        other = tuple(i for i in range(sub.ndim) if i != t_ax)
        return sub.sum(axis=other) if other else sub

    mass[0] = target_vec(sub, remaining)
    for j, v in enumerate(order, start=1):
        ax = remaining.index(int(v))
        sub = sub[(slice(None),) * ax + (int(row[v]),)]
        remaining.pop(ax)
        mass[j] = target_vec(sub, remaining)
    return mass


if USE_NUMBA:

    @njit(cache=True)
    def _family_counts_nb(sub, cards):  # pragma: no cover - exercised via dispatch
        m = sub.shape[1]
        strides = np.ones(m, dtype=np.int64)
        for i in range(m - 2, -1, -1):
            strides[i] = strides[i + 1] * cards[i + 1]
        total = 1
        for i in range(m):
            total *= cards[i]
        counts = np.zeros(total, dtype=np.int64)
        for r in range(sub.shape[0]):
            idx = 0
            for c in range(m):
                idx += sub[r, c] * strides[c]
            counts[idx] += 1
        k = cards[m - 1]
        return counts.reshape(total // k, k)

    @njit(cache=True)
    def _categorical_rows_nb(cum, cfg, u):  # pragma: no cover - exercised via dispatch
        n = cfg.shape[0]
        k = cum.shape[1]
        out = np.empty(n, dtype=np.int16)
        for i in range(n):
            row = cfg[i]
            s = 0
            # same comparison as the numpy path so both give identical draws
            while s < k - 1 and cum[row, s] <= u[i]:
                s += 1
            out[i] = s
        return out

    @njit(cache=True)
    def _prefix_mass_nb(flat, cards, row, order, t_idx):  # pragma: no cover
        m = cards.shape[0]
        n_ev = order.shape[0]
        k = cards[t_idx]
        bucket = np.zeros((n_ev + 1, k))
        digits = np.zeros(m, dtype=np.int64)
        for idx in range(flat.shape[0]):
            # longest evidence prefix this joint state is consistent with
            jstar = n_ev
            for j in range(n_ev):
                if digits[order[j]] != row[order[j]]:
                    jstar = j
                    break
            bucket[jstar, digits[t_idx]] += flat[idx]
            d = m - 1  # odometer increment, last digit fastest (C order)
            while d >= 0:
                digits[d] += 1
                if digits[d] == cards[d]:
                    digits[d] = 0
                    d -= 1
                else:
                    break
        for j in range(n_ev - 1, -1, -1):
            for kk in range(k):
                bucket[j, kk] += bucket[j + 1, kk]
        return bucket


def family_counts(codes: np.ndarray, cols, cards) -> np.ndarray:
    """Count occurrences of every joint configuration of ``cols``.

    ``codes`` is the (n_rows, n_vars) state-index matrix of a complete
    dataset; ``cols`` selects the family's columns (parents first, child
    last); ``cards`` are the matching cardinalities. Returns an int64 array
    of shape (prod(parent cards), child card), parent configurations indexed
    lexicographically (first parent most significant).
    """
    cols = np.asarray(cols, dtype=np.int64)
    cards = np.asarray(cards, dtype=np.int64)
    sub = np.ascontiguousarray(codes[:, cols], dtype=np.int64)
    if sub.size and sub.min() < 0:
        raise ValueError("family_counts requires complete (non-missing) columns")
    if USE_NUMBA:
        return _family_counts_nb(sub, cards)
    return _family_counts_np(sub, cards)


def categorical_rows(cum: np.ndarray, cfg: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sample one categorical state per row.

    ``cum`` holds cumulative probabilities per configuration (Q, K), ``cfg``
    the per-row configuration index, ``u`` per-row uniforms in [0, 1). The
    uniforms are generated by the caller so numba and numpy paths consume
    randomness identically.
    """
    cum = np.ascontiguousarray(cum, dtype=np.float64)
    cfg = np.ascontiguousarray(cfg, dtype=np.int64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if USE_NUMBA:
        return _categorical_rows_nb(cum, cfg, u)
    return _categorical_rows_np(cum, cfg, u)


def prefix_target_mass(
    flat: np.ndarray, cards: np.ndarray, row: np.ndarray, order: np.ndarray, t_idx: int
) -> np.ndarray:
    """Target-state mass under every evidence prefix of one row.

    ``flat`` is the raveled joint table over ``cards`` (C order), ``row`` a
    complete state-index row, ``order`` the variable indices in the order the
    row's evidence is applied. Returns an (len(order) + 1, K) matrix whose
    row j holds p(target = k, first j evidence variables match the row); row
    0 is the unconditioned target margin. One pass over the joint.
    """
    flat = np.ascontiguousarray(flat, dtype=np.float64)
    cards = np.ascontiguousarray(cards, dtype=np.int64)
    row = np.ascontiguousarray(row, dtype=np.int64)
    order = np.ascontiguousarray(order, dtype=np.int64)
    if USE_NUMBA:
        return _prefix_mass_nb(flat, cards, row, order, int(t_idx))
    return _prefix_mass_np(flat, cards, row, order, int(t_idx))
