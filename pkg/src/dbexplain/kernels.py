"""Bitmask enumeration kernels.

Every kernel exists twice: a pure-numpy version (``*_numpy``) and a loop
version that numba compiles when available.  The public names resolve to the
compiled loop version unless numba is missing or disabled via
``DBEXPLAIN_DISABLE_NUMBA``.  Players/variables are indexed ``0..n-1`` and
subsets are encoded as int64 bitmasks, so ``n`` is limited to 30 here; the
engines enforce much smaller caps.
"""
import numpy as np

from ._accel import NUMBA_AVAILABLE, backend, njit

MAX_BITS = 30


def _check_bits(n):
    if n > MAX_BITS:
        raise ValueError(f"kernel limited to {MAX_BITS} bits, got {n}")


# --------------------------------------------------------------------- numpy


def truth_table_numpy(masks, n):
    subsets = np.arange(1 << n, dtype=np.int64)
    table = np.zeros(1 << n, dtype=np.uint8)
    for m in masks:
        table |= ((subsets & m) == m).astype(np.uint8)
    return table


def marginal_counts_numpy(table, n, j):
    bit = np.int64(1) << j
    subsets = np.arange(1 << n, dtype=np.int64)
    without = subsets[(subsets & bit) == 0]
    gain = table[without | bit] > table[without]
    sizes = np.bitwise_count(without[gain]).astype(np.int64)
    return np.bincount(sizes, minlength=n).astype(np.int64)[:n]


def size_counts_numpy(table, n):
    subsets = np.arange(1 << n, dtype=np.int64)
    sizes = np.bitwise_count(subsets[table.astype(bool)]).astype(np.int64)
    return np.bincount(sizes, minlength=n + 1).astype(np.int64)


def minimal_hitting_sets_numpy(edges, n):
    subsets = np.arange(1 << n, dtype=np.int64)
    hits = np.ones(1 << n, dtype=bool)
    for e in edges:
        hits &= (subsets & e) != 0
    minimal = hits.copy()
    for b in range(n):
        bit = np.int64(1) << b
        minimal &= ~(((subsets & bit) != 0) & hits[subsets ^ bit])
    return subsets[minimal]


def permutation_marginals_numpy(perms, indptr, indices, j):
    m = perms.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.int8)
    lengths = np.diff(indptr)
    if len(lengths) == 0:
        return np.zeros(m, dtype=np.int8)
    if (lengths == 0).any():
        # a constant-true disjunct: the game never changes
        return np.zeros(m, dtype=np.int8)
    ranks = np.argsort(perms, axis=1)
    member_ranks = ranks[:, indices]
    latest = np.maximum.reduceat(member_ranks, indptr[:-1], axis=1)
    rj = ranks[:, j][:, None]
    before = (latest < rj).any(axis=1)
    upto = (latest <= rj).any(axis=1)
    return (upto.astype(np.int8) - before.astype(np.int8))


# ------------------------------------------------------------------ compiled


@njit(truth_table_numpy)
def truth_table(masks, n):
    size = 1 << n
    table = np.zeros(size, dtype=np.uint8)
    for s in range(size):
        for m in masks:
            if s & m == m:
                table[s] = 1
                break
    return table


@njit(marginal_counts_numpy)
def marginal_counts(table, n, j):
    bit = 1 << j
    counts = np.zeros(n, dtype=np.int64)
    for s in range(1 << n):
        if s & bit:
            continue
        if table[s | bit] > table[s]:
            c = 0
            x = s
            while x:
                x &= x - 1
                c += 1
            counts[c] += 1
    return counts


@njit(size_counts_numpy)
def size_counts(table, n):
    counts = np.zeros(n + 1, dtype=np.int64)
    for s in range(1 << n):
        if table[s]:
            c = 0
            x = s
            while x:
                x &= x - 1
                c += 1
            counts[c] += 1
    return counts


@njit(minimal_hitting_sets_numpy)
def minimal_hitting_sets(edges, n):
    size = 1 << n
    hits = np.zeros(size, dtype=np.uint8)
    for s in range(size):
        ok = 1
        for e in edges:
            if s & e == 0:
                ok = 0
                break
        hits[s] = ok
    out = np.empty(size, dtype=np.int64)
    k = 0
    for s in range(size):
        if not hits[s]:
            continue
        minimal = True
        for b in range(n):
            bit = 1 << b
            if s & bit and hits[s ^ bit]:
                minimal = False
                break
        if minimal:
            out[k] = s
            k += 1
    return out[:k]


@njit(permutation_marginals_numpy)
def permutation_marginals(perms, indptr, indices, j):
    m, n = perms.shape
    out = np.zeros(m, dtype=np.int8)
    ranks = np.empty(n, dtype=np.int64)
    ndis = len(indptr) - 1
    for r in range(m):
        for i in range(n):
            ranks[perms[r, i]] = i
        rj = ranks[j]
        before = False
        upto = False
        for d in range(ndis):
            latest = -1
            for k in range(indptr[d], indptr[d + 1]):
                if ranks[indices[k]] > latest:
                    latest = ranks[indices[k]]
            if latest < rj:
                before = True
            if latest <= rj:
                upto = True
        out[r] = np.int8(upto) - np.int8(before)
    return out


# ------------------------------------------------------------------- helpers


def game_table(masks, n):
    """Truth table of the monotone DNF whose conjunctions are ``masks``."""
    _check_bits(n)
    return truth_table(np.asarray(masks, dtype=np.int64), n)


def hitting_sets(edges, n):
    """Inclusion-minimal hitting sets of ``edges`` (bitmasks), ascending."""
    _check_bits(n)
    return minimal_hitting_sets(np.asarray(edges, dtype=np.int64), n)


def csr(disjuncts):
    """Pack a list of index lists into (indptr, indices) int64 arrays."""
    indptr = np.zeros(len(disjuncts) + 1, dtype=np.int64)
    for i, d in enumerate(disjuncts):
        indptr[i + 1] = indptr[i] + len(d)
    indices = np.array([x for d in disjuncts for x in d], dtype=np.int64)
    return indptr, indices


__all__ = [
    "NUMBA_AVAILABLE",
    "backend",
    "csr",
    "game_table",
    "hitting_sets",
    "marginal_counts",
    "minimal_hitting_sets",
    "permutation_marginals",
    "size_counts",
    "truth_table",
]
