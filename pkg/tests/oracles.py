"""Independent reference computations used only by the tests.

Nothing here imports the code paths it checks: sets are rasterized to
millisecond boolean masks, edit distance is a memoized recursion, and speaker
mapping is brute-forced over permutations.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


def mask(pairs_ms, length):
    m = np.zeros(length, dtype=bool)
    for s, e in pairs_ms:
        m[s:e] = True
    return m


def mask_to_pairs(m):
    """Runs of True in a boolean mask as [start, end) pairs."""
    padded = np.concatenate([[False], m, [False]]).astype(np.int8)
    diff = np.diff(padded)
    starts = np.flatnonzero(diff == 1)
    ends = np.flatnonzero(diff == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def edit_distance(ref, hyp):
    """Unit-cost Levenshtein distance by memoized recursion (short inputs only)."""
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]))

    return d(len(ref), len(hyp))


def frame_der(ref_rows, hyp_rows, length):
    """DER on a 1 ms raster with brute-force one-to-one speaker mapping.

    ``*_rows`` are (start_ms, end_ms, speaker) triples. Returns
    (missed, false_alarm, confusion, ref_speech) in ms.
    """
    def by_spk(rows):
        spk = sorted({r[2] for r in rows})
        return spk, np.array([mask([(s, e) for s, e, k in rows if k == x], length) for x in spk]).reshape(len(spk), length)

    rs, R = by_spk(ref_rows)
    hs, H = by_spk(hyp_rows)
    n_ref = R.sum(axis=0)
    n_hyp = H.sum(axis=0)
    overlap = (R[:, None, :] & H[None, :, :]).sum(axis=2) if len(rs) and len(hs) else np.zeros((len(rs), len(hs)))

    best = 0
    small, large = (hs, rs) if len(hs) <= len(rs) else (rs, hs)
    for perm in itertools.permutations(range(len(large)), len(small)):
        if len(hs) <= len(rs):
            total = sum(overlap[perm[j], j] for j in range(len(small)))
        else:
            total = sum(overlap[i, perm[i]] for i in range(len(small)))
        best = max(best, total)

    missed = int(np.maximum(n_ref - n_hyp, 0).sum())
    fa = int(np.maximum(n_hyp - n_ref, 0).sum())
    conf = int(np.minimum(n_ref, n_hyp).sum()) - int(best)
    return missed, fa, conf, int(n_ref.sum())


def longest_common_block(a, b):
    """Length of the longest common contiguous run, by enumeration."""
    best = 0
    for i in range(len(a)):
        for j in range(len(b)):
            k = 0
            while i + k < len(a) and j + k < len(b) and a[i + k] == b[j + k]:
                k += 1
            best = max(best, k)
    return best


def naive_average_linkage(x, threshold):
    """Textbook UPGMA on a full pairwise cosine-distance matrix, as partitions."""
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    pd = 1.0 - x @ x.T
    clusters = [[i] for i in range(len(x))]
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            d = np.mean([pd[i, j] for i in clusters[a] for j in clusters[b]])
            if best is None or d < best[0] - 1e-12:
                best = (d, a, b)
        if best[0] > threshold:
            break
        _, a, b = best
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return sorted(sorted(c) for c in clusters)
