"""Inner loops for trace synthesis and bin voting.

Every kernel is written twice: a numba ``@njit`` version and a pure-numpy
version with identical results. The numba path is used when numba imports
and ``STEGSIRI_DISABLE_NUMBA`` is unset (or "0"); otherwise the numpy path.
Both sets stay importable as ``numpy_kernels`` / ``numba_kernels`` so tests
and the benchmark can compare them directly.
"""
import heapq
import os
from types import SimpleNamespace

import numpy as np

# Slack for float grid arithmetic: (1.0 - 0.0) / 0.1 must give 10 PDUs, not 11.
EPS = 1e-9

VOICE = 1
SILENCE = 0
UNKNOWN = -1


# ---------------------------------------------------------------- numpy path

def _np_emit_grid(starts, ends, steps):
    counts = np.ceil((ends - starts) / steps - EPS).astype(np.int64)
    counts = np.maximum(counts, 0)
    total = int(counts.sum())
    seg = np.repeat(np.arange(len(starts), dtype=np.int64), counts)
    first = np.cumsum(counts) - counts
    k = np.arange(total, dtype=np.int64) - np.repeat(first, counts)
    return starts[seg] + k * steps[seg], seg


def _np_classify(sizes, talk_min, talk_max, silence_min, silence_max):
    out = np.full(sizes.shape, UNKNOWN, dtype=np.int8)
    out[(sizes >= silence_min) & (sizes <= silence_max)] = SILENCE
    out[(sizes >= talk_min) & (sizes <= talk_max)] = VOICE
    return out


def _np_bin_votes(times, classes, n_bins, bin_s):
    idx = np.floor(times / bin_s + 0.5).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)
    voice = np.bincount(idx[classes == VOICE], minlength=n_bins)
    silence = np.bincount(idx[classes == SILENCE], minlength=n_bins)
    return voice.astype(np.int64), silence.astype(np.int64)


def _np_pool_votes(voice, silence, weights):
    h = len(weights) // 2
    n = len(voice)
    # "full" then slice: mode="same" misbehaves when the kernel outgrows the input
    voice = np.convolve(voice, weights)[h:h + n]
    silence = np.convolve(silence, weights)[h:h + n]
    return voice, silence


def _np_decide_bins(voice, silence, vote_margin):
    total = voice + silence
    kinds = np.where(voice >= silence, VOICE, SILENCE).astype(np.int8)
    kinds[total == 0] = SILENCE
    win = np.maximum(voice, silence)
    margins = np.where(total > 0, win / np.maximum(total, 1), 1.0)
    # unconfident bins inherit the last confident decision
    confident = margins >= vote_margin
    confident[0] = True
    last = np.where(confident, np.arange(len(kinds)), 0)
    np.maximum.accumulate(last, out=last)
    return kinds[last], margins


def _np_merge_short_runs(bin_kinds, min_len):
    """Absorb runs shorter than ``min_len`` into their neighbours, shortest
    (then leftmost) first, until every run is long enough or one is left.

    Runs form a doubly linked list; a heap keyed on (length, start) holds the
    short ones, stale entries are skipped on pop.
    """
    if len(bin_kinds) == 0:
        return np.empty(0, np.int8), np.empty(0, np.int64)
    change = np.flatnonzero(np.diff(bin_kinds)) + 1
    starts = np.concatenate(([0], change)).tolist()
    lengths = np.diff(np.concatenate((starts, [len(bin_kinds)]))).tolist()
    kinds = bin_kinds[starts].tolist()
    m = len(lengths)
    prev = list(range(-1, m - 1))
    nxt = list(range(1, m + 1))
    nxt[-1] = -1
    alive = m
    heap = [(lengths[i], starts[i], i) for i in range(m) if lengths[i] < min_len]
    heapq.heapify(heap)
    while heap and alive > 1:
        ln, st, i = heapq.heappop(heap)
        if ln != lengths[i] or st != starts[i] or lengths[i] == 0:
            continue
        p, q = prev[i], nxt[i]
        if p < 0:
            # first run folds into the next one
            lengths[q] += ln
            starts[q] = st
            prev[q] = -1
            keep, gone = q, (i,)
        elif q < 0:
            lengths[p] += ln
            nxt[p] = -1
            keep, gone = p, (i,)
        else:
            # neighbours share a kind, so all three collapse into one run
            lengths[p] += ln + lengths[q]
            nxt[p] = nxt[q]
            if nxt[q] >= 0:
                prev[nxt[q]] = p
            keep, gone = p, (i, q)
        for g in gone:
            lengths[g] = 0
        alive -= len(gone)
        if lengths[keep] < min_len:
            heapq.heappush(heap, (lengths[keep], starts[keep], keep))
    order = [i for i in range(m) if lengths[i] > 0]
    return (np.asarray([kinds[i] for i in order], dtype=np.int8),
            np.asarray([lengths[i] for i in order], dtype=np.int64))


numpy_kernels = SimpleNamespace(
    emit_grid=_np_emit_grid,
    classify=_np_classify,
    bin_votes=_np_bin_votes,
    pool_votes=_np_pool_votes,
    decide_bins=_np_decide_bins,
    merge_short_runs=_np_merge_short_runs,
    backend="numpy",
)


# ---------------------------------------------------------------- numba path

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def emit_grid(starts, ends, steps):
        n = starts.shape[0]
        counts = np.empty(n, np.int64)
        total = 0
        for i in range(n):
            c = int(np.ceil((ends[i] - starts[i]) / steps[i] - EPS))
            if c < 0:
                c = 0
            counts[i] = c
            total += c
        times = np.empty(total, np.float64)
        seg = np.empty(total, np.int64)
        j = 0
        for i in range(n):
            for k in range(counts[i]):
                times[j] = starts[i] + k * steps[i]
                seg[j] = i
                j += 1
        return times, seg

    @njit(cache=True)
    def classify(sizes, talk_min, talk_max, silence_min, silence_max):
        out = np.empty(sizes.shape[0], np.int8)
        for i in range(sizes.shape[0]):
            s = sizes[i]
            if talk_min <= s <= talk_max:
                out[i] = VOICE
            elif silence_min <= s <= silence_max:
                out[i] = SILENCE
            else:
                out[i] = UNKNOWN
        return out

    @njit(cache=True)
    def bin_votes(times, classes, n_bins, bin_s):
        voice = np.zeros(n_bins, np.int64)
        silence = np.zeros(n_bins, np.int64)
        for i in range(times.shape[0]):
            b = int(np.floor(times[i] / bin_s + 0.5))
            if b < 0:
                b = 0
            elif b > n_bins - 1:
                b = n_bins - 1
            if classes[i] == VOICE:
                voice[b] += 1
            elif classes[i] == SILENCE:
                silence[b] += 1
        return voice, silence

    @njit(cache=True)
    def pool_votes(voice, silence, weights):
        n = voice.shape[0]
        h = weights.shape[0] // 2
        pv = np.zeros(n, weights.dtype)
        ps = np.zeros(n, weights.dtype)
        for i in range(n):
            for k in range(weights.shape[0]):
                j = i + k - h
                if 0 <= j < n:
                    pv[i] += weights[k] * voice[j]
                    ps[i] += weights[k] * silence[j]
        return pv, ps

    @njit(cache=True)
    def decide_bins(voice, silence, vote_margin):
        n = voice.shape[0]
        kinds = np.empty(n, np.int8)
        margins = np.empty(n, np.float64)
        prev = SILENCE
        for i in range(n):
            total = voice[i] + silence[i]
            if total == 0:
                k = SILENCE
                m = 1.0
            elif voice[i] >= silence[i]:
                k = VOICE
                m = voice[i] / total
            else:
                k = SILENCE
                m = silence[i] / total
            margins[i] = m
            if i > 0 and m < vote_margin:
                k = prev
            kinds[i] = k
            prev = k
        return kinds, margins

    @njit(cache=True)
    def merge_short_runs(bin_kinds, min_len):
        n = bin_kinds.shape[0]
        kinds = np.empty(n, np.int8)
        lengths = np.zeros(n, np.int64)
        starts = np.empty(n, np.int64)
        m = 0
        for i in range(n):
            if m > 0 and kinds[m - 1] == bin_kinds[i]:
                lengths[m - 1] += 1
            else:
                kinds[m] = bin_kinds[i]
                lengths[m] = 1
                starts[m] = i
                m += 1
        prev = np.arange(-1, m - 1)
        nxt = np.arange(1, m + 1)
        if m > 0:
            nxt[m - 1] = -1
        alive = m
        heap = [(np.int64(0), np.int64(0), np.int64(0))]
        heap.pop()
        for i in range(m):
            if lengths[i] < min_len:
                heap.append((lengths[i], starts[i], np.int64(i)))
        heapq.heapify(heap)
        while len(heap) > 0 and alive > 1:
            ln, st, i = heapq.heappop(heap)
            if ln != lengths[i] or st != starts[i] or ln == 0:
                continue
            p = prev[i]
            q = nxt[i]
            if p < 0:
                lengths[q] += ln
                starts[q] = st
                prev[q] = -1
                keep = q
                lengths[i] = 0
                alive -= 1
            elif q < 0:
                lengths[p] += ln
                nxt[p] = -1
                keep = p
                lengths[i] = 0
                alive -= 1
            else:
                lengths[p] += ln + lengths[q]
                nxt[p] = nxt[q]
                if nxt[q] >= 0:
                    prev[nxt[q]] = p
                keep = p
                lengths[i] = 0
                lengths[q] = 0
                alive -= 2
            if lengths[keep] < min_len:
                heapq.heappush(heap, (lengths[keep], starts[keep], np.int64(keep)))
        out_k = np.empty(alive, np.int8)
        out_l = np.empty(alive, np.int64)
        j = 0
        for i in range(m):
            if lengths[i] > 0:
                out_k[j] = kinds[i]
                out_l[j] = lengths[i]
                j += 1
        return out_k, out_l

    return SimpleNamespace(
        emit_grid=emit_grid,
        classify=classify,
        bin_votes=bin_votes,
        pool_votes=pool_votes,
        decide_bins=decide_bins,
        merge_short_runs=merge_short_runs,
        backend="numba",
    )


try:
    numba_kernels = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None


def _select():
    flag = os.environ.get("STEGSIRI_DISABLE_NUMBA", "").strip().lower()
    if numba_kernels is None or flag not in ("", "0", "false", "no"):
        return numpy_kernels
    return numba_kernels


kernels = _select()
