"""Warm-start and baseline decoders.

random_sum draws random messages, encodes each one and keeps the codeword
nearest the received word. Message draws reuse the instance RNG
convention (one `random_message` call per trial), so seeding it with the
seed that generated a channel instance makes trial 1 regenerate that
instance's original message.

gallager_a is the classic hard-decision bit-flipping baseline: repeatedly
flip the bit sitting on the most unsatisfied checks, provided more than
half of its checks are unsatisfied; it may stall and is then reported
infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .channel import hamming_distance, random_message
from .codes import GeneratorMatrix, ParityCheckMatrix, _as_bits


@dataclass
class HeuristicResult:
    y: np.ndarray
    z: int            # Hamming distance to the received word
    feasible: bool
    iterations: int   # trials for random_sum, flips for gallager_a


def random_sum(
    g: GeneratorMatrix, r, t_max: int, seed, chunk: int = 512
) -> HeuristicResult:
    """Best of t_max random codewords by Hamming distance to r."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    r = _as_bits(r, g.n)
    if g.k_eff == 0:
        y = np.zeros(g.n, dtype=np.uint8)
        return HeuristicResult(y, hamming_distance(r, y), True, t_max)
    rng = np.random.default_rng(seed)
    gt = g.rows.astype(np.float32)
    best_z = g.n + 1
    best_y = None
    done = 0
    while done < t_max:
        take = min(chunk, t_max - done)
        u = np.stack([random_message(rng, g.k_eff) for _ in range(take)])
        v = (u.astype(np.float32) @ gt).astype(np.int64) & 1
        dists = np.count_nonzero(v != r[None, :], axis=1)
        t = int(np.argmin(dists))
        if int(dists[t]) < best_z:
            best_z = int(dists[t])
            best_y = v[t].astype(np.uint8)
        done += take
    return HeuristicResult(best_y, best_z, True, t_max)


def gallager_a(h: ParityCheckMatrix, r, max_iter: int = 500) -> HeuristicResult:
    """Single-bit flipping decoder; feasible only if all checks end satisfied."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    r = _as_bits(r, h.n)
    indptr = np.cumsum([0] + [len(row) for row in h.rows])
    indices = (
        np.concatenate([np.asarray(row, dtype=np.int64) for row in h.rows])
        if h.m
        else np.zeros(0, dtype=np.int64)
    )
    hm = sp.csr_matrix(
        (np.ones(indices.size, dtype=np.int64), indices, indptr), shape=(h.m, h.n)
    )
    degrees = np.asarray(hm.sum(axis=0)).ravel()
    var_lists = [[] for _ in range(h.n)]
    for j, row in enumerate(h.rows):
        for i in row:
            var_lists[i].append(j)
    var_adj = [np.asarray(v, dtype=np.int64) for v in var_lists]
    y = r.copy()
    synd = np.asarray(hm @ y.astype(np.int64)).ravel() & 1
    flips = 0
    while synd.any() and flips < max_iter:
        unsat = hm.T @ synd  # per-bit count of unsatisfied incident checks
        pick = int(np.argmax(unsat))
        if unsat[pick] * 2 <= degrees[pick]:
            break
        y[pick] ^= 1
        flips += 1
        # only the checks touching the flipped bit change parity
        synd[var_adj[pick]] ^= 1
    return HeuristicResult(y, hamming_distance(r, y), not synd.any(), flips)
