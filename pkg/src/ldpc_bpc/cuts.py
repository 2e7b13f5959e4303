"""Separation of odd-set inequalities for fractional master solutions.

For a check node j and any odd-cardinality S inside its neighborhood, every
codeword satisfies

    sum(f_i, i in N(c_j) \\ S) + sum(1 - f_i, i in S) >= 1,

because a codeword cannot agree with an odd-parity pattern on all of
N(c_j). For a fixed size |S| = s the left side is minimized by taking the s
largest f-values in the neighborhood, so checking those prefixes finds
every violated cardinality.
"""

from __future__ import annotations

import numpy as np

from .codes import TannerGraph


def separate_odd_set_cuts(
    f,
    tanner: TannerGraph,
    tol: float = 1e-6,
    max_cuts: int = 500,
    known: set | None = None,
) -> list[tuple[int, frozenset]]:
    """All violated (check, odd subset) pairs for the point f.

    Per check and odd cardinality at most one cut (the minimizing prefix)
    is reported, skipping pairs already in `known`; output is ordered by
    (check index, |S|) and capped at max_cuts.
    """
    f = np.asarray(f, dtype=np.float64)
    found = []
    for j, nbrs in enumerate(tanner.check_adj):
        if len(found) >= max_cuts:
            break
        vals = f[nbrs]
        order = sorted(range(len(nbrs)), key=lambda t: (-vals[t], nbrs[t]))
        total = float(vals.sum())
        prefix = 0.0
        for rank, t in enumerate(order):
            prefix += float(vals[t])
            size = rank + 1
            if size % 2 == 0:
                continue
            lhs = total - 2.0 * prefix + size
            if lhs < 1.0 - tol:
                s = frozenset(nbrs[q] for q in order[:size])
                if known is not None and (j, s) in known:
                    continue
                found.append((j, s))
                if len(found) >= max_cuts:
                    break
    return found


def odd_set_lhs(f, neighbors, s) -> float:
    """Left-hand side of the inequality for an explicit (neighbors, S)."""
    f = np.asarray(f, dtype=np.float64)
    inside = sum(1.0 - f[i] for i in s)
    outside = sum(f[i] for i in neighbors if i not in s)
    return inside + outside


def enumerate_violated(f, tanner: TannerGraph, tol: float = 1e-6):
    """Brute-force reference: test every odd subset of every check.

    Returns the set of (check, |S|) pairs with some violated subset of that
    size. Exponential in check degree; test oracle only.
    """
    f = np.asarray(f, dtype=np.float64)
    out = set()
    for j, nbrs in enumerate(tanner.check_adj):
        d = len(nbrs)
        for pick in range(1, 1 << d):
            sel = [nbrs[t] for t in range(d) if (pick >> t) & 1]
            if len(sel) % 2 == 0:
                continue
            if odd_set_lhs(f, nbrs, set(sel)) < 1.0 - tol:
                out.add((j, len(sel)))
    return out
