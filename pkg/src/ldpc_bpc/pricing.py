"""Exact check-node pricing.

A column for check j is an even-cardinality subset S of its Tanner
neighbors. Given duals (mu_j, tau_ij), the most profitable column maximizes
zeta = mu_j - sum(tau_ij, i in S), equivalently minimizes sum(tau_ij) over
even S. On a branch, bits in N1 are forced into S and bits in N0 out of it.

The minimizer over even subsets is greedy: sort the free taus ascending and
take adjacent pairs while their sum is strictly negative. With an odd number
of forced bits one leading free element is taken unconditionally to restore
parity (there is no even completion without it), then pairing resumes only
if that element was itself negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SubproblemInfeasible(Exception):
    """No fixing-respecting local codeword exists for this check: an odd
    number of its neighbors is forced to 1 and no neighbor is free."""


@dataclass
class PricingInput:
    j: int
    neighbors: list[int]            # N(c_j), sorted bit indices
    tau: dict[int, float]           # linking duals keyed by neighbor bit
    mu: float
    n0: frozenset = field(default_factory=frozenset)
    n1: frozenset = field(default_factory=frozenset)


def _best_even_free(free: list[tuple[float, int]], parity_odd: bool):
    """Minimal-sum selection from sorted (tau, bit) pairs with the required
    parity. Returns (selected bits, selected tau sum)."""
    chosen = []
    total = 0.0
    t = 0
    if parity_odd:
        tau0, bit0 = free[0]
        chosen.append(bit0)
        total += tau0
        t = 1
        if tau0 >= 0.0:
            return chosen, total
    while t + 1 < len(free):
        pair = free[t][0] + free[t + 1][0]
        if pair < 0.0:
            chosen.append(free[t][1])
            chosen.append(free[t + 1][1])
            total += pair
            t += 2
        else:
            break
    return chosen, total


def solve_subproblem(inp: PricingInput) -> tuple[frozenset, float]:
    """Optimal local codeword and its reduced cost zeta.

    Returns (S, zeta) where S includes the forced bits and
    zeta = mu - sum(tau_ij, i in S) is the maximum over all valid S.
    Raises SubproblemInfeasible when parity cannot be satisfied.
    """
    if inp.n0 & inp.n1:
        raise ValueError("N0 and N1 overlap")
    forced = [i for i in inp.neighbors if i in inp.n1]
    free = sorted(
        (float(inp.tau[i]), i)
        for i in inp.neighbors
        if i not in inp.n0 and i not in inp.n1
    )
    parity_odd = len(forced) % 2 == 1
    if parity_odd and not free:
        raise SubproblemInfeasible(f"check {inp.j}: odd forced set, no free bits")
    forced_tau = sum(float(inp.tau[i]) for i in forced)
    if free:
        chosen, chosen_tau = _best_even_free(free, parity_odd)
    else:
        chosen, chosen_tau = [], 0.0
    s = frozenset(forced) | frozenset(chosen)
    zeta = inp.mu - (forced_tau + chosen_tau)
    return s, zeta


def direction_subproblem(
    j: int,
    neighbors: list[int],
    d_mu: float,
    d_tau: dict[int, float],
    n0: frozenset = frozenset(),
    n1: frozenset = frozenset(),
) -> tuple[frozenset, float]:
    """Same optimization over a Farkas ray instead of duals.

    Returns (S, score) with score = d_mu - sum(d_tau_ij, i in S); a column
    is worth adding to an infeasible master exactly when score > 0.
    """
    inp = PricingInput(j, neighbors, d_tau, d_mu, n0, n1)
    return solve_subproblem(inp)


def enumerate_subproblem(
    neighbors, tau, mu, n0=frozenset(), n1=frozenset()
) -> tuple[frozenset, float]:
    """Brute-force reference: scan every even fixing-respecting subset.

    Exponential in the check degree; used as the test oracle only.
    """
    forced = [i for i in neighbors if i in n1]
    free = [i for i in neighbors if i not in n0 and i not in n1]
    best_s, best_val = None, np.inf
    for pick in range(1 << len(free)):
        sel = [free[t] for t in range(len(free)) if (pick >> t) & 1]
        if (len(sel) + len(forced)) % 2:
            continue
        val = sum(tau[i] for i in sel) + sum(tau[i] for i in forced)
        if val < best_val:
            best_val = val
            best_s = frozenset(sel) | frozenset(forced)
    if best_s is None:
        raise SubproblemInfeasible("no even completion exists")
    return best_s, mu - best_val
