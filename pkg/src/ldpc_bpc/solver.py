"""Branch-price-and-cut tree search for nearest-codeword decoding.

Depth-first search over bit fixings. Every node is priced by column
generation, repaired through Farkas rays when the restricted master is
infeasible, optionally tightened with odd-set cuts, and pruned with the
minimum-gap rule: integral objective values are spaced at least one Hamming
unit apart, so a node whose LP bound exceeds z_ub - 1 holds nothing better
than the incumbent.

Because these masters are massively degenerate, waiting for the reduced
costs to price out can take thousands of useless columns. Two standard
remedies are built in:

  * every pricing sweep also evaluates the Lagrangian dual bound its duals
    certify (convexity rows and variable bounds stay inside the
    subproblems), and a node is abandoned as soon as any such bound crosses
    the pruning threshold, long before the column pool stabilizes;
  * when column generation stalls near the threshold, the bound is pushed
    directly by projected subgradient ascent on the Lagrangian dual, which
    costs one pricing sweep per step and typically closes the last Hamming
    unit in a few hundred steps.

A node that stalls without either pruning or pricing out falls back to
branching on the current fractional point, carrying the best Lagrangian
bound as the child bound; this keeps the search exact while bounding the
time spent fighting degeneracy.

All bounds here live on the Hamming scale; the master LP itself optimizes
the log-likelihood objective and values are converted with the affine map
in `channel`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .channel import gamma_magnitude, hamming_distance, log_likelihood_gammas
from .codes import (
    GeneratorMatrix,
    ParityCheckMatrix,
    _as_bits,
    derive_generator,
    syndrome,
)
from .cuts import separate_odd_set_cuts
from .heuristics import random_sum
from .lp import (
    INFEASIBLE,
    INTEGRALITY_TOL,
    OPTIMAL,
    REDUCED_COST_TOL,
    LpOutcome,
    MasterProblem,
    SolverFailure,
    TimeLimitReached,
)
from .pricing import (
    PricingInput,
    SubproblemInfeasible,
    direction_subproblem,
    solve_subproblem,
)

STATUS_OPTIMAL = "Optimal"
STATUS_TIME_LIMIT = "TimeLimit"
STATUS_INFEASIBLE = "Infeasible"

_BIG = 1e30


class _Deadline(Exception):
    pass


@dataclass
class BnbNode:
    n0: frozenset
    n1: frozenset
    bound: float  # inherited lower bound, Hamming scale
    depth: int


@dataclass
class DecodeOptions:
    use_rs: bool = False
    use_cuts: bool = False
    t_max: int = 10000
    time_limit_s: float = 600.0
    seed: int | None = None
    min_gap_pruning: bool = True
    branch_one_first: bool = True
    separate_every_node: bool = True
    accept_unpriced_integrals: bool = True
    max_cut_rounds: int = 50
    max_cuts_per_round: int = 500
    pricing_tol: float = REDUCED_COST_TOL
    int_tol: float = INTEGRALITY_TOL
    repair_cap: int = 1000
    ascent_budget: int = 3000   # subgradient steps per node
    ascent_chunk: int = 300
    ascent_min_gain: float = 0.05  # Hamming improvement a chunk must deliver
    stall_rounds: int = 25      # pricing rounds without progress before branching out


@dataclass
class DecodeResult:
    y: np.ndarray
    z_lower: float
    z_upper: int
    gap_pct: float
    status: str
    nodes: int = 0
    columns: int = 0
    cuts: int = 0
    lp_iterations: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "z_lower": self.z_lower,
            "z_upper": self.z_upper,
            "gap_pct": self.gap_pct,
            "status": self.status,
            "nodes": self.nodes,
            "cuts": self.cuts,
            "columns": self.columns,
            "lp_iterations": self.lp_iterations,
            "wall_time": self.wall_time,
        }


def choose_branch_variable(f, int_tol: float = INTEGRALITY_TOL) -> int:
    """Most fractional bit (largest min(f, 1-f)), lowest index on ties."""
    f = np.asarray(f, dtype=np.float64)
    score = np.minimum(f, 1.0 - f)
    best = int(np.argmax(score))
    if score[best] <= int_tol:
        raise ValueError("choose_branch_variable called on an integral solution")
    return best


def prune_by_min_gap(z_node: float, z_ub: float, a: float) -> bool:
    """True when no integral value better than z_ub can live under z_node:
    integral objectives are spaced at least `a` apart."""
    return z_node > z_ub - a + 1e-9


def implied_columns(tanner, y) -> list[tuple[int, frozenset]]:
    """Per-check local codewords selected by an integral codeword y."""
    y = np.asarray(y)
    out = []
    for j, nbrs in enumerate(tanner.check_adj):
        s = frozenset(i for i in nbrs if y[i])
        out.append((j, s))
    return out


class _Search:
    def __init__(self, h: ParityCheckMatrix, r, p: float, opts: DecodeOptions,
                 g: GeneratorMatrix | None = None):
        if not 0.0 < p < 0.5:
            raise ValueError(f"decoding requires 0 < p < 0.5, got {p}")
        self.h = h
        self.r = _as_bits(r, h.n)
        self.p = p
        self.opts = opts
        self.g = g
        self.tanner = h.tanner()
        self.gammas = log_likelihood_gammas(self.r, p)
        self.a = gamma_magnitude(p)
        self.ones = int(self.r.sum())
        self.mp = MasterProblem(self.tanner, self.gammas)
        self.deadline = time.perf_counter() + opts.time_limit_s
        self.mp.deadline = self.deadline
        self.nodes = 0
        # the zero word is always a codeword, so an incumbent always exists
        self.best_y = np.zeros(h.n, dtype=np.uint8)
        self.z_ub = self.ones
        self._build_sweep_arrays()
        self._cut_cache_len = -1

    def _build_sweep_arrays(self):
        mp, tanner = self.mp, self.tanner
        e = mp.n_edges
        self.edge_j = np.zeros(e, dtype=np.int64)
        self.edge_i = np.zeros(e, dtype=np.int64)
        self.edge_rowids = np.zeros(e, dtype=np.int64)
        for (j, i), row in mp.edge_row.items():
            k = row - mp.m
            self.edge_j[k] = j
            self.edge_i[k] = i
            self.edge_rowids[k] = row
        degrees = [len(nbrs) for nbrs in tanner.check_adj]
        kpad = max(degrees) if degrees else 0
        kpad += kpad % 2
        self.kpad = kpad
        m = mp.m
        self.adj_rows = np.zeros((m, kpad), dtype=np.int64)
        self.adj_bits = np.full((m, kpad), -1, dtype=np.int64)
        self.adj_pad = np.ones((m, kpad), dtype=bool)
        for j, nbrs in enumerate(tanner.check_adj):
            for t, i in enumerate(nbrs):
                self.adj_rows[j, t] = mp.edge_row[(j, i)]
                self.adj_bits[j, t] = i
                self.adj_pad[j, t] = False

    # -- helpers -------------------------------------------------------------

    def _check_time(self):
        if time.perf_counter() > self.deadline:
            raise _Deadline

    def _hamming(self, objective: float) -> float:
        return objective / self.a + self.ones

    def _threshold(self) -> float:
        """Current prune level: bounds strictly above it kill a node."""
        if self.opts.min_gap_pruning:
            return self.z_ub - 1.0 + 1e-9
        return self.z_ub - 1e-9

    def _accept_incumbent(self, f, w=None):
        y = np.rint(np.asarray(f)).astype(np.uint8)
        z = hamming_distance(self.r, y)
        if z >= self.z_ub:
            return
        if w is not None:
            frac = max(
                (min(v % 1.0, 1.0 - v % 1.0) for v in w.values()), default=0.0
            )
            if frac > self.opts.int_tol:
                raise SolverFailure(
                    f"integral f with fractional w ({frac}) contradicts the "
                    "integrality coupling of the master"
                )
        if syndrome(self.h, y).any():
            raise SolverFailure("integral master solution is not a codeword")
        self.best_y = y
        self.z_ub = z

    def _prunable(self, z_node: float) -> bool:
        return z_node > self._threshold()

    def _parity_blocked(self, node: BnbNode) -> bool:
        for nbrs in self.tanner.check_adj:
            forced = sum(1 for i in nbrs if i in node.n1)
            free = sum(1 for i in nbrs if i not in node.n0 and i not in node.n1)
            if free == 0 and forced % 2 == 1:
                return True
        return False

    def _integral(self, f) -> bool:
        f = np.asarray(f)
        return bool(np.all(np.minimum(f % 1.0, 1.0 - f % 1.0) <= self.opts.int_tol))

    def _cut_arrays(self):
        """Per-cut coefficient arrays for bound evaluation, cached."""
        if self._cut_cache_len != len(self.mp.cutrows):
            cuts = []
            for c, (j, s) in enumerate(self.mp.cutrows):
                bits = np.array(self.tanner.check_adj[j], dtype=np.int64)
                coefs = np.array(
                    [-1.0 if i in s else 1.0 for i in self.tanner.check_adj[j]]
                )
                cuts.append((self.mp.m + self.mp.n_edges + c, bits, coefs, 1.0 - len(s)))
            self._cuts = cuts
            self._cut_cache_len = len(self.mp.cutrows)
        return self._cuts

    # -- Lagrangian sweep ------------------------------------------------------

    def _dual_vector(self, out: LpOutcome) -> np.ndarray:
        vec = np.zeros(self.mp.m + self.mp.n_edges + len(self.mp.cutrows))
        vec[: self.mp.m] = out.mu
        for edge, row in self.mp.edge_row.items():
            vec[row] = out.tau[edge]
        off = self.mp.m + self.mp.n_edges
        vec[off : off + len(out.cut_duals)] = out.cut_duals
        return vec

    def _sweep(self, node: BnbNode, duals: np.ndarray, want_grad: bool = False):
        """One pass over all checks and bits at the given duals.

        Returns (columns, bound_gamma, grad): columns with positive reduced
        cost that are absent from the pool (using the convexity components
        of `duals`), the Lagrangian dual bound in gamma units, and, if
        requested, its supergradient in the row space.
        """
        mp = self.mp
        n = self.h.n
        affected = sorted(
            {j for i in node.n0 | node.n1 for j in self.tanner.var_adj[i]}
        )
        affected_set = set(affected)
        grad = np.zeros(duals.size) if want_grad else None
        bound = 0.0
        cols = []

        # vectorized minimum even subset per untouched check
        tau_mat = np.where(self.adj_pad, _BIG, duals[self.adj_rows])
        order = np.argsort(tau_mat, axis=1, kind="stable")
        svals = np.take_along_axis(tau_mat, order, axis=1)
        pairs = svals[:, 0::2] + svals[:, 1::2]
        take = pairs < 0.0
        if affected:
            take[affected, :] = False
        minvals = np.where(take, pairs, 0.0).sum(axis=1)
        if affected:
            minvals[affected] = 0.0
        bound += float(minvals.sum())
        zeta = duals[: mp.m] - minvals
        if want_grad:
            taken_sorted = np.repeat(take, 2, axis=1)
            rows_sorted = np.take_along_axis(self.adj_rows, order, axis=1)
            np.add.at(grad, rows_sorted[taken_sorted], 1.0)
        for j in np.nonzero(zeta > self.opts.pricing_tol)[0]:
            j = int(j)
            if j in affected_set:
                continue
            row = order[j][np.repeat(take[j], 2)]
            s = frozenset(int(self.adj_bits[j, t]) for t in row)
            if not mp.has_column(j, s):
                cols.append((j, s))

        # checks touched by fixings take the scalar path
        for j in affected:
            nbrs = self.tanner.check_adj[j]
            tau_j = {i: float(duals[mp.edge_row[(j, i)]]) for i in nbrs}
            inp = PricingInput(j, nbrs, tau_j, float(duals[j]), node.n0, node.n1)
            s, zeta_j = solve_subproblem(inp)
            bound += float(duals[j]) - zeta_j
            if want_grad:
                for i in s:
                    grad[mp.edge_row[(j, i)]] += 1.0
            if zeta_j > self.opts.pricing_tol and not mp.has_column(j, s):
                cols.append((j, s))

        tau_sum = np.bincount(self.edge_i, weights=duals[self.edge_rowids], minlength=n)
        cut_adjust = np.zeros(n)
        for row, bits, coefs, rhs in self._cut_arrays():
            pi = max(float(duals[row]), 0.0)
            rhs_eff = rhs
            for b, coef in zip(bits, coefs):
                if b in node.n1:
                    rhs_eff -= coef
            bound += pi * rhs_eff
            if pi > 0.0:
                cut_adjust[bits] += coefs * pi
        rc = self.gammas - tau_sum - cut_adjust
        fixed1 = np.zeros(n, dtype=bool)
        if node.n1:
            fixed1[list(node.n1)] = True
        free = ~fixed1
        if node.n0:
            free[list(node.n0)] = False
        neg = free & (rc < 0.0)
        bound += float(rc[neg].sum())
        bound += float((self.gammas[fixed1] - tau_sum[fixed1]).sum())
        if want_grad:
            active = neg | fixed1
            sel = active[self.edge_i]
            np.add.at(grad, self.edge_rowids[sel], -1.0)
            for row, bits, coefs, rhs in self._cut_arrays():
                g = rhs
                for b, coef in zip(bits, coefs):
                    if b in node.n1 or neg[b]:
                        g -= coef
                grad[row] = g
        return cols, bound, grad

    def _ascend(self, node: BnbNode, center: np.ndarray, best: float, budget: int):
        """Projected subgradient ascent on the Lagrangian dual from `center`.

        Returns (best bound in gamma units, matching duals, prunable flag);
        stops as soon as the Hamming bound crosses the pruning threshold.
        """
        y = center.copy()
        best_y = center
        target_ham = min(self.z_ub, self._hamming(best) + 2.0)
        off = self.mp.m + self.mp.n_edges
        for it in range(budget):
            if it % 64 == 0:
                self._check_time()
            _, bound, grad = self._sweep(node, y, want_grad=True)
            if bound > best:
                best = bound
                best_y = y.copy()
                if self._hamming(best) > self._threshold():
                    return best, best_y, True
            gn = float(grad @ grad)
            if gn < 1e-14:
                break
            target = (target_ham - self.ones) * self.a
            step = (target - bound) / gn
            if step <= 0:
                target_ham += 0.5
                continue
            y = y + step * grad
            y[off:] = np.maximum(y[off:], 0.0)
        return best, best_y, False

    # -- column generation ----------------------------------------------------

    def price_to_optimality(self, node: BnbNode, allow_prune: bool = False):
        """Column generation with Lagrangian bounding.

        Returns one of
          ('optimal', LpOutcome)  pricing converged; outcome is the exact node LP
          ('infeasible', None)    node proven infeasible (Farkas repair failed)
          ('pruned', bound)       a Lagrangian bound crossed the prune level
          ('stalled', (out, b))   no progress; caller should branch with bound b
        """
        state = {
            "best": -np.inf,  # gamma scale
            "center": np.zeros(self.mp.m + self.mp.n_edges + len(self.mp.cutrows)),
            "left": self.opts.ascent_budget,
            "blocked_at": None,  # z_ub when ascent last plateaued short
        }
        _, state["best"], _ = self._sweep(node, state["center"])
        if allow_prune and self._drive_bound(node, state):
            return "pruned", self._hamming(state["best"])
        stall = 0
        last_val = np.inf
        while True:
            self._check_time()
            out = self.mp.solve(node.n0, node.n1)
            if out.status == INFEASIBLE:
                out = self.repair_infeasibility(node, out)
                if out is None:
                    return "infeasible", None
            if self.opts.accept_unpriced_integrals and self._integral(out.f):
                self._accept_incumbent(out.f)
            y = self._dual_vector(out)
            cols, bound, _ = self._sweep(node, y)
            if bound > state["best"] or state["center"].size != y.size:
                state["best"] = max(state["best"], bound)
                state["center"] = y
            if allow_prune and self._hamming(state["best"]) > self._threshold():
                return "pruned", self._hamming(state["best"])
            if not cols:
                return "optimal", out
            if out.objective < last_val - 1e-9:
                stall = 0
            else:
                stall += 1
            last_val = min(last_val, out.objective)
            if allow_prune and stall >= 2 and self._drive_bound(node, state):
                return "pruned", self._hamming(state["best"])
            if allow_prune and stall >= self.opts.stall_rounds:
                return "stalled", (out, self._hamming(state["best"]))
            for j, s in cols:
                self.mp.add_column(j, s)

    def _drive_bound(self, node: BnbNode, state: dict) -> bool:
        """Push the Lagrangian bound by subgradient ascent until it either
        crosses the prune level (True), stops improving, or exhausts the
        node budget. A plateau blocks further attempts until the incumbent
        improves again."""
        if state["blocked_at"] == self.z_ub:
            return False
        while state["left"] > 0:
            chunk = min(self.opts.ascent_chunk, state["left"])
            state["left"] -= chunk
            before = self._hamming(state["best"])
            state["best"], state["center"], pruned = self._ascend(
                node, state["center"], state["best"], chunk
            )
            if pruned:
                return True
            if self._hamming(state["best"]) - before < self.opts.ascent_min_gain:
                break
        state["blocked_at"] = self.z_ub
        return False

    def repair_infeasibility(self, node: BnbNode, out: LpOutcome) -> LpOutcome | None:
        """Farkas repair: generate columns from the dual ray until the node
        LP turns feasible or no column can score, which proves the node
        infeasible."""
        for _ in range(self.opts.repair_cap):
            self._check_time()
            ray = out.ray
            added = 0
            for j, nbrs in enumerate(self.tanner.check_adj):
                d_tau = {i: ray.d_tau[(j, i)] for i in nbrs}
                try:
                    s, score = direction_subproblem(
                        j, nbrs, float(ray.d_mu[j]), d_tau, node.n0, node.n1
                    )
                except SubproblemInfeasible:
                    continue
                if score > self.opts.pricing_tol and not self.mp.has_column(j, s):
                    self.mp.add_column(j, s)
                    added += 1
            if added == 0:
                return None
            out = self.mp.solve(node.n0, node.n1)
            if out.status == OPTIMAL:
                return out
        raise SolverFailure("Farkas repair did not converge within the cap")

    # -- main loop -------------------------------------------------------------

    def run(self) -> DecodeResult:
        start = time.perf_counter()
        opts = self.opts
        if opts.use_rs:
            g = self.g if self.g is not None else derive_generator(self.h)
            rs = random_sum(g, self.r, opts.t_max, opts.seed)
            if rs.z < self.z_ub:
                self.best_y = rs.y
                self.z_ub = rs.z
            for j, s in implied_columns(self.tanner, self.best_y):
                if not self.mp.has_column(j, s):
                    self.mp.add_column(j, s)
        root = BnbNode(frozenset(), frozenset(), 0.0, 0)
        stack = [root]
        status = STATUS_OPTIMAL
        inflight_bound = None
        try:
            while stack:
                node = stack.pop()
                if self._prunable(node.bound):
                    continue
                inflight_bound = node.bound
                self.nodes += 1
                self._process(node, stack)
                inflight_bound = None
        except (_Deadline, TimeLimitReached):
            status = STATUS_TIME_LIMIT
        wall = time.perf_counter() - start
        if status == STATUS_OPTIMAL:
            z_lb = float(self.z_ub)
        else:
            bounds = [n.bound for n in stack]
            if inflight_bound is not None:
                bounds.append(inflight_bound)
            z_lb = min([float(self.z_ub)] + bounds)
            z_lb = max(z_lb, 0.0)
        gap = 100.0 * (self.z_ub - z_lb) / max(self.z_ub, 1e-9)
        return DecodeResult(
            y=self.best_y,
            z_lower=z_lb,
            z_upper=int(self.z_ub),
            gap_pct=max(gap, 0.0),
            status=status,
            nodes=self.nodes,
            columns=len(self.mp.wcols),
            cuts=len(self.mp.cutrows),
            lp_iterations=self.mp.total_iterations,
            wall_time=wall,
        )

    def _process(self, node: BnbNode, stack: list):
        if self._parity_blocked(node):
            return
        cut_rounds = 0
        while True:
            kind, payload = self.price_to_optimality(node, allow_prune=True)
            if kind in ("infeasible", "pruned"):
                return
            if kind == "stalled":
                out, bound = payload
                z_node = max(bound, node.bound)
                if self._prunable(z_node):
                    return
                if self._integral(out.f):
                    # integral but not priced out: bound cannot close here,
                    # keep searching below with the integral point excluded
                    self._accept_incumbent(out.f)
                    if self._prunable(z_node):
                        return
                self._branch(node, out, z_node, stack)
                return
            out = payload
            z_node = self._hamming(out.objective)
            if self._prunable(z_node):
                return
            if self._integral(out.f):
                self._accept_incumbent(out.f, out.w)
                return  # prune by optimality
            if (
                self.opts.use_cuts
                and (self.opts.separate_every_node or node.depth == 0)
                and cut_rounds < self.opts.max_cut_rounds
            ):
                found = separate_odd_set_cuts(
                    out.f,
                    self.tanner,
                    tol=self.opts.int_tol,
                    max_cuts=self.opts.max_cuts_per_round,
                    known=self.mp.cutset,
                )
                if found:
                    for j, s in found:
                        self.mp.add_cut_row(j, s)
                    cut_rounds += 1
                    continue
            self._branch(node, out, z_node, stack)
            return

    def _branch(self, node: BnbNode, out: LpOutcome, z_node: float, stack: list):
        try:
            i = choose_branch_variable(out.f, self.opts.int_tol)
        except ValueError:
            # integral point that could not be pruned or accepted better:
            # split on the first unfixed bit to keep the search exact
            unfixed = [
                t for t in range(self.h.n)
                if t not in node.n0 and t not in node.n1
            ]
            if not unfixed:
                return
            i = unfixed[0]
        zero = BnbNode(node.n0 | {i}, node.n1, z_node, node.depth + 1)
        one = BnbNode(node.n0, node.n1 | {i}, z_node, node.depth + 1)
        children = [zero, one] if self.opts.branch_one_first else [one, zero]
        stack.extend(children)  # last pushed is explored first


def decode(
    h: ParityCheckMatrix,
    r,
    p: float,
    opts: DecodeOptions | None = None,
    g: GeneratorMatrix | None = None,
) -> DecodeResult:
    """Nearest-codeword decode of r over a BSC with crossover p."""
    opts = opts or DecodeOptions()
    return _Search(h, r, p, opts, g).run()


def solve_root_lp(
    h: ParityCheckMatrix, r, p: float, time_limit_s: float = 600.0
) -> tuple[float, LpOutcome]:
    """Price the root LP to optimality and return its exact value on the
    Hamming scale together with the final outcome."""
    search = _Search(h, r, p, DecodeOptions(time_limit_s=time_limit_s))
    kind, out = search.price_to_optimality(
        BnbNode(frozenset(), frozenset(), 0.0, 0)
    )
    if kind != "optimal":
        raise SolverFailure(f"root LP did not price out: {kind}")
    return search._hamming(out.objective), out


METHOD_OPTIONS = {
    "bp": dict(use_rs=False, use_cuts=False),
    "bprs": dict(use_rs=True, use_cuts=False),
    "bpc": dict(use_rs=True, use_cuts=True),
}


def decode_with_method(
    h: ParityCheckMatrix,
    r,
    p: float,
    method: str,
    *,
    t_max: int = 10000,
    time_limit_s: float = 600.0,
    seed=None,
    g: GeneratorMatrix | None = None,
    **extra,
) -> DecodeResult:
    if method not in METHOD_OPTIONS:
        raise ValueError(f"unknown method {method!r}; expected bp, bprs or bpc")
    opts = DecodeOptions(
        t_max=t_max,
        time_limit_s=time_limit_s,
        seed=seed,
        **METHOD_OPTIONS[method],
        **extra,
    )
    return decode(h, r, p, opts, g)
