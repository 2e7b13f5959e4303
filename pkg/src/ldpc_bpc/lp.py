"""Dynamic LP core: a bounded-variable revised simplex that supports online
column and row addition, exposes row duals, and returns a dual (Farkas) ray
certificate whenever a restricted master is infeasible.

The engine keeps a dense basis inverse with rank-one pivot updates and
periodic refactorization. Phase 1 drives artificial variables out while
honoring variable bounds; if infeasibility remains, the certificate is
re-derived with upper bounds relaxed so the returned ray d satisfies the
clean system  a.d <= tol for every present column  and  rhs.d > tol.
Relaxing the uppers is sound for the decoding master because f <= 1 is
already implied by the convexity and linking rows.

MasterProblem specializes the engine to the decoding formulation:

    rows:     one convexity row per check        sum_S w_jS = 1
              one linking row per Tanner edge    f_i - sum_{S: i in S} w_jS = 0
              odd-set cut rows                   (over f only, with surplus)
    columns:  f_i with objective gamma_i, bounds [0, 1]
              w_jS with zero objective, +1 in convexity row j and -1 in the
              linking rows of the bits in S

Bit fixings are applied by substitution: fixed f columns leave the LP and
their coefficients move into the right-hand side; w columns that contradict
a fixing are left out of the node LP.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.blas import dger

from .codes import TannerGraph

FEASIBILITY_TOL = 1e-7
REDUCED_COST_TOL = 1e-7
INTEGRALITY_TOL = 1e-6
BLAND_THRESHOLD = 50

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"

_AT_LB, _AT_UB, _BASIC = 0, 1, 2


class SolverFailure(RuntimeError):
    """Numerical failure that survived tolerance escalation. Never a silent
    wrong answer: callers see this instead of a bogus optimum."""


class TimeLimitReached(Exception):
    """Raised between pivots when a caller-imposed deadline passes."""


class RevisedSimplex:
    """Bounded-variable revised simplex over sparse columns.

    Rows are equalities; inequality callers add their own slack or surplus
    columns. Columns and rows may be added between solves and the basis is
    kept warm across such edits.
    """

    def __init__(
        self, rhs, feas_tol=FEASIBILITY_TOL, opt_tol=REDUCED_COST_TOL, perturb=False
    ):
        self.rhs = [float(v) for v in rhs]
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.perturb = perturb
        self.deadline: float | None = None
        self.col_rows: list[np.ndarray] = []
        self.col_vals: list[np.ndarray] = []
        self.obj: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.is_art: list[bool] = []
        self.basis: np.ndarray | None = None
        self.vstatus: np.ndarray | None = None
        self.binv: np.ndarray | None = None
        self._hints: dict[int, int] = {}
        self.iterations = 0
        self._pivots_since_refactor = 0
        self._y = None
        self._xb = None
        self._ray = None
        self._flat_dirty = True

    # -- model construction -------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rhs)

    @property
    def nvars(self) -> int:
        return len(self.obj)

    def add_var(self, rows, vals, obj, lb=0.0, ub=np.inf, artificial=False) -> int:
        vid = self.nvars
        self.col_rows.append(np.asarray(rows, dtype=np.int64))
        self.col_vals.append(np.asarray(vals, dtype=np.float64))
        self.obj.append(float(obj))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.is_art.append(artificial)
        if self.vstatus is not None:
            self.vstatus = np.append(self.vstatus, _AT_LB)
        self._flat_dirty = True
        return vid

    def add_row(self, rhs, entries) -> int:
        """Append an equality row touching existing columns.

        entries is a list of (vid, coefficient). A fresh artificial becomes
        basic in the new row so the basis stays square; phase 1 clears it.
        """
        row = self.nrows
        self.rhs.append(float(rhs))
        for vid, val in entries:
            self.col_rows[vid] = np.append(self.col_rows[vid], row)
            self.col_vals[vid] = np.append(self.col_vals[vid], float(val))
        art = self.add_var([row], [1.0], 0.0, 0.0, np.inf, artificial=True)
        if self.basis is not None:
            r_b = np.zeros(row)
            for vid, val in entries:
                if self.vstatus[vid] == _BASIC:
                    pos = int(np.nonzero(self.basis == vid)[0][0])
                    r_b[pos] += val
            top = np.hstack([self.binv, np.zeros((row, 1))])
            bottom = np.hstack([-(r_b @ self.binv), [1.0]])
            self.binv = np.asfortranarray(np.vstack([top, bottom]))
            self.basis = np.append(self.basis, art)
            self.vstatus[art] = _BASIC
        self._flat_dirty = True
        return row

    def hint_basis(self, row: int, vid: int) -> None:
        """Prefer vid as the starting basic variable of row (pre-solve only)."""
        if self.basis is not None:
            return
        if self.col_rows[vid].size != 1 or self.col_rows[vid][0] != row:
            raise ValueError("basis hint must be a singleton column on its row")
        self._hints[row] = vid

    # -- internal state ------------------------------------------------------

    def _flat(self):
        if self._flat_dirty:
            if self.nvars:
                self._nnz_row = np.concatenate(self.col_rows).astype(np.int64)
                self._nnz_val = np.concatenate(self.col_vals)
                counts = [len(r) for r in self.col_rows]
                self._nnz_col = np.repeat(np.arange(self.nvars), counts)
            else:
                self._nnz_row = np.zeros(0, dtype=np.int64)
                self._nnz_val = np.zeros(0)
                self._nnz_col = np.zeros(0, dtype=np.int64)
            self._flat_dirty = False
        return self._nnz_row, self._nnz_val, self._nnz_col

    def _crash(self):
        self.vstatus = np.full(self.nvars, _AT_LB, dtype=np.int8)
        basis = np.full(self.nrows, -1, dtype=np.int64)
        for row, vid in self._hints.items():
            basis[row] = vid
            self.vstatus[vid] = _BASIC
        for row in range(self.nrows):
            if basis[row] < 0:
                sign = 1.0 if self.rhs[row] >= 0 else -1.0
                art = self.add_var([row], [sign], 0.0, 0.0, np.inf, artificial=True)
                basis[row] = art
        self.basis = basis
        self._refactorize()

    def _refactorize(self):
        r = self.nrows
        b = np.zeros((r, r))
        for pos, vid in enumerate(self.basis):
            b[self.col_rows[vid], pos] = self.col_vals[vid]
        try:
            self.binv = np.asfortranarray(np.linalg.inv(b))
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"singular basis: {exc}") from None
        self._pivots_since_refactor = 0

    def _nonbasic_values(self) -> np.ndarray:
        xn = np.zeros(self.nvars)
        at_lb = self.vstatus == _AT_LB
        at_ub = self.vstatus == _AT_UB
        xn[at_lb] = np.asarray(self.lb)[at_lb]
        xn[at_ub] = np.asarray(self.ub)[at_ub]
        return xn

    def _compute_xb(self) -> np.ndarray:
        rows, vals, cols = self._flat()
        xn = self._nonbasic_values()
        xn[self.basis] = 0.0
        resid = np.asarray(self.rhs, dtype=np.float64).copy()
        np.subtract.at(resid, rows, vals * xn[cols])
        return self.binv @ resid

    def _repair_start_basis(self, xb) -> np.ndarray:
        """Swap an artificial into any row whose basic value violates its own
        variable bounds (possible after crash hints or model edits)."""
        bad = []
        for pos, vid in enumerate(self.basis):
            v = xb[pos]
            if v < self.lb[vid] - self.feas_tol or v > self.ub[vid] + self.feas_tol:
                bad.append(pos)
        if not bad:
            return xb
        for pos in bad:
            vid = self.basis[pos]
            if self.is_art[vid] and self.col_rows[vid].size == 1:
                self.col_vals[vid] = -self.col_vals[vid]
                self._flat_dirty = True
            else:
                row = pos
                art = self.add_var([row], [1.0], 0.0, 0.0, np.inf, artificial=True)
                self.vstatus[vid] = _AT_LB
                self.basis[pos] = art
                self.vstatus[art] = _BASIC
        self._refactorize()
        xb = self._compute_xb()
        for pos in bad:
            vid = self.basis[pos]
            if self.is_art[vid] and xb[pos] < -self.feas_tol:
                self.col_vals[vid] = -self.col_vals[vid]
                self._flat_dirty = True
        self._refactorize()
        return self._compute_xb()

    # -- the simplex loop ----------------------------------------------------

    def _perturbation(self) -> np.ndarray:
        ids = np.arange(self.nvars, dtype=np.uint64)
        frac = ((ids * np.uint64(2654435761)) % np.uint64(2**32)).astype(
            np.float64
        ) / 2**32
        pert = 1e-6 * (1.0 + frac)
        pert[np.asarray(self.is_art)] = 0.0
        return pert

    def _refresh_duals(self, costs, rows, vals, cols):
        y = self.binv.T @ costs[self.basis]
        rc = costs - np.bincount(cols, weights=vals * y[rows], minlength=self.nvars)
        return y, rc

    def _run(self, costs, ub_vec, xb, max_iter):
        """Primal simplex on the current basis with the given cost vector and
        effective upper bounds. Returns the final basic values."""
        rows, vals, cols = self._flat()
        lb_vec = np.asarray(self.lb)
        art_mask = np.asarray(self.is_art)
        enterable = ~art_mask & (ub_vec - lb_vec > 0)
        degenerate_streak = 0
        # y and rc are updated incrementally across pivots and recomputed
        # exactly at refactorizations and before declaring optimality
        y, rc = self._refresh_duals(costs, rows, vals, cols)
        exact_duals = True
        while True:
            if self.iterations >= max_iter:
                raise SolverFailure(f"iteration limit {max_iter} reached")
            if (
                self.deadline is not None
                and self.iterations % 32 == 0
                and time.perf_counter() > self.deadline
            ):
                raise TimeLimitReached
            cand_lo = enterable & (self.vstatus == _AT_LB) & (rc < -self.opt_tol)
            cand_hi = enterable & (self.vstatus == _AT_UB) & (rc > self.opt_tol)
            if not (cand_lo.any() or cand_hi.any()):
                if not exact_duals:
                    y, rc = self._refresh_duals(costs, rows, vals, cols)
                    exact_duals = True
                    continue
                self._y = y
                return xb
            if degenerate_streak > BLAND_THRESHOLD:
                ids = np.nonzero(cand_lo | cand_hi)[0]
                q = int(ids[0])
            else:
                score = np.where(cand_lo, -rc, 0.0) + np.where(cand_hi, rc, 0.0)
                q = int(np.argmax(score))
            direction = 1.0 if self.vstatus[q] == _AT_LB else -1.0
            alpha = self.binv[:, self.col_rows[q]] @ self.col_vals[q]
            step = alpha * direction
            limit = ub_vec[q] - lb_vec[q]
            leave_pos, leave_at = -1, _AT_LB
            up = step > 1e-11
            dn = step < -1e-11
            with np.errstate(divide="ignore", invalid="ignore"):
                t_up = np.where(
                    up, (xb - lb_vec[self.basis]) / np.where(up, step, 1.0), np.inf
                )
                t_dn = np.where(
                    dn, (ub_vec[self.basis] - xb) / np.where(dn, -step, 1.0), np.inf
                )
            t_up = np.maximum(t_up, 0.0)
            t_dn = np.maximum(t_dn, 0.0)
            t_rows = np.minimum(t_up, t_dn)
            best_t = float(np.min(t_rows)) if t_rows.size else np.inf
            if limit < best_t:
                # entering variable flips to its opposite bound
                xb = xb - limit * step
                self.vstatus[q] = _AT_UB if direction > 0 else _AT_LB
                self.iterations += 1
                degenerate_streak = degenerate_streak + 1 if limit <= 1e-11 else 0
                continue
            if not np.isfinite(best_t):
                raise SolverFailure("unbounded direction in simplex")
            ties = np.nonzero(t_rows <= best_t + 1e-9)[0]
            leave_pos = int(ties[np.argmax(np.abs(step[ties]))])
            leave_at = _AT_LB if t_up[leave_pos] <= t_dn[leave_pos] else _AT_UB
            if abs(alpha[leave_pos]) < 1e-9:
                if self._pivots_since_refactor > 0:
                    self._refactorize()
                    xb = self._compute_xb()
                    y, rc = self._refresh_duals(costs, rows, vals, cols)
                    exact_duals = True
                    continue
                raise SolverFailure("no acceptable pivot element")
            t = max(best_t, 0.0)
            xb = xb - t * step
            entering_from = lb_vec[q] if direction > 0 else ub_vec[q]
            leaving = self.basis[leave_pos]
            self.vstatus[leaving] = leave_at
            self.basis[leave_pos] = q
            self.vstatus[q] = _BASIC
            xb[leave_pos] = entering_from + direction * t
            piv_row = self.binv[leave_pos, :] / alpha[leave_pos]
            delta = alpha.copy()
            delta[leave_pos] = alpha[leave_pos] - 1.0
            # in-place rank-1 update of the basis inverse (no temporaries)
            out = dger(-1.0, delta, piv_row, a=self.binv, overwrite_a=1)
            if out is not self.binv:
                self.binv = out
            rc_q = rc[q]
            y += rc_q * piv_row
            rc -= rc_q * np.bincount(
                cols, weights=vals * piv_row[rows], minlength=self.nvars
            )
            rc[q] = 0.0
            exact_duals = False
            self.iterations += 1
            self._pivots_since_refactor += 1
            degenerate_streak = degenerate_streak + 1 if t <= 1e-11 else 0
            if self._pivots_since_refactor >= 600:
                self._refactorize()
                xb = self._compute_xb()
                y, rc = self._refresh_duals(costs, rows, vals, cols)
                exact_duals = True

    # -- driver ----------------------------------------------------------------

    def solve(self, max_iter=None) -> str:
        if max_iter is None:
            max_iter = self.iterations + 20000 + 200 * self.nrows
        else:
            max_iter = self.iterations + max_iter
        if self.basis is None:
            self._crash()
        xb = self._compute_xb()
        xb = self._repair_start_basis(xb)
        ub_vec = np.asarray(self.ub)
        art_mask = np.asarray(self.is_art)

        art_level = float(xb[art_mask[self.basis]].sum()) if art_mask.any() else 0.0
        if art_level > self.feas_tol:
            phase1 = np.where(art_mask, 1.0, 0.0)
            xb = self._run(phase1, ub_vec, xb, max_iter)
            infeas = float(phase1[self.basis] @ xb)
            if infeas > self.feas_tol:
                self._extract_ray()
                return INFEASIBLE
        # pin artificials at zero for good; they never re-enter
        for vid in np.nonzero(art_mask)[0]:
            self.ub[vid] = 0.0
        if self.perturb:
            # break massive degeneracy with a fixed per-variable cost bias,
            # then remove it; this stabilizes which optimal basis (and hence
            # which duals) re-solves select
            xb = self._run(
                np.asarray(self.obj) + self._perturbation(),
                np.asarray(self.ub),
                xb,
                max_iter,
            )
        xb = self._run(np.asarray(self.obj), np.asarray(self.ub), xb, max_iter)
        self._xb = xb
        self._ray = None
        self._verify_optimal()
        return OPTIMAL

    def _extract_ray(self):
        """Pure Farkas ray: rerun phase 1 on a copy with uppers relaxed so no
        variable ends at an upper bound, then take the phase-1 duals."""
        if (self.vstatus == _AT_UB).any():
            twin = RevisedSimplex(self.rhs, self.feas_tol, self.opt_tol)
            for vid in range(self.nvars):
                if not self.is_art[vid]:
                    twin.add_var(
                        self.col_rows[vid], self.col_vals[vid], 0.0, self.lb[vid], np.inf
                    )
            twin._crash()
            xb = twin._compute_xb()
            art = np.asarray(twin.is_art)
            phase1 = np.where(art, 1.0, 0.0)
            xb = twin._run(phase1, np.asarray(twin.ub), xb, 20000 + 200 * twin.nrows)
            if float(phase1[twin.basis] @ xb) <= twin.feas_tol:
                raise SolverFailure("infeasibility came only from upper bounds")
            ray = twin._y.copy()
            source = twin
        else:
            ray = self._y.copy()
            source = self
        norm = float(np.max(np.abs(ray)))
        if norm <= 0:
            raise SolverFailure("zero Farkas ray")
        ray = ray / norm
        self._validate_ray(source, ray)
        self._ray = ray

    def _validate_ray(self, model, ray):
        for vid in range(model.nvars):
            if model.is_art[vid]:
                continue
            a_d = float(model.col_vals[vid] @ ray[model.col_rows[vid]])
            if a_d > model.feas_tol:
                raise SolverFailure(f"Farkas ray violated by column {vid}: {a_d}")
        c_d = float(np.asarray(model.rhs) @ ray)
        if c_d <= model.feas_tol:
            raise SolverFailure(f"Farkas ray has nonpositive rhs product {c_d}")

    def _verify_optimal(self, retried=False):
        x = self.x()
        rows, vals, cols = self._flat()
        ax = np.zeros(self.nrows)
        np.add.at(ax, rows, vals * x[cols])
        resid = float(np.max(np.abs(ax - np.asarray(self.rhs)))) if self.nrows else 0.0
        primal = float(np.asarray(self.obj) @ x)
        rc = np.asarray(self.obj) - np.bincount(
            cols, weights=vals * self._y[rows], minlength=self.nvars
        )
        lbv, ubv = np.asarray(self.lb), np.asarray(self.ub)
        dual = float(np.asarray(self.rhs) @ self._y)
        at_lb = self.vstatus == _AT_LB
        at_ub = self.vstatus == _AT_UB
        finite_lb = at_lb & np.isfinite(lbv) & ~np.asarray(self.is_art)
        finite_ub = at_ub & np.isfinite(ubv) & ~np.asarray(self.is_art)
        dual += float(lbv[finite_lb] @ rc[finite_lb])
        dual += float(ubv[finite_ub] @ rc[finite_ub])
        scale = 1.0 + abs(primal)
        ok = resid <= 50 * self.feas_tol and abs(primal - dual) <= 1e-6 * scale
        if not ok:  # NaN fails this check too
            if retried:
                raise SolverFailure(
                    f"optimality checks failed: residual {resid}, gap {primal - dual}"
                )
            self._refactorize()
            self._xb = self._compute_xb()
            cb = np.asarray(self.obj)[self.basis]
            self._y = self.binv.T @ cb
            self._verify_optimal(retried=True)

    # -- accessors -------------------------------------------------------------

    def x(self) -> np.ndarray:
        out = self._nonbasic_values()
        out[self.basis] = self._xb
        return out

    def y(self) -> np.ndarray:
        return self._y.copy()

    def ray(self) -> np.ndarray:
        return self._ray.copy()

    @property
    def objective(self) -> float:
        return float(np.asarray(self.obj) @ self.x())


# --- decoding master -----------------------------------------------------------


@dataclass
class FarkasRay:
    d_mu: np.ndarray
    d_tau: dict
    d_cuts: np.ndarray


@dataclass
class LpOutcome:
    status: str
    objective: float | None = None
    f: np.ndarray | None = None
    w: dict | None = None
    mu: np.ndarray | None = None
    tau: dict | None = None
    cut_duals: np.ndarray | None = None
    ray: FarkasRay | None = None
    iterations: int = 0


@dataclass
class _Session:
    engine: RevisedSimplex
    n0: frozenset
    n1: frozenset
    f_vid: dict
    w_vid: dict
    cut_rows: list = field(default_factory=list)


class MasterProblem:
    """Restricted master for one decoding instance.

    Holds the global column pool (one (check, even subset) pair each), the
    cut pool, and a warm LP session for the fixings most recently solved.
    """

    def __init__(
        self,
        tanner: TannerGraph,
        gammas,
        feas_tol=FEASIBILITY_TOL,
        opt_tol=REDUCED_COST_TOL,
    ):
        self.tanner = tanner
        self.gammas = np.asarray(gammas, dtype=np.float64)
        self.m = tanner.n_checks
        self.n = tanner.n_vars
        if self.gammas.size != self.n:
            raise ValueError("gamma vector length does not match bit count")
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.edge_row = {}
        for j, nbrs in enumerate(tanner.check_adj):
            for i in nbrs:
                self.edge_row[(j, i)] = self.m + len(self.edge_row)
        self.n_edges = len(self.edge_row)
        self.wcols: list[tuple[int, frozenset]] = []
        self.windex: dict[tuple[int, frozenset], int] = {}
        self.cutrows: list[tuple[int, frozenset]] = []
        self.cutset: set[tuple[int, frozenset]] = set()
        self.f_cut_entries: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        self.deadline: float | None = None
        self._session: _Session | None = None
        self.total_iterations = 0
        for j in range(self.m):
            self.add_column(j, frozenset())

    # -- pool edits ---------------------------------------------------------

    def has_column(self, j: int, s) -> bool:
        return (j, frozenset(s)) in self.windex

    def add_column(self, j: int, s) -> int:
        """Register local codeword S for check j; returns the column id."""
        s = frozenset(int(i) for i in s)
        if not 0 <= j < self.m:
            raise ValueError(f"check index {j} out of range")
        if len(s) % 2 != 0:
            raise ValueError(f"local codeword {sorted(s)} has odd cardinality")
        nbrs = set(self.tanner.check_adj[j])
        if not s <= nbrs:
            raise ValueError(f"{sorted(s - nbrs)} are not neighbors of check {j}")
        if (j, s) in self.windex:
            raise ValueError(f"column ({j}, {sorted(s)}) already present")
        wid = len(self.wcols)
        self.wcols.append((j, s))
        self.windex[(j, s)] = wid
        ses = self._session
        if ses is not None and self._w_compatible(j, s, ses.n0, ses.n1):
            rows = [j] + [self.edge_row[(j, i)] for i in sorted(s)]
            vals = [1.0] + [-1.0] * len(s)
            ses.w_vid[wid] = ses.engine.add_var(rows, vals, 0.0, 0.0, np.inf)
        return wid

    def add_cut_row(self, j: int, s) -> int:
        """Install the odd-set inequality for (check j, odd subset S)."""
        s = frozenset(int(i) for i in s)
        if len(s) % 2 != 1:
            raise ValueError(f"cut subset {sorted(s)} has even cardinality")
        nbrs = self.tanner.check_adj[j]
        if not s <= set(nbrs):
            raise ValueError(f"{sorted(s - set(nbrs))} are not neighbors of check {j}")
        if (j, s) in self.cutset:
            raise ValueError(f"cut ({j}, {sorted(s)}) already present")
        cut_idx = len(self.cutrows)
        row = self.m + self.n_edges + cut_idx
        self.cutrows.append((j, s))
        self.cutset.add((j, s))
        rhs = 1.0 - len(s)
        coefs = {i: (-1.0 if i in s else 1.0) for i in nbrs}
        for i, c in coefs.items():
            self.f_cut_entries[i].append((row, c))
        ses = self._session
        if ses is not None:
            eff = rhs
            entries = []
            for i, c in coefs.items():
                if i in ses.n1:
                    eff -= c
                elif i not in ses.n0:
                    entries.append((ses.f_vid[i], c))
            erow = ses.engine.add_row(eff, entries)
            ses.engine.add_var([erow], [-1.0], 0.0, 0.0, np.inf)
            ses.cut_rows.append(erow)
        return cut_idx

    # -- solving --------------------------------------------------------------

    def _w_compatible(self, j, s, n0, n1):
        forced = n1 & set(self.tanner.check_adj[j])
        return forced <= s and not (s & n0)

    def _build_session(self, n0: frozenset, n1: frozenset) -> _Session:
        ncuts = len(self.cutrows)
        rhs = [1.0] * self.m + [0.0] * self.n_edges + [0.0] * ncuts
        for c, (j, s) in enumerate(self.cutrows):
            rhs[self.m + self.n_edges + c] = 1.0 - len(s)
        for i in n1:
            for j in self.tanner.var_adj[i]:
                rhs[self.edge_row[(j, i)]] -= 1.0
            for row, coef in self.f_cut_entries[i]:
                rhs[row] -= coef
        eng = RevisedSimplex(rhs, self.feas_tol, self.opt_tol, perturb=True)
        eng.deadline = self.deadline
        f_vid = {}
        for i in range(self.n):
            if i in n0 or i in n1:
                continue
            rows = [self.edge_row[(j, i)] for j in self.tanner.var_adj[i]]
            vals = [1.0] * len(rows)
            for row, coef in self.f_cut_entries[i]:
                rows.append(row)
                vals.append(coef)
            f_vid[i] = eng.add_var(rows, vals, float(self.gammas[i]), 0.0, 1.0)
        w_vid = {}
        for wid, (j, s) in enumerate(self.wcols):
            if not self._w_compatible(j, s, n0, n1):
                continue
            rows = [j] + [self.edge_row[(j, i)] for i in sorted(s)]
            vals = [1.0] + [-1.0] * len(s)
            w_vid[wid] = eng.add_var(rows, vals, 0.0, 0.0, np.inf)
            if not s:
                eng.hint_basis(j, w_vid[wid])
        cut_rows = []
        for c in range(ncuts):
            row = self.m + self.n_edges + c
            svid = eng.add_var([row], [-1.0], 0.0, 0.0, np.inf)
            cut_rows.append(row)
            if -rhs[row] >= 0:
                eng.hint_basis(row, svid)
        return _Session(eng, n0, n1, f_vid, w_vid, cut_rows)

    def solve(self, n0=frozenset(), n1=frozenset()) -> LpOutcome:
        n0, n1 = frozenset(n0), frozenset(n1)
        if n0 & n1:
            raise ValueError("contradictory fixings: N0 and N1 overlap")
        ses = self._session
        if ses is None or ses.n0 != n0 or ses.n1 != n1:
            ses = self._build_session(n0, n1)
            self._session = ses
        before = ses.engine.iterations
        status = ses.engine.solve()
        self.total_iterations += ses.engine.iterations - before
        if status == INFEASIBLE:
            ray = ses.engine.ray()
            d_mu = ray[: self.m].copy()
            d_tau = {edge: ray[row] for edge, row in self.edge_row.items()}
            d_cuts = ray[self.m + self.n_edges :].copy()
            return LpOutcome(
                status=INFEASIBLE,
                ray=FarkasRay(d_mu, d_tau, d_cuts),
                iterations=ses.engine.iterations - before,
            )
        x = ses.engine.x()
        y = ses.engine.y()
        f = np.zeros(self.n)
        for i in n1:
            f[i] = 1.0
        for i, vid in ses.f_vid.items():
            f[i] = x[vid]
        w = {}
        for wid, (j, s) in enumerate(self.wcols):
            vid = ses.w_vid.get(wid)
            w[(j, s)] = float(x[vid]) if vid is not None else 0.0
        obj = ses.engine.objective + float(sum(self.gammas[i] for i in n1))
        tau = {edge: float(y[row]) for edge, row in self.edge_row.items()}
        return LpOutcome(
            status=OPTIMAL,
            objective=obj,
            f=f,
            w=w,
            mu=y[: self.m].copy(),
            tau=tau,
            cut_duals=y[self.m + self.n_edges :].copy(),
            iterations=ses.engine.iterations - before,
        )

    def invalidate(self):
        """Drop the warm session (used when moving to another tree node)."""
        self._session = None

    # -- debugging --------------------------------------------------------------

    def dump_lp(self) -> str:
        """Current master in LP text format (debug aid, root bounds)."""
        terms = []
        for i in range(self.n):
            terms.append(f"{self.gammas[i]:+.12g} f_{i}")
        lines = ["Minimize", " obj: " + " ".join(terms), "Subject To"]
        wname = {}
        for wid, (j, s) in enumerate(self.wcols):
            wname[wid] = f"w_{j}_" + ("e" if not s else "_".join(map(str, sorted(s))))
        for j in range(self.m):
            cols = [wname[wid] for wid, (jj, _) in enumerate(self.wcols) if jj == j]
            lines.append(f" conv_{j}: " + " + ".join(cols) + " = 1")
        for (j, i), _ in sorted(self.edge_row.items(), key=lambda kv: kv[1]):
            touch = [
                wname[wid]
                for wid, (jj, s) in enumerate(self.wcols)
                if jj == j and i in s
            ]
            expr = f" link_{j}_{i}: f_{i}"
            if touch:
                expr += " - " + " - ".join(touch)
            lines.append(expr + " = 0")
        for c, (j, s) in enumerate(self.cutrows):
            parts = []
            for i in self.tanner.check_adj[j]:
                parts.append(("- " if i in s else "+ ") + f"f_{i}")
            lines.append(f" cut_{c}: " + " ".join(parts) + f" >= {1 - len(s)}")
        lines.append("Bounds")
        for i in range(self.n):
            lines.append(f" 0 <= f_{i} <= 1")
        lines.append("End")
        return "\n".join(lines) + "\n"
