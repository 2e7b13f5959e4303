"""GF(2) code machinery: parity-check matrices, regular permutation codes,
Tanner graphs, generator derivation and alist file I/O.

Bit vectors at the public boundary are numpy uint8 arrays (or anything
array-like of 0/1). Hot inner loops pack rows into Python ints and work on
whole machine words via bitwise ops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class AlistError(ValueError):
    """Raised for malformed or inconsistent alist text."""


def _as_bits(x, length: int | None = None) -> np.ndarray:
    b = np.asarray(x, dtype=np.uint8)
    if b.ndim != 1:
        raise ValueError(f"expected a 1-d bit sequence, got shape {b.shape}")
    if length is not None and b.size != length:
        raise ValueError(f"bit sequence has length {b.size}, expected {length}")
    return b


def bits_to_mask(bits) -> int:
    """Pack a 0/1 sequence into an int, bit i of the mask = entry i."""
    mask = 0
    for i, b in enumerate(bits):
        if b:
            mask |= 1 << i
    return mask


def mask_to_bits(mask: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    while mask:
        low = mask & -mask
        out[low.bit_length() - 1] = 1
        mask ^= low
    return out


@dataclass
class ParityCheckMatrix:
    """Sparse binary parity-check matrix.

    rows[j] is the sorted list of column indices with a 1 in check row j.
    Indices are 0-based; alist I/O converts to the 1-based file convention.
    Instances are immutable after construction.
    """

    m: int
    n: int
    rows: list[list[int]]
    _row_masks: list[int] = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.rows) != self.m:
            raise ValueError(f"{len(self.rows)} rows given for m={self.m}")
        rows = []
        for j, row in enumerate(self.rows):
            row = sorted(int(i) for i in row)
            if row and (row[0] < 0 or row[-1] >= self.n):
                raise ValueError(f"row {j} has an index outside [0, {self.n})")
            if len(set(row)) != len(row):
                raise ValueError(f"row {j} has duplicate column indices")
            rows.append(row)
        self.rows = rows
        self._row_masks = [bits_to_mask_from_indices(r) for r in rows]

    @classmethod
    def from_dense(cls, a) -> "ParityCheckMatrix":
        a = np.asarray(a)
        rows = [list(np.flatnonzero(a[j] % 2)) for j in range(a.shape[0])]
        return cls(a.shape[0], a.shape[1], rows)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.m, self.n), dtype=np.uint8)
        for j, row in enumerate(self.rows):
            a[j, row] = 1
        return a

    @property
    def row_masks(self) -> list[int]:
        return self._row_masks

    def col_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for row in self.rows:
            deg[row] += 1
        return deg

    def row_degrees(self) -> np.ndarray:
        return np.array([len(r) for r in self.rows], dtype=np.int64)

    def tanner(self) -> "TannerGraph":
        return TannerGraph.from_parity_check(self)


def bits_to_mask_from_indices(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


@dataclass
class TannerGraph:
    """Bipartite adjacency of a parity-check matrix.

    check_adj[j] lists the variable nodes of check j, var_adj[i] the check
    nodes of variable i; both sorted ascending.
    """

    check_adj: list[list[int]]
    var_adj: list[list[int]]

    @classmethod
    def from_parity_check(cls, h: ParityCheckMatrix) -> "TannerGraph":
        var_adj = [[] for _ in range(h.n)]
        for j, row in enumerate(h.rows):
            for i in row:
                var_adj[i].append(j)
        return cls([list(r) for r in h.rows], var_adj)

    @property
    def n_checks(self) -> int:
        return len(self.check_adj)

    @property
    def n_vars(self) -> int:
        return len(self.var_adj)

    def n_edges(self) -> int:
        return sum(len(r) for r in self.check_adj)


@dataclass
class GeneratorMatrix:
    """Null-space basis of a parity-check matrix, one codeword per row."""

    n: int
    rows: np.ndarray  # (k_eff, n) uint8

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.uint8).reshape(-1, self.n)
        self._row_masks = [bits_to_mask(r) for r in self.rows]

    @property
    def k_eff(self) -> int:
        return self.rows.shape[0]

    @property
    def row_masks(self) -> list[int]:
        return self._row_masks


def syndrome(h: ParityCheckMatrix, f) -> np.ndarray:
    """Parity of each check row against bit vector f (length n)."""
    bits = _as_bits(f, h.n)
    mask = bits_to_mask(bits)
    out = np.fromiter(
        ((rm & mask).bit_count() & 1 for rm in h.row_masks),
        dtype=np.uint8,
        count=h.m,
    )
    return out


def is_codeword(h: ParityCheckMatrix, f) -> bool:
    return not syndrome(h, f).any()


def generate_regular_code(s: int, j_ones: int, k_ones: int, seed) -> ParityCheckMatrix:
    """Random (J, K)-regular parity-check matrix of shape (J*s, K*s).

    Assembled as a J x K grid of independent random s x s permutation
    matrices, so every column has exactly J ones and every row K ones.
    Deterministic for a fixed seed (Fisher-Yates shuffles from one stream).
    """
    if s < 1 or j_ones < 1 or k_ones < 1:
        raise ValueError("s, J and K must all be >= 1")
    rng = np.random.default_rng(seed)
    m, n = j_ones * s, k_ones * s
    rows = [[] for _ in range(m)]
    for bj in range(j_ones):
        for bk in range(k_ones):
            perm = rng.permutation(s)
            for r in range(s):
                rows[bj * s + r].append(bk * s + int(perm[r]))
    return ParityCheckMatrix(m, n, rows)


def gf2_row_reduce(masks: list[int], n: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form over GF(2) on int-packed rows.

    Returns (reduced_rows, pivot_cols); reduced_rows[t] has its pivot at
    pivot_cols[t] and zeros above and below it. Zero rows are dropped.
    """
    work = list(masks)
    pivots = []
    row = 0
    for col in range(n):
        sel = None
        for r in range(row, len(work)):
            if (work[r] >> col) & 1:
                sel = r
                break
        if sel is None:
            continue
        work[row], work[sel] = work[sel], work[row]
        for r in range(len(work)):
            if r != row and ((work[r] >> col) & 1):
                work[r] ^= work[row]
        pivots.append(col)
        row += 1
        if row == len(work):
            break
    return work[: len(pivots)], pivots


def gf2_rank(masks: list[int], n: int) -> int:
    return len(gf2_row_reduce(masks, n)[1])


def derive_generator(h: ParityCheckMatrix) -> GeneratorMatrix:
    """Null-space basis of H over GF(2) with k_eff = n - rank(H) rows.

    Column pivoting is implicit: pivot columns are located during the
    elimination sweep and the basis is emitted directly in the original
    column order, so G H^T = 0 holds without any final permutation.
    Rank-n matrices yield an empty generator (only the zero codeword).
    """
    reduced, pivots = gf2_row_reduce(h.row_masks, h.n)
    pivot_set = set(pivots)
    free_cols = [c for c in range(h.n) if c not in pivot_set]
    rows = np.zeros((len(free_cols), h.n), dtype=np.uint8)
    for g, fc in enumerate(free_cols):
        rows[g, fc] = 1
        for t, pc in enumerate(pivots):
            rows[g, pc] = (reduced[t] >> fc) & 1
    return GeneratorMatrix(h.n, rows)


def encode(g: GeneratorMatrix, u) -> np.ndarray:
    """Codeword u G (mod 2) for a message of length k_eff."""
    bits = _as_bits(u, g.k_eff)
    acc = 0
    for i in np.flatnonzero(bits):
        acc ^= g.row_masks[i]
    return mask_to_bits(acc, g.n)


# --- alist interchange (1-indexed, zero-padded adjacency lines) ---


def format_alist(h: ParityCheckMatrix) -> str:
    col_deg = h.col_degrees()
    row_deg = h.row_degrees()
    max_col = int(col_deg.max()) if h.n else 0
    max_row = int(row_deg.max()) if h.m else 0
    var_adj = [[] for _ in range(h.n)]
    for j, row in enumerate(h.rows):
        for i in row:
            var_adj[i].append(j)
    lines = [f"{h.n} {h.m}", f"{max_col} {max_row}"]
    lines.append(" ".join(str(d) for d in col_deg))
    lines.append(" ".join(str(d) for d in row_deg))
    for i in range(h.n):
        entries = [j + 1 for j in var_adj[i]] + [0] * (max_col - len(var_adj[i]))
        lines.append(" ".join(str(e) for e in entries))
    for j in range(h.m):
        entries = [i + 1 for i in h.rows[j]] + [0] * (max_row - len(h.rows[j]))
        lines.append(" ".join(str(e) for e in entries))
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> ParityCheckMatrix:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4 or len(lines[0]) != 2 or len(lines[1]) != 2:
        raise AlistError("malformed header: expected 'n m' and max-degree lines")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        max_col, max_row = int(lines[1][0]), int(lines[1][1])
    except ValueError as exc:
        raise AlistError(f"malformed header: {exc}") from None
    if n <= 0 or m <= 0:
        raise AlistError(f"malformed header: nonpositive dimensions {n} x {m}")
    if len(lines) != 4 + n + m:
        raise AlistError(f"expected {4 + n + m} lines, found {len(lines)}")
    col_deg = [int(x) for x in lines[2]]
    row_deg = [int(x) for x in lines[3]]
    if len(col_deg) != n or len(row_deg) != m:
        raise AlistError("degree list length does not match header dimensions")
    if col_deg and max(col_deg) > max_col or row_deg and max(row_deg) > max_row:
        raise AlistError("declared max degree exceeded by a degree list entry")

    def neighbors(tokens, degree, bound, what, idx):
        vals = [int(t) for t in tokens if int(t) != 0]
        if len(vals) != degree:
            raise AlistError(
                f"{what} {idx}: {len(vals)} neighbors listed, degree says {degree}"
            )
        for v in vals:
            if v < 1 or v > bound:
                raise AlistError(f"{what} {idx}: neighbor index {v} out of range")
        return [v - 1 for v in vals]

    col_adj = [
        neighbors(lines[4 + i], col_deg[i], m, "column", i + 1) for i in range(n)
    ]
    row_adj = [
        neighbors(lines[4 + n + j], row_deg[j], n, "row", j + 1) for j in range(m)
    ]
    edges_from_cols = {(j, i) for i in range(n) for j in col_adj[i]}
    edges_from_rows = {(j, i) for j in range(m) for i in row_adj[j]}
    if edges_from_cols != edges_from_rows:
        raise AlistError("column and row adjacency lists disagree")
    return ParityCheckMatrix(m, n, row_adj)


def read_alist(path) -> ParityCheckMatrix:
    with open(path) as fh:
        return parse_alist(fh.read())


def write_alist(h: ParityCheckMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_alist(h))
