"""Words, Young diagrams and the Robinson-Schensted correspondence.

Conventions
-----------
Words are tuples of nonnegative integers, permutations are tuples in one-line
notation (values ``1..n``), partitions are weakly decreasing tuples of
positive integers.  Tableaux are stored as growth sequences: chains of
partitions starting at the empty one.  For the recording tableau Q the chain
is indexed by position, for the insertion tableau P by letter value (so for a
general word consecutive shapes differ by a horizontal strip and for a
permutation by a single box).

Row insertion bumps the leftmost entry strictly greater than the inserted
letter, so rows are weakly increasing and columns strictly increasing.  By
Greene's theorem the first ``k`` rows of the shape then count the largest
union of ``k`` weakly increasing subsequences and the first ``k`` columns the
largest union of ``k`` strictly decreasing ones.  For permutations both
notions coincide with the usual strict ones.
"""
from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Word = tuple[int, ...]
Permutation = tuple[int, ...]
Partition = tuple[int, ...]
GrowthSequence = tuple[Partition, ...]

BRUTEFORCE_MAX_LENGTH = 12


class DegenerateSampleError(ValueError):
    """Raised when points share an x- or a y-coordinate."""


class SizeLimitError(ValueError):
    """Raised when an exhaustive routine is asked for too large an input."""


# ---------------------------------------------------------------------------
# basic validation and parsing


def as_word(letters: Iterable[int], positive: bool = False) -> Word:
    w = tuple(int(a) for a in letters)
    for a in w:
        if a < 0 or (positive and a == 0):
            kind = "positive" if positive else "nonnegative"
            raise ValueError(f"letters must be {kind} integers, got {a}")
    return w


def as_permutation(one_line: Iterable[int]) -> Permutation:
    sigma = tuple(int(a) for a in one_line)
    if sorted(sigma) != list(range(1, len(sigma) + 1)):
        raise ValueError(f"not a permutation of 1..{len(sigma)}: {sigma}")
    return sigma


def is_permutation(w: Sequence[int]) -> bool:
    return sorted(w) == list(range(1, len(w) + 1))


def parse_word(text: str) -> Word:
    """Parse whitespace separated integers; the error names the bad token."""
    letters = []
    for token in text.split():
        try:
            letters.append(int(token))
        except ValueError:
            raise ValueError(f"malformed letter {token!r}") from None
    return as_word(letters)


def format_word(w: Sequence[int]) -> str:
    return " ".join(str(a) for a in w)


def format_partition(lam: Sequence[int]) -> str:
    return ",".join(str(a) for a in lam)


def parse_partition(text: str) -> Partition:
    text = text.strip()
    if not text:
        return ()
    return as_partition(int(t) for t in text.split(","))


def as_partition(rows: Iterable[int]) -> Partition:
    lam = tuple(int(r) for r in rows)
    lam = tuple(r for r in lam if r != 0) if lam and lam[-1] == 0 else lam
    for a, b in zip(lam, lam[1:]):
        if a < b:
            raise ValueError(f"rows are not weakly decreasing: {lam}")
    if any(r <= 0 for r in lam):
        raise ValueError(f"rows must be positive: {lam}")
    return lam


def conjugate(lam: Sequence[int]) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for r in lam if r > c) for c in range(lam[0]))


def perm_from_points(points: Sequence[Sequence[float]]) -> Permutation:
    """Permutation induced by planar points.

    ``sigma(i) = j`` when the point with ``i``-th lowest x-coordinate has the
    ``j``-th lowest y-coordinate.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return ()
    xs, ys = pts[:, 0], pts[:, 1]
    if len(np.unique(xs)) < n or len(np.unique(ys)) < n:
        raise DegenerateSampleError("points must have distinct x and distinct y coordinates")
    by_x = np.argsort(xs, kind="stable")
    y_rank = np.empty(n, dtype=np.int64)
    y_rank[np.argsort(ys, kind="stable")] = np.arange(1, n + 1)
    return tuple(int(v) for v in y_rank[by_x])


# ---------------------------------------------------------------------------
# Robinson-Schensted


def _insert_rows(w: Sequence[int], max_rows: int | None = None):
    """Row insertion; yields the index of the row that grew (or None)."""
    rows: list[list[int]] = []
    for a in w:
        r = 0
        while True:
            if max_rows is not None and r >= max_rows:
                yield rows, None
                break
            if r == len(rows):
                rows.append([a])
                yield rows, r
                break
            row = rows[r]
            p = bisect.bisect_right(row, a)
            if p == len(row):
                row.append(a)
                yield rows, r
                break
            a, row[p] = row[p], a
            r += 1


def insertion_rows(w: Sequence[int]) -> list[list[int]]:
    """Rows of the insertion tableau P(w)."""
    rows: list[list[int]] = []
    for rows, _ in _insert_rows(as_word(w, positive=True)):
        pass
    return [list(r) for r in rows]


def shape(w: Sequence[int]) -> Partition:
    return tuple(len(r) for r in insertion_rows(w))


def first_rows(w: Sequence[int], kmax: int) -> Partition:
    """Lengths of the first ``kmax`` rows of the RS shape.

    Only the top ``kmax`` rows are maintained; letters bumped out of row
    ``kmax`` are dropped since they never affect the rows above.
    """
    rows = [[] for _ in range(kmax)]
    for a in w:
        for row in rows:
            p = bisect.bisect_right(row, a)
            if p == len(row):
                row.append(a)
                break
            a, row[p] = row[p], a
    return tuple(len(r) for r in rows if r)


def _chain_from_filling(rows: Sequence[Sequence[int]], values: Sequence[int]) -> GrowthSequence:
    chain = [()]
    for v in values:
        chain.append(tuple(c for c in (sum(1 for e in row if e <= v) for row in rows) if c))
    return tuple(chain)


def _filling_from_chain(chain: GrowthSequence, values: Sequence[int]) -> list[list[int]]:
    final = chain[-1] if chain else ()
    rows = [[0] * r for r in final]
    for prev, cur, v in zip(chain, chain[1:], values):
        for i, r in enumerate(cur):
            start = prev[i] if i < len(prev) else 0
            for c in range(start, r):
                rows[i][c] = v
    return rows


@dataclass(frozen=True)
class TableauPair:
    """P and Q tableaux of a word, stored as growth sequences.

    ``p[v]`` is the shape formed by the entries ``<= v`` of P, ``q[t]`` the
    shape after inserting the first ``t`` letters.
    """

    p: GrowthSequence
    q: GrowthSequence

    @property
    def shape(self) -> Partition:
        return self.q[-1] if self.q else ()

    def p_rows(self) -> list[list[int]]:
        return _filling_from_chain(self.p, range(1, len(self.p)))

    def q_rows(self) -> list[list[int]]:
        return _filling_from_chain(self.q, range(1, len(self.q)))

    @property
    def is_standard(self) -> bool:
        return all(sum(b) - sum(a) == 1 for a, b in zip(self.p, self.p[1:]))


def rs_correspondence(w: Sequence[int]) -> TableauPair:
    w = as_word(w, positive=True)
    q_chain = [()]
    rows: list[list[int]] = []
    for rows, _ in _insert_rows(w):
        q_chain.append(tuple(len(r) for r in rows))
    top = max(w, default=0)
    return TableauPair(p=_chain_from_filling(rows, range(1, top + 1)), q=tuple(q_chain))


def p_tableau(w: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(r) for r in insertion_rows(w))


def greene_invariants(w: Sequence[int], kmax: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(LIS_1..LIS_kmax, LDS_1..LDS_kmax)`` read off the RS shape."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    lam = shape(w)
    col = conjugate(lam)
    lis = tuple(int(sum(lam[:k])) for k in range(1, kmax + 1))
    lds = tuple(int(sum(col[:k])) for k in range(1, kmax + 1))
    return lis, lds


def lis(w: Sequence[int]) -> int:
    """Longest weakly increasing subsequence (patience sorting)."""
    tails: list[int] = []
    for a in w:
        p = bisect.bisect_right(tails, a)
        if p == len(tails):
            tails.append(a)
        else:
            tails[p] = a
    return len(tails)


# ---------------------------------------------------------------------------
# exhaustive oracle


def greene_bruteforce(w: Sequence[int], k: int, decreasing: bool = False) -> int:
    """Largest union of ``k`` monotone subsequences, by exhaustive search.

    Increasing means weakly increasing, decreasing means strictly decreasing
    (the RS conventions); letters 0 are ignored.  The search scans positions
    left to right keeping the multiset of chain tails; a kept letter always
    extends the chain whose tail is as large as possible among those it may
    follow, which leaves a state dominating every other choice.
    """
    w = as_word(w)
    if len(w) > BRUTEFORCE_MAX_LENGTH:
        raise SizeLimitError(f"greene_bruteforce is limited to length {BRUTEFORCE_MAX_LENGTH}")
    if k < 1:
        raise ValueError("k must be >= 1")
    letters = [a for a in w if a > 0]
    if decreasing:
        # strictly decreasing in w <=> strictly increasing after negation;
        # shift to keep ``a may follow t`` as ``t < a``
        letters = [-a for a in letters]
        follows = lambda tail, a: tail < a  # noqa: E731
    else:
        follows = lambda tail, a: tail <= a  # noqa: E731
    k = min(k, len(letters))
    if k == 0:
        return 0
    empty = float("-inf")
    states: dict[tuple, int] = {tuple([empty] * k): 0}
    for a in letters:
        nxt: dict[tuple, int] = dict(states)
        for tails, count in states.items():
            best = -1
            for idx, t in enumerate(tails):
                if follows(t, a):
                    best = idx
            if best < 0:
                continue
            new = tuple(sorted(tails[:best] + (a,) + tails[best + 1:]))
            if nxt.get(new, -1) < count + 1:
                nxt[new] = count + 1
        states = nxt
    return max(states.values())


# ---------------------------------------------------------------------------
# the lambda grid


@dataclass(frozen=True)
class LambdaGrid:
    """``values[i, j, k-1]`` is the k-th row length of the shape of sigma^{i,j}."""

    n: int
    values: np.ndarray

    def value(self, i: int, j: int, k: int) -> int:
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > self.values.shape[2]:
            return 0
        return int(self.values[i, j, k - 1])

    def partition(self, i: int, j: int) -> Partition:
        return tuple(int(v) for v in self.values[i, j] if v > 0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "k", "value"])
        n, kmax = self.n, self.values.shape[2]
        for i in range(n + 1):
            for j in range(n + 1):
                for k in range(kmax):
                    writer.writerow([i, j, k + 1, int(self.values[i, j, k])])
        return buf.getvalue()


def lambda_grid(sigma: Sequence[int]) -> LambdaGrid:
    """Shapes of all sub-words sigma^{i,j}, by counting Fomin edge labels.

    The k-th row of the shape at vertex (i, j) is the number of k-labelled
    horizontal edges on row j between columns 0 and i (the left border of the
    growth diagram carries only zero labels).
    """
    from .fomin import fomin_direct

    grid = fomin_direct(sigma)
    n = grid.n
    kmax = max(1, int(grid.horizontal.max(initial=0)))
    values = np.zeros((n + 1, n + 1, kmax), dtype=np.int64)
    for k in range(1, kmax + 1):
        hits = (grid.horizontal[1:, :] == k).astype(np.int64)
        values[1:, :, k - 1] = np.cumsum(hits, axis=0)
    return LambdaGrid(n=n, values=values)


def subword(sigma: Sequence[int], i: int, j: int) -> Word:
    """Letters sigma(h) with h <= i and sigma(h) <= j."""
    return tuple(a for a in sigma[:i] if a <= j)


def lambda_at(sigma: Sequence[int], i: int, j: int, kmax: int) -> Partition:
    """First ``kmax`` rows of lambda^sigma(i, j) without building the grid."""
    return first_rows(subword(sigma, i, j), kmax)


# ---------------------------------------------------------------------------
# batched kernel for Monte Carlo


def batch_first_rows(perms: np.ndarray, kmax: int) -> np.ndarray:
    """First ``kmax`` RS row lengths for every row of an ``(R, n)`` array.

    Entries must be distinct within a row (permutations).  Row insertion is
    vectorised across replicates; each of the ``kmax`` rows is kept as a
    sorted array padded with a sentinel.
    """
    perms = np.asarray(perms)
    reps, n = perms.shape
    big = np.iinfo(np.int64).max
    rows = np.full((kmax, reps, n + 1), big, dtype=np.int64)
    lengths = np.zeros((kmax, reps), dtype=np.int64)
    ar = np.arange(reps)
    for pos in range(n):
        carry = perms[:, pos].astype(np.int64)
        active = np.ones(reps, dtype=bool)
        for r in range(kmax):
            if not active.any():
                break
            row = rows[r]
            p = (row < carry[:, None]).sum(axis=1)
            bumped = row[ar, p]
            idx = ar[active]
            row[idx, p[active]] = carry[active]
            grew = active & (bumped == big)
            lengths[r] += grew
            carry = bumped
            active = active & ~grew
    return lengths.T.copy()


def batch_lis(perms: np.ndarray) -> np.ndarray:
    return batch_first_rows(perms, 1)[:, 0]
