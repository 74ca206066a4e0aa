"""Fomin's edge local rules and the word dynamics they induce.

Grid layout
-----------
For a permutation sigma of size n the cell ``c(i, j) = [i-1, i] x [j-1, j]``
holds a point iff ``sigma(i) = j``.  ``horizontal[i, j]`` labels the edge from
vertex ``(i-1, j)`` to ``(i, j)`` and ``vertical[i, j]`` the edge from
``(i, j-1)`` to ``(i, j)``.  The south and west borders carry zeros.

Direct rules, with S, W the south and west labels of a cell and N, E the
labels to be computed::

    S = W = 0, no point   ->  N = E = 0
    S = W = 0, point      ->  N = E = 1
    S = W > 0             ->  N = E = S + 1
    S != W                ->  N = S, E = W

Rectangle words are read right to left along horizontal sides and top to
bottom along vertical sides.  The inverse rules turn a top word and a right
word into a bottom word and a left word; this is the map F.  Applying a
single letter k to a word changes its first k into k-1, then applies k-1 to
what follows, and so on; whatever value finds no match leaves on the left.
"""
from __future__ import annotations

import csv
import io
import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Sequence

import numpy as np

from .rs_core import Word, as_permutation, as_word, greene_bruteforce, greene_invariants, insertion_rows


@dataclass(frozen=True)
class EdgeGrid:
    n: int
    horizontal: np.ndarray  # (n+1, n+1), row 0 unused
    vertical: np.ndarray  # (n+1, n+1), column 0 unused
    points: frozenset

    def north_word(self) -> Word:
        """Labels of the top border, left to right (i = 1..n)."""
        return tuple(int(self.horizontal[i, self.n]) for i in range(1, self.n + 1))

    def east_word(self) -> Word:
        """Labels of the right border, bottom to top (j = 1..n)."""
        return tuple(int(self.vertical[self.n, j]) for j in range(1, self.n + 1))

    def rectangle_words(self, i: int, i2: int, j: int, j2: int) -> dict[str, Word]:
        """Border words of the rectangle ``[i, i2] x [j, j2]``."""
        if not (0 <= i <= i2 <= self.n and 0 <= j <= j2 <= self.n):
            raise ValueError("rectangle outside the grid")
        h, v = self.horizontal, self.vertical
        cols = range(i2, i, -1)
        rows = range(j2, j, -1)
        return {
            "top": tuple(int(h[a, j2]) for a in cols),
            "right": tuple(int(v[i2, b]) for b in rows),
            "bottom": tuple(int(h[a, j]) for a in cols),
            "left": tuple(int(v[i, b]) for b in rows),
        }

    def label_count(self, path: Sequence[tuple[int, int]], k: int) -> int:
        """Number of k-labelled edges along a unit-step up/right vertex path."""
        count = 0
        for (a, b), (c, d) in zip(path, path[1:]):
            if c == a + 1 and d == b:
                count += int(self.horizontal[c, d] == k)
            elif c == a and d == b + 1:
                count += int(self.vertical[c, d] == k)
            else:
                raise ValueError("path steps must be unit up or right moves")
        return count

    def render(self) -> str:
        """Plain text picture, top row first; ``*`` marks point cells."""
        n = self.n
        lines = []
        for j in range(n, -1, -1):
            # vertex row j with horizontal labels
            parts = ["+"]
            for i in range(1, n + 1):
                parts.append(f"-{int(self.horizontal[i, j])}-+")
            lines.append("".join(parts))
            if j == 0:
                break
            parts = [str(int(self.vertical[0, j]))]
            for i in range(1, n + 1):
                mark = "*" if (i, j) in self.points else " "
                parts.append(f" {mark} {int(self.vertical[i, j])}")
            lines.append("".join(parts))
        return "\n".join(lines)


def fomin_direct(sigma: Sequence[int]) -> EdgeGrid:
    sigma = as_permutation(sigma)
    n = len(sigma)
    h = np.zeros((n + 1, n + 1), dtype=np.int64)
    v = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            s, w = h[i, j - 1], v[i - 1, j]
            if s != w:
                north, east = s, w
            elif s > 0:
                north = east = s + 1
            else:
                north = east = int(sigma[i - 1] == j)
            h[i, j], v[i, j] = north, east
    points = frozenset((i, sigma[i - 1]) for i in range(1, n + 1))
    return EdgeGrid(n=n, horizontal=h, vertical=v, points=points)


def inverse_rule(north: int, east: int) -> tuple[int, int, bool]:
    """``(south, west, has_point)`` for one cell."""
    if north != east:
        return north, east, False
    if north == 0:
        return 0, 0, False
    return north - 1, north - 1, north == 1


def apply_letter(w: Sequence[int], k: int) -> tuple[Word, int]:
    """Push letter ``k`` through the top word ``w`` (one row of cells)."""
    if k < 0:
        raise ValueError("letters are nonnegative")
    out = list(w)
    cur = k
    for idx in range(len(out)):
        if cur == 0:
            break
        if out[idx] == cur:
            out[idx] = cur - 1
            cur -= 1
    return tuple(out), cur


def fomin_inverse(top: Sequence[int], right: Sequence[int]) -> tuple[Word, Word]:
    """The map F: (top, right) -> (bottom, left)."""
    bottom = as_word(top)
    left = []
    for k in as_word(right):
        bottom, res = apply_letter(bottom, k)
        left.append(res)
    return bottom, tuple(left)


def f_bot(top: Sequence[int], right: Sequence[int]) -> Word:
    return fomin_inverse(top, right)[0]


def f_left(top: Sequence[int], right: Sequence[int]) -> Word:
    return fomin_inverse(top, right)[1]


def count(w: Sequence[int], h: int) -> int:
    """``#_h w``, the number of letters h."""
    return sum(1 for a in w if a == h)


def inverse_grid(north: Sequence[int], east: Sequence[int]) -> EdgeGrid:
    """Rebuild the whole growth diagram from its top and right borders.

    ``north`` and ``east`` are given as returned by ``EdgeGrid.north_word``
    and ``EdgeGrid.east_word``.  Raises ValueError if the borders do not come
    from a permutation.
    """
    n = len(north)
    if len(east) != n:
        raise ValueError("north and east words must have equal length")
    h = np.zeros((n + 1, n + 1), dtype=np.int64)
    v = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(1, n + 1):
        h[i, n] = north[i - 1]
    for j in range(1, n + 1):
        v[n, j] = east[j - 1]
    points = set()
    for j in range(n, 0, -1):
        for i in range(n, 0, -1):
            s, w, pt = inverse_rule(int(h[i, j]), int(v[i, j]))
            h[i, j - 1], v[i - 1, j] = s, w
            if pt:
                points.add((i, j))
    if h[:, 0].any() or v[0, :].any():
        raise ValueError("borders are not those of a permutation growth diagram")
    return EdgeGrid(n=n, horizontal=h, vertical=v, points=frozenset(points))


def reconstruct_permutation(north: Sequence[int], east: Sequence[int]) -> tuple[int, ...]:
    """Permutation whose growth diagram has the given top and right borders."""
    grid = inverse_grid(north, east)
    sigma = [0] * grid.n
    for i, j in grid.points:
        if sigma[i - 1]:
            raise ValueError("two points in one column")
        sigma[i - 1] = j
    return as_permutation(sigma)


def rectangle_inverse(north: Sequence[int], east: Sequence[int]) -> tuple[Word, Word]:
    """F applied to the full-grid border words (top read right to left)."""
    return fomin_inverse(tuple(reversed(north)), tuple(reversed(east)))


# ---------------------------------------------------------------------------
# block arrays


@dataclass(frozen=True)
class BlockArray:
    """``q[i-1][k]`` is the number of letters k in the i-th block."""

    q: tuple[tuple, ...]

    @property
    def ell(self) -> int:
        return len(self.q)

    @property
    def r(self) -> int:
        return len(self.q[0]) - 1 if self.q else 0

    @classmethod
    def from_rows(cls, rows) -> "BlockArray":
        rows = tuple(tuple(r) for r in rows)
        if rows and len({len(r) for r in rows}) != 1:
            raise ValueError("all blocks need the same letter range")
        for row in rows:
            if any(x < 0 for x in row):
                raise ValueError("block counts must be nonnegative")
        return cls(rows)

    def entry(self, i: int, k: int):
        return self.q[i - 1][k]

    def block_lengths(self) -> tuple[int, ...]:
        return tuple(int(sum(row)) for row in self.q)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "k", "q"])
        for i, row in enumerate(self.q, start=1):
            for k, x in enumerate(row):
                writer.writerow([i, k, x])
        return buf.getvalue()


def blocks_encode(q: BlockArray) -> Word:
    word: list[int] = []
    for row in q.q:
        for k, c in enumerate(row):
            word.extend([k] * int(c))
    return tuple(word)


def blocks_decode(w: Sequence[int], lengths: Sequence[int], r: int) -> BlockArray:
    """Cut ``w`` into consecutive pieces of the given lengths and count letters."""
    if sum(lengths) != len(w):
        raise ValueError("block lengths do not add up to the word length")
    rows, pos = [], 0
    for ln in lengths:
        piece = w[pos:pos + ln]
        if any(a > b for a, b in zip(piece, piece[1:])):
            raise ValueError("piece is not weakly increasing")
        if any(a > r for a in piece):
            raise ValueError("letter larger than r")
        rows.append(tuple(count(piece, k) for k in range(r + 1)))
        pos += ln
    return BlockArray(tuple(rows))


def block_f_bot(q: BlockArray, right: Sequence[int]) -> BlockArray:
    """F_bot on a block word, cut back into blocks at the same positions.

    Applying a letter only ever lowers the first occurrence of a value inside
    a block, so each block stays weakly increasing.
    """
    out = f_bot(blocks_encode(q), right)
    return blocks_decode(out, q.block_lengths(), q.r)


def row_word(w: Sequence[int], r: int) -> BlockArray:
    """The array q(w): block i counts the letters of row r-i+1 of P(w)."""
    w = as_word(w)
    for a in w:
        if not 1 <= a <= r:
            raise ValueError(f"letter {a} outside 1..{r}")
    rows = insertion_rows(w) if w else []
    q = []
    for i in range(1, r + 1):
        row_idx = r - i
        row = rows[row_idx] if row_idx < len(rows) else []
        q.append(tuple(count(row, k) for k in range(r + 1)))
    return BlockArray(tuple(q))


def row_word_from_lis(w: Sequence[int], r: int, lis_k=None) -> BlockArray:
    """q(w) recomputed from LIS of the truncations ``w^{<=k}`` alone."""
    w = as_word(w)
    lis_k = lis_k or (lambda u, i: greene_bruteforce(u, i) if i > 0 else 0)
    trunc = [tuple(a for a in w if a <= k) for k in range(r + 1)]
    L = [[lis_k(trunc[k], i) if i > 0 else 0 for k in range(r + 1)] for i in range(r + 1)]
    q = [[0] * (r + 1) for _ in range(r)]
    for i in range(1, r + 1):
        for k in range(1, r + 1):
            q[r - i][k] = L[i][k] - L[i][k - 1] - L[i - 1][k] + L[i - 1][k - 1]
    return BlockArray(tuple(tuple(row) for row in q))


def delta_distance(q: BlockArray, q2: BlockArray):
    if q.ell != q2.ell or q.r != q2.r:
        raise ValueError("block arrays must have the same shape")
    ell = q.ell
    total = 0
    for i in range(1, ell + 1):
        for k in range(1, q.r + 1):
            diff = abs(q.q[i - 1][k] - q2.q[i - 1][k])
            total += diff * k * (8 * k * k) ** (ell - i)
    return total


# ---------------------------------------------------------------------------
# Knuth moves


def knuth_neighbors(w: Sequence[int]) -> set[Word]:
    """Words one elementary Knuth move away from ``w``.

    Moves act on three adjacent letters (a, b, c):
    ``j i k <-> j k i`` for ``i < j <= k`` and ``i k j <-> k i j`` for
    ``i <= j < k``.
    """
    w = as_word(w, positive=True)
    out = set()
    for p in range(len(w) - 2):
        a, b, c = w[p:p + 3]
        # j i k -> j k i and back
        if b < a <= c or c < a <= b:
            out.add(w[:p + 1] + (c, b) + w[p + 3:])
        # i k j -> k i j and back
        if a <= c < b or b <= c < a:
            out.add(w[:p] + (b, a) + w[p + 2:])
    out.discard(w)
    return out


def knuth_class(w: Sequence[int]) -> set[Word]:
    """Breadth-first closure under Knuth moves."""
    start = as_word(w, positive=True)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for x in knuth_neighbors(u):
            if x not in seen:
                seen.add(x)
                queue.append(x)
    return seen


KNUTH_BFS_MAX_LENGTH = 7


def knuth_equivalent(w: Sequence[int], w2: Sequence[int]) -> bool:
    """Same P-tableau; for short words also confirmed by BFS."""
    w, w2 = as_word(w, positive=True), as_word(w2, positive=True)
    by_tableau = insertion_rows(w) == insertion_rows(w2)
    if len(w) <= KNUTH_BFS_MAX_LENGTH and len(w) == len(w2):
        by_moves = w2 in knuth_class(w)
        if by_moves != by_tableau:
            raise AssertionError(f"Knuth BFS and P-tableau disagree on {w}, {w2}")
    return by_tableau


# ---------------------------------------------------------------------------
# dist_F on a bounded search space


def right_words(max_len: int, max_letter: int) -> Iterator[Word]:
    for ln in range(max_len + 1):
        yield from itertools.product(range(1, max_letter + 1), repeat=ln)


def fomin_distance_bound(w: Sequence[int], w2: Sequence[int], max_len: int, max_letter: int,
                         check_conservation: bool = False) -> int:
    """Lower bound on dist_F(w, w2) from all right-words up to ``max_len``.

    Letter 0 is a no-op on the bottom word and is left out of the search.
    With ``check_conservation`` every evaluation also checks mass
    conservation of the inverse rules and raises on a violation.
    """
    w, w2 = as_word(w), as_word(w2)
    top = max([max_letter, *w, *w2, 0])
    best = 0

    def counts(u):
        return [count(u, h) for h in range(top + 1)]

    def dfs(b1, b2, left1, left2, applied, depth):
        nonlocal best
        c1, c2 = counts(b1), counts(b2)
        for h in range(1, top + 1):
            d = abs(c1[h] - c2[h])
            if d > best:
                best = d
        if check_conservation:
            for bot, left, orig in ((b1, left1, w), (b2, left2, w2)):
                for h in range(1, top + 1):
                    if count(left, h) + count(orig, h) != count(bot, h) + count(applied, h):
                        raise AssertionError("mass conservation violated")
        if depth == max_len:
            return
        for k in range(1, max_letter + 1):
            n1, r1 = apply_letter(b1, k)
            n2, r2 = apply_letter(b2, k)
            dfs(n1, n2, left1 + (r1,), left2 + (r2,), applied + (k,), depth + 1)

    dfs(w, w2, (), (), (), 0)
    return best


def ordered_word(w: Sequence[int], r: int) -> Word:
    """``r^{g_r} ... 1^{g_1}`` with ``g_k`` the number of k in ``w``."""
    return tuple(k for k in range(r, 0, -1) for _ in range(count(w, k)))


def prop_4_10_eta(w: Sequence[int], r: int, lis_k=None) -> int:
    """max over i, k of |top-i sum of gamma_1..gamma_k - LIS_i(w^{<=k})|."""
    lis_k = lis_k or greene_bruteforce
    gamma = [count(w, k) for k in range(r + 1)]
    eta = 0
    for k in range(1, r + 1):
        stats = sorted(gamma[1:k + 1], reverse=True)
        trunc = tuple(a for a in w if a <= k)
        for i in range(1, r + 1):
            eta = max(eta, abs(sum(stats[:i]) - lis_k(trunc, i)))
    return eta


def ordering_bound(r: int) -> int:
    return 4 * r * (8 * r * r) ** r


# ---------------------------------------------------------------------------
# phi


def phi_discrete(alpha: Sequence[int], beta: Sequence[int]) -> int:
    alpha, beta = tuple(int(a) for a in alpha), tuple(int(b) for b in beta)
    if len(alpha) != len(beta) or not alpha:
        raise ValueError("alpha and beta need the same positive length")
    if min(alpha + beta) < 0:
        raise ValueError("entries must be nonnegative")
    r = len(alpha)
    top = tuple(k for k in range(r, 0, -1) for _ in range(alpha[k - 1]))
    right = tuple(k for k in range(r, 0, -1) for _ in range(beta[k - 1]))
    return beta[0] + count(f_bot(top, right), 1)


def _pos(x):
    return x if x > 0 else x - x


def varphi(a: Sequence, b: Sequence) -> tuple:
    """F_bot of one block on one block, in letter counts (a_0..a_r), (b_0..b_r)."""
    r = len(a) - 1
    out = [a[0] + min(a[1], b[1])] if r >= 1 else [a[0]]
    for k in range(1, r):
        out.append(_pos(a[k] - b[k]) + min(a[k + 1], b[k + 1]))
    if r >= 1:
        out.append(_pos(a[r] - b[r]))
    return tuple(out)


def varphi_blocks(q: Sequence[Sequence], b: Sequence) -> tuple[list[tuple], tuple]:
    """Apply the block ``b`` to the block list ``q``; returns (bottom, left)."""
    out = []
    cur = tuple(b)
    for qi in q:
        out.append(varphi(qi, cur))
        cur = varphi(cur, qi)
    return out, cur


def varphi_arrays(q: Sequence[Sequence], q2: Sequence[Sequence]) -> list[tuple]:
    """Apply every block of ``q2`` in turn."""
    cur = [tuple(x) for x in q]
    for b in q2:
        cur, _ = varphi_blocks(cur, b)
    return cur


def decreasing_blocks(values: Sequence) -> list[tuple]:
    """Blocks of ``r^{v_r} ... 1^{v_1}``: block i holds letter r-i+1."""
    r = len(values)
    zero = values[0] - values[0] if values else 0
    blocks = []
    for i in range(1, r + 1):
        letter = r - i + 1
        row = [zero] * (r + 1)
        row[letter] = values[letter - 1]
        blocks.append(tuple(row))
    return blocks


def _coerce(values):
    vals = list(values)
    if all(isinstance(v, Rational) for v in vals):
        return [Fraction(v) for v in vals]
    return [float(v) for v in vals]


def phi_continuous(alpha: Sequence, beta: Sequence):
    """Continuous extension of phi through the block recursion.

    Rational inputs are handled exactly (Fractions), anything else in
    floating point.
    """
    if len(alpha) != len(beta) or not len(alpha):
        raise ValueError("alpha and beta need the same positive length")
    vals = _coerce(list(alpha) + list(beta))
    if any(v < 0 for v in vals):
        raise ValueError("entries must be nonnegative")
    r = len(alpha)
    a, b = vals[:r], vals[r:]
    result = varphi_arrays(decreasing_blocks(a), decreasing_blocks(b))
    return b[0] + sum(row[1] for row in result)


def phi_closed_form(alpha: Sequence, beta: Sequence):
    """Closed forms for r = 1 and r = 2."""
    if len(alpha) == 1:
        return max(alpha[0], beta[0])
    if len(alpha) == 2:
        return max(alpha[0], beta[0], min(alpha[1], beta[1]))
    raise ValueError("closed form known only for r <= 2")


def greene_rows(w: Sequence[int], kmax: int) -> tuple[int, ...]:
    return greene_invariants(w, kmax)[0]
