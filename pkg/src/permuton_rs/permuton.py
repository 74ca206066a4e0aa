"""Permutons built from segments and uniform blocks.

A spec is a finite list of components, each carrying a mass:

* ``incr``: uniform mass on the segment from (x1, y1) to (x2, y2), x1 < x2, y1 < y2;
* ``decr``: same with y1 > y2;
* ``block``: uniform density on the rectangle [x1, x2] x [y1, y2].

Coordinates and masses are kept as Fractions so that the built-in specs and
all derived quantities (restrictions, LIS~, shapes) are exact.

LIS~_k only sees increasing segments: a closed nondecreasing set meets a
decreasing segment or a block in a null set.  The exact routine refines the
increasing segments against each other until every pair is either comparable
as a whole (one lies weakly south-west of the other), incomparable as a whole
(north-west/south-east), or aligned (same x-range and disjoint y-ranges, or
the reverse).  The answer is then a maximum weight union of k chains in the
resulting order, found by min-cost flow.  When the refinement does not settle,
as happens near a transversal crossing, NotNonCrossing is raised and
``lis_tilde_discretized`` is the fallback.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .rs_core import DegenerateSampleError, as_permutation, greene_invariants, perm_from_points

log = logging.getLogger(__name__)

KINDS = ("incr", "decr", "block")


class SpecError(ValueError):
    """Malformed permuton spec."""


class NotNonCrossing(ValueError):
    """Increasing segments cross in a way the exact solver does not handle."""


def Q(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise SpecError(f"non-finite number {x}")
        return Fraction(repr(x))
    return Fraction(str(x))


@dataclass(frozen=True)
class Component:
    kind: str
    x1: Fraction
    y1: Fraction
    x2: Fraction
    y2: Fraction
    mass: Fraction

    @classmethod
    def make(cls, kind, box, mass) -> "Component":
        if kind not in KINDS:
            raise SpecError(f"unknown component type {kind!r}")
        if len(box) != 4:
            raise SpecError("box needs four numbers x1, y1, x2, y2")
        x1, y1, x2, y2 = (Q(v) for v in box)
        mass = Q(mass)
        if mass <= 0:
            raise SpecError(f"component mass must be positive, got {mass}")
        if not x1 < x2:
            raise SpecError(f"degenerate {kind}: need x1 < x2")
        if kind == "decr":
            if not y1 > y2:
                raise SpecError("degenerate decr: need y1 > y2")
        elif not y1 < y2:
            raise SpecError(f"degenerate {kind}: need y1 < y2")
        return cls(kind, x1, y1, x2, y2, mass)

    @property
    def ylo(self) -> Fraction:
        return min(self.y1, self.y2)

    @property
    def yhi(self) -> Fraction:
        return max(self.y1, self.y2)

    def to_json(self) -> dict:
        return {"type": self.kind, "box": [_num(v) for v in (self.x1, self.y1, self.x2, self.y2)],
                "mass": _num(self.mass)}


def _num(v: Fraction):
    if v.denominator == 1:
        return int(v)
    return float(v)


@dataclass(frozen=True)
class PermutonSpec:
    components: tuple[Component, ...]
    name: str = field(default="", compare=False)

    @property
    def mass(self) -> Fraction:
        return sum((c.mass for c in self.components), Fraction(0))

    def of_kind(self, kind: str) -> "PermutonSpec":
        return PermutonSpec(tuple(c for c in self.components if c.kind == kind))

    def to_json(self) -> dict:
        return {"components": [c.to_json() for c in self.components]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def spec_from_json(doc) -> PermutonSpec:
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        items = doc["components"]
    except (KeyError, TypeError):
        raise SpecError("spec must be an object with a 'components' list") from None
    comps = []
    for idx, item in enumerate(items):
        try:
            comps.append(Component.make(item["type"], item["box"], item["mass"]))
        except KeyError as exc:
            raise SpecError(f"component {idx} lacks field {exc}") from None
    return PermutonSpec(tuple(comps))


def spec(*items, name: str = "") -> PermutonSpec:
    return PermutonSpec(tuple(Component.make(*it) for it in items), name=name)


F = Fraction

BUILTIN_DOCS = {
    "identity": "uniform mass on the diagonal",
    "antidiagonal": "uniform mass on the anti-diagonal",
    "fig6-mu1": "four increasing diagonals with masses 0.2, 0.3, 0.3, 0.2",
    "fig6-mu2": "four increasing diagonals with masses 0.28, 0.3, 0.3, 0.12",
    "two-diag": "increasing diagonals of mass 0.6 (upper left) and 0.4 (lower right)",
    "thoma-fig4": (
        "standardized i.i.d. word model with alpha = (1/4, 1/8, 1/12, 1/24), "
        "beta = (1/6, 1/12) and uniform part 1/4.  Each letter is a full-width "
        "horizontal band: increasing segments for the alpha letters at the bottom, "
        "the uniform block in the middle, decreasing segments for the beta "
        "letters on top (largest beta highest)."
    ),
}


def _builtin(key: str) -> PermutonSpec:
    if key == "identity":
        return spec(("incr", (0, 0, 1, 1), 1), name=key)
    if key == "antidiagonal":
        return spec(("decr", (0, 1, 1, 0), 1), name=key)
    if key == "fig6-mu1":
        return spec(
            ("incr", (0, F(1, 2), F(1, 5), F(7, 10)), F(1, 5)),
            ("incr", (F(1, 5), 0, F(1, 2), F(3, 10)), F(3, 10)),
            ("incr", (F(1, 2), F(7, 10), F(4, 5), 1), F(3, 10)),
            ("incr", (F(4, 5), F(3, 10), 1, F(1, 2)), F(1, 5)),
            name=key,
        )
    if key == "fig6-mu2":
        return spec(
            ("incr", (0, F(21, 50), F(7, 25), F(7, 10)), F(7, 25)),
            ("incr", (F(7, 25), 0, F(29, 50), F(3, 10)), F(3, 10)),
            ("incr", (F(29, 50), F(7, 10), F(22, 25), 1), F(3, 10)),
            ("incr", (F(22, 25), F(3, 10), 1, F(21, 50)), F(3, 25)),
            name=key,
        )
    if key == "two-diag":
        return spec(
            ("incr", (0, F(2, 5), F(3, 5), 1), F(3, 5)),
            ("incr", (F(3, 5), 0, 1, F(2, 5)), F(2, 5)),
            name=key,
        )
    if key == "thoma-fig4":
        alpha = [F(1, 4), F(1, 8), F(1, 12), F(1, 24)]
        beta = [F(1, 6), F(1, 12)]
        gamma = F(1, 4)
        items, y = [], F(0)
        for a in alpha:
            items.append(("incr", (0, y, 1, y + a), a))
            y += a
        items.append(("block", (0, y, 1, y + gamma), gamma))
        y += gamma
        for b in reversed(beta):
            items.append(("decr", (0, y + b, 1, y), b))
            y += b
        return spec(*items, name=key)
    raise KeyError(f"unknown built-in spec {key!r}; known: {', '.join(BUILTIN_DOCS)}")


def builtin(key: str) -> PermutonSpec:
    return _builtin(key)


BUILTINS = tuple(BUILTIN_DOCS)


def load_spec(source: str) -> PermutonSpec:
    """Built-in key or path to a JSON document."""
    if source in BUILTIN_DOCS:
        return builtin(source)
    path = Path(source)
    if not path.exists():
        raise SpecError(f"{source!r} is neither a built-in key nor a file")
    sp = spec_from_json(path.read_text())
    return PermutonSpec(sp.components, name=path.stem)


# ---------------------------------------------------------------------------
# marginals


@dataclass(frozen=True)
class MarginalCheck:
    ok: bool
    message: str
    max_error: float

    def __bool__(self) -> bool:
        return self.ok


def _densities(sp: PermutonSpec, axis: str):
    """Piecewise constant marginal density as (breakpoints, values)."""
    pieces = []
    for c in sp.components:
        lo, hi = (c.x1, c.x2) if axis == "x" else (c.ylo, c.yhi)
        pieces.append((lo, hi, c.mass / (hi - lo)))
    cuts = sorted({F(0), F(1), *(p[0] for p in pieces), *(p[1] for p in pieces)})
    values = []
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        values.append(sum((d for lo, hi, d in pieces if lo < mid < hi), F(0)))
    return cuts, values


def validate_marginals(sp: PermutonSpec, tol: float = 1e-9) -> MarginalCheck:
    """Check that both marginals are uniform; raises SpecError on bad data."""
    if not sp.components:
        raise SpecError("spec has no components")
    total = sp.mass
    if abs(total - 1) > tol:
        raise SpecError(f"total mass is {float(total)}, expected 1")
    worst, where = 0.0, ""
    for axis in ("x", "y"):
        cuts, values = _densities(sp, axis)
        for a, b, d in zip(cuts, cuts[1:], values):
            inside = 0 <= a and b <= 1
            err = abs(float(d - 1)) if inside else float(d)
            if err > worst:
                worst, where = err, f"{axis}-density {float(d):g} on [{float(a):g}, {float(b):g}]"
    if worst > tol:
        return MarginalCheck(False, f"not a permuton: {where}", worst)
    return MarginalCheck(True, "both marginals uniform", worst)


def marginal_cdf(sp: PermutonSpec, axis: str) -> Callable[[Fraction], Fraction]:
    cuts, values = _densities(sp, axis)

    def cdf(t):
        t = Q(t)
        acc = F(0)
        for a, b, d in zip(cuts, cuts[1:], values):
            if t <= a:
                break
            acc += d * (min(t, b) - a)
        return acc

    return cdf


# ---------------------------------------------------------------------------
# simple transformations


def mirror(sp: PermutonSpec) -> PermutonSpec:
    """Image under (x, y) -> (1 - x, y); swaps increasing and decreasing."""
    out = []
    for c in sp.components:
        if c.kind == "block":
            out.append(Component("block", 1 - c.x2, c.y1, 1 - c.x1, c.y2, c.mass))
        else:
            kind = "decr" if c.kind == "incr" else "incr"
            out.append(Component(kind, 1 - c.x2, c.y2, 1 - c.x1, c.y1, c.mass))
    return PermutonSpec(tuple(out), name=f"mirror({sp.name})" if sp.name else "")


def restrict(sp: PermutonSpec, x, y) -> PermutonSpec:
    """The sub-measure on [0, x] x [0, y], not renormalised."""
    x, y = Q(x), Q(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise ValueError("restriction corner must lie in the unit square")
    out = []
    for c in sp.components:
        if c.kind == "block":
            x2, y2 = min(c.x2, x), min(c.y2, y)
            if x2 <= c.x1 or y2 <= c.y1:
                continue
            frac = (x2 - c.x1) * (y2 - c.y1) / ((c.x2 - c.x1) * (c.y2 - c.y1))
            out.append(Component("block", c.x1, c.y1, x2, y2, c.mass * frac))
            continue
        dx, dy = c.x2 - c.x1, c.y2 - c.y1
        lo, hi = F(0), min(F(1), (x - c.x1) / dx)
        if dy > 0:
            hi = min(hi, (y - c.y1) / dy)
        else:
            lo = max(lo, (y - c.y1) / dy)
        if hi <= lo:
            continue
        out.append(Component(c.kind, c.x1 + lo * dx, c.y1 + lo * dy, c.x1 + hi * dx,
                             c.y1 + hi * dy, c.mass * (hi - lo)))
    return PermutonSpec(tuple(out))


def increasing_embedding(sigma: Sequence[int]) -> PermutonSpec:
    """Uniform mass 1/n on the diagonal of each cell of the permutation matrix."""
    sigma = as_permutation(sigma)
    n = len(sigma)
    return PermutonSpec(tuple(
        Component("incr", F(i, n), F(s - 1, n), F(i + 1, n), F(s, n), F(1, n))
        for i, s in enumerate(sigma)
    ))


def decompose(sp: PermutonSpec) -> tuple[PermutonSpec, PermutonSpec, PermutonSpec]:
    """(incr, decr, sub) parts."""
    return sp.of_kind("incr"), sp.of_kind("decr"), sp.of_kind("block")


def to_permuton(sp: PermutonSpec) -> PermutonSpec:
    """Push a pre-permuton forward by its marginal distribution functions.

    Components are cut where either distribution function changes slope, so
    that each piece maps affinely onto a segment or a rectangle.
    """
    total = sp.mass
    if total <= 0:
        raise SpecError("empty measure")
    norm = PermutonSpec(tuple(Component(c.kind, c.x1, c.y1, c.x2, c.y2, c.mass / total)
                              for c in sp.components))
    fx, fy = marginal_cdf(norm, "x"), marginal_cdf(norm, "y")
    xcuts, _ = _densities(norm, "x")
    ycuts, _ = _densities(norm, "y")
    out = []
    for c in norm.components:
        if c.kind == "block":
            xs = [c.x1, *(t for t in xcuts if c.x1 < t < c.x2), c.x2]
            ys = [c.y1, *(t for t in ycuts if c.y1 < t < c.y2), c.y2]
            area = (c.x2 - c.x1) * (c.y2 - c.y1)
            for a, b in zip(xs, xs[1:]):
                for u, v in zip(ys, ys[1:]):
                    out.append(Component("block", fx(a), fy(u), fx(b), fy(v),
                                         c.mass * (b - a) * (v - u) / area))
            continue
        dx, dy = c.x2 - c.x1, c.y2 - c.y1
        ts = {F(0), F(1)}
        ts |= {(t - c.x1) / dx for t in xcuts if c.x1 < t < c.x2}
        ts |= {(t - c.y1) / dy for t in ycuts if c.ylo < t < c.yhi}
        ts = sorted(ts)
        for a, b in zip(ts, ts[1:]):
            p = (c.x1 + a * dx, c.y1 + a * dy)
            q = (c.x1 + b * dx, c.y1 + b * dy)
            out.append(Component(c.kind, fx(p[0]), fy(p[1]), fx(q[0]), fy(q[1]), c.mass * (b - a)))
    return PermutonSpec(tuple(out))


# ---------------------------------------------------------------------------
# sampling


def _component_arrays(sp: PermutonSpec):
    comps = sp.components
    probs = np.array([float(c.mass) for c in comps])
    probs = probs / probs.sum()
    coords = np.array([[float(c.x1), float(c.y1), float(c.x2), float(c.y2)] for c in comps])
    is_block = np.array([c.kind == "block" for c in comps])
    return probs, coords, is_block


def sample_points(sp: PermutonSpec, n: int, rng: np.random.Generator, reps: int | None = None) -> np.ndarray:
    """i.i.d. points; shape ``(n, 2)`` or ``(reps, n, 2)``."""
    probs, coords, is_block = _component_arrays(sp)
    shape = (n,) if reps is None else (reps, n)
    which = rng.choice(len(probs), size=shape, p=probs)
    u = rng.random(shape)
    v = rng.random(shape)
    c = coords[which]
    blk = is_block[which]
    x = c[..., 0] + u * (c[..., 2] - c[..., 0])
    t = np.where(blk, v, u)
    y = c[..., 1] + t * (c[..., 3] - c[..., 1])
    return np.stack([x, y], axis=-1)


def _points_to_perms(pts: np.ndarray) -> np.ndarray:
    order = np.argsort(pts[..., 0], axis=-1, kind="stable")
    ys = np.take_along_axis(pts[..., 1], order, axis=-1)
    ranks = np.argsort(np.argsort(ys, axis=-1, kind="stable"), axis=-1, kind="stable") + 1
    return ranks


def _has_collision(pts: np.ndarray) -> np.ndarray:
    xs = np.sort(pts[..., 0], axis=-1)
    ys = np.sort(pts[..., 1], axis=-1)
    return (np.diff(xs, axis=-1) == 0).any(axis=-1) | (np.diff(ys, axis=-1) == 0).any(axis=-1)


def sample_permutations(sp: PermutonSpec, n: int, reps: int, rng: np.random.Generator) -> np.ndarray:
    """``(reps, n)`` array of sampled permutations (values 1..n).

    Rows whose points share a coordinate are logged and redrawn from the same
    stream.
    """
    pts = sample_points(sp, n, rng, reps=reps)
    bad = _has_collision(pts) if n > 1 else np.zeros(reps, dtype=bool)
    attempts = 0
    while bad.any():
        attempts += 1
        if attempts > 100:
            raise DegenerateSampleError("could not avoid coordinate collisions")
        idx = np.flatnonzero(bad)
        log.warning("coordinate collision in %d of %d samples (n=%d); redrawing", len(idx), reps, n)
        pts[idx] = sample_points(sp, n, rng, reps=len(idx))
        bad = _has_collision(pts)
    return _points_to_perms(pts)


def sample_permutation(sp: PermutonSpec, n: int, seed: int, return_points: bool = False):
    rng = np.random.default_rng(seed)
    attempt = 0
    while True:
        pts = sample_points(sp, n, rng)
        try:
            sigma = perm_from_points(pts)
            break
        except DegenerateSampleError:
            attempt += 1
            log.warning("coordinate collision while sampling n=%d (attempt %d); perturbing stream", n, attempt)
            rng = np.random.default_rng([seed, attempt])
    return (sigma, pts) if return_points else sigma


# ---------------------------------------------------------------------------
# exact LIS~


@dataclass(frozen=True)
class _Piece:
    x1: Fraction
    y1: Fraction
    x2: Fraction
    y2: Fraction
    mass: Fraction

    def y_at(self, x):
        return self.y1 + (x - self.x1) * (self.y2 - self.y1) / (self.x2 - self.x1)

    def x_at(self, y):
        return self.x1 + (y - self.y1) * (self.x2 - self.x1) / (self.y2 - self.y1)

    def split(self, xs) -> list["_Piece"]:
        cuts = sorted({x for x in xs if self.x1 < x < self.x2})
        if not cuts:
            return [self]
        pts = [self.x1, *cuts, self.x2]
        width = self.x2 - self.x1
        return [_Piece(a, self.y_at(a), b, self.y_at(b), self.mass * (b - a) / width)
                for a, b in zip(pts, pts[1:])]


def _cuts_from(p: _Piece, q: _Piece) -> set:
    """x-coordinates at which ``p`` should be cut because of ``q``."""
    out = {q.x1, q.x2}
    for y in (q.y1, q.y2):
        if p.y1 < y < p.y2:
            out.add(p.x_at(y))
    # transversal crossing
    lo, hi = max(p.x1, q.x1), min(p.x2, q.x2)
    if lo < hi:
        d_lo = p.y_at(lo) - q.y_at(lo)
        d_hi = p.y_at(hi) - q.y_at(hi)
        if d_lo * d_hi < 0:
            out.add(lo + (hi - lo) * d_lo / (d_lo - d_hi))
    return out


def _relation(p: _Piece, q: _Piece) -> str:
    """'before', 'after', 'apart', 'aligned' or 'conflict'."""
    if p.x2 <= q.x1 and p.y2 <= q.y1:
        return "before"
    if q.x2 <= p.x1 and q.y2 <= p.y1:
        return "after"
    x_apart = p.x2 <= q.x1 or q.x2 <= p.x1
    y_apart = p.y2 <= q.y1 or q.y2 <= p.y1
    if x_apart and y_apart:
        return "apart"
    if (p.x1, p.x2) == (q.x1, q.x2) and y_apart:
        return "aligned"
    if (p.y1, p.y2) == (q.y1, q.y2) and x_apart:
        return "aligned"
    return "conflict"


MAX_REFINE_ROUNDS = 12
MAX_PIECES = 4000


def _merge(pieces: Iterable[_Piece]) -> list[_Piece]:
    acc: dict[tuple, Fraction] = {}
    for p in pieces:
        key = (p.x1, p.y1, p.x2, p.y2)
        acc[key] = acc.get(key, F(0)) + p.mass
    return [_Piece(*key, m) for key, m in sorted(acc.items())]


def refine(sp: PermutonSpec) -> list[_Piece]:
    """Increasing pieces pairwise comparable, incomparable or aligned."""
    pieces = _merge(_Piece(c.x1, c.y1, c.x2, c.y2, c.mass) for c in sp.components if c.kind == "incr")
    for _ in range(MAX_REFINE_ROUNDS):
        bad = False
        for a in range(len(pieces)):
            for b in range(a + 1, len(pieces)):
                if _relation(pieces[a], pieces[b]) == "conflict":
                    bad = True
                    break
            if bad:
                break
        if not bad:
            return pieces
        new = []
        for p in pieces:
            xs = set()
            for q in pieces:
                if q is not p and _relation(p, q) == "conflict":
                    xs |= _cuts_from(p, q)
            new.extend(p.split(xs))
        pieces = _merge(new)
        if len(pieces) > MAX_PIECES:
            break
    raise NotNonCrossing("increasing segments overlap in a way that does not resolve into whole chains")


def max_weight_chains(weights: Sequence[Fraction], before: Callable[[int, int], bool], k: int) -> Fraction:
    """Largest total weight of ``k`` vertex-disjoint chains in a DAG.

    ``before(a, b)`` must be a transitive relation.  Min-cost flow with each
    vertex split into an arc of capacity 1 and cost ``-weight``; augmenting
    paths are found with Bellman-Ford on the residual graph, exactly.
    """
    n = len(weights)
    if n == 0 or k <= 0:
        return F(0)
    src, snk = 2 * n, 2 * n + 1
    graph: list[list[int]] = [[] for _ in range(2 * n + 2)]
    to, cap, cost = [], [], []

    def add(u, v, c):
        graph[u].append(len(to)); to.append(v); cap.append(1); cost.append(c)
        graph[v].append(len(to)); to.append(u); cap.append(0); cost.append(-c)

    for v in range(n):
        add(src, 2 * v, F(0))
        add(2 * v, 2 * v + 1, -F(weights[v]))
        add(2 * v + 1, snk, F(0))
    for a in range(n):
        for b in range(n):
            if a != b and before(a, b):
                add(2 * a + 1, 2 * b, F(0))
    total = F(0)
    for _ in range(min(k, n)):
        dist: list = [None] * (2 * n + 2)
        prev = [-1] * (2 * n + 2)
        dist[src] = F(0)
        for _round in range(2 * n + 2):
            changed = False
            for u in range(2 * n + 2):
                if dist[u] is None:
                    continue
                for e in graph[u]:
                    if cap[e] > 0:
                        nd = dist[u] + cost[e]
                        v = to[e]
                        if dist[v] is None or nd < dist[v]:
                            dist[v], prev[v] = nd, e
                            changed = True
            if not changed:
                break
        if dist[snk] is None or dist[snk] >= 0:
            break
        total -= dist[snk]
        v = snk
        while v != src:
            e = prev[v]
            cap[e] -= 1
            cap[e ^ 1] += 1
            v = to[e ^ 1]
    return total


def lis_tilde_exact(sp: PermutonSpec, k: int) -> Fraction:
    if k < 1:
        raise ValueError("k must be >= 1")
    pieces = refine(sp)
    return max_weight_chains(
        [p.mass for p in pieces],
        lambda a, b: _relation(pieces[a], pieces[b]) == "before",
        k,
    )


def lds_tilde_exact(sp: PermutonSpec, k: int) -> Fraction:
    return lis_tilde_exact(mirror(sp), k)


@dataclass(frozen=True)
class Estimate:
    value: float
    bound: float

    def contains(self, x, slack: float = 0.0) -> bool:
        return abs(float(x) - self.value) <= self.bound + slack


def discretize(sp: PermutonSpec, m: int) -> tuple[list[int], float, float]:
    """Word of atoms (each of mass 1/m), plus the mass rounding error."""
    if m < 10:
        raise ValueError("m must be at least 10")
    pts, rounding = [], 0.0
    for c in sp.components:
        count = max(1, round(float(c.mass) * m))
        rounding += abs(count / m - float(c.mass))
        for j in range(count):
            t = (j + 0.5) / count
            x = float(c.x1) + t * float(c.x2 - c.x1)
            if c.kind == "block":
                # a decreasing row of atoms: at most one per chain
                y = float(c.y2) - t * float(c.y2 - c.y1)
            else:
                y = float(c.y1) + t * float(c.y2 - c.y1)
            pts.append((x, y))
    pts.sort()
    ys = sorted({p[1] for p in pts})
    rank = {y: i + 1 for i, y in enumerate(ys)}
    return [rank[p[1]] for p in pts], 1.0 / m, rounding


def lis_tilde_discretized(sp: PermutonSpec, k: int, m: int = 200) -> Estimate:
    """LIS~_k from an atomic approximation.

    The bound is ``k * C / m`` (one atom lost or gained per chain and
    component) plus the mass lost to rounding atom counts.  It holds for
    non-crossing specs; across a transversal crossing a chain can zigzag
    between the two atom rows and the error, while still O(1/m), may exceed it.
    """
    word, atom, rounding = discretize(sp, m)
    if not word:
        return Estimate(0.0, 0.0)
    lis, _ = greene_invariants(word, k)
    return Estimate(lis[k - 1] * atom, k * len(sp.components) / m + rounding)


def lds_tilde_discretized(sp: PermutonSpec, k: int, m: int = 200) -> Estimate:
    return lis_tilde_discretized(mirror(sp), k, m)


# ---------------------------------------------------------------------------
# shapes and the lambda~ function


@dataclass(frozen=True)
class Shape:
    alpha: tuple
    beta: tuple

    def in_thoma_simplex(self, tol: float = 0.0) -> bool:
        mono = all(a >= b for a, b in zip(self.alpha, self.alpha[1:])) and \
            all(a >= b for a, b in zip(self.beta, self.beta[1:]))
        pos = all(a >= 0 for a in self.alpha + self.beta)
        return mono and pos and sum(self.alpha) + sum(self.beta) <= 1 + tol


def _increments(values: Sequence) -> tuple:
    prev, out = 0, []
    for v in values:
        out.append(v - prev)
        prev = v
    return tuple(out)


def sh_tilde(sp: PermutonSpec, kmax: int) -> Shape:
    lis = [lis_tilde_exact(sp, k) for k in range(1, kmax + 1)]
    lds = [lds_tilde_exact(sp, k) for k in range(1, kmax + 1)]
    return Shape(_increments(lis), _increments(lds))


class LambdaTilde:
    """``lambda~(x, y, k)``: k-th row of the shape of the restriction to [0,x]x[0,y]."""

    def __init__(self, sp: PermutonSpec, kmax: int):
        self.spec = sp
        self.kmax = kmax
        self._cache: dict = {}

    def rows(self, x, y) -> tuple:
        key = (Q(x), Q(y))
        if key not in self._cache:
            sub = restrict(self.spec, *key)
            self._cache[key] = _increments([lis_tilde_exact(sub, k) for k in range(1, self.kmax + 1)])
        return self._cache[key]

    def __call__(self, x, y, k: int) -> Fraction:
        if not 1 <= k <= self.kmax:
            raise ValueError(f"k must lie in 1..{self.kmax}")
        return self.rows(x, y)[k - 1]

    def grid(self, xs: Sequence, ys: Sequence) -> list[tuple]:
        """Rows ``(x, y, k, value)`` over a lattice."""
        out = []
        for x in xs:
            for y in ys:
                for k, v in enumerate(self.rows(x, y), start=1):
                    out.append((x, y, k, v))
        return out


def lambda_tilde(sp: PermutonSpec, kmax: int) -> LambdaTilde:
    return LambdaTilde(sp, kmax)


def antichain_width(sp: PermutonSpec) -> int:
    """Smallest r with LIS~_r equal to the total increasing mass."""
    target = sp.of_kind("incr").mass
    r = 1
    while lis_tilde_exact(sp, r) < target:
        r += 1
    return r
