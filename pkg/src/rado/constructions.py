"""Extremal families, the 52-square almost-counterexample and its verifier."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .errors import InputError, KindError
from .geometry import (BALL, BOX, TOL, Collection, adjacency_matrix, box, from_balls,
                       from_boxes, rotrect, union_volume, volume)
from .oracle import OracleResult, max_disjoint_volume

Rect = tuple[float, float, float, float]


# -- simple families ---------------------------------------------------------------

def four_squares() -> Collection:
    """The quadrant squares of [-1, 1]^2; all four share the origin."""
    centers = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)]
    return from_boxes(centers, 0.5, "four-squares R=-1,-1,1,1")


def _uniform_in_ball(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius * rng.random((n, 1)) ** (1.0 / d)


def translate_net(kind: str, d: int, n: int, seed: int = 0) -> Collection:
    """``n`` unit translates of K whose centres lie in K, so each contains the origin."""
    if n < 1 or d < 1:
        raise InputError("need n >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    if kind == BOX:
        return from_boxes(rng.uniform(-1.0, 1.0, (n, d)), 1.0, f"translate-net box d={d}")
    if kind == BALL:
        return from_balls(_uniform_in_ball(rng, n, d, 1.0), 1.0, f"translate-net ball d={d}")
    raise KindError(f"translate_net supports {BOX!r} and {BALL!r}, got {kind!r}")


def pinwheel(n: int) -> Collection:
    """``n`` rectangles 1 x 1/n through the origin at angles k*pi/n."""
    if n < 1:
        raise InputError("n must be >= 1")
    bodies = tuple(rotrect((0.0, 0.0), (0.5, 0.5 / n), k * math.pi / n) for k in range(n))
    return Collection(2, bodies, f"pinwheel n={n}")


def ball_net(d: int, R: float, n: int, seed: int = 0) -> Collection:
    """``n`` unit balls with centres uniform in the radius-``R`` ball (``R = 0`` stacks them)."""
    if n < 1 or d < 1 or R < 0:
        raise InputError("need n >= 1, d >= 1 and R >= 0")
    rng = np.random.default_rng(seed)
    return from_balls(_uniform_in_ball(rng, n, d, R), 1.0, f"ball-net d={d} R={R}")


def pairwise_intersecting_balls(d: int, n: int, seed: int = 0, attempts: int = 10_000) -> Collection:
    """Unit balls with pairwise centre distance <= 2, grown by rejection from a radius-2 ball."""
    rng = np.random.default_rng(seed)
    kept = [np.zeros(d)]
    for _ in range(attempts):
        if len(kept) >= n:
            break
        p = _uniform_in_ball(rng, 1, d, 2.0)[0]
        if all(np.linalg.norm(p - q) <= 2.0 for q in kept):
            kept.append(p)
    return from_balls(np.array(kept), 1.0, f"pairwise-intersecting d={d}")


def midpoint_triple(d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random x1, x2, x with |x1 - x2| > 2*sqrt(3) and x within 2 of both."""
    while True:
        gap = rng.uniform(2.0 * math.sqrt(3.0), 4.0)
        if gap <= 2.0 * math.sqrt(3.0):
            continue
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        x1 = rng.uniform(-5.0, 5.0, d)
        x2 = x1 + gap * u
        cand = 0.5 * (x1 + x2) + _uniform_in_ball(rng, 4096, d, 2.0)
        ok = (np.linalg.norm(cand - x1, axis=1) <= 2.0) & (np.linalg.norm(cand - x2, axis=1) <= 2.0)
        if ok.any():
            return x1, x2, cand[int(np.argmax(ok))]


# -- the almost-counterexample ---------------------------------------------------------

def rect_from_label(label: str) -> Rect:
    for token in label.split():
        if token.startswith("R="):
            try:
                x0, y0, x1, y1 = (float(v) for v in token[2:].split(","))
            except ValueError:
                break
            return x0, y0, x1, y1
    raise InputError(f"no enclosing rectangle 'R=x0,y0,x1,y1' in label {label!r}")


def ajtai_almost_counterexample() -> Collection:
    """The shipped 52-square configuration in [0,14] x [0,6]."""
    try:
        text = resources.files("rado").joinpath("data/ajtai52.json").read_text()
        c = Collection.from_dict(json.loads(text))
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        raise InputError(f"almost-counterexample data unavailable: {exc}") from None
    if len(c) != 52 or c.kinds != {BOX} or c.dimension != 2:
        raise InputError("almost-counterexample data is malformed")
    rect_from_label(c.label)
    return c


@dataclass(frozen=True)
class AjtaiReport:
    total_area: float
    best_unconstrained: OracleResult
    best_constrained: OracleResult
    property1_holds: bool
    property2_holds: bool
    bottom_row_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "total_area": self.total_area,
            "best_unconstrained": self.best_unconstrained.to_dict(),
            "best_constrained": self.best_constrained.to_dict(),
            "property1_holds": self.property1_holds,
            "property2_holds": self.property2_holds,
            "bottom_row_indices": list(self.bottom_row_indices),
        }


def _check_squares_in(c: Collection, rect: Rect) -> None:
    if c.dimension != 2 or c.kinds != {BOX}:
        raise KindError("expected axis-parallel squares in the plane")
    x0, y0, x1, y1 = rect
    lo = c.centers - c.radii[:, None]
    hi = c.centers + c.radii[:, None]
    if (lo[:, 0] < x0 - TOL).any() or (lo[:, 1] < y0 - TOL).any() \
            or (hi[:, 0] > x1 + TOL).any() or (hi[:, 1] > y1 + TOL).any():
        raise InputError(f"some squares leave the rectangle {rect}")


def verify_almost_counterexample(c: Collection, rect: Rect | None = None) -> AjtaiReport:
    """Check both defining properties with the exact oracle.

    Property 1: no disjoint subfamily covers more than a quarter of the total area.
    Property 2: once the squares on the floor of ``rect`` are excluded, a disjoint
    subfamily covers strictly less than a quarter.
    """
    rect = rect_from_label(c.label) if rect is None else tuple(float(v) for v in rect)
    _check_squares_in(c, rect)
    bottom = tuple(int(i) for i in np.flatnonzero(np.abs(c.centers[:, 1] - c.radii - rect[1]) <= TOL))
    free = max_disjoint_volume(c)
    constrained = max_disjoint_volume(c, forbidden=bottom)
    total = free.union_volume.value
    tol = 1e-9 * total
    return AjtaiReport(
        total_area=total,
        best_unconstrained=free,
        best_constrained=constrained,
        property1_holds=free.selected_volume <= total / 4 + tol,
        property2_holds=constrained.selected_volume < total / 4 - tol,
        bottom_row_indices=bottom,
    )


# -- composition ------------------------------------------------------------------------

@dataclass(frozen=True)
class Placement:
    """Map p -> scale * rot^quarter_turns(p) + shift."""
    quarter_turns: int
    scale: float
    shift: tuple[float, float]

    def apply(self, p: np.ndarray) -> np.ndarray:
        rot = np.linalg.matrix_power(np.array([[0.0, -1.0], [1.0, 0.0]]), self.quarter_turns % 4)
        return self.scale * p @ rot.T + np.asarray(self.shift)


# unit square centre and the outward normal of the side that receives a copy
_SLOTS = (((-0.5, 0.5), (0, 1)), ((0.5, 0.5), (1, 0)), ((0.5, -0.5), (0, -1)), ((-0.5, -0.5), (-1, 0)))


def _slot_rect(centre, normal, depth: float) -> Rect:
    cx, cy = centre
    nx, ny = normal
    mid = (cx + nx * (0.5 + depth / 2), cy + ny * (0.5 + depth / 2))
    hx, hy = (0.5, depth / 2) if nx == 0 else (depth / 2, 0.5)
    return mid[0] - hx, mid[1] - hy, mid[0] + hx, mid[1] + hy


def default_placement(rect: Rect) -> list[Placement]:
    """Pinwheel layout: one copy on an outer side of each quadrant square, floor facing it."""
    x0, y0, x1, y1 = rect
    s = 1.0 / (x1 - x0)
    middle = np.array([(x0 + x1) / 2, (y0 + y1) / 2])
    out = []
    for centre, normal in _SLOTS:
        k = next(k for k in range(4)
                 if np.allclose(Placement(k, 1.0, (0, 0)).apply(np.array([0.0, -1.0])), -np.array(normal)))
        sx0, sy0, sx1, sy1 = _slot_rect(centre, normal, s * (y1 - y0))
        target = np.array([(sx0 + sx1) / 2, (sy0 + sy1) / 2])
        shift = target - Placement(k, s, (0, 0)).apply(middle)
        out.append(Placement(k, s, (float(shift[0]), float(shift[1]))))
    return out


def compose_ajtai(a: Collection, placement: Sequence[Placement] | None = None) -> Collection:
    """Quadrant squares of [-1,1]^2 plus four transformed copies of ``a``."""
    rect = rect_from_label(a.label)
    _check_squares_in(a, rect)
    placement = default_placement(rect) if placement is None else list(placement)
    if len(placement) != 4:
        raise InputError("need exactly four placements")
    depth = (rect[3] - rect[1]) / (rect[2] - rect[0])
    slots = [_slot_rect(c, n, depth) for c, n in _SLOTS]
    corners = np.array([[rect[0], rect[1]], [rect[2], rect[3]]])
    bodies = list(four_squares().bodies)
    used = set()
    for t in placement:
        if int(t.quarter_turns) != t.quarter_turns or t.scale <= 0:
            raise InputError("placements must be quarter turns with positive scale")
        img = t.apply(corners)
        lo, hi = img.min(axis=0), img.max(axis=0)
        slot = next((k for k, (sx0, sy0, sx1, sy1) in enumerate(slots)
                     if lo[0] >= sx0 - TOL and lo[1] >= sy0 - TOL and hi[0] <= sx1 + TOL and hi[1] <= sy1 + TOL), None)
        if slot is None or slot in used:
            raise InputError(f"copy placed at {lo.tolist()}..{hi.tolist()} does not fill a free slot")
        used.add(slot)
        centres = t.apply(a.centers)
        bodies.extend(box(p, t.scale * r) for p, r in zip(centres, a.radii))
    return Collection(2, tuple(bodies), "ajtai-composed R=-1,-1,1,1")


def random_maximal_densities(c: Collection, trials: int, seed: int = 0, batch: int = 5000) -> np.ndarray:
    """Densities of ``trials`` maximal disjoint subfamilies, each built greedily in a random order."""
    adj = adjacency_matrix(c)
    np.fill_diagonal(adj, True)
    w = np.array([volume(b) for b in c.bodies])
    union = union_volume(c).value
    rng = np.random.default_rng(seed)
    n = len(c)
    out = []
    for start in range(0, trials, batch):
        m = min(batch, trials - start)
        order = np.argsort(rng.random((m, n)), axis=1)
        alive = np.ones((m, n), dtype=bool)
        total = np.zeros(m)
        rows = np.arange(m)
        for step in range(n):
            v = order[:, step]
            take = alive[rows, v]
            total += np.where(take, w[v], 0.0)
            alive[take] &= ~adj[v[take]]
        out.append(total / union)
    return np.concatenate(out)
