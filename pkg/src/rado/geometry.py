"""Bodies, collections, predicates and union volumes.

Three body kinds are supported: axis-parallel boxes ``Q(x, r)`` (``r`` is the
half-side), Euclidean balls ``B(x, r)`` and, in the plane only, rotated
rectangles. All bodies are closed, so touching bodies intersect.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bounds import unit_ball_volume
from .errors import DimensionMismatch, InputError, KindError, ResourceLimitError

BOX = "box"
BALL = "ball"
ROTRECT = "rotrect"
KINDS = (BOX, BALL, ROTRECT)

TOL = 1e-9
MAX_CELLS = 10**8


@dataclass(frozen=True)
class Body:
    kind: str
    center: tuple[float, ...]
    radius: float
    half_extents: tuple[float, float] | None = None
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown body kind {self.kind!r}")
        center = tuple(float(x) for x in self.center)
        object.__setattr__(self, "center", center)
        if not center or not all(math.isfinite(x) for x in center):
            raise InputError(f"center must be a non-empty list of finite numbers, got {self.center}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InputError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))
        if self.kind == ROTRECT:
            if len(center) != 2:
                raise InputError("rotated rectangles only exist in dimension 2")
            if self.half_extents is None or len(self.half_extents) != 2 or min(self.half_extents) <= 0:
                raise InputError("rotated rectangles need two positive half extents")
            object.__setattr__(self, "half_extents", tuple(float(h) for h in self.half_extents))
            object.__setattr__(self, "angle", float(self.angle))
        elif self.half_extents is not None:
            raise InputError(f"half_extents only apply to {ROTRECT!r} bodies")

    @property
    def dim(self) -> int:
        return len(self.center)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "center": list(self.center), "radius": self.radius}
        if self.kind == ROTRECT:
            out["half_extents"] = list(self.half_extents)
            out["angle"] = self.angle
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Body":
        try:
            kind = data["kind"]
            if kind == ROTRECT:
                he = data["half_extents"]
                return cls(ROTRECT, tuple(data["center"]), float(data.get("radius", max(he))),
                           tuple(he), float(data.get("angle", 0.0)))
            return cls(kind, tuple(data["center"]), float(data["radius"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed body {data!r}: {exc}") from None


def box(center: Sequence[float], r: float) -> Body:
    return Body(BOX, tuple(center), r)


def ball(center: Sequence[float], r: float) -> Body:
    return Body(BALL, tuple(center), r)


def rotrect(center: Sequence[float], half_extents: Sequence[float], angle: float = 0.0) -> Body:
    a, b = half_extents
    return Body(ROTRECT, tuple(center), max(a, b), (float(a), float(b)), angle)


@dataclass(frozen=True)
class Collection:
    dimension: int
    bodies: tuple[Body, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        if self.dimension < 1:
            raise InputError("dimension must be a positive integer")
        if not self.bodies:
            raise InputError("a collection must contain at least one body")
        for i, b in enumerate(self.bodies):
            if b.dim != self.dimension:
                raise DimensionMismatch(f"body {i} has dimension {b.dim}, collection has {self.dimension}")

    def __len__(self) -> int:
        return len(self.bodies)

    def __iter__(self):
        return iter(self.bodies)

    def __getitem__(self, i):
        return self.bodies[i]

    @property
    def kinds(self) -> set[str]:
        return {b.kind for b in self.bodies}

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.bodies], dtype=float)

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.bodies], dtype=float)

    def subset(self, indices: Iterable[int], label: str | None = None) -> "Collection":
        return Collection(self.dimension, tuple(self.bodies[i] for i in indices),
                          self.label if label is None else label)

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "label": self.label,
                "bodies": [b.to_dict() for b in self.bodies]}

    @classmethod
    def from_dict(cls, data: dict) -> "Collection":
        if not isinstance(data, dict) or "bodies" not in data or "dimension" not in data:
            raise InputError("collection JSON needs 'dimension' and 'bodies'")
        if not isinstance(data["bodies"], list):
            raise InputError("'bodies' must be a list")
        return cls(int(data["dimension"]), tuple(Body.from_dict(b) for b in data["bodies"]),
                   str(data.get("label", "")))


def from_boxes(centers, radii, label: str = "") -> Collection:
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),))
    return Collection(centers.shape[1], tuple(box(c, r) for c, r in zip(centers, radii)), label)


def from_balls(centers, radii, label: str = "") -> Collection:
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),))
    return Collection(centers.shape[1], tuple(ball(c, r) for c, r in zip(centers, radii)), label)


def load_collection(path) -> Collection:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return Collection.from_dict(data)


def save_collection(c: Collection, path) -> None:
    Path(path).write_text(json.dumps(c.to_dict(), indent=1) + "\n")


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    abs_error: float = 0.0
    method: str = "exact"
    seed: int | None = None
    samples: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        out = {"value": self.value, "abs_error": self.abs_error, "method": self.method}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


# -- elementary operations -------------------------------------------------------

def volume(b: Body) -> float:
    if b.kind == BOX:
        return (2.0 * b.radius) ** b.dim
    if b.kind == BALL:
        return unit_ball_volume(b.dim) * b.radius ** b.dim
    a, c = b.half_extents
    return 4.0 * a * c


def dilate(b: Body, lam: float) -> Body:
    if not lam > 0:
        raise InputError(f"dilation factor must be positive, got {lam}")
    if b.kind == ROTRECT:
        a, c = b.half_extents
        return Body(ROTRECT, b.center, b.radius * lam, (a * lam, c * lam), b.angle)
    return Body(b.kind, b.center, b.radius * lam)


def translate(b: Body, v: Sequence[float]) -> Body:
    center = tuple(x + dx for x, dx in zip(b.center, v))
    return Body(b.kind, center, b.radius, b.half_extents, b.angle)


def _rect_frame(b: Body):
    """(center, unit axes, half extents) of a planar body viewed as a rectangle."""
    c = np.asarray(b.center)
    if b.kind == BOX:
        return c, np.eye(2), np.array([b.radius, b.radius])
    t = b.angle
    axes = np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
    return c, axes, np.asarray(b.half_extents)


def _rects_intersect(a: Body, b: Body) -> bool:
    ca, ua, ha = _rect_frame(a)
    cb, ub, hb = _rect_frame(b)
    d = cb - ca
    for axis in (*ua, *ub):
        ra = np.sum(ha * np.abs(ua @ axis))
        rb = np.sum(hb * np.abs(ub @ axis))
        if abs(d @ axis) > ra + rb + TOL:
            return False
    return True


def _rect_ball_intersect(r: Body, b: Body) -> bool:
    c, u, h = _rect_frame(r)
    local = u @ (np.asarray(b.center) - c)
    nearest = np.clip(local, -h, h)
    return float(np.linalg.norm(local - nearest)) <= b.radius + TOL


def intersects(a: Body, b: Body) -> bool:
    """True iff the closed bodies share a point (touching counts)."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot intersect bodies of dimension {a.dim} and {b.dim}")
    ka, kb = a.kind, b.kind
    ca, cb = np.asarray(a.center), np.asarray(b.center)
    if ka == BOX and kb == BOX:
        return bool(np.all(np.abs(ca - cb) <= a.radius + b.radius + TOL))
    if ka == BALL and kb == BALL:
        return float(np.linalg.norm(ca - cb)) <= a.radius + b.radius + TOL
    if {ka, kb} == {BOX, BALL}:
        bx, bl = (a, b) if ka == BOX else (b, a)
        cx, cl = np.asarray(bx.center), np.asarray(bl.center)
        nearest = np.clip(cl, cx - bx.radius, cx + bx.radius)
        return float(np.linalg.norm(cl - nearest)) <= bl.radius + TOL
    if ka == BALL:
        return _rect_ball_intersect(b, a)
    if kb == BALL:
        return _rect_ball_intersect(a, b)
    return _rects_intersect(a, b)


def adjacency_matrix(c: Collection) -> np.ndarray:
    """Symmetric boolean intersection matrix with a False diagonal."""
    n = len(c)
    kinds = c.kinds
    if kinds == {BOX}:
        x, r = c.centers, c.radii
        gap = np.abs(x[:, None, :] - x[None, :, :])
        adj = np.all(gap <= (r[:, None] + r[None, :])[..., None] + TOL, axis=-1)
    elif kinds == {BALL}:
        x, r = c.centers, c.radii
        dist = np.sqrt(np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1))
        adj = dist <= r[:, None] + r[None, :] + TOL
    else:
        adj = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                adj[i, j] = adj[j, i] = intersects(c.bodies[i], c.bodies[j])
    np.fill_diagonal(adj, False)
    return adj


def contains_point(b: Body, p: Sequence[float]) -> bool:
    p = np.asarray(p, dtype=float)
    if b.kind == BOX:
        return bool(np.all(np.abs(p - b.center) <= b.radius + TOL))
    if b.kind == BALL:
        return float(np.linalg.norm(p - b.center)) <= b.radius + TOL
    c, u, h = _rect_frame(b)
    return bool(np.all(np.abs(u @ (p - c)) <= h + TOL))


def diameter(c: Collection) -> float:
    if c.kinds != {BALL}:
        raise KindError("diameter is defined here for collections of balls only")
    r = c.radii
    if np.ptp(r) > TOL * r.max():
        raise KindError("diameter needs balls of equal radius")
    x = c.centers
    far = np.sqrt(np.max(np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)))
    return float(far + 2.0 * r[0])


# -- union volumes -------------------------------------------------------------

def union_volume_boxes(c: Collection, max_cells: int = MAX_CELLS) -> VolumeEstimate:
    """Exact union volume of axis-parallel boxes on the compressed face grid.

    Coverage counts come from a d-dimensional difference array (one +-1 per box
    corner) followed by prefix sums along each axis.
    """
    if c.kinds != {BOX}:
        raise KindError("union_volume_boxes needs a collection of axis-parallel boxes")
    x, r = c.centers, c.radii[:, None]
    lo, hi = x - r, x + r
    d = c.dimension
    coords = [np.unique(np.concatenate([lo[:, a], hi[:, a]])) for a in range(d)]
    cells = math.prod(len(g) - 1 for g in coords)
    if cells > max_cells:
        raise ResourceLimitError(f"union grid needs {cells} cells (cap {max_cells}); use union_volume_mc")
    lo_idx = [np.searchsorted(coords[a], lo[:, a]) for a in range(d)]
    hi_idx = [np.searchsorted(coords[a], hi[:, a]) for a in range(d)]
    diff = np.zeros([len(g) for g in coords], dtype=np.int32)
    for corner in range(2 ** d):
        idx, sign = [], 1
        for a in range(d):
            if corner >> a & 1:
                idx.append(hi_idx[a])
                sign = -sign
            else:
                idx.append(lo_idx[a])
        np.add.at(diff, tuple(idx), sign)
    for a in range(d):
        np.cumsum(diff, axis=a, out=diff)
    covered = (diff[tuple(slice(0, -1) for _ in range(d))] > 0).astype(float)
    total = covered
    for a in range(d):
        # contract the leading axis with that axis' cell widths
        total = np.tensordot(np.diff(coords[a]), total, axes=(0, 0))
    return VolumeEstimate(float(total), 0.0, "exact")


def _coverage(c: Collection, pts: np.ndarray) -> np.ndarray:
    """Number of bodies containing each point."""
    count = np.zeros(len(pts), dtype=np.int32)
    for b in c.bodies:
        if b.kind == BOX:
            count += np.all(np.abs(pts - b.center) <= b.radius, axis=1)
        elif b.kind == BALL:
            diff = pts - b.center
            count += np.einsum("ij,ij->i", diff, diff) <= b.radius * b.radius
        else:
            cb, u, h = _rect_frame(b)
            count += np.all(np.abs((pts - cb) @ u.T) <= h, axis=1)
    return count


def _sample_in(b: Body, m: int, rng: np.random.Generator) -> np.ndarray:
    d = b.dim
    if b.kind == BOX:
        return np.asarray(b.center) + b.radius * rng.uniform(-1.0, 1.0, (m, d))
    if b.kind == BALL:
        g = rng.standard_normal((m, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return np.asarray(b.center) + b.radius * g * rng.random((m, 1)) ** (1.0 / d)
    cb, u, h = _rect_frame(b)
    return cb + (h * rng.uniform(-1.0, 1.0, (m, 2))) @ u


def _bounding_box(c: Collection):
    lows, highs = [], []
    for b in c.bodies:
        x = np.asarray(b.center)
        if b.kind == ROTRECT:
            a, h = b.half_extents
            ct, st = abs(math.cos(b.angle)), abs(math.sin(b.angle))
            ext = np.array([a * ct + h * st, a * st + h * ct])
        else:
            ext = np.full(len(x), b.radius)
        lows.append(x - ext)
        highs.append(x + ext)
    return np.min(lows, axis=0), np.max(highs, axis=0)


def union_volume_mc(c: Collection, rel_tol: float = 0.01, confidence: float = 0.99, seed: int = 0,
                    pilot: int = 20_000, max_samples: int = 20_000_000, chunk: int = 1 << 17) -> VolumeEstimate:
    """Monte Carlo union volume with a Hoeffding error bar.

    Two unbiased estimators are available and the one with the smaller range
    ``V`` is used:

    * bounding box: uniform points in the box, ``V_box * [covered]``, range ``V_box``;
    * Karp-Luby: a body picked with probability proportional to its volume, a
      uniform point inside it, ``S / count`` with ``S`` the summed volume, range
      ``S (1 - 1/N)``.

    A pilot run estimates ``q = union / V``; the main run then uses
    ``n = log(2/(1-confidence)) / (2 (rel_tol q)^2)`` fresh points, so
    ``abs_error = V sqrt(log(2/(1-confidence)) / (2n))`` holds at the stated confidence.
    """
    if not 0 < rel_tol < 1 or not 0 < confidence < 1:
        raise InputError("rel_tol and confidence must lie in (0, 1)")
    if len(c) == 1:
        return VolumeEstimate(volume(c.bodies[0]), 0.0, "exact")
    vols = np.array([volume(b) for b in c.bodies])
    total = float(vols.sum())
    lo, hi = _bounding_box(c)
    vbox = float(np.prod(hi - lo))
    span = total * (1.0 - 1.0 / len(c))
    use_box = vbox <= span
    scale = vbox if use_box else span
    rng = np.random.default_rng(seed)

    def draw(m):
        # chunk sum of the estimator, in units of its range
        if use_box:
            pts = lo + (hi - lo) * rng.random((m, len(lo)))
            return np.count_nonzero(_coverage(c, pts)) * vbox / scale
        per_body = rng.multinomial(m, vols / total)
        pts = np.concatenate([_sample_in(b, k, rng) for b, k in zip(c.bodies, per_body) if k])
        return float(np.sum(total / np.maximum(_coverage(c, pts), 1))) / scale

    def mean(n):
        acc, left = 0.0, n
        while left > 0:
            m = min(left, chunk)
            acc += draw(m)
            left -= m
        return acc / n

    log_term = math.log(2.0 / (1.0 - confidence))
    q_pilot = max(mean(pilot), 1.0 / pilot)
    n = int(math.ceil(log_term / (2.0 * (rel_tol * q_pilot) ** 2)))
    n = max(min(n, max_samples), 1000)
    estimate = scale * mean(n)
    abs_error = scale * math.sqrt(log_term / (2.0 * n))
    return VolumeEstimate(estimate, abs_error, "monte_carlo", seed, n)


def is_exact_union_case(c: Collection) -> bool:
    # one-dimensional balls are intervals
    return c.kinds == {BOX} or (c.dimension == 1 and ROTRECT not in c.kinds)


@functools.lru_cache(maxsize=512)
def union_volume(c: Collection, rel_tol: float = 0.005, confidence: float = 0.99, seed: int = 0) -> VolumeEstimate:
    """Union volume used for densities: exact for boxes (and 1-D), Monte Carlo otherwise
    or when the exact grid would exceed its cell cap."""
    if is_exact_union_case(c):
        boxes = c if c.kinds == {BOX} else Collection(1, tuple(box(b.center, b.radius) for b in c.bodies), c.label)
        try:
            return union_volume_boxes(boxes)
        except ResourceLimitError:
            pass
    return union_volume_mc(c, rel_tol=rel_tol, confidence=confidence, seed=seed)
