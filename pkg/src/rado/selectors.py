"""Constructive selection procedures with certified density guarantees.

Every selector returns a :class:`SelectionResult` that has already been
re-checked: the chosen bodies are pairwise disjoint (via ``intersects``) and
their density is at least the guarantee of the theorem the procedure
realises. A failed re-check raises :class:`CertificateError`.

Tie-breaking is always toward the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CertificateError, InputError, KindError
from .geometry import (BALL, BOX, TOL, Collection, VolumeEstimate, adjacency_matrix, box,
                       from_boxes, intersects, union_volume, union_volume_boxes, volume)


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple[int, ...]
    selected_volume: float
    union_volume: VolumeEstimate
    density: float
    guarantee: float
    algorithm: str
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "chosen": list(self.chosen),
            "selected_volume": self.selected_volume,
            "union_volume": self.union_volume.to_dict(),
            "density": self.density,
            "guarantee": self.guarantee,
            "certificate": {"disjoint": True, "density_ge_guarantee": True},
            "details": self.details,
        }


@dataclass(frozen=True)
class LatticeSpec:
    spacing: float
    translate: tuple[float, ...]

    def __post_init__(self):
        if not self.spacing > 0:
            raise InputError("lattice spacing must be positive")


@dataclass(frozen=True)
class MultiscaleParams:
    base_scale: float
    residue_classes: int
    inflation: float
    congruent_selector: str = "nordlander"
    eps: float = 0.01
    fill: bool = True  # greedily add leftover bodies that miss the selection

    def __post_init__(self):
        if not self.base_scale > 1:
            raise InputError("base_scale must exceed 1")
        if self.residue_classes < 1:
            raise InputError("residue_classes must be >= 1")
        if not self.inflation >= 1:
            raise InputError("inflation must be >= 1")

    @classmethod
    def default(cls, d: int, **overrides) -> "MultiscaleParams":
        params = dict(
            base_scale=1.0 + 1.0 / d,
            residue_classes=max(1, math.ceil(d * math.log(d))) if d > 1 else 1,
            inflation=1.0 + 2.0 / d,
        )
        params.update(overrides)
        return cls(**params)


# -- helpers -----------------------------------------------------------------------

def check_disjoint(c: Collection, chosen: Sequence[int]) -> None:
    for a in range(len(chosen)):
        for b in range(a + 1, len(chosen)):
            if intersects(c.bodies[chosen[a]], c.bodies[chosen[b]]):
                raise CertificateError(f"selected bodies {chosen[a]} and {chosen[b]} intersect")


def certify(c: Collection, chosen: Sequence[int], guarantee: float, algorithm: str,
            details: dict | None = None) -> SelectionResult:
    chosen = tuple(sorted(int(i) for i in chosen))
    if len(set(chosen)) != len(chosen):
        raise CertificateError(f"{algorithm}: duplicate indices in selection")
    check_disjoint(c, chosen)
    selected = float(sum(volume(c.bodies[i]) for i in chosen))
    union = union_volume(c)
    density = selected / union.value
    if density < guarantee - TOL:
        raise CertificateError(f"{algorithm}: density {density:.6g} below guarantee {guarantee:.6g}")
    return SelectionResult(chosen, selected, union, density, guarantee, algorithm, details or {})


def _require_homothets(c: Collection, kinds=(BOX, BALL)) -> str:
    if len(c.kinds) != 1 or next(iter(c.kinds)) not in kinds:
        raise KindError(f"need a collection of a single kind among {kinds}, got {sorted(c.kinds)}")
    return next(iter(c.kinds))


def _require_congruent(c: Collection, kinds=(BOX, BALL)) -> float:
    _require_homothets(c, kinds)
    r = c.radii
    if np.ptp(r) > TOL * r.max():
        raise KindError("need congruent bodies (equal radii)")
    return float(r[0])


def _box_bounds(c: Collection):
    x, r = c.centers, c.radii[:, None]
    return x - r, x + r


def _cyclic_midpoints(values: np.ndarray, period: float) -> np.ndarray:
    """Midpoints between consecutive residues of ``values`` modulo ``period`` (cyclically)."""
    res = np.unique(np.mod(values, period))
    if len(res) == 1:
        return np.array([np.mod(res[0] + period / 2.0, period)])
    mids = 0.5 * (res[:-1] + res[1:])
    wrap = np.mod(0.5 * (res[-1] + res[0] + period), period)
    return np.append(mids, wrap)


# -- greedy family -------------------------------------------------------------------

def _greedy(adj: np.ndarray, order: Sequence[int]) -> list[int]:
    alive = np.ones(len(adj), dtype=bool)
    chosen = []
    for i in order:
        if alive[i]:
            chosen.append(int(i))
            alive &= ~adj[i]
            alive[i] = False
    return chosen


def select_vitali_greedy(c: Collection) -> SelectionResult:
    """Repeatedly pick a largest remaining body and discard everything meeting it."""
    _require_homothets(c)
    order = sorted(range(len(c)), key=lambda i: (-c.bodies[i].radius, i))
    chosen = _greedy(adjacency_matrix(c), order)
    return certify(c, chosen, 3.0 ** -c.dimension, "greedy", {"order": chosen})


def select_boundary_sweep(c: Collection) -> SelectionResult:
    """Greedy over congruent bodies taken in order of their first center coordinate.

    The body with the smallest first coordinate has a supporting hyperplane
    leaving the rest of the collection on one side.
    """
    _require_congruent(c)
    x = c.centers
    keys = [tuple(x[i, :2]) + (i,) for i in range(len(c))]
    order = sorted(range(len(c)), key=lambda i: keys[i])
    chosen = _greedy(adjacency_matrix(c), order)
    d = c.dimension
    return certify(c, chosen, 1.0 / (3.0 ** d - 2.0 ** (d - 1)), "sweep", {"order": chosen})


# -- one dimension --------------------------------------------------------------------

def rado_interval_indices(lo: np.ndarray, hi: np.ndarray) -> tuple[list[int], dict]:
    """Two-class parity selection on closed intervals ``[lo_i, hi_i]``; returns indices.

    Coverage is tracked on the elementary pieces of the line (each face
    coordinate as a point, and each open gap between consecutive ones), so an
    interval is covered by the others iff every piece it spans has count >= 2.
    Face coordinates closer than ``TOL`` are merged, matching the touch rule.
    """
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    raw = np.unique(np.concatenate([lo, hi]))
    cluster = np.concatenate([[0], np.cumsum(np.diff(raw) > TOL)])
    coords = raw[np.concatenate([[True], np.diff(cluster) > 0])]
    first = 2 * cluster[np.searchsorted(raw, lo)]
    last = 2 * cluster[np.searchsorted(raw, hi)]
    count = np.zeros(2 * len(coords) - 1, dtype=int)
    for a, b in zip(first, last):
        count[a:b + 1] += 1
    keep, removed = [], []
    for i in range(len(lo)):
        if count[first[i]:last[i] + 1].min() >= 2:
            count[first[i]:last[i] + 1] -= 1
            removed.append(i)
        else:
            keep.append(i)

    def witness(i):
        span = count[first[i]:last[i] + 1]
        own = np.flatnonzero(span == 1) + first[i]
        # prefer an open piece: a point strictly inside an uncovered gap
        pieces = own[own % 2 == 1]
        e = int(pieces[0] if len(pieces) else own[0])
        return coords[e // 2] if e % 2 == 0 else 0.5 * (coords[e // 2] + coords[e // 2 + 1])

    xi = {i: float(witness(i)) for i in keep}
    ordered = sorted(keep, key=lambda i: (xi[i], i))
    even, odd = ordered[0::2], ordered[1::2]
    length = lambda idx: float(sum(hi[i] - lo[i] for i in idx))
    pick = even if length(even) >= length(odd) else odd
    return sorted(pick), {"removed": removed, "witness_order": ordered}


def select_rado_intervals(c: Collection) -> SelectionResult:
    """Sharp one-dimensional selection: drop covered intervals, order by private
    witness points, return the heavier of the even and odd classes."""
    if c.dimension != 1:
        raise KindError("select_rado_intervals needs a one-dimensional collection")
    _require_homothets(c)
    lo, hi = _box_bounds(c)
    chosen, info = rado_interval_indices(lo[:, 0], hi[:, 0])
    return certify(c, chosen, 0.5, "rado1d", info)


# -- congruent cubes -----------------------------------------------------------------

def _pack_bits(member: np.ndarray) -> np.ndarray:
    """Pack a boolean array (..., n) into uint64 words (..., ceil(n/64))."""
    n = member.shape[-1]
    words = -(-n // 64)
    padded = np.zeros(member.shape[:-1] + (words * 64,), dtype=np.uint64)
    padded[..., :n] = member
    shifts = np.arange(64, dtype=np.uint64)
    padded = padded.reshape(member.shape[:-1] + (words, 64)) << shifts
    return np.bitwise_or.reduce(padded, axis=-1)


def blichfeldt_translate(c: Collection, spacing: float) -> tuple[LatticeSpec, int, float]:
    """Translate of ``spacing * Z^d`` that hits the union of boxes in the most points.

    The hit count is piecewise constant in the translate, with breakpoints at
    face coordinates modulo ``spacing``; one midpoint per piece and axis is
    therefore enough to attain the maximum, which is at least the average
    ``|E| / spacing^d``.
    """
    lo, hi = _box_bounds(c)
    d = c.dimension
    per_axis = []
    for a in range(d):
        cand = _cyclic_midpoints(np.concatenate([lo[:, a], hi[:, a]]), spacing)
        kmin = math.floor(lo[:, a].min() / spacing) - 1
        kmax = math.ceil(hi[:, a].max() / spacing) + 1
        ks = np.arange(kmin, kmax + 1)
        pts = cand[:, None] + ks[None, :] * spacing  # (M, K)
        inside = (lo[None, None, :, a] <= pts[..., None]) & (pts[..., None] <= hi[None, None, :, a])
        per_axis.append((cand, ks, _pack_bits(inside)))  # bits: (M, K, W)

    # counts[t_0, ..., t_{d-1}] = number of lattice points inside the union
    def count_from(prefix, axis):
        cand, ks, bits = per_axis[axis]
        masked = bits & prefix  # (M, K, W)
        if axis == d - 1:
            return np.count_nonzero(np.any(masked != 0, axis=-1), axis=-1)
        if axis == d - 2:
            last = per_axis[d - 1][2]
            both = masked[:, :, None, None, :] & last[None, None, :, :, :]
            return np.count_nonzero(np.any(both != 0, axis=-1), axis=(1, 3))
        shape = [len(per_axis[x][0]) for x in range(axis, d)]
        out = np.zeros(shape, dtype=int)
        for t in range(len(cand)):
            for k in range(len(ks)):
                if masked[t, k].any():
                    out[t] += count_from(masked[t, k], axis + 1)
        return out

    words = per_axis[0][2].shape[-1]
    all_bits = np.full(words, np.iinfo(np.uint64).max, dtype=np.uint64)
    counts = count_from(all_bits, 0)
    flat = int(np.argmax(counts))
    best = np.unravel_index(flat, counts.shape)
    translate = tuple(float(per_axis[a][0][best[a]]) for a in range(d))
    union = union_volume_boxes(c).value
    return LatticeSpec(spacing, translate), int(counts[best]), union / spacing ** d


def select_blichfeldt(c: Collection, eps: float = 0.01) -> SelectionResult:
    """Lattice selection for congruent cubes.

    The lattice spacing is ``(2 + eps)`` times the side length, so cubes
    holding distinct lattice points are disjoint; one cube per covered
    lattice point is kept.
    """
    if not eps > 0:
        raise InputError("eps must be positive")
    r = _require_congruent(c, (BOX,))
    side = 2.0 * r
    spacing = (2.0 + eps) * side
    lattice, count, average = blichfeldt_translate(c, spacing)
    lo, hi = _box_bounds(c)
    t = np.asarray(lattice.translate)
    # lattice points inside each box: at most one per box since side < spacing
    kmin = np.ceil((lo - t) / spacing - 1e-12)
    pts = t + kmin * spacing
    inside = np.all(pts <= hi + 1e-12, axis=1)
    seen: dict[tuple, int] = {}
    for i in np.flatnonzero(inside):
        key = tuple(int(k) for k in kmin[i])
        seen.setdefault(key, int(i))
    chosen = sorted(seen.values())
    if len(chosen) != count:
        raise CertificateError(f"blichfeldt: {len(chosen)} lattice hits, expected {count}")
    details = {"spacing": spacing, "translate": list(lattice.translate), "lattice_points": count,
               "average_points": average}
    return certify(c, chosen, (2.0 + eps) ** -c.dimension, "blichfeldt", details)


def _nordlander(lo: np.ndarray, hi: np.ndarray, side: float) -> list[int]:
    n, d = lo.shape
    if d == 1:
        return rado_interval_indices(lo[:, 0], hi[:, 0])[0]
    period = 2.0 * side
    bottom, top = lo[:, -1], hi[:, -1]
    memo: dict[tuple, list[int]] = {}

    def slice_selection(t: float) -> list[int]:
        active = tuple(np.flatnonzero((bottom <= t) & (t <= top)).tolist())
        if not active:
            return []
        if active not in memo:
            idx = np.array(active)
            memo[active] = [int(idx[k]) for k in _nordlander(lo[idx, :-1], hi[idx, :-1], side)]
        return memo[active]

    best: list[int] = []
    for t0 in _cyclic_midpoints(np.concatenate([bottom, top]), period):
        k0 = math.floor((bottom.min() - t0) / period)
        k1 = math.ceil((top.max() - t0) / period)
        picked = []
        for k in range(k0, k1 + 1):
            picked.extend(slice_selection(t0 + k * period))
        if len(picked) > len(best):
            best = picked
    return sorted(best)


def select_nordlander(c: Collection) -> SelectionResult:
    """Slice-by-slice selection for congruent cubes, by induction on dimension.

    Slices ``x_d = t`` with ``t`` in ``t0 + 2 side Z`` pick disjoint cubes; every
    piece of the (finite) phase partition of ``t0`` is tried.
    """
    r = _require_congruent(c, (BOX,))
    lo, hi = _box_bounds(c)
    chosen = _nordlander(lo, hi, 2.0 * r)
    return certify(c, chosen, 2.0 ** -c.dimension, "nordlander")


def snap_to_grid(c: Collection, max_rounds: int | None = None) -> Collection:
    """Translate congruent squares into grid position without disjoining any
    intersecting pair and without decreasing the union area.

    Works one axis at a time. The squares aligned with square 0 move rigidly;
    on the interval up to the next alignment event the union area is affine in
    the shift, so the better endpoint never loses area.
    """
    if c.dimension != 2:
        raise KindError("snap_to_grid works in the plane")
    r = _require_congruent(c, (BOX,))
    side = 2.0 * r
    pos = c.centers.copy()
    n = len(c)
    cap = n if max_rounds is None else max_rounds
    for axis in (0, 1):
        for _ in range(cap + 1):
            offsets = (pos[:, axis] - pos[0, axis]) / side
            frac = offsets - np.round(offsets)
            aligned = np.abs(frac) <= 1e-9
            # remove accumulated round-off on aligned squares
            pos[aligned, axis] = pos[0, axis] + np.round(offsets[aligned]) * side
            if aligned.all():
                break
            phase = np.mod(offsets[~aligned], 1.0)
            h_plus = phase.min() * side
            h_minus = (phase.max() - 1.0) * side

            def area(h):
                shifted = pos.copy()
                shifted[aligned, axis] += h
                return union_volume_boxes(from_boxes(shifted, r)).value

            a0, ap, am = area(0.0), area(h_plus), area(h_minus)
            h = h_plus if ap >= am else h_minus
            if max(ap, am) < a0 - 1e-9 * max(1.0, a0):
                raise RuntimeError("snap_to_grid: union area is not affine between alignment events")
            pos[aligned, axis] += h
        else:
            raise RuntimeError("snap_to_grid: alignment did not terminate within the round cap")
    return from_boxes(pos, r, label=(c.label + " snapped").strip())


def select_zalgaller(c: Collection) -> SelectionResult:
    """Snap to grid position, split by corner parity into four classes, keep the
    class with the largest area and map it back to the original squares."""
    r = _require_congruent(c, (BOX,))
    if c.dimension != 2:
        raise KindError("select_zalgaller works in the plane")
    side = 2.0 * r
    snapped = snap_to_grid(c)
    x = snapped.centers
    grid = np.round((x - x[0]) / side).astype(int)
    classes = {}
    for parity in ((0, 0), (0, 1), (1, 0), (1, 1)):
        cells: dict[tuple[int, int], int] = {}
        for i in range(len(c)):
            if (grid[i, 0] % 2, grid[i, 1] % 2) == parity:
                cells.setdefault((grid[i, 0], grid[i, 1]), i)
        classes[parity] = sorted(cells.values())
    parity = max(classes, key=lambda p: len(classes[p]))
    chosen = classes[parity]
    try:
        return certify(c, chosen, 0.25, "zalgaller", {"parity": list(parity)})
    except CertificateError as exc:
        raise CertificateError(f"zalgaller back-translation failed verification: {exc}") from None


# -- arbitrary radii -------------------------------------------------------------------

CONGRUENT_SELECTORS: dict[str, tuple[Callable, Callable[[int, float], float]]] = {
    "nordlander": (lambda c, eps: select_nordlander(c), lambda d, eps: 2.0 ** -d),
    "blichfeldt": (lambda c, eps: select_blichfeldt(c, eps), lambda d, eps: (2.0 + eps) ** -d),
    "zalgaller": (lambda c, eps: select_zalgaller(c), lambda d, eps: 0.25),
    "sweep": (lambda c, eps: select_boundary_sweep(c), lambda d, eps: 1.0 / (3.0 ** d - 2.0 ** (d - 1))),
    "greedy": (lambda c, eps: select_vitali_greedy(c), lambda d, eps: 3.0 ** -d),
}


def round_up_exponent(r: float, base: float) -> int:
    """Least integer p with base**p >= r."""
    p = math.ceil(math.log(r) / math.log(base) - 1e-12)
    while base ** p < r * (1 - 1e-15):
        p += 1
    while base ** (p - 1) >= r:
        p -= 1
    return p


def select_multiscale(c: Collection, params: MultiscaleParams | None = None) -> SelectionResult:
    """Selection for boxes of arbitrary sizes via scale rounding, residue classes
    and large-to-small layering with a congruent selector at every scale.

    The reported guarantee is the product of the losses actually incurred:
    congruent-selector guarantee, inflation^-d, the worst rounding ratio, and
    the volume share of the kept residue class.
    """
    _require_homothets(c, (BOX,))
    d = c.dimension
    p = params or MultiscaleParams.default(d)
    if p.congruent_selector not in CONGRUENT_SELECTORS:
        raise InputError(f"unknown congruent selector {p.congruent_selector!r}")
    run_congruent, f_bound = CONGRUENT_SELECTORS[p.congruent_selector]
    f = f_bound(d, p.eps)
    base, J = p.base_scale, p.residue_classes

    radii = c.radii
    x = c.centers
    expo = np.array([round_up_exponent(r, base) for r in radii])
    rounded = base ** expo.astype(float)

    # keep the residue class with the largest union volume (rounded bodies)
    best_res, best_vol = None, -1.0
    for res in sorted(set(int(e) % J for e in expo)):
        idx = np.flatnonzero(expo % J == res)
        vol = union_volume_boxes(from_boxes(x[idx], rounded[idx])).value
        if vol > best_vol + 1e-12:
            best_res, best_vol = res, vol
    kept = np.flatnonzero(expo % J == best_res)
    scales = sorted(set(expo[kept].tolist()), reverse=True)

    ratio = max((base ** (b - a) for a, b in zip(scales, scales[1:])), default=0.0)
    needed = 1.0 + 2.0 * ratio if len(scales) > 1 else 1.0
    lam = max(p.inflation, needed) if len(scales) > 1 else 1.0

    alive = set(kept.tolist())
    chosen: list[int] = []
    per_scale = []
    for s in scales:
        members = sorted(i for i in alive if expo[i] == s)
        if not members:
            continue
        inflated = from_boxes(x[members], lam * base ** s)
        picked = [members[k] for k in run_congruent(inflated, p.eps).chosen]
        chosen.extend(picked)
        per_scale.append({"exponent": int(s), "alive": len(members), "picked": len(picked)})
        for i in list(alive):
            if expo[i] < s and any(intersects(box(x[i], rounded[i]), box(x[j], rounded[j])) for j in picked):
                alive.discard(i)
        alive.difference_update(members)

    filled = []
    if p.fill:
        adj = adjacency_matrix(c)
        free = ~adj[chosen].any(axis=0) if chosen else np.ones(len(c), dtype=bool)
        free[chosen] = False
        order = sorted(np.flatnonzero(free).tolist(), key=lambda i: (-radii[i], i))
        filled = _greedy(adj, order)
        chosen.extend(filled)

    rounding = float(min((radii[kept] / rounded[kept]) ** d))
    class_share = best_vol / union_volume(c).value
    guarantee = f * lam ** -d * rounding * class_share
    a_priori = f * lam ** -d * base ** -d / J
    details = {
        "base_scale": base, "residue_classes": J, "kept_residue": int(best_res),
        "inflation": lam, "selector_guarantee": f, "rounding_factor": rounding,
        "class_share": class_share, "a_priori_guarantee": a_priori, "scales": per_scale,
        "filled": filled,
    }
    return certify(c, chosen, guarantee, "multiscale", details)


ALGORITHMS: dict[str, Callable[..., SelectionResult]] = {
    "greedy": select_vitali_greedy,
    "rado1d": select_rado_intervals,
    "sweep": select_boundary_sweep,
    "blichfeldt": select_blichfeldt,
    "nordlander": select_nordlander,
    "zalgaller": select_zalgaller,
    "multiscale": select_multiscale,
}


def run_selector(name: str, c: Collection, eps: float = 0.01) -> SelectionResult:
    if name not in ALGORITHMS:
        raise InputError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
    if name == "blichfeldt":
        return select_blichfeldt(c, eps)
    if name == "multiscale":
        return select_multiscale(c, MultiscaleParams.default(c.dimension, eps=eps))
    return ALGORITHMS[name](c)
