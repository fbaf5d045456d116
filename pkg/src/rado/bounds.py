"""Closed-form density bounds for Rado's covering problem and the
Kabatiansky-Levenshtein exponent minimization for Euclidean balls.

Conventions: logarithms are natural unless a name says otherwise; the
``F`` constant ranges over arbitrary homothets, ``f`` over congruent ones.
Bounds whose published form carries an o(1) term are evaluated at their
main term and flagged in ``note``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, xlogy

from .errors import InputError

SIGMA = math.sqrt(3.0) + 1.0

SIDES = ("lower_on_F", "lower_on_f", "upper_on_f", "upper_on_F", "auxiliary")


@dataclass(frozen=True)
class BoundValue:
    name: str
    d: int
    value: float
    side: str
    body: str
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KLResult:
    theta_star: float
    objective_min: float
    r_star: float
    base: float
    grid_theta: float
    grid_objective: float

    def to_dict(self) -> dict:
        return asdict(self)


def unit_ball_volume(d: int) -> float:
    """Volume of the unit Euclidean ball, pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


# -- the named table ---------------------------------------------------------

def _rado_eps(d: int) -> float:
    # eps_d = 7^-d (d+2)^-(d^2+d) underflows already at d=4; stay in log space
    log_eps = -d * math.log(7.0) - (d * d + d) * math.log(d + 2.0)
    return math.exp(-d * math.log(3.0) + math.log1p(math.exp(log_eps)))


def _multiscale_cube(d: int) -> float:
    return math.exp(-3.0) * 2.0 ** -d / (d * math.log(d))


# name -> (formula, side, body, min_d, max_d, note)
_TABLE = {
    "vitali": (lambda d: 3.0 ** -d, "lower_on_F", "general", 1, None,
               "greedy selection of a largest body"),
    "rado_eps": (_rado_eps, "lower_on_F", "general", 1, None,
                 "3^-d (1 + 7^-d (d+2)^-(d^2+d)); equals vitali in double precision for d >= 2"),
    "sweep": (lambda d: 1.0 / (3.0 ** d - 2.0 ** (d - 1)), "lower_on_f", "general", 1, None,
              "boundary-body sweep"),
    "rado_cube": (lambda d: 1.0 / (3.0 ** d - 7.0 ** -d), "lower_on_F", "cube", 1, None,
                  "strict inequality"),
    "bdj_cube": (lambda d: 1.0 / (3.0 ** d - 0.5), "auxiliary", "cube", 1, None,
                 "asymptotic lower bound on F; o(1) term dropped"),
    "f_cube": (lambda d: 2.0 ** -d, "lower_on_f", "cube", 1, None,
               "exact value of f for cubes"),
    "trivial_upper": (lambda d: 2.0 ** -d, "upper_on_F", "general", 1, None,
                      "translates containing a common point; also bounds f"),
    "multiscale_cube": (_multiscale_cube, "auxiliary", "cube", 3, None,
                        "asymptotic lower bound on F; o(1) term dropped"),
    "warmup_upper": (lambda d: (d + 1) * (1.0 + math.sqrt(2.0)) ** -d, "upper_on_f", "ball", 1, None,
                     "unit balls centred in a radius-sqrt(2) ball"),
    "rado_disk": (lambda d: math.pi / (8.0 * math.sqrt(3.0)), "lower_on_f", "ball", 2, 2, ""),
    "bdj_square": (lambda d: 1.0 / 8.4797, "lower_on_F", "cube", 2, 2,
                   "lambda_square = 8.4797 (truncated constant)"),
    "bdj_disk": (lambda d: 1.0 / 8.3539, "lower_on_F", "ball", 2, 2,
                 "lambda_disk = 8.3539 (truncated constant)"),
    "ajtai_upper_2d": (lambda d: 0.25 - 1.0 / 384.0, "upper_on_F", "cube", 2, 2,
                       "periodic tiling refinement of the Ajtai counterexample"),
    "corollary_ball": (lambda d: 2.0 * 3.0 ** -d, "auxiliary", "ball", 1, None,
                       "conditional: only for collections with small independence number"),
    "one_dim": (lambda d: 0.5, "lower_on_F", "ball", 1, 1,
                "d = 1: f = F = 1/2 for every symmetric body (intervals)"),
}

BOUND_NAMES = tuple(_TABLE)


def bound_value(name: str, d: int) -> BoundValue:
    try:
        formula, side, body, dmin, dmax, note = _TABLE[name]
    except KeyError:
        raise InputError(f"unknown bound {name!r}; expected one of {', '.join(BOUND_NAMES)}") from None
    if d < dmin or (dmax is not None and d > dmax):
        hi = "inf" if dmax is None else dmax
        raise InputError(f"bound {name!r} is defined for d in [{dmin}, {hi}], got {d}")
    return BoundValue(name=name, d=d, value=float(formula(d)), side=side, body=body, note=note)


def _applies(bound_body: str, body: str) -> bool:
    return bound_body == "general" or bound_body == body


def check_consistency(rows: list[BoundValue], tol: float = 1e-15) -> list[str]:
    """Cross-side checks for a set of rows; returns a list of violations (empty if consistent).

    Since F <= f: every lower bound on F must be <= every upper bound (on F or f),
    and every lower bound on f must be <= every upper bound on f.
    """
    problems = []
    by_d: dict[int, list[BoundValue]] = {}
    for row in rows:
        by_d.setdefault(row.d, []).append(row)
    for d, group in by_d.items():
        for body in ("cube", "ball"):
            lows_F = [r for r in group if r.side == "lower_on_F" and _applies(r.body, body)]
            lows_f = [r for r in group if r.side == "lower_on_f" and _applies(r.body, body)]
            ups_F = [r for r in group if r.side == "upper_on_F" and _applies(r.body, body)]
            ups_f = [r for r in group if r.side == "upper_on_f" and _applies(r.body, body)]
            pairs = [(lo, up) for lo in lows_F for up in ups_F + ups_f]
            pairs += [(lo, up) for lo in lows_f for up in ups_f]
            # trivial_upper is an upper bound on f as well
            pairs += [(lo, up) for lo in lows_f for up in ups_F if up.name == "trivial_upper"]
            for lo, up in pairs:
                if lo.value > up.value + tol:
                    problems.append(f"d={d} {body}: {lo.name}={lo.value:.6g} > {up.name}={up.value:.6g}")
    return problems


def bounds_table(d_max: int) -> list[BoundValue]:
    """All named bounds for d = 1..d_max, after cross-checking them."""
    if d_max < 1:
        raise InputError("d_max must be >= 1")
    rows = []
    for d in range(1, d_max + 1):
        for name, (_, _, _, dmin, dmax, _) in _TABLE.items():
            if d >= dmin and (dmax is None or d <= dmax):
                rows.append(bound_value(name, d))
    problems = check_consistency(rows)
    if problems:
        raise AssertionError("inconsistent bounds table:\n" + "\n".join(problems))
    return rows


# -- Kabatiansky-Levenshtein exponent ------------------------------------------

THETA_MIN = math.pi / 3.0
THETA_MAX = math.pi


def kl_code_exponent(theta):
    """KL upper bound on (1/d) log A(d, theta), natural log."""
    s = np.sin(theta)
    a = (1.0 + s) / (2.0 * s)
    b = (1.0 - s) / (2.0 * s)
    return xlogy(a, a) - xlogy(b, b)


def kl_objective(theta: float) -> float:
    """Exponent of the ball upper bound at angle ``theta``:
    KL code exponent minus log(1 + 1/sin(theta/2)).

    Defined on [pi/3, pi]. The code exponent grows without bound as
    sin(theta) -> 0, so the value at theta = pi is +inf.
    """
    theta = float(theta)
    if not (THETA_MIN - 1e-15 <= theta <= THETA_MAX + 1e-15):
        raise InputError(f"theta must lie in [pi/3, pi], got {theta}")
    if math.sin(theta) <= 1e-300 or theta >= THETA_MAX:
        return math.inf
    return float(kl_code_exponent(theta) - math.log1p(1.0 / math.sin(theta / 2.0)))


def _kl_objective_vec(theta: np.ndarray) -> np.ndarray:
    return kl_code_exponent(theta) - np.log1p(1.0 / np.sin(theta / 2.0))


def kl_upper_optimize(tol: float = 1e-10, grid_points: int = 10_000) -> KLResult:
    """Minimise ``kl_objective`` over [pi/3, pi]: dense grid, then golden-section refinement."""
    if tol <= 0:
        raise InputError("tol must be positive")
    theta = np.linspace(THETA_MIN, THETA_MAX, grid_points + 1)[:-1]  # drop the singular endpoint
    values = _kl_objective_vec(theta)
    i = int(np.argmin(values))
    lo, hi = theta[max(i - 1, 0)], theta[min(i + 1, len(theta) - 1)]
    if 0 < i < len(theta) - 1:
        res = minimize_scalar(kl_objective, bracket=(lo, theta[i], hi), method="golden",
                              options={"xtol": tol})
        t_star, f_star = float(res.x), float(res.fun)
    else:
        t_star, f_star = float(theta[i]), float(values[i])
    if f_star > values[i]:
        t_star, f_star = float(theta[i]), float(values[i])
    return KLResult(
        theta_star=t_star,
        objective_min=f_star,
        r_star=1.0 / math.sin(t_star / 2.0),
        base=math.exp(-f_star),
        grid_theta=float(theta[i]),
        grid_objective=float(values[i]),
    )


# -- small independence number --------------------------------------------------

def v_alpha_bound(d: int, alpha: int) -> float:
    """Upper bound on the union volume of unit balls with independence number
    at most ``alpha``, in units of the unit-ball volume."""
    if d < 3 or alpha < 1 or int(alpha) != alpha:
        raise InputError(f"need d >= 3 and integer alpha >= 1, got d={d}, alpha={alpha}")
    if alpha == 1:
        return 2.0 ** d
    k = 2.0 ** (alpha - 2)
    return k * SIGMA ** d + (k - 1.0) * 2.0 ** d


def v_alpha_recurrence(d: int, alpha: int) -> float:
    """Same bound obtained by iterating V(a) = 2 V(a-1) + 2^d from V(2) = sigma^d."""
    if alpha == 1:
        return 2.0 ** d
    v = SIGMA ** d
    for _ in range(alpha - 2):
        v = 2.0 * v + 2.0 ** d
    return v


def alpha_threshold(d: int) -> float:
    """Largest independence number for which the small-alpha volume bound beats 3^d/2."""
    if d < 3:
        raise InputError(f"alpha_threshold needs d >= 3, got {d}")
    return d * math.log2(3.0 / SIGMA)
