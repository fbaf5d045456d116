import itertools

import numpy as np
import pytest

from rado.errors import InputError, ResourceLimitError
from rado.geometry import Collection, from_balls, from_boxes, intersects, rotrect, volume
from rado.oracle import (brute_force_mwis, delta, independence_number, intersection_graph,
                         max_disjoint_volume, solve_mwis)


def _enumerate_best(c, forbidden=()):
    """Best disjoint volume by trying every subset, largest first."""
    n = len(c)
    allowed = [i for i in range(n) if i not in forbidden]
    best = 0.0
    for k in range(1, len(allowed) + 1):
        for s in itertools.combinations(allowed, k):
            if all(not intersects(c[i], c[j]) for i, j in itertools.combinations(s, 2)):
                best = max(best, sum(volume(c[i]) for i in s))
    return best


def _random_collection(rng, d, n):
    centers = rng.uniform(-2, 2, (n, d))
    radii = rng.choice([rng.uniform(0.2, 1.2, n), np.full(n, 0.6), np.where(rng.random(n) < 0.5, 1, 0.4)])
    make = from_boxes if rng.random() < 0.5 else from_balls
    return make(centers, radii)


def test_matches_enumeration_on_random_collections():
    rng = np.random.default_rng(2024)
    for trial in range(120):
        d = int(rng.integers(1, 4))
        c = _random_collection(rng, d, int(rng.integers(1, 11)))
        res = max_disjoint_volume(c)
        assert res.selected_volume == pytest.approx(_enumerate_best(c), rel=1e-12)
        assert intersection_graph(c).is_independent(res.chosen)


def test_rotated_rectangles():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        c = Collection(2, tuple(rotrect(rng.uniform(-1, 1, 2), rng.uniform(0.1, 0.8, 2), rng.uniform(0, 3))
                                for _ in range(n)))
        assert max_disjoint_volume(c).selected_volume == pytest.approx(_enumerate_best(c))


def test_forbidden_indices():
    rng = np.random.default_rng(9)
    for _ in range(30):
        c = _random_collection(rng, 2, 9)
        forbidden = tuple(int(i) for i in rng.choice(9, 3, replace=False))
        res = max_disjoint_volume(c, forbidden=forbidden)
        assert not set(res.chosen) & set(forbidden)
        assert res.selected_volume == pytest.approx(_enumerate_best(c, forbidden))
    with pytest.raises(InputError):
        max_disjoint_volume(c, forbidden=(99,))


def test_lexicographically_smallest_optimum():
    # four touching unit intervals: optima {0,2}, {0,3}, {1,3}
    c = from_boxes([[0.5], [1.5], [2.5], [3.5]], 0.5)
    assert max_disjoint_volume(c).chosen == (0, 2)


def test_brute_force_reference_agrees():
    rng = np.random.default_rng(1)
    for _ in range(30):
        c = _random_collection(rng, 2, 8)
        g = intersection_graph(c)
        value, chosen = brute_force_mwis(g.adjacency, g.weights)
        assert solve_mwis(g)[1] == pytest.approx(value)
        assert g.is_independent(chosen)


def test_cap_applies_per_component():
    chain = from_boxes(np.arange(70)[:, None] * 1.0, 0.5)  # one path component
    with pytest.raises(ResourceLimitError):
        max_disjoint_volume(chain)
    assert max_disjoint_volume(chain, cap=80).selected_volume == pytest.approx(35)
    # a 300-body clique and many small components are fine
    assert delta(from_boxes(np.zeros((300, 2)), 1.0)) == 1.0
    scattered = from_boxes((np.repeat(np.arange(40) * 10.0, 2) + np.tile([0, 1.5], 40))[:, None], 1.0)
    assert len(max_disjoint_volume(scattered).chosen) == 40


def test_independence_number():
    assert independence_number(from_boxes([[0.5, 0.5], [-0.5, 0.5], [0.5, -0.5], [-0.5, -0.5]], 0.5)) == 1
    assert independence_number(from_balls([[0, 0], [3, 0], [6, 0]], 1)) == 3
    assert independence_number(from_boxes([[0.5], [1.5], [2.5], [3.5], [4.5]], 0.5)) == 3
