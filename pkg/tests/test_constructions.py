import math

import numpy as np
import pytest

from rado.bounds import unit_ball_volume
from rado.constructions import (Placement, ajtai_almost_counterexample, ball_net, compose_ajtai,
                                default_placement, four_squares, midpoint_triple,
                                pairwise_intersecting_balls, pinwheel, random_maximal_densities,
                                rect_from_label, translate_net, verify_almost_counterexample)
from rado.errors import InputError, KindError
from rado.geometry import adjacency_matrix, ball, contains_point, from_boxes, union_volume, union_volume_boxes
from rado.oracle import delta, independence_number


def test_four_squares():
    c = four_squares()
    assert delta(c) == 0.25
    assert independence_number(c) == 1
    assert union_volume_boxes(c).value == 4.0


@pytest.mark.parametrize("kind,d", [("box", 2), ("box", 3), ("ball", 2), ("ball", 3)])
def test_translate_net_contains_origin(kind, d):
    c = translate_net(kind, d, 300, seed=1)
    assert all(contains_point(b, np.zeros(d)) for b in c)
    assert independence_number(c) == 1
    cap = 2 ** d * (2 ** d if kind == "box" else unit_ball_volume(d))
    est = union_volume(c)
    assert est.value <= cap + est.abs_error
    with pytest.raises(KindError):
        translate_net("rotrect", 2, 3)


def test_pinwheel():
    assert delta(pinwheel(1)) == 1.0
    assert all(independence_number(pinwheel(n)) == 1 for n in (2, 5, 9))
    assert adjacency_matrix(pinwheel(6))[~np.eye(6, dtype=bool)].all()
    with pytest.raises(InputError):
        pinwheel(0)


def test_ball_net():
    c = ball_net(2, 0.0, 5)
    assert independence_number(c) == 1
    c = ball_net(3, 2.0, 200, seed=3)
    assert np.linalg.norm(c.centers, axis=1).max() <= 2.0
    assert ball_net(3, 2.0, 10, seed=3) == ball_net(3, 2.0, 10, seed=3)


def test_sqrt2_nets_have_few_disjoint_balls():
    for d in (2, 3):
        for seed in range(200):
            assert independence_number(ball_net(d, math.sqrt(2), d + 2, seed)) <= d + 1


def test_ajtai_data_shape():
    a = ajtai_almost_counterexample()
    assert len(a) == 52
    assert set(2 * a.radii) == {1.0, 2.0}
    assert rect_from_label(a.label) == (0, 0, 14, 6)
    lo = a.centers - a.radii[:, None]
    hi = a.centers + a.radii[:, None]
    assert lo.min(axis=0).tolist() == [0, 0] and hi.max(axis=0).tolist() == [14, 6]


def test_verify_examples():
    rep = verify_almost_counterexample(four_squares(), (-1, -1, 1, 1))
    assert rep.property1_holds and not rep.property2_holds
    assert rep.bottom_row_indices == (0, 1)
    rep = verify_almost_counterexample(from_boxes([[0, 1]], 1), (-1, 0, 1, 2))
    assert not rep.property1_holds
    rep = verify_almost_counterexample(ajtai_almost_counterexample())
    assert rep.property1_holds and rep.property2_holds
    assert len(rep.bottom_row_indices) == 14
    with pytest.raises(InputError):
        verify_almost_counterexample(four_squares(), (0, 0, 1, 1))
    with pytest.raises(InputError):
        rect_from_label("no rectangle here")


def test_composition_structure():
    a = ajtai_almost_counterexample()
    comp = compose_ajtai(a)
    assert len(comp) == 4 + 4 * 52
    assert comp.kinds == {"box"}
    lo = comp.centers - comp.radii[:, None]
    hi = comp.centers + comp.radii[:, None]
    assert lo.min() >= -1 - 6 / 14 - 1e-12 and hi.max() <= 1 + 6 / 14 + 1e-12
    # each copy's floor row touches its quadrant square
    adj = adjacency_matrix(comp)
    for k in range(4):
        assert adj[k, 4:].any()


def test_composition_rejects_bad_slots():
    a = ajtai_almost_counterexample()
    placement = default_placement((0, 0, 14, 6))
    with pytest.raises(InputError):
        compose_ajtai(a, placement[:3])
    with pytest.raises(InputError):
        compose_ajtai(a, [placement[0]] * 4)
    shifted = Placement(placement[0].quarter_turns, placement[0].scale, (5.0, 5.0))
    with pytest.raises(InputError):
        compose_ajtai(a, [shifted] + placement[1:])


def test_random_maximal_sets_on_small_family():
    dens = random_maximal_densities(four_squares(), 50, seed=0)
    assert np.allclose(dens, 0.25)
    row = from_boxes([[0.5], [1.5], [2.5]], 0.5)
    dens = random_maximal_densities(row, 200, seed=1)
    assert set(np.round(dens * 3, 9)) <= {1.0, 2.0}


def test_midpoint_configuration():
    rng = np.random.default_rng(0)
    for d in (2, 3):
        for _ in range(300):
            x1, x2, x = midpoint_triple(d, rng)
            assert np.linalg.norm(x1 - x2) > 2 * math.sqrt(3)
            assert contains_point(ball(x, 1.0), (x1 + x2) / 2)


def test_pairwise_intersecting_family():
    c = pairwise_intersecting_balls(3, 12, seed=2)
    assert adjacency_matrix(c)[~np.eye(len(c), dtype=bool)].all()
