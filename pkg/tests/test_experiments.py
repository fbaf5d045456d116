import math

import numpy as np
import pytest

from rado.errors import InputError
from rado.experiments import ExperimentSpec, generate, rows_to_csv, run_experiment


def _strip_stamp(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


def test_generate_is_deterministic():
    spec = ExperimentSpec(dimension=3, n_bodies=7, radius_model="uniform", radius_params=(0.2, 1.0), seed=5)
    assert generate(spec, 3) == generate(spec, 3)
    assert generate(spec, 3) != generate(spec, 4)


def test_radius_models():
    eq = generate(ExperimentSpec(radius_model="equal"), 0)
    assert np.ptp(eq.radii) == 0
    two = generate(ExperimentSpec(dimension=3, n_bodies=60, radius_model="two_scale",
                                  radius_params=(1, 1 / 3)), 0)
    assert set(np.round(two.radii, 12)) == {1.0, round(1 / 3, 12)}
    lac = generate(ExperimentSpec(n_bodies=60, radius_model="lacunary", radius_params=(10, 3)), 0)
    assert set(np.round(lac.radii, 12)) <= {1.0, 0.1, 0.01}


def test_spec_validation():
    with pytest.raises(InputError):
        ExperimentSpec(trials=0)
    with pytest.raises(InputError):
        ExperimentSpec(radius_model="uniform", radius_params=(1.0,))
    with pytest.raises(InputError):
        ExperimentSpec(radius_model="two_scale", radius_params=(1.0, -1.0))
    with pytest.raises(InputError):
        ExperimentSpec(algorithms=("nope",))


def test_intervals_rado_half():
    spec = ExperimentSpec(dimension=1, n_bodies=50, radius_model="uniform", radius_params=(0.1, 2),
                          center_box=20, trials=20, algorithms=("rado1d",))
    summary = run_experiment(spec)
    assert summary.per_algorithm["rado1d"]["min_density"] >= 0.5
    assert all(math.isnan(r.oracle_delta) for r in summary.rows)


def test_congruent_squares_meet_guarantees():
    spec = ExperimentSpec(n_bodies=12, trials=8, algorithms=("greedy", "blichfeldt", "nordlander", "zalgaller"))
    summary = run_experiment(spec)
    for row in summary.rows:
        assert not row.error
        assert row.guarantee - 1e-9 <= row.density <= row.oracle_delta + 1e-9
        assert row.ratio_to_oracle <= 1 + 1e-9
    for s in summary.per_algorithm.values():
        assert s["min_guarantee_slack"] >= -1e-9


def test_precondition_failures_become_rows():
    spec = ExperimentSpec(n_bodies=5, radius_model="uniform", radius_params=(0.5, 1), trials=2,
                          algorithms=("sweep", "greedy"))
    summary = run_experiment(spec)
    assert all(r.error.startswith("KindError") for r in summary.rows if r.algorithm == "sweep")
    assert summary.per_algorithm["sweep"]["errors"] == 2
    assert summary.per_algorithm["greedy"]["errors"] == 0


def test_csv_is_reproducible():
    spec = ExperimentSpec(kind="ball", n_bodies=6, trials=3, algorithms=("greedy", "sweep"))
    a = rows_to_csv(run_experiment(spec).rows)
    b = rows_to_csv(run_experiment(spec).rows)
    assert a.startswith("# generated")
    assert _strip_stamp(a) == _strip_stamp(b)
    assert _strip_stamp(a).splitlines()[0].startswith("trial,algorithm,n,density")
