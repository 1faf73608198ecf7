import itertools

import numpy as np
import pytest

from app.errors import ScenarioError
from app.models import TimeGrid
from app.simulate import GroupSpec, ScenarioSpec, default_scenario, generate_dataset, scenario_pair_abt
from app.utils import make_rng


def _single_group(mean_curve, grid=(0, 2), n=3, noise_sd=0.0, **kwargs):
    return ScenarioSpec(
        grid=TimeGrid(grid),
        n_individuals=n,
        groups=(GroupSpec("only", 1.0, tuple(mean_curve), noise_sd),),
        seed=1,
        **kwargs,
    )


def test_zero_noise_constant():
    data, labels = generate_dataset(_single_group([5]))
    assert data.scores.tolist() == [[5, 5]] * 3
    assert set(labels.values()) == {"only"}
    assert list(labels) == list(data.ids)


def test_zero_noise_polynomial_evaluation():
    data, _ = generate_dataset(_single_group([0, 1], grid=(0, 2, 4), n=1))
    assert data.scores.tolist() == [[0, 2, 4]]


def test_clamp_to_bounds():
    data, _ = generate_dataset(_single_group([25], bounds=(0, 21)))
    assert np.all(data.scores == 21)


def test_round_to_integer():
    data, _ = generate_dataset(_single_group([5], noise_sd=1.5, n=50, round_to_integer=True))
    assert np.array_equal(data.scores, np.rint(data.scores))


def test_zero_noise_matches_cubic_exactly():
    curve = (15.0, -1.05, 0.025, 0.0003)
    spec = _single_group(curve, grid=tuple(range(0, 17, 2)), n=4, bounds=(-100, 100))
    data, _ = generate_dataset(spec)

    expected = spec.groups[0].mean_values(spec.grid.times)
    assert np.all(data.scores == expected)


def test_generate_is_deterministic():
    spec = default_scenario()
    a, labels_a = generate_dataset(spec)
    b, labels_b = generate_dataset(spec)

    assert a.equals(b)
    assert labels_a == labels_b


def test_group_counts_replay_the_categorical_draw():
    spec = default_scenario()
    _, labels = generate_dataset(spec)

    rng = make_rng(spec.seed)
    p = np.array([g.proportion for g in spec.groups])
    replay = rng.choice(len(spec.groups), size=spec.n_individuals, p=p / p.sum())

    assert [labels[str(i + 1)] for i in range(spec.n_individuals)] == [
        spec.groups[g].label for g in replay
    ]


def test_scenario_validation():
    grid = TimeGrid((0, 2))
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 10, ())
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 10, (GroupSpec("a", 0.5, (1,), 1.0),))
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 10, (GroupSpec("a", 1.0, (1, 2, 3, 4, 5), 1.0),))
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 10, (GroupSpec("a", 1.0, (), 1.0),))
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 10, (GroupSpec("a", 1.0, (1,), -1.0),))
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 0, (GroupSpec("a", 1.0, (1,), 1.0),))
    with pytest.raises(ScenarioError):
        ScenarioSpec(grid, 10, (GroupSpec("a", 1.0, (1,), 1.0),), seed=-1)


def test_default_scenario_shape():
    spec = default_scenario()

    assert len(spec.groups) == 5
    assert spec.n_individuals == 1000
    assert spec.grid.times == tuple(float(t) for t in range(0, 17, 2))
    assert abs(sum(g.proportion for g in spec.groups) - 1) < 1e-9
    assert all(g.proportion >= 0.08 for g in spec.groups)
    assert all(1 <= g.noise_sd <= 2 for g in spec.groups)
    # one shared sd, matching the fitted model
    assert len({g.noise_sd for g in spec.groups}) == 1
    assert spec.group("good_stable").proportion == spec.group("good_stable_high").proportion

    times = spec.grid.as_array()
    good = spec.group("good_stable").mean_values(times)
    high = spec.group("good_stable_high").mean_values(times)
    improving = spec.group("improving").mean_values(times)
    worsening = spec.group("worsening").mean_values(times)

    assert np.allclose(high - good, 0.6)
    assert np.all(np.abs(good - 5) < 0.5)
    assert np.all(np.abs(spec.group("poor_stable").mean_values(times) - 16.5) < 1.0)
    assert np.all(np.diff(improving) < 0) and improving[0] == 15 and abs(improving[-1] - 6) < 0.5
    assert np.all(np.diff(worsening) > 0) and worsening[0] == 6 and abs(worsening[-1] - 15) < 0.5


def test_near_duplicate_pair_has_smallest_analytic_abt():
    spec = default_scenario()
    mean_abt = {
        (a, b): np.mean(scenario_pair_abt(spec, a, b))
        for a, b in itertools.combinations(spec.labels, 2)
    }

    assert len(mean_abt) == 10
    closest = min(mean_abt, key=mean_abt.get)
    assert set(closest) == {"good_stable", "good_stable_high"}
    # constant 0.6 gap over 2-week intervals
    assert mean_abt[closest] == pytest.approx(1.2, rel=1e-12)
