import random
import string

import pytest

from learner import ModelConfig, StepReport, new_model
from sequences import (
    CLOSED_FORM,
    EMPIRICAL,
    GeneratorError,
    GeneratorSpec,
    SETTING_CONSTANT,
    SETTING_NOISY,
    SETTING_VARIABLE,
    ceiling,
    converged_accuracy,
    final_accuracy,
    generate,
    oracle_ceiling,
    oracle_target,
    probe,
    run_experiment,
    subsequences,
    sweep,
    windowed_accuracy,
)

UPPER = tuple(string.ascii_uppercase)


def reports_from(outcomes):
    return [StepReport(i, "A", "A", ok, (), False, 0, 0) for i, ok in enumerate(outcomes)]


def test_generate_constant():
    spec = GeneratorSpec(SETTING_CONSTANT, m=3, n=2, alphabet=("A", "B", "C"))
    assert generate(spec) == list("ABCABC")


def test_generate_variable():
    spec = GeneratorSpec(SETTING_VARIABLE, m=4, k=2, n=50, alphabet=UPPER, seed=3)
    stream = generate(spec)
    samples = subsequences(spec)
    assert len(stream) == 200
    assert len(samples) == 2
    assert samples[0][1:3] == samples[1][1:3] == ("B", "C")
    assert len({s[0] for s in samples} | {s[-1] for s in samples}) == 4
    for i in range(0, len(stream), 4):
        assert tuple(stream[i : i + 4]) in samples


def test_generate_noisy():
    spec = GeneratorSpec(SETTING_NOISY, m=4, k=2, p=2, n=30, alphabet=UPPER, seed=1)
    stream = generate(spec)
    samples = subsequences(spec)
    assert len(stream) == 180
    assert set(stream) <= set(UPPER)
    for i in range(0, len(stream), 6):
        assert tuple(stream[i : i + 4]) in samples


def test_generate_is_deterministic():
    spec = GeneratorSpec(SETTING_NOISY, m=5, k=3, p=1, n=40, seed=11)
    assert generate(spec) == generate(spec)


@pytest.mark.parametrize(
    "spec",
    [
        GeneratorSpec(SETTING_CONSTANT, m=4, alphabet=("A", "B", "C")),
        GeneratorSpec(SETTING_VARIABLE, m=4, k=3, alphabet=("A", "B", "C", "D", "E")),
        GeneratorSpec(SETTING_VARIABLE, m=4, k=1, alphabet=()),
        GeneratorSpec(SETTING_VARIABLE, m=4, k=1, alphabet=("A", "A", "B", "C")),
        GeneratorSpec(SETTING_CONSTANT, m=1),
        GeneratorSpec(4),
        GeneratorSpec(SETTING_NOISY, p=-1),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(GeneratorError):
        generate(spec)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (GeneratorSpec(SETTING_CONSTANT, m=6), 1.0),
        (GeneratorSpec(SETTING_VARIABLE, m=4, k=2), 0.875),
        (GeneratorSpec(SETTING_NOISY, m=4, k=2, p=2), 0.5),
    ],
)
def test_ceiling(spec, expected):
    estimate = ceiling(spec)
    assert estimate.value == pytest.approx(expected)
    assert estimate.method == CLOSED_FORM


def random_specs(count, seed=1234):
    rng = random.Random(seed)
    for i in range(count):
        yield GeneratorSpec(
            setting=rng.choice((SETTING_CONSTANT, SETTING_VARIABLE, SETTING_NOISY)),
            m=rng.randint(3, 8),
            k=rng.randint(1, 4),
            p=rng.randint(0, 4),
            n=2000,
            seed=i,
        )


@pytest.mark.parametrize("spec", list(random_specs(20)))
def test_oracle_agrees_with_closed_form(spec):
    expected, slack = oracle_target(spec)
    estimate = oracle_ceiling(spec)
    assert estimate.method == EMPIRICAL
    assert estimate.value == pytest.approx(expected, abs=slack)


def test_oracle_needs_two_repetitions():
    with pytest.raises(GeneratorError):
        oracle_ceiling(GeneratorSpec(n=1))


def test_cross_check_logs_nothing_when_consistent(caplog):
    ceiling(GeneratorSpec(SETTING_VARIABLE, m=4, k=2, n=2000), cross_check=True)
    assert "cross-check" not in caplog.text


def test_windowed_accuracy():
    series = windowed_accuracy(reports_from([True] * 10), 4)
    assert series.window == 4
    assert [step for step, _ in series.points] == list(range(3, 10))
    assert all(value == 1.0 for _, value in series.points)

    series = windowed_accuracy(reports_from([True, False] * 5), 2)
    assert all(value == 0.5 for _, value in series.points)


def test_windowed_accuracy_edges():
    assert windowed_accuracy(reports_from([True] * 3), 5).points == ()
    with pytest.raises(ValueError):
        windowed_accuracy(reports_from([True]), 0)


def test_final_and_converged_accuracy():
    reports = reports_from([False] * 6 + [True] * 2)
    assert final_accuracy(reports, 4) == 0.5
    assert final_accuracy(reports, 100) == 0.25
    assert converged_accuracy(reports) == 1.0
    assert final_accuracy([], 5) == 0.0


def test_run_experiment_constant_setting():
    spec = GeneratorSpec(SETTING_CONSTANT, m=6, n=100)
    reports = run_experiment(ModelConfig(), spec)
    assert len(reports) == 600
    assert [r.input for r in reports[:6]] == list("ABCDEF")

    points = [value for _, value in windowed_accuracy(reports, 50).points]
    assert points[-1] == 1.0
    first = points.index(1.0)
    assert all(value == 1.0 for value in points[first:])


def test_run_experiment_trains_given_model():
    model = new_model()
    run_experiment(ModelConfig(), GeneratorSpec(SETTING_CONSTANT, m=3, n=5), model)
    assert model.step_index == 15


def test_predicting_on_a_copy_leaves_model_untouched():
    model = new_model()
    run_experiment(ModelConfig(), GeneratorSpec(SETTING_CONSTANT, m=3, n=40), model)
    links = model.network.stats().link_count
    prediction = model.prediction

    assert probe(model, ["A", "B"]) == "C"
    assert model.step_index == 120
    assert model.prediction == prediction
    assert model.network.stats().link_count == links


def test_sweep_cell_matches_single_run():
    cfg = ModelConfig()
    (cell,) = sweep(cfg, [4], [2], n=50)
    reports = run_experiment(cfg, GeneratorSpec(SETTING_VARIABLE, m=4, k=2, n=50))
    assert (cell.m, cell.k) == (4, 2)
    assert cell.final_accuracy == converged_accuracy(reports)
    assert cell.ceiling == pytest.approx(0.875)


def test_sweep_is_row_major_and_deterministic():
    cfg = ModelConfig()
    cells = sweep(cfg, [3, 4], [1, 2], n=20)
    assert [(c.m, c.k) for c in cells] == [(3, 1), (3, 2), (4, 1), (4, 2)]
    assert sweep(cfg, [3, 4], [1, 2], n=20) == cells


def test_sweep_rejects_empty_ranges():
    with pytest.raises(ValueError):
        sweep(ModelConfig(), [], [2], n=10)
