import copy
import logging
import random
import string
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from learner import Model, ModelConfig, StepReport, new_model

logger = logging.getLogger(__name__)

SETTING_CONSTANT = 1
SETTING_VARIABLE = 2
SETTING_NOISY = 3

DEFAULT_ALPHABET = tuple(string.ascii_uppercase + string.ascii_lowercase)

CLOSED_FORM = "closed-form"
EMPIRICAL = "empirical"
CEILING_TOLERANCE = 0.02


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    setting: int = SETTING_CONSTANT
    m: int = 6
    k: int = 1
    p: int = 0
    n: int = 100
    alphabet: Tuple[str, ...] = DEFAULT_ALPHABET
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @property
    def repetition_length(self) -> int:
        return self.m + self.p if self.setting == SETTING_NOISY else self.m

    def validate(self) -> None:
        if self.setting not in (SETTING_CONSTANT, SETTING_VARIABLE, SETTING_NOISY):
            raise GeneratorError(f"unknown setting: {self.setting}")
        if self.m < 2:
            raise GeneratorError(f"m must be at least 2, got {self.m}")
        if self.k < 1:
            raise GeneratorError(f"k must be at least 1, got {self.k}")
        if self.p < 0:
            raise GeneratorError(f"p must not be negative, got {self.p}")
        if self.n < 1:
            raise GeneratorError(f"n must be at least 1, got {self.n}")
        if not self.alphabet:
            raise GeneratorError("alphabet is empty")
        if any(not symbol for symbol in self.alphabet):
            raise GeneratorError("alphabet contains an empty symbol")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise GeneratorError("alphabet symbols must be distinct")

        if self.setting == SETTING_CONSTANT:
            needed = self.m
        else:
            needed = (self.m - 2) + 2 * self.k
        if len(self.alphabet) < needed:
            raise GeneratorError(
                f"alphabet of {len(self.alphabet)} symbols is too small, need {needed}"
            )


@dataclass(frozen=True)
class CeilingEstimate:
    value: float
    method: str


@dataclass(frozen=True)
class AccuracySeries:
    window: int
    points: Tuple[Tuple[int, float], ...]


@dataclass(frozen=True)
class SweepCell:
    m: int
    k: int
    final_accuracy: float
    ceiling: float


def _sample(spec: GeneratorSpec):
    spec.validate()
    rng = random.Random(spec.seed)
    alphabet = spec.alphabet
    if spec.setting == SETTING_CONSTANT:
        return [tuple(alphabet[: spec.m])], rng

    # inner constants sit at positions 2..m-1, variables come from the rest
    constants = tuple(alphabet[1 : spec.m - 1])
    pool = alphabet[:1] + alphabet[spec.m - 1 :]
    variables = rng.sample(pool, 2 * spec.k)
    samples = [
        (variables[2 * i],) + constants + (variables[2 * i + 1],) for i in range(spec.k)
    ]
    return samples, rng


def subsequences(spec: GeneratorSpec) -> List[Tuple[str, ...]]:
    """The sub-sequences a spec repeats (one for setting 1, ``k`` otherwise)."""
    samples, _ = _sample(spec)
    return samples


def generate(spec: GeneratorSpec) -> List[str]:
    """
    Generate the symbol stream for a spec, deterministically in its seed.

    Setting 1 repeats one constant sub-sequence ``[C1 .. Cm]``. Setting 2
    picks one of ``k`` sub-sequences ``[V1, C2 .. C(m-1), Vm]`` per
    repetition; they share their inner constants. Setting 3 appends ``p``
    random symbols to every repetition of setting 2.

    :raises GeneratorError: if the spec is invalid or its alphabet cannot
        supply the distinct symbols it needs
    """
    samples, rng = _sample(spec)
    stream: List[str] = []
    for _ in range(spec.n):
        if spec.setting == SETTING_CONSTANT:
            stream.extend(samples[0])
            continue
        stream.extend(rng.choice(samples))
        if spec.setting == SETTING_NOISY:
            stream.extend(rng.choice(spec.alphabet) for _ in range(spec.p))
    return stream


def ceiling(spec: GeneratorSpec, cross_check: bool = False) -> CeilingEstimate:
    """
    Closed-form top-1 accuracy ceiling.

    - setting 1: every symbol is determined, ``1``
    - setting 2: the onset ``V1`` is a ``1/k`` guess, ``((m-1) + 1/k) / m``
    - setting 3: only the ``m-1`` structured successors count,
      ``(m-1) / (m+p)``

    With ``cross_check`` the value is compared against
    :func:`oracle_ceiling` and a disagreement is logged as a warning.
    """
    spec.validate()
    m, k, p = spec.m, spec.k, spec.p
    if spec.setting == SETTING_CONSTANT:
        value = 1.0
    elif spec.setting == SETTING_VARIABLE:
        value = ((m - 1) + 1 / k) / m
    else:
        value = (m - 1) / (m + p)

    if cross_check and spec.n >= 2:
        expected, slack = oracle_target(spec)
        oracle = oracle_ceiling(spec).value
        if abs(oracle - expected) > slack:
            logger.warning(
                "ceiling cross-check failed: oracle %.4f, expected %.4f", oracle, expected
            )
    return CeilingEstimate(value, CLOSED_FORM)


def oracle_target(spec: GeneratorSpec) -> Tuple[float, float]:
    """
    What :func:`oracle_ceiling` should measure, and the tolerance.

    Matches the closed form for settings 1 and 2. In setting 3 the oracle
    also gets the ``1/k`` guess at the onset and chance hits on the random
    symbols, which the closed form leaves out.
    """
    if spec.setting != SETTING_NOISY:
        return ceiling(spec).value, CEILING_TOLERANCE
    length = spec.m + spec.p
    expected = ((spec.m - 1) + 1 / spec.k) / length
    slack = CEILING_TOLERANCE + spec.p / len(spec.alphabet) / length
    return expected, slack


def oracle_ceiling(spec: GeneratorSpec) -> CeilingEstimate:
    """
    Estimate the ceiling with a brute-force variable-order predictor.

    The context of a position is its phase within the repetition plus the
    symbols seen since the repetition started; the predictor backs off to
    the longest suffix of that context it has seen. It is fitted on the first
    half of the repetitions and scored top-1, ties broken at random, on the
    second half.
    """
    spec.validate()
    if spec.n < 2:
        raise GeneratorError("the oracle needs at least two repetitions")

    stream = generate(spec)
    length = spec.repetition_length
    repetitions = [stream[i : i + length] for i in range(0, len(stream), length)]
    split = len(repetitions) // 2
    training, held_out = repetitions[:split], repetitions[split:]

    table: Dict[Tuple[int, Tuple[str, ...]], Counter] = {}
    for rep in training:
        for phase, symbol in enumerate(rep):
            for start in range(phase + 1):
                context = (phase, tuple(rep[start:phase]))
                table.setdefault(context, Counter())[symbol] += 1

    rng = random.Random(spec.seed)
    correct = 0
    total = 0
    for rep in held_out:
        for phase, symbol in enumerate(rep):
            counts = None
            for start in range(phase + 1):
                counts = table.get((phase, tuple(rep[start:phase])))
                if counts is not None:
                    break
            total += 1
            if not counts:
                continue
            top = max(counts.values())
            tied = sorted(s for s, c in counts.items() if c == top)
            guess = tied[0] if len(tied) == 1 else rng.choice(tied)
            correct += guess == symbol
    return CeilingEstimate(correct / total, EMPIRICAL)


def run_experiment(
    config: ModelConfig, spec: GeneratorSpec, model: Optional[Model] = None
) -> List[StepReport]:
    """
    Feed the generated stream through a model, one symbol per step.

    :param model: model to train; a fresh one built from ``config`` if omitted
    """
    stream = generate(spec)
    if model is None:
        model = new_model(config)
    logger.info(
        "running setting %d (m=%d k=%d p=%d n=%d seed=%d), %d steps",
        spec.setting,
        spec.m,
        spec.k,
        spec.p,
        spec.n,
        spec.seed,
        len(stream),
    )
    reports = [model.step(symbol) for symbol in stream]
    logger.info("finished: final-quarter accuracy %.3f", converged_accuracy(reports))
    return reports


def windowed_accuracy(reports: Sequence[StepReport], window: int) -> AccuracySeries:
    """
    Trailing-window mean of ``correct``.

    The point for index ``i`` averages reports ``i-window+1 .. i``, so the
    first point sits at index ``window-1``. A window longer than the run
    gives an empty series.
    """
    if window < 1:
        raise ValueError(f"window must be at least 1, got {window}")
    points = []
    hits = 0
    for i, report in enumerate(reports):
        hits += report.correct
        if i >= window:
            hits -= reports[i - window].correct
        if i >= window - 1:
            points.append((report.step_index, hits / window))
    return AccuracySeries(window, tuple(points))


def final_accuracy(reports: Sequence[StepReport], window: int) -> float:
    """Mean of ``correct`` over the last ``window`` reports (or all of them)."""
    tail = list(reports[-window:]) if window > 0 else []
    if not tail:
        return 0.0
    return sum(r.correct for r in tail) / len(tail)


def converged_accuracy(reports: Sequence[StepReport]) -> float:
    """Mean of ``correct`` over the final quarter of a run."""
    return final_accuracy(reports, max(1, len(reports) // 4))


def probe(model: Model, context: Sequence[str]) -> Optional[str]:
    """
    Feed ``context`` through a copy of ``model`` and return its next prediction.

    The model itself is left untouched.
    """
    trial = copy.deepcopy(model)
    for symbol in context:
        trial.step(symbol)
    return trial.prediction


def _sweep_cell(args):
    config, spec = args
    reports = run_experiment(config, spec)
    cell = SweepCell(spec.m, spec.k, converged_accuracy(reports), ceiling(spec).value)
    logger.info("sweep cell m=%d k=%d: %.3f", cell.m, cell.k, cell.final_accuracy)
    return cell


def sweep(
    config: ModelConfig,
    m_values: Sequence[int],
    k_values: Sequence[int],
    n: int,
    alphabet: Sequence[str] = DEFAULT_ALPHABET,
    seed: int = 0,
    jobs: int = 1,
) -> List[SweepCell]:
    """
    Run setting 2 over a grid of sub-sequence lengths and sample counts.

    Cells come back row-major (``m`` outer, ``k`` inner). With ``jobs > 1``
    cells run in worker processes; each cell owns its model and generator,
    so the grid is the same either way.
    """
    if not m_values or not k_values:
        raise ValueError("sweep ranges must not be empty")
    grid = [
        (config, GeneratorSpec(SETTING_VARIABLE, m, k, 0, n, tuple(alphabet), seed))
        for m in m_values
        for k in k_values
    ]
    for _, spec in grid:
        spec.validate()

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_cell, grid))
    return [_sweep_cell(cell) for cell in grid]
