from dataclasses import dataclass
from functools import lru_cache

from utils import MAX_CONFIDENCE, constrain, in_range

EVIDENTIAL_HORIZON = 1.0


class NoEvidenceError(ValueError):
    pass


@dataclass(frozen=True)
class TruthValue:
    """
    A ``(frequency, confidence)`` pair. Frequency is the proportion of
    positive evidence; confidence is ``w / (w + K)`` for ``w`` units of
    evidence and evidential horizon ``K``.
    """

    frequency: float
    confidence: float

    def __post_init__(self):
        if not in_range(self.frequency, 0.0, 1.0):
            raise ValueError(f"frequency out of range: {self.frequency}")
        if not in_range(self.confidence, 0.0, 1.0, high_open=True):
            raise ValueError(f"confidence out of range: {self.confidence}")


# A statement with no evidence at all.
IGNORANCE = TruthValue(0.5, 0.0)


@dataclass(frozen=True)
class EvidenceCount:
    positive: float
    total: float

    def __post_init__(self):
        if self.positive < 0 or self.total < 0:
            raise ValueError(f"negative evidence: {self.positive}/{self.total}")
        if self.positive > self.total:
            raise ValueError(f"positive exceeds total: {self.positive}/{self.total}")


@dataclass(frozen=True)
class Budget:
    """Priority, durability and quality of a task or link.

    Priority decays toward quality at a rate set by durability, so a fresh
    link starts out salient and settles at whatever its evidence earns it.
    """

    priority: float
    durability: float
    quality: float

    def __post_init__(self):
        if not in_range(self.priority, 0.0, 1.0):
            raise ValueError(f"priority out of range: {self.priority}")
        if not in_range(self.durability, 0.0, 1.0, low_open=True, high_open=True):
            raise ValueError(f"durability out of range: {self.durability}")
        if not in_range(self.quality, 0.0, 1.0):
            raise ValueError(f"quality out of range: {self.quality}")


def _weight(confidence, horizon):
    return horizon * confidence / (1.0 - confidence)


def _confidence(weight, horizon):
    return constrain(weight / (weight + horizon), 0.0, MAX_CONFIDENCE)


def truth_from_evidence(e: EvidenceCount, horizon: float = EVIDENTIAL_HORIZON) -> TruthValue:
    """Convert evidence counts to a truth-value.

    :param e: positive and total evidence
    :param horizon: evidential horizon ``K``
    :raises NoEvidenceError: when ``e.total`` is zero; evidence-free
        statements carry :data:`IGNORANCE` instead
    """
    if e.total <= 0:
        raise NoEvidenceError("no evidence")
    return TruthValue(
        constrain(e.positive / e.total, 0.0, 1.0),
        _confidence(e.total, horizon),
    )


def unit_evidence(polarity: bool, horizon: float = EVIDENTIAL_HORIZON) -> TruthValue:
    """Truth-value of a single positive or negative observation."""
    return truth_from_evidence(EvidenceCount(1.0 if polarity else 0.0, 1.0), horizon)


@lru_cache(maxsize=65536)
def revise(t1: TruthValue, t2: TruthValue, horizon: float = EVIDENTIAL_HORIZON) -> TruthValue:
    """Pool the evidence behind two truth-values of the same statement.

    A zero-confidence operand is the identity.
    """
    if t1.confidence == 0.0 and t2.confidence == 0.0:
        return IGNORANCE
    if t2.confidence == 0.0:
        return t1
    if t1.confidence == 0.0:
        return t2

    w1 = _weight(t1.confidence, horizon)
    w2 = _weight(t2.confidence, horizon)
    w = w1 + w2
    frequency = constrain((t1.frequency * w1 + t2.frequency * w2) / w, 0.0, 1.0)
    # the weight round-trip may round below an input; pooling never loses confidence
    confidence = max(_confidence(w, horizon), t1.confidence, t2.confidence)
    return TruthValue(frequency, confidence)


@lru_cache(maxsize=65536)
def deduce(t1: TruthValue, t2: TruthValue) -> TruthValue:
    """Deduction: the truth of ``E2`` from event ``E1`` and ``<E1 =/> E2>``.

    ``f = f1*f2``, ``c = f1*f2*c1*c2``.
    """
    frequency = t1.frequency * t2.frequency
    confidence = frequency * (t1.confidence * t2.confidence)
    return TruthValue(frequency, confidence)


def expectation(t: TruthValue) -> float:
    return t.confidence * (t.frequency - 0.5) + 0.5


def decay_budget(b: Budget, steps: int = 1) -> Budget:
    """Move priority toward quality, ``steps`` decay periods at once.

    ``priority' = quality + (priority - quality) * durability**steps``
    """
    if steps < 0:
        raise ValueError(f"negative decay steps: {steps}")
    if steps == 0:
        return b
    priority = b.quality + (b.priority - b.quality) * b.durability**steps
    return Budget(constrain(priority, 0.0, 1.0), b.durability, b.quality)
