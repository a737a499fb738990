import logging
import math
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

from memory import ColumnId, NodeId, TemporalMemory
from truth import (
    EVIDENTIAL_HORIZON,
    IGNORANCE,
    TruthValue,
    deduce,
    expectation,
    revise,
    unit_evidence,
)
from utils import in_range

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ModelConfig:
    nodes_per_column: int = 8
    max_new_links_per_step: int = 16
    hypothesis_sample_size: int = 2
    link_capacity_per_column: int = 64
    anticipation_threshold: float = 0.5
    perceptual_truth: TruthValue = TruthValue(1.0, 0.9)
    initial_link_priority: float = 0.8
    link_durability: float = 0.9
    node_durability: float = 0.9
    evidential_horizon: float = EVIDENTIAL_HORIZON
    rng_seed: int = 0

    def __post_init__(self):
        for name in (
            "nodes_per_column",
            "max_new_links_per_step",
            "hypothesis_sample_size",
            "link_capacity_per_column",
            "rng_seed",
        ):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(name, f"expected an integer, got {value!r}")

        if self.nodes_per_column < 1:
            raise ConfigError("nodes_per_column", "must be at least 1")
        if self.max_new_links_per_step < 0:
            raise ConfigError("max_new_links_per_step", "must not be negative")
        if not 1 <= self.hypothesis_sample_size <= self.nodes_per_column:
            raise ConfigError(
                "hypothesis_sample_size",
                f"must be between 1 and nodes_per_column ({self.nodes_per_column})",
            )
        if self.link_capacity_per_column < 0:
            raise ConfigError("link_capacity_per_column", "must not be negative")
        if not in_range(self.anticipation_threshold, 0.0, 1.0):
            raise ConfigError("anticipation_threshold", "must be within [0, 1]")
        if not isinstance(self.perceptual_truth, TruthValue):
            raise ConfigError("perceptual_truth", "expected a TruthValue")
        if not in_range(self.initial_link_priority, 0.0, 1.0):
            raise ConfigError("initial_link_priority", "must be within [0, 1]")
        for name in ("link_durability", "node_durability"):
            if not in_range(getattr(self, name), 0.0, 1.0, low_open=True, high_open=True):
                raise ConfigError(name, "must be within (0, 1)")
        if not (self.evidential_horizon > 0 and math.isfinite(self.evidential_horizon)):
            raise ConfigError("evidential_horizon", "must be positive")


@dataclass(frozen=True)
class StepReport:
    """
    One step of a run. ``predicted`` and ``anticipated_columns`` describe
    the state when ``input`` arrived, before it was learned from.
    """

    step_index: int
    input: str
    predicted: Optional[str]
    correct: bool
    anticipated_columns: Tuple[str, ...]
    burst: bool
    new_links: int
    evicted_links: int


class Model:
    """A sequence learner over a :class:`~memory.TemporalMemory`.

    Not thread-safe; separate instances share nothing.
    """

    def __init__(self, config: ModelConfig):
        self.config = config
        self.network = TemporalMemory(
            nodes_per_column=config.nodes_per_column,
            initial_link_priority=config.initial_link_priority,
            link_durability=config.link_durability,
            node_durability=config.node_durability,
        )
        self.rng = random.Random(config.rng_seed)
        self.step_index = 0
        self.prediction: Optional[str] = None
        self.last_burst = False

        self.winners: Tuple[NodeId, ...] = ()

        self._active: FrozenSet[NodeId] = frozenset()
        self._column: Optional[ColumnId] = None
        self._pre_active: FrozenSet[NodeId] = frozenset()
        self._prev_winners: Tuple[NodeId, ...] = ()

        self._positive = unit_evidence(True, config.evidential_horizon)
        self._negative = unit_evidence(False, config.evidential_horizon)

    @property
    def active(self) -> FrozenSet[NodeId]:
        return self._active

    @property
    def pre_active(self) -> FrozenSet[NodeId]:
        return self._pre_active

    def step(self, symbol: str) -> StepReport:
        """
        Feed one symbol through the perception cycle.

        Scores the standing prediction, activates the input column, revises
        the links with evidence this transition, hypothesizes new links,
        recycles columns over capacity, decays budgets, then anticipates and
        predicts the next symbol. Links are hypothesized after revision, so a
        link never counts the transition that created it.
        """
        predicted = self.prediction
        correct = predicted is not None and predicted == symbol
        anticipated = self._anticipated_symbols()

        prev_active = self._active
        prev_column = self._column
        prev_winners = self._prev_winners
        curr_active = self.activate(symbol)
        curr_column = self.network.column_for(symbol).id
        curr_winners = self.winners
        burst = self.last_burst

        prev_order = tuple(sorted(prev_active))
        curr_order = tuple(sorted(curr_active))
        self.revise_links(prev_order, curr_order)

        new_links = 0
        if prev_column is not None:
            new_links = self.hypothesize(
                prev_column,
                curr_column,
                prev_active,
                curr_active,
                prev_winners=prev_winners,
                curr_winners=curr_winners,
            )
        touched = {prev_column} if new_links else set()
        evicted = self.recycle(touched)

        self.network.tick()

        self.compute_anticipations(curr_order)
        self.prediction = self.predict_next()

        self._roll(prev_active, curr_active)
        self._column = curr_column
        self._prev_winners = curr_winners

        report = StepReport(
            step_index=self.step_index,
            input=symbol,
            predicted=predicted,
            correct=correct,
            anticipated_columns=anticipated,
            burst=burst,
            new_links=new_links,
            evicted_links=evicted,
        )
        logger.debug(
            "step %d: %r predicted=%r burst=%s new=%d evicted=%d",
            self.step_index,
            symbol,
            predicted,
            burst,
            new_links,
            evicted,
        )
        self.step_index += 1
        return report

    def activate(self, symbol: str) -> FrozenSet[NodeId]:
        """
        Activate the column of ``symbol``.

        Only the pre-active nodes fire if there are any; otherwise the
        whole column bursts. Sets :attr:`last_burst` and :attr:`winners`:
        the firing nodes, or for a burst the least used nodes picked to stand
        for this context.
        """
        net = self.network
        cid = net.get_or_create_column(symbol)
        roster = net.columns[cid].nodes
        anticipated = [nid for nid in roster if net.nodes[nid].pre_active]
        self.last_burst = not anticipated
        firing = roster if self.last_burst else anticipated
        if self.last_burst:
            self.winners = self.least_used(cid, self.config.hypothesis_sample_size)
        else:
            self.winners = tuple(anticipated)

        for nid in firing:
            node = net.nodes[nid]
            node.active_now = True
            node.truth = self.config.perceptual_truth
            net.stimulate(node, 1.0)
        return frozenset(firing)

    def revise_links(self, prev_active: Iterable[NodeId], curr_active: Iterable[NodeId]) -> int:
        """
        Apply this transition's evidence to existing links.

        For a link ``E1 -> E2``:

        - E1 then E2: positive evidence for all three predictions
        - E1 then not E2: negative evidence for the predictive implication and
          the equivalence
        - not E1 then E2: negative evidence for the retrospective implication
          and the equivalence

        :return: number of predictions revised
        """
        net = self.network
        horizon = self.config.evidential_horizon
        prev_order = _ordered(prev_active)
        curr_order = _ordered(curr_active)
        prev_active = frozenset(prev_order)
        curr_active = frozenset(curr_order)

        # links are revised independently, so visiting order is irrelevant
        touched = {}
        for nid in prev_order:
            for link in net.links_from(nid):
                touched[link.serial] = link
        for nid in curr_order:
            for link in net.links_into(nid):
                touched[link.serial] = link

        revised = 0
        for link in touched.values():
            before = link.source in prev_active
            after = link.target in curr_active
            if before and after:
                link.forward = revise(link.forward, self._positive, horizon)
                link.backward = revise(link.backward, self._positive, horizon)
                link.equivalence = revise(link.equivalence, self._positive, horizon)
                revised += 3
            elif before:
                link.forward = revise(link.forward, self._negative, horizon)
                link.equivalence = revise(link.equivalence, self._negative, horizon)
                revised += 2
            else:
                link.backward = revise(link.backward, self._negative, horizon)
                link.equivalence = revise(link.equivalence, self._negative, horizon)
                revised += 2
            net.set_link_quality(link, expectation(link.forward))
        return revised

    def hypothesize(
        self,
        prev_column: ColumnId,
        curr_column: ColumnId,
        prev_active: Iterable[NodeId],
        curr_active: Iterable[NodeId],
        prev_winners: Optional[Iterable[NodeId]] = None,
        curr_winners: Optional[Iterable[NodeId]] = None,
    ) -> int:
        """
        Build new links between two columns activated in succession.

        A column that burst contributes its winners, the few least used
        nodes picked when it burst; a column that fired selectively
        contributes its active nodes. When both fired selectively nothing is
        built, since their links are already being revised.

        :param prev_winners: winners of the previous column if it burst;
            picked with :meth:`least_used` when not given
        :param curr_winners: same, for the current column
        :return: number of links created (at most ``max_new_links_per_step``)
        """
        if prev_column == curr_column:
            return 0
        net = self.network
        cfg = self.config
        first = net.columns[prev_column].nodes
        second = net.columns[curr_column].nodes
        prev_active = frozenset(prev_active)
        curr_active = frozenset(curr_active)

        sources = [nid for nid in first if nid in prev_active]
        targets = [nid for nid in second if nid in curr_active]
        if not sources or not targets:
            return 0
        first_full = len(sources) == len(first)
        second_full = len(targets) == len(second)
        if not first_full and not second_full:
            return 0

        if first_full:
            sources = self._winners_of(prev_column, prev_winners)
        if second_full:
            targets = self._winners_of(curr_column, curr_winners)

        created = 0
        for source in sources:
            for target in targets:
                if created >= cfg.max_new_links_per_step:
                    return created
                if net.link(source, target) is None:
                    net.create_link(source, target)
                    created += 1
        return created

    def least_used(self, cid: ColumnId, count: int) -> Tuple[NodeId, ...]:
        """
        Pick ``count`` nodes of a column to stand for a new context.

        Nodes with the fewest live inbound links come first, so contexts
        claim nodes of their own while any are free; ties are broken with
        the model RNG.
        """
        net = self.network
        roster = net.columns[cid].nodes
        shuffled = self.rng.sample(roster, len(roster))
        ranked = sorted(shuffled, key=net.live_inbound)
        return tuple(sorted(ranked[:count]))

    def _winners_of(self, cid, winners):
        roster = self.network.columns[cid].nodes
        picked = [nid for nid in winners if nid in roster] if winners is not None else []
        if not picked:
            picked = self.least_used(cid, self.config.hypothesis_sample_size)
        return sorted(picked)

    def recycle(self, touched: Iterable[ColumnId]) -> int:
        cap = self.config.link_capacity_per_column
        return sum(self.network.evict_excess(cid, cap) for cid in sorted(touched))

    def compute_anticipations(self, curr_active: Iterable[NodeId]) -> Dict[NodeId, TruthValue]:
        """
        Deduce which nodes are expected to fire next.

        Each link out of an active node proposes ``deduce(source.truth,
        link.forward)`` for its target; a target keeps its best proposal by
        expectation and becomes pre-active if that expectation is above the
        anticipation threshold. Every other node loses its pre-activation.
        """
        net = self.network
        for nid in self._pre_active:
            node = net.nodes[nid]
            node.pre_active = False
            node.anticipation = IGNORANCE

        best: Dict[NodeId, Tuple[float, TruthValue]] = {}
        for nid in _ordered(curr_active):
            source = net.nodes[nid]
            for link in net.links_from(nid):
                candidate = deduce(source.truth, link.forward)
                score = expectation(candidate)
                held = best.get(link.target)
                if held is None or score > held[0]:
                    best[link.target] = (score, candidate)

        threshold = self.config.anticipation_threshold
        anticipations = {}
        for nid in sorted(best):
            score, truth = best[nid]
            if score > threshold:
                node = net.nodes[nid]
                node.pre_active = True
                node.anticipation = truth
                anticipations[nid] = truth
        self._pre_active = frozenset(anticipations)
        return anticipations

    def predict_next(self) -> Optional[str]:
        """
        Top-1 prediction: the column holding the highest anticipation.

        Ties are broken uniformly at random; ``None`` when nothing is
        anticipated.
        """
        net = self.network
        scores: Dict[ColumnId, float] = {}
        for nid in sorted(self._pre_active):
            node = net.nodes[nid]
            score = expectation(node.anticipation)
            if score > scores.get(node.column, -math.inf):
                scores[node.column] = score
        if not scores:
            return None

        top = max(scores.values())
        tied = [cid for cid in sorted(scores) if scores[cid] == top]
        winner = tied[0] if len(tied) == 1 else self.rng.choice(tied)
        return net.columns[winner].symbol

    def _anticipated_symbols(self) -> Tuple[str, ...]:
        net = self.network
        columns: Set[ColumnId] = {net.nodes[nid].column for nid in self._pre_active}
        return tuple(sorted(net.columns[cid].symbol for cid in columns))

    def _roll(self, prev_active, curr_active):
        nodes = self.network.nodes
        for nid in prev_active:
            nodes[nid].active_prev = False
        for nid in curr_active:
            nodes[nid].active_now = False
            nodes[nid].active_prev = True
        self._active = curr_active


def _ordered(nodes: Iterable[NodeId]) -> Tuple[NodeId, ...]:
    # tuples handed over by Model.step are already sorted
    return nodes if isinstance(nodes, tuple) else tuple(sorted(nodes))


def new_model(config: Optional[ModelConfig] = None) -> Model:
    return Model(config if config is not None else ModelConfig())
