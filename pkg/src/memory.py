
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from truth import IGNORANCE, Budget, TruthValue, decay_budget, expectation

logger = logging.getLogger(__name__)

NodeId = int
ColumnId = int


class IntraColumnLinkError(ValueError):
    pass


class UnknownNodeError(LookupError):
    pass


@dataclass(frozen=True)
class Column:
    id: ColumnId
    symbol: str
    nodes: Tuple[NodeId, ...]


@dataclass(eq=False)
class Node:
    id: NodeId
    column: ColumnId
    budget: Budget
    truth: TruthValue = IGNORANCE
    active_now: bool = False
    active_prev: bool = False
    pre_active: bool = False
    anticipation: TruthValue = IGNORANCE
    stamp: int = 0


@dataclass(eq=False)
class Link:
    source: NodeId
    target: NodeId
    budget: Budget
    serial: int
    forward: TruthValue = IGNORANCE
    backward: TruthValue = IGNORANCE
    equivalence: TruthValue = IGNORANCE
    stamp: int = 0


@dataclass(frozen=True)
class NetworkStats:
    column_count: int
    node_count: int
    link_count: int
    links_per_column: Dict[ColumnId, int] = field(default_factory=dict)


class TemporalMemory:
    """
    One column per symbol, a fixed roster of nodes per column, and directed
    links between nodes of different columns.

    Budgets are decayed lazily: each one is stored with the clock tick at
    which it was last settled, and reads apply the periods elapsed since.
    """

    def __init__(
        self,
        nodes_per_column: int = 8,
        initial_link_priority: float = 0.8,
        link_durability: float = 0.9,
        node_durability: float = 0.9,
    ) -> None:
        """
        Create an empty network.

        :param nodes_per_column: size of every column's node roster
        :param initial_link_priority: priority of a freshly hypothesized link
        :param link_durability: decay rate of link priority
        :param node_durability: decay rate of node priority
        """
        if nodes_per_column < 1:
            raise ValueError(f"nodes_per_column must be positive: {nodes_per_column}")
        self.nodes_per_column = nodes_per_column
        self.initial_link_priority = initial_link_priority
        self.link_durability = link_durability
        self.node_durability = node_durability

        self.columns: List[Column] = []
        self.nodes: List[Node] = []
        self.clock = 0

        self._by_symbol: Dict[str, ColumnId] = {}
        self._links: Dict[Tuple[NodeId, NodeId], Link] = {}
        self._outgoing: Dict[NodeId, Dict[int, Link]] = {}
        self._incoming: Dict[NodeId, Dict[int, Link]] = {}
        self._owned: Dict[ColumnId, Dict[int, Link]] = {}
        self._serial = 0

    # columns and nodes

    def get_or_create_column(self, symbol: str) -> ColumnId:
        if not symbol:
            raise ValueError("symbol must be a nonempty string")
        cid = self._by_symbol.get(symbol)
        if cid is not None:
            return cid

        cid = len(self.columns)
        first = len(self.nodes)
        roster = tuple(range(first, first + self.nodes_per_column))
        for nid in roster:
            self.nodes.append(
                Node(
                    id=nid,
                    column=cid,
                    budget=Budget(0.0, self.node_durability, 0.0),
                    stamp=self.clock,
                )
            )
            self._outgoing[nid] = {}
            self._incoming[nid] = {}
        self.columns.append(Column(cid, symbol, roster))
        self._by_symbol[symbol] = cid
        self._owned[cid] = {}
        return cid

    def column_for(self, symbol: str) -> Optional[Column]:
        cid = self._by_symbol.get(symbol)
        return None if cid is None else self.columns[cid]

    def node(self, nid: NodeId) -> Node:
        if not 0 <= nid < len(self.nodes):
            raise UnknownNodeError(f"unknown node: {nid}")
        return self.nodes[nid]

    def symbol_of(self, nid: NodeId) -> str:
        return self.columns[self.node(nid).column].symbol

    def node_budget(self, node: Node) -> Budget:
        return decay_budget(node.budget, self.clock - node.stamp)

    def stimulate(self, node: Node, priority: float = 1.0) -> None:
        """Reset a node's priority, e.g. when it becomes active."""
        node.budget = Budget(priority, node.budget.durability, node.budget.quality)
        node.stamp = self.clock

    # links

    def create_link(self, source: NodeId, target: NodeId) -> Link:
        """
        Hypothesize a link ``source -> target`` with evidence-free predictions.

        Proposing an existing pair returns the existing link unchanged.

        :raises IntraColumnLinkError: if both nodes are in the same column
        """
        src = self.node(source)
        tgt = self.node(target)
        if src.column == tgt.column:
            raise IntraColumnLinkError("intra-column link")

        existing = self._links.get((source, target))
        if existing is not None:
            return existing

        link = Link(
            source=source,
            target=target,
            budget=Budget(self.initial_link_priority, self.link_durability, 0.0),
            serial=self._serial,
            stamp=self.clock,
        )
        self._serial += 1
        self._links[(source, target)] = link
        self._outgoing[source][link.serial] = link
        self._incoming[target][link.serial] = link
        self._owned[src.column][link.serial] = link
        return link

    def link(self, source: NodeId, target: NodeId) -> Optional[Link]:
        return self._links.get((source, target))

    def links_from(self, nid: NodeId) -> List[Link]:
        self.node(nid)
        return list(self._outgoing[nid].values())

    def links_into(self, nid: NodeId) -> List[Link]:
        self.node(nid)
        return list(self._incoming[nid].values())

    def live_inbound(self, nid: NodeId) -> int:
        """
        Number of links into ``nid`` whose predictive implication has not been
        refuted, i.e. whose expectation is still at least 0.5.
        """
        return sum(1 for link in self._incoming[nid].values() if expectation(link.forward) >= 0.5)

    def owned_links(self, cid: ColumnId) -> List[Link]:
        """Links counted against column ``cid``: those whose source is in it."""
        return list(self._owned[cid].values())

    def remove_link(self, link: Link) -> None:
        del self._links[(link.source, link.target)]
        del self._outgoing[link.source][link.serial]
        del self._incoming[link.target][link.serial]
        del self._owned[self.nodes[link.source].column][link.serial]

    def link_budget(self, link: Link) -> Budget:
        return decay_budget(link.budget, self.clock - link.stamp)

    def set_link_quality(self, link: Link, quality: float) -> None:
        current = self.link_budget(link)
        link.budget = Budget(current.priority, current.durability, quality)
        link.stamp = self.clock

    def tick(self) -> None:
        """Advance the clock by one decay period for every budget."""
        self.clock += 1

    def evict_excess(self, cid: ColumnId, cap: int) -> int:
        """
        Drop the weakest links owned by a column until at most ``cap`` remain.

        Weakest means lowest priority, then lowest quality, then oldest.

        :return: number of links removed
        """
        if cap < 0:
            raise ValueError(f"capacity must be non-negative: {cap}")
        owned = self._owned[cid]
        excess = len(owned) - cap
        if excess <= 0:
            return 0

        def weakness(link):
            budget = self.link_budget(link)
            return (budget.priority, budget.quality, link.serial)

        doomed = sorted(owned.values(), key=weakness)[:excess]
        for link in doomed:
            self.remove_link(link)
        logger.debug("evicted %d links from column %r", excess, self.columns[cid].symbol)
        return excess

    # reporting

    def stats(self) -> NetworkStats:
        per_column = {c.id: len(self._owned[c.id]) for c in self.columns}
        return NetworkStats(
            column_count=len(self.columns),
            node_count=len(self.nodes),
            link_count=len(self._links),
            links_per_column=per_column,
        )

    def export_dot(self, min_expectation: float = 0.0) -> str:
        """
        Render the learned network as a DOT digraph.

        One cluster per column, labeled by its symbol. Only links whose
        predictive implication has ``expectation >= min_expectation`` are
        drawn, labeled with that prediction's truth-value; only nodes touched
        by a drawn link are listed.
        """
        edges = [
            link
            for link in sorted(self._links.values(), key=lambda x: x.serial)
            if expectation(link.forward) >= min_expectation
        ]
        shown = set()
        for link in edges:
            shown.add(link.source)
            shown.add(link.target)

        lines = [
            "digraph temporal_memory {",
            "  rankdir=LR;",
            "  node [shape=circle];",
        ]
        for column in self.columns:
            label = _quote(column.symbol)
            lines.append(f"  subgraph cluster_{column.id} {{")
            lines.append(f"    label={label};")
            for index, nid in enumerate(column.nodes):
                if nid in shown:
                    lines.append(f"    n{nid} [label={_quote(f'{column.symbol}{index}')}];")
            lines.append("  }")
        for link in edges:
            f = link.forward
            label = f"f={f.frequency:.2f},c={f.confidence:.2f}"
            lines.append(f'  n{link.source} -> n{link.target} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'
