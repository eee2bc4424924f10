"""Search tree data model: nodes are molecule sets, edges are reactions."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from ..canon import write_canonical_smiles
from ..conditions import TablePredictor
from ..molecule import Molecule
from ..pricing import BuyabilityPolicy, PriceCatalog, effective_cost, is_buyable, lookup_price
from ..scoring import ScoreWeights, ToxicityDB


class SearchConfigError(ValueError):
    pass


@dataclass
class SearchConfig:
    max_depth: int = 5
    time_limit_s: float | None = None
    max_expansions: int | None = None
    top_n_templates: int = 50
    route_limit: int | None = None
    max_matches: int = 8
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    policy: BuyabilityPolicy = field(default_factory=BuyabilityPolicy)
    cost_accept: float | None = None  # absolute-cost early accept, off by default
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise SearchConfigError("max_depth must be >= 1")
        if self.top_n_templates < 1:
            raise SearchConfigError("top_n_templates must be >= 1")
        if self.max_matches < 1:
            raise SearchConfigError("max_matches must be >= 1")


@dataclass
class Services:
    catalog: PriceCatalog
    toxicity: ToxicityDB
    conditions: TablePredictor  # anything with .predict(reaction_smiles)


@dataclass
class Prioritizers:
    enzymatic: object | None = None
    synthetic: object | None = None

    def __post_init__(self):
        if self.enzymatic is None and self.synthetic is None:
            raise SearchConfigError("need at least one ensemble")

    def items(self):
        out = []
        if self.enzymatic is not None:
            out.append(("enzymatic", self.enzymatic))
        if self.synthetic is not None:
            out.append(("synthetic", self.synthetic))
        return out


@dataclass
class SearchEdge:
    reaction_smiles: str
    temperature: float
    enzyme: int
    score: float
    rule: str
    label: int
    # in-memory extras, never serialized
    template_id: int | None = None
    solvent_component: float | None = None
    cost_component: float | None = None
    temp_component: float | None = None


class SearchNode:
    """A set of molecules to source, with the reaction edges explored below it."""

    __slots__ = ("members", "cost_usd_per_g", "depth", "subtrees", "solved",
                 "key", "member_keys", "ancestor_keys")

    def __init__(self, members, cost_usd_per_g: float, depth: int,
                 solved: bool, ancestor_keys: frozenset = frozenset()):
        ordered = sorted(members, key=write_canonical_smiles)
        self.members: tuple[Molecule, ...] = tuple(ordered)
        self.member_keys: tuple[str, ...] = tuple(
            write_canonical_smiles(m) for m in self.members)
        self.key: str = ".".join(self.member_keys)
        self.cost_usd_per_g = cost_usd_per_g
        self.depth = depth
        self.solved = solved
        self.subtrees: list[tuple[SearchEdge, "SearchNode"]] = []
        self.ancestor_keys = ancestor_keys

    def __repr__(self):
        return (f"SearchNode({self.key!r}, cost={self.cost_usd_per_g}, "
                f"depth={self.depth}, solved={self.solved})")


def make_node(members, services: Services, policy: BuyabilityPolicy, depth: int,
              ancestor_keys: frozenset = frozenset()) -> SearchNode:
    members = list(members)
    prices = [lookup_price(services.catalog, m) for m in members]
    cost = sum(effective_cost(p, policy) for p in prices)
    solved = all(is_buyable(p, policy) for p in prices)
    return SearchNode(members, cost_usd_per_g=cost, depth=depth,
                      solved=solved, ancestor_keys=ancestor_keys)


class MaxPriorityQueue:
    """Pop order: descending priority, ties by ascending insertion counter."""

    def __init__(self):
        self._heap: list = []
        self._counter = 0

    def push(self, priority: float, item) -> None:
        heapq.heappush(self._heap, (-priority, self._counter, item))
        self._counter += 1

    def pop(self):
        neg, _, item = heapq.heappop(self._heap)
        return -neg, item

    def __len__(self):
        return len(self._heap)
