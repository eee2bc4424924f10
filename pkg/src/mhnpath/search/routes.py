"""Root-to-solved route enumeration and per-route summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..smiles import parse_smiles_set
from .tree import SearchEdge, SearchNode


@dataclass
class Route:
    edges: list = field(default_factory=list)
    leaf: SearchNode | None = None

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def total_cost(self) -> float:
        return self.leaf.cost_usd_per_g if self.leaf is not None else float("nan")

    @property
    def max_temperature(self) -> float:
        return max(e.temperature for e in self.edges) if self.edges else float("nan")

    @property
    def min_solvent_score(self) -> float | None:
        known = [e.solvent_component for e in self.edges
                 if e.solvent_component is not None]
        return min(known) if known else None

    @property
    def score(self) -> float:
        """Composite route score: the sum of edge scores (higher is better)."""
        return sum(e.score for e in self.edges)

    @property
    def step_keys(self) -> tuple[str, ...]:
        """Canonical precursor-set key per step, root-side first."""
        return tuple(
            parse_smiles_set(e.reaction_smiles.partition(">>")[0]).canonical_key
            for e in self.edges
        )

    @classmethod
    def from_step_keys(cls, steps) -> "Route":
        """Reference route given as per-step precursor SMILES strings."""
        edges = [
            SearchEdge(reaction_smiles=f"{step}>>", temperature=0.0, enzyme=0,
                       score=0.0, rule="", label=i)
            for i, step in enumerate(steps)
        ]
        return cls(edges=edges, leaf=None)


def extract_routes(root: SearchNode) -> list[Route]:
    """All root-to-solved paths, best composite route score first."""
    routes: list[Route] = []

    def walk(node: SearchNode, path: list):
        if node.solved:
            routes.append(Route(edges=list(path), leaf=node))
            return
        for edge, child in node.subtrees:
            path.append(edge)
            walk(child, path)
            path.pop()

    if root.solved:
        return []  # nothing to synthesize: no reaction steps to report
    walk(root, [])
    routes.sort(key=lambda r: -r.score)
    return routes
