"""Tree JSON (stable, byte-reproducible), DOT export, and the expansion log."""

from __future__ import annotations

import json
from pathlib import Path

from ..smiles import parse_smiles_set
from .tree import SearchEdge, SearchNode

_DEPRECATED_KEYS = {"type_dis", "buyable"}
_NODE_KEYS = ["smiles", "cost_usd_per_g", "depth", "subtrees"]
_EDGE_KEYS = ["reaction_smiles", "temperature", "enzyme", "score", "rule", "label"]
_KELVIN_OFFSET = 273.15


class FormatError(ValueError):
    def __init__(self, message: str, path: str = "$"):
        self.json_path = path
        super().__init__(f"{message} at {path}")


def serialize_tree(root: SearchNode, style: str = "celsius") -> str:
    """Canonical JSON text: fixed key order, 2-space indent, UTF-8.

    style selects the temperature unit on edges: "celsius" (engine-internal)
    or "kelvin".
    """
    if style not in ("celsius", "kelvin"):
        raise ValueError(f"unknown serialization style {style!r}")

    def node_obj(node: SearchNode) -> dict:
        return {
            "smiles": node.key,
            "cost_usd_per_g": node.cost_usd_per_g,
            "depth": node.depth,
            "subtrees": [edge_obj(edge, child) for edge, child in node.subtrees],
        }

    def edge_obj(edge: SearchEdge, child: SearchNode) -> dict:
        temperature = edge.temperature
        if style == "kelvin":
            temperature = temperature + _KELVIN_OFFSET
        return {
            "reaction_smiles": edge.reaction_smiles,
            "temperature": temperature,
            "enzyme": edge.enzyme,
            "score": edge.score,
            "rule": edge.rule,
            "label": edge.label,
            "subtree": node_obj(child),
        }

    return json.dumps(node_obj(root), indent=2, ensure_ascii=False) + "\n"


def deserialize_tree(text: str) -> SearchNode:
    """Rebuild a tree from JSON; deprecated keys are dropped, missing required
    keys raise FormatError naming the JSON path."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return _node_from(data, "$")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise FormatError(f"missing key {key!r}", path)
    return obj[key]


def _node_from(obj, path: str) -> SearchNode:
    if not isinstance(obj, dict):
        raise FormatError("node must be an object", path)
    unknown = set(obj) - set(_NODE_KEYS) - _DEPRECATED_KEYS
    if unknown:
        raise FormatError(f"unknown node key {sorted(unknown)[0]!r}", path)
    smiles = _require(obj, "smiles", path)
    cost = _require(obj, "cost_usd_per_g", path)
    depth = _require(obj, "depth", path)
    subtrees = _require(obj, "subtrees", path)
    if not isinstance(subtrees, list):
        raise FormatError("subtrees must be a list", path + ".subtrees")
    members = parse_smiles_set(smiles).members if smiles else ()
    # Buyability is not serialized; deserialized nodes are inspection-only and
    # carry solved=False. Route extraction applies to in-memory trees.
    node = SearchNode(members, cost_usd_per_g=cost, depth=depth, solved=False)
    for i, entry in enumerate(subtrees):
        edge, child = _edge_from(entry, f"{path}.subtrees[{i}]")
        node.subtrees.append((edge, child))
    return node


def _edge_from(obj, path: str):
    if not isinstance(obj, dict):
        raise FormatError("edge must be an object", path)
    unknown = set(obj) - set(_EDGE_KEYS) - {"subtree"} - _DEPRECATED_KEYS
    if unknown:
        raise FormatError(f"unknown edge key {sorted(unknown)[0]!r}", path)
    values = {key: _require(obj, key, path) for key in _EDGE_KEYS}
    subtree = _require(obj, "subtree", path)
    edge = SearchEdge(
        reaction_smiles=values["reaction_smiles"],
        temperature=values["temperature"],
        enzyme=values["enzyme"],
        score=values["score"],
        rule=values["rule"],
        label=values["label"],
    )
    child = _node_from(subtree, path + ".subtree")
    return edge, child


# -- DOT export -----------------------------------------------------------------

def write_dot(root: SearchNode) -> str:
    """Graphviz view: nodes labeled with canonical key and cost, edges with
    rule id and temperature."""
    lines = ["digraph retrotree {", '  node [shape=box, fontsize=10];']
    counter = [0]

    def visit(node: SearchNode) -> int:
        me = counter[0]
        counter[0] += 1
        label = f"{node.key}\\n${node.cost_usd_per_g:.2f}/g"
        lines.append(f'  n{me} [label="{label}"];')
        for edge, child in node.subtrees:
            kid = visit(child)
            rule_id = edge.template_id if edge.template_id is not None else "?"
            lines.append(
                f'  n{me} -> n{kid} [label="t{rule_id} @ {edge.temperature:.1f}C"];')
        return me

    visit(root)
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- expansion log ----------------------------------------------------------------

_LOG_HEADER = "step,popped_priority,node_key,templates_tried,children_added"


def write_expansion_log(rows, path) -> None:
    lines = [_LOG_HEADER]
    for row in rows:
        lines.append(f"{row['step']},{row['popped_priority']!r},{row['node_key']},"
                     f"{row['templates_tried']},{row['children_added']}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
