"""Global greedy best-first exploration of the retrosynthetic tree.

One tree-wide max-priority queue; the root enters with infinite priority and
every expansion scores its children by the user-weighted combination of
precursor cost, predicted temperature, and solvent/reagent toxicity.
"""

from __future__ import annotations

import math
import time

from ..canon import write_canonical_smiles
from ..conditions import aggregate_temperature
from ..mhn.ensemble import rank_templates
from ..molecule import Molecule
from ..pricing import effective_cost, is_buyable, lookup_price
from ..scoring import composite_score, cost_score, solvent_score, temp_score
from ..templates import apply_template
from .tree import (
    MaxPriorityQueue,
    Prioritizers,
    SearchConfig,
    SearchEdge,
    SearchNode,
    Services,
    make_node,
)


def run_search(target: Molecule, prioritizers: Prioritizers, cfg: SearchConfig,
               services: Services, log_rows: list | None = None) -> SearchNode:
    """Explore retrosynthetic space below target; returns the full tree.

    Terminates on queue exhaustion, the time limit, the expansion limit, or
    once route_limit solved nodes exist. Ctrl-C stops the loop cleanly and the
    partial tree is returned.
    """
    root = make_node([target], services, cfg.policy, depth=0)
    queue = MaxPriorityQueue()
    queue.push(math.inf, root)
    started = time.monotonic()
    expansions = 0
    solved_found = 1 if root.solved else 0
    step = 0

    try:
        while len(queue):
            if cfg.time_limit_s is not None and time.monotonic() - started >= cfg.time_limit_s:
                break
            if cfg.max_expansions is not None and expansions >= cfg.max_expansions:
                break
            if cfg.route_limit is not None and solved_found >= cfg.route_limit:
                break
            priority, node = queue.pop()
            step += 1
            if _goal_check(node, cfg):
                if log_rows is not None:
                    log_rows.append({"step": step, "popped_priority": priority,
                                     "node_key": node.key, "templates_tried": 0,
                                     "children_added": 0})
                continue
            expansions += 1
            member_index = _pick_member(node, services, cfg)
            children, templates_tried = expand(
                node, member_index, prioritizers, cfg, services)
            for edge, child in children:
                node.subtrees.append((edge, child))
                queue.push(edge.score, child)
                if child.solved:
                    solved_found += 1
            if log_rows is not None:
                log_rows.append({"step": step, "popped_priority": priority,
                                 "node_key": node.key,
                                 "templates_tried": templates_tried,
                                 "children_added": len(children)})
    except KeyboardInterrupt:
        pass
    return root


def _goal_check(node: SearchNode, cfg: SearchConfig) -> bool:
    if node.solved or node.depth >= cfg.max_depth:
        return True
    if cfg.cost_accept is not None and node.cost_usd_per_g <= cfg.cost_accept:
        return True
    return False


def _pick_member(node: SearchNode, services: Services, cfg: SearchConfig) -> int:
    """Most expensive non-buyable member; ties broken by canonical SMILES."""
    best = None
    for idx, mol in enumerate(node.members):
        price = lookup_price(services.catalog, node.member_keys[idx])
        if is_buyable(price, cfg.policy):
            continue
        rank = (-effective_cost(price, cfg.policy), node.member_keys[idx])
        if best is None or rank < best[0]:
            best = (rank, idx)
    if best is None:
        raise ValueError("expand called on a node with no non-buyable member")
    return best[1]


def expand(node: SearchNode, member_index: int, prioritizers: Prioritizers,
           cfg: SearchConfig, services: Services) -> tuple[list, int]:
    """Children from applying the top-ranked templates of every ensemble to one
    member. Returns (list of (edge, child), number of templates tried)."""
    member = node.members[member_index]
    member_key = node.member_keys[member_index]
    others = [m for i, m in enumerate(node.members) if i != member_index]

    blocked = node.ancestor_keys | {node.key}
    children: list[tuple[SearchEdge, SearchNode]] = []
    tried = 0
    seen_child: set[tuple[str, str]] = set()  # (rule text, child key) pairs

    for source_name, ensemble in prioritizers.items():
        ranked = rank_templates(ensemble, member, cfg.top_n_templates, screen=True)
        tried += len(ranked)
        for template_id, model_score in ranked:
            template = ensemble.library[template_id]
            for precursor_set in apply_template(template, member, cfg.max_matches):
                child = make_node(
                    list(others) + list(precursor_set.members),
                    services, cfg.policy, depth=node.depth + 1,
                    ancestor_keys=blocked)
                if child.key in blocked:
                    continue  # cycle within this branch
                if (template.text, child.key) in seen_child:
                    continue
                seen_child.add((template.text, child.key))

                reaction_smiles = f"{precursor_set.canonical_key}>>{member_key}"
                candidates = services.conditions.predict(reaction_smiles)
                temperature = aggregate_temperature(candidates, k=10)
                top_conditions = candidates[0][0]

                new_cost = sum(
                    effective_cost(lookup_price(services.catalog, m), cfg.policy)
                    for m in precursor_set.members)
                c_score = cost_score(min(new_cost, cfg.policy.nonbuyable_cap),
                                     cfg.policy.nonbuyable_cap)
                t_score = temp_score(temperature)
                s_score = solvent_score(top_conditions, services.toxicity)
                priority = composite_score(c_score, t_score, s_score, cfg.weights)

                edge = SearchEdge(
                    reaction_smiles=reaction_smiles,
                    temperature=temperature,
                    enzyme=template.enzyme if source_name == "enzymatic" else 0,
                    score=priority,
                    rule=template.text,
                    label=len(children),
                    template_id=template_id,
                    solvent_component=s_score,
                    cost_component=c_score,
                    temp_component=t_score,
                )
                children.append((edge, child))
    return children, tried


def replay_edge(edge: SearchEdge, library) -> bool:
    """Check edge consistency: applying its rule to the expanded molecule must
    regenerate the recorded precursor set (canonical-key equality)."""
    from ..smiles import parse_smiles
    from ..templates import parse_template

    left, _, right = edge.reaction_smiles.partition(">>")
    product = parse_smiles(right)
    template = parse_template(edge.rule)
    # left was emitted from a canonical_key, so it is already sorted.
    for result in apply_template(template, product, max_matches=64):
        if result.canonical_key == left:
            return True
    return False
