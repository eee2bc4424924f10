import json
import math

import pytest

from mhnpath import parse_smiles, parse_smiles_set
from mhnpath.conditions import TablePredictor
from mhnpath.mhn import Ensemble, ModelConfig, init_model
from mhnpath.pricing import BuyabilityPolicy, PriceCatalog
from mhnpath.scoring import ScoreWeights, ToxicityDB
from mhnpath.search import (
    Prioritizers,
    SearchConfig,
    Services,
    extract_routes,
    run_search,
    serialize_tree,
)
from mhnpath.search.run import replay_edge
from mhnpath.search.tree import MaxPriorityQueue
from mhnpath.templates import TemplateLibrary, parse_template

from universes import bfs_finds_route, make_universe


def simple_setup(rules, prices, beta=0.05, seed=2, **cfg_kwargs):
    lib = TemplateLibrary([parse_template(r, id=i) for i, r in enumerate(rules)])
    model = init_model(ModelConfig(fp_bits=128, d_assoc=16, seed=seed,
                                   beta=beta, dropout=0.0), lib)
    ens = Ensemble([model], lib)
    catalog = PriceCatalog()
    for smiles, price in prices.items():
        catalog.add(smiles, price, "test")
    services = Services(catalog=catalog, toxicity=ToxicityDB(),
                        conditions=TablePredictor())
    cfg = SearchConfig(top_n_templates=len(rules), **cfg_kwargs)
    return lib, Prioritizers(synthetic=ens), cfg, services


def test_buyable_target_zero_expansions():
    lib, pris, cfg, services = simple_setup(
        ["[C:1][O:2]>>[C:1].[O:2]"], {"CCO": 1.0})
    log = []
    root = run_search(parse_smiles("CCO"), pris, cfg, services, log_rows=log)
    assert root.solved
    assert root.subtrees == []
    assert all(row["children_added"] == 0 for row in log)


def test_one_step_universe():
    # target CCOC cleaves into CCO + C, both catalogued
    lib, pris, cfg, services = simple_setup(
        ["[C:1][O:2][C:3]>>[C:1][O:2].[C:3]"],
        {"CCO": 1.0, "C": 0.5, "CC": 2.0, "CO": 1.5})
    root = run_search(parse_smiles("CCOC"), pris, cfg, services)
    solved_children = [c for _, c in root.subtrees if c.solved]
    assert solved_children
    best = min(solved_children, key=lambda c: c.cost_usd_per_g)
    assert best.cost_usd_per_g == 1.5  # CCO at $1 plus C at $0.5
    routes = extract_routes(root)
    assert len(routes) >= 1
    assert routes[0].length == 1


def test_cheaper_child_expanded_first():
    # two applicable templates produce a cheap and an expensive precursor set;
    # with weights (1,0,0) the cheap child must be popped first
    rules = ["[C:1][O:2]>>[C:1].[O:2]", "[C:1][N:2]>>[C:1].[N:2]"]
    prices = {"OCC": 10.0, "C": 10.0, "NC": 400.0, "CCO": 2000.0}
    lib, pris, cfg, services = simple_setup(
        rules, prices, weights=ScoreWeights(1.0, 0.0, 0.0), max_depth=3)
    target = parse_smiles("NCCO")  # C-O cleavage -> OC + C... and C-N -> N + CCO
    log = []
    run_search(target, pris, cfg, services, log_rows=log)
    # log rows after the root pop: priorities must be non-increasing for pops
    # that happened after all pushes (root expansion pushes everything first)
    popped = [row["popped_priority"] for row in log]
    assert popped[0] == math.inf
    child_pops = popped[1:]
    assert child_pops == sorted(child_pops, reverse=True)


def test_identity_cycle_discarded():
    lib, pris, cfg, services = simple_setup(
        ["[C:1][O:2]>>[C:1][O:2]"], {})  # identity: child == parent
    root = run_search(parse_smiles("CCO"), pris, cfg, services)
    assert root.subtrees == []


def test_all_buyable_child_marked_solved():
    lib, pris, cfg, services = simple_setup(
        ["[C:1][O:2][C:3]>>[C:1][O:2].[C:3]"], {"CO": 0.5, "C": 0.5})
    root = run_search(parse_smiles("COC"), pris, cfg, services)
    assert any(child.solved for _, child in root.subtrees)


def test_same_precursors_two_templates_two_edges():
    rules = ["[C:1][O:2][C:3]>>[C:1][O:2].[C:3]",
             "[C:1][O:2][C;H3:3]>>[C:1][O:2].[C:3]"]
    lib, pris, cfg, services = simple_setup(rules, {"CO": 0.5, "C": 0.5})
    root = run_search(parse_smiles("COC"), pris, cfg, services)
    keys = [(edge.rule, child.key) for edge, child in root.subtrees]
    child_keys = {k for _, k in keys}
    assert len(keys) == 2
    assert len(child_keys) == 1  # same precursor set, two distinct edges


def test_route_edges_replay(fixture_library):
    for seed in range(5):
        target, pris, cfg, services, lib = make_universe(seed)
        root = run_search(target, pris, cfg, services)
        for route in extract_routes(root):
            for edge in route.edges:
                assert replay_edge(edge, lib)


def test_pop_order_invariant():
    queue = MaxPriorityQueue()
    queue.push(math.inf, "root")
    queue.push(0.5, "a")
    queue.push(0.9, "b")
    queue.push(0.9, "c")
    queue.push(-2.0, "d")
    order = [queue.pop()[1] for _ in range(len(queue))]
    assert order == ["root", "b", "c", "a", "d"]


def test_expansion_and_time_limits():
    target, pris, cfg, services, lib = make_universe(3)
    cfg.max_expansions = 2
    log = []
    run_search(target, pris, cfg, services, log_rows=log)
    expansions = sum(1 for row in log if row["templates_tried"] > 0)
    assert expansions <= 2
    cfg.max_expansions = None
    cfg.time_limit_s = 0.0
    log2 = []
    root = run_search(target, pris, cfg, services, log_rows=log2)
    assert log2 == [] and root.subtrees == []


def test_route_limit_stops_search():
    lib, pris, cfg, services = simple_setup(
        ["[C:1][O:2][C:3]>>[C:1][O:2].[C:3]", "[C:1][C:2]>>[C:1].[C:2]"],
        {"CO": 0.5, "C": 0.5, "CCO": 1.0, "CC": 1.0, "OC": 0.5},
        route_limit=1, max_depth=4)
    root = run_search(parse_smiles("CCOC"), pris, cfg, services)
    solved = [c for _, c in root.subtrees if c.solved]
    assert len(solved) >= 1


def test_determinism_byte_identical_trees():
    for seed in (0, 4):
        target, pris, cfg, services, lib = make_universe(seed)
        a = serialize_tree(run_search(target, pris, cfg, services))
        b = serialize_tree(run_search(target, pris, cfg, services))
        assert a == b


def test_search_agrees_with_bfs_oracle_small():
    agree = 0
    for seed in range(8):
        target, pris, cfg, services, lib = make_universe(seed)
        root = run_search(target, pris, cfg, services)
        greedy_found = root.solved or bool(extract_routes(root))
        oracle_found = bfs_finds_route(target, lib, services, cfg)
        assert greedy_found == oracle_found, f"universe {seed}"
        agree += 1
    assert agree == 8


def test_diamond_two_distinct_routes():
    # target C-O-N; cleaving C-O first or O-N first gives two 2-step routes
    rules = ["[C:1][O:2]>>[C:1].[O:2]", "[O:1][N:2]>>[O:1].[N:2]"]
    prices = {"C": 1.0, "O": 1.0, "N": 1.0}
    lib, pris, cfg, services = simple_setup(rules, prices, max_depth=3)
    root = run_search(parse_smiles("CON"), pris, cfg, services)
    routes = extract_routes(root)
    assert len(routes) == 2
    assert sorted(r.length for r in routes) == [2, 2]
    assert {r.step_keys[-1] for r in routes} == {"C.O", "N.O"}


def test_depth_limit_respected():
    target, pris, cfg, services, lib = make_universe(7)

    def max_depth(node):
        if not node.subtrees:
            return node.depth
        return max(max_depth(child) for _, child in node.subtrees)

    root = run_search(target, pris, cfg, services)
    assert max_depth(root) <= cfg.max_depth


def test_solvent_weighting_changes_priority():
    from mhnpath import write_canonical_smiles
    from mhnpath.conditions import ReactionConditions, canonical_reaction_key

    rules = ["[C:1][O:2][C:3]>>[C:1][O:2].[C:3]"]
    lib = TemplateLibrary([parse_template(r, id=i) for i, r in enumerate(rules)])
    model = init_model(ModelConfig(fp_bits=128, d_assoc=16, seed=0, dropout=0.0), lib)
    ens = Ensemble([model], lib)
    catalog = PriceCatalog()
    catalog.add("CO", 0.5, "t")
    catalog.add("C", 0.5, "t")
    tox = ToxicityDB()
    tox.add("ClCCl", -1, "acs")
    dcm = write_canonical_smiles(parse_smiles("ClCCl"))
    table_row = ReactionConditions(temperature_c=0.0, solvents=(dcm,),
                                   provenance="table")
    predictor = TablePredictor(table={
        canonical_reaction_key("C.CO>>COC"): [(1, table_row, 1.0)],
    })
    services = Services(catalog=catalog, toxicity=tox, conditions=predictor)
    cfg = SearchConfig(weights=ScoreWeights(0.0, 0.0, 1.0), top_n_templates=1)
    root = run_search(parse_smiles("COC"), Prioritizers(synthetic=ens), cfg, services)
    edge, child = root.subtrees[0]
    assert edge.solvent_component == -1.0
    assert edge.score == -1.0
