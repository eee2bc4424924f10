"""Synthetic chemistry universes for search testing: random acyclic molecules,
bond-cleavage template sets, and a catalog of purchasable fragments. The BFS
oracle explores the same node semantics exhaustively, with no ranking, screen,
or priority shortcuts."""

from __future__ import annotations

import random
from collections import deque

from mhnpath import parse_smiles, write_canonical_smiles
from mhnpath.elements import SYMBOL_TO_NUMBER, implicit_hydrogens
from mhnpath.mhn import Ensemble, ModelConfig, init_model
from mhnpath.molecule import Atom, Bond, BondOrder, Molecule
from mhnpath.pricing import BuyabilityPolicy, PriceCatalog, is_buyable, lookup_price
from mhnpath.conditions import TablePredictor
from mhnpath.scoring import ToxicityDB
from mhnpath.search import Prioritizers, SearchConfig, Services
from mhnpath.templates import TemplateLibrary, apply_template, parse_template

_MAX_VALENCE = {"C": 4, "N": 3, "O": 2, "S": 2}

CLEAVAGE_PAIRS = [("C", "C"), ("C", "N"), ("C", "O"), ("C", "S"),
                  ("N", "O"), ("N", "N"), ("O", "O"), ("S", "S")]


def random_molecule(rng: random.Random, n_atoms: int) -> Molecule:
    symbols = ["C", "C", "C", "N", "O", "S"]
    atoms = [rng.choice(symbols)]
    open_slots = [_MAX_VALENCE[atoms[0]]]
    bonds: list[tuple[int, int]] = []
    while len(atoms) < n_atoms:
        anchors = [i for i, s in enumerate(open_slots) if s > 0]
        if not anchors:
            break
        anchor = rng.choice(anchors)
        symbol = rng.choice(symbols)
        atoms.append(symbol)
        open_slots[anchor] -= 1
        open_slots.append(_MAX_VALENCE[symbol] - 1)
        bonds.append((anchor, len(atoms) - 1))
    built_atoms = []
    for i, symbol in enumerate(atoms):
        element = SYMBOL_TO_NUMBER[symbol]
        degree = sum(1 for a, b in bonds if i in (a, b))
        built_atoms.append(Atom(element=element,
                                hydrogens=implicit_hydrogens(element, degree, False)))
    return Molecule(built_atoms,
                    [Bond(a, b, BondOrder.SINGLE) for a, b in bonds])


def make_universe(seed: int):
    """Returns (target, prioritizers, cfg, services, library)."""
    rng = random.Random(seed)

    pairs = rng.sample(CLEAVAGE_PAIRS, k=rng.randint(4, 7))
    rules = [f"[{a}:1][{b}:2]>>[{a}:1].[{b}:2]" for a, b in pairs]
    library = TemplateLibrary(
        [parse_template(r, id=i) for i, r in enumerate(rules)])

    catalog = PriceCatalog()
    seen = set()
    for _ in range(rng.randint(20, 60)):
        mol = random_molecule(rng, rng.randint(1, 3))
        key = write_canonical_smiles(mol)
        if key in seen:
            continue
        seen.add(key)
        catalog.add(key, round(rng.uniform(0.1, 60.0), 2), "universe")
    # sprinkle a few mid-sized buyables
    for _ in range(rng.randint(0, 6)):
        mol = random_molecule(rng, rng.randint(4, 5))
        key = write_canonical_smiles(mol)
        if key not in seen:
            seen.add(key)
            catalog.add(key, round(rng.uniform(1.0, 90.0), 2), "universe")

    target = random_molecule(rng, rng.randint(5, 8))

    cfg_model = ModelConfig(fp_bits=128, d_assoc=8, mol_layers=1, temp_layers=1,
                            dropout=0.0, seed=seed)
    ensemble = Ensemble([init_model(cfg_model, library)], library)
    prioritizers = Prioritizers(synthetic=ensemble)

    cfg = SearchConfig(max_depth=rng.randint(2, 4),
                       top_n_templates=len(library),
                       max_matches=8,
                       seed=seed)
    services = Services(catalog=catalog, toxicity=ToxicityDB(),
                        conditions=TablePredictor())
    return target, prioritizers, cfg, services, library


def bfs_finds_route(target: Molecule, library: TemplateLibrary,
                    services: Services, cfg: SearchConfig) -> bool:
    """Exhaustive breadth-first reference: no ranking, no screen, no priorities."""
    policy = cfg.policy

    def buyable(mol):
        return is_buyable(lookup_price(services.catalog, mol), policy)

    def state(members):
        return ".".join(sorted(write_canonical_smiles(m) for m in members))

    queue = deque([(  # members, depth, ancestor states
        (target,), 0, frozenset())])
    while queue:
        members, depth, ancestors = queue.popleft()
        flags = [buyable(m) for m in members]
        if all(flags):
            return True
        if depth >= cfg.max_depth:
            continue
        # same member choice as the greedy search: most expensive non-buyable
        from mhnpath.pricing import effective_cost

        candidates = [
            ((-effective_cost(lookup_price(services.catalog, m), policy),
              write_canonical_smiles(m)), i)
            for i, m in enumerate(members) if not flags[i]
        ]
        member_index = min(candidates)[1]
        member = members[member_index]
        others = tuple(m for i, m in enumerate(members) if i != member_index)
        blocked = ancestors | {state(members)}
        for template in library:
            for result in apply_template(template, member, cfg.max_matches):
                child = others + tuple(result.members)
                if state(child) in blocked:
                    continue
                queue.append((child, depth + 1, blocked))
    return False
