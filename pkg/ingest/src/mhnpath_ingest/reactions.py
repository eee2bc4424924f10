"""Corpus cleaning: drop unparseable, unbalanced, multi-product, and duplicate
reactions while keeping per-stage counts for the manifest.

The balance rule, stated precisely: every product heavy atom must carry a map
id; restricted to the product's map ids, the (map, element) multiset must
equal the matching reactant-side entries (elements agree per map, no map
appears twice on one side). Reactant-only maps are allowed: they are leaving
groups the engine treats as introduced atoms.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .lexer import LexError, scan_side, strip_maps

logger = logging.getLogger(__name__)

VALID_SOURCES = {"enz", "syn"}


@dataclass
class CleanStats:
    raw: int = 0
    parsed: int = 0
    balanced: int = 0
    unique: int = 0
    dropped: dict = field(default_factory=dict)

    def drop(self, reason: str):
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    def as_stage_counts(self) -> dict:
        return {"raw": self.raw, "parsed": self.parsed,
                "balanced": self.balanced, "unique": self.unique,
                "dropped": dict(sorted(self.dropped.items()))}


def _check_balance(reactant_atoms, product_atoms) -> str | None:
    """None when balanced, else the drop reason."""
    product_flat = [pair for comp in product_atoms for pair in comp]
    reactant_flat = [pair for comp in reactant_atoms for pair in comp]
    if any(map_id == 0 for _, map_id in product_flat):
        return "unmapped_product_atom"
    for flat, side in ((product_flat, "product"), (reactant_flat, "reactant")):
        maps = [m for _, m in flat if m]
        if len(maps) != len(set(maps)):
            return f"duplicate_map_{side}"
    reactant_by_map = {m: el for el, m in reactant_flat if m}
    for element, map_id in product_flat:
        if map_id not in reactant_by_map:
            return "product_map_missing"
        if reactant_by_map[map_id] != element:
            return "element_mismatch"
    return None


def _dedup_key(reactants: str, product: str) -> str:
    left = ".".join(sorted(strip_maps(reactants).split(".")))
    return f"{left}>>{strip_maps(product)}"


def clean_reactions(raw_path, out_path, source: str = "syn") -> CleanStats:
    """Clean a raw reaction dump into the engine's mapped-reaction TSV.

    Raw format: one reaction SMILES per line ('reactants>>products' or the
    three-field 'reactants>agents>products', agents discarded), optional
    second TSV column overriding the source tag, '#' comments.
    """
    if source not in VALID_SOURCES:
        raise ValueError(f"source must be one of {sorted(VALID_SOURCES)}")
    stats = CleanStats()
    survivors: list[tuple[str, str]] = []
    seen: set[str] = set()

    for lineno, raw_line in enumerate(
            Path(raw_path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        stats.raw += 1
        fields = line.split("\t")
        reaction = fields[0]
        row_source = fields[1] if len(fields) > 1 and fields[1] else source
        if row_source not in VALID_SOURCES:
            stats.drop("bad_source")
            logger.info("line %d: unknown source %r", lineno, row_source)
            continue

        # 'A>>B' and 'A>agents>B' both split into three fields on '>'
        if reaction.count(">") != 2:
            stats.drop("malformed_arrow")
            logger.info("line %d: malformed reaction arrow", lineno)
            continue
        reactants, _agents, products = reaction.split(">")

        try:
            reactant_atoms = scan_side(reactants)
            product_atoms = scan_side(products)
        except LexError as exc:
            stats.drop("unparseable")
            logger.info("line %d: %s", lineno, exc)
            continue
        stats.parsed += 1

        if len(product_atoms) != 1:
            stats.drop("multi_product")
            logger.info("line %d: %d product components", lineno, len(product_atoms))
            continue

        reason = _check_balance(reactant_atoms, product_atoms)
        if reason:
            stats.drop(reason)
            logger.info("line %d: unbalanced (%s)", lineno, reason)
            continue
        stats.balanced += 1

        key = _dedup_key(reactants, products)
        if key in seen:
            stats.drop("duplicate")
            continue
        seen.add(key)
        survivors.append((f"{reactants}>>{products}", row_source))

    stats.unique = len(survivors)
    lines = ["reaction_smiles\tsource"]
    lines += [f"{rxn}\t{src}" for rxn, src in survivors]
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return stats
