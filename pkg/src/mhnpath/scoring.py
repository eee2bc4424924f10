"""User-tunable composite scoring: precursor cost, reaction temperature, and
solvent/reagent toxicity, each normalized to roughly [-1, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .canon import write_canonical_smiles
from .conditions import ReactionConditions
from .smiles import parse_smiles

COST_NORMALIZER = 500.0
TEMP_NORMALIZER = 300.0
TEMP_FLOOR = -100.0


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreWeights:
    w_cost: float = 1.0
    w_temp: float = 1.0
    w_solv: float = 1.0

    def __post_init__(self):
        values = (self.w_cost, self.w_temp, self.w_solv)
        if any(not math.isfinite(w) or w < 0 for w in values):
            raise ValueError("weights must be finite and non-negative")
        if all(w == 0 for w in values):
            raise ValueError("at least one weight must be positive")


@dataclass
class ToxicityDB:
    """canonical SMILES -> class in {-1, 0, +1}; unknown molecules are 0."""

    classes: dict = field(default_factory=dict)

    def add(self, smiles: str, cls: int, source: str = "user") -> None:
        if cls not in (-1, 0, 1):
            raise ValueError(f"toxicity class must be -1, 0 or 1: {cls}")
        key = write_canonical_smiles(parse_smiles(smiles))
        self.classes[key] = (cls, source)

    def lookup(self, canonical_smiles: str) -> int:
        entry = self.classes.get(canonical_smiles)
        return entry[0] if entry else 0


def cost_score(cost: float, cap: float = COST_NORMALIZER) -> float:
    """-cost/cap; pre: cost already clamped into [0, cap] (effective_cost output)."""
    if not 0 <= cost <= cap:
        raise DomainError(f"cost {cost} outside [0, {cap}]")
    return -cost / cap


def temp_score(temperature_c: float, normalizer: float = TEMP_NORMALIZER,
               floor: float = TEMP_FLOOR) -> float:
    """-t/300 with t clamped to [floor, 300]; sub-zero chemistry scores positive."""
    clamped = min(max(temperature_c, floor), normalizer)
    return -clamped / normalizer


def solvent_score(conditions: ReactionConditions, db: ToxicityDB) -> float:
    """Mean toxicity class over all solvents and reagents; empty set scores 0."""
    species = list(conditions.solvents) + list(conditions.reagents)
    if not species:
        return 0.0
    return sum(db.lookup(s) for s in species) / len(species)


def composite_score(cost: float, temp: float, solv: float,
                    weights: ScoreWeights) -> float:
    """Weighted sum of the three component scores; higher is better."""
    for value in (cost, temp, solv):
        if not math.isfinite(value):
            raise DomainError("component scores must be finite")
    return weights.w_cost * cost + weights.w_temp * temp + weights.w_solv * solv


# -- toxicity DB file ----------------------------------------------------------

_TOXDB_HEADER = "canonical_smiles,class,source"
_TOX_SOURCES = {"acs", "supernatural", "t3db", "user"}


def load_toxicity_db(path) -> ToxicityDB:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _TOXDB_HEADER:
        raise ValueError(f"{path}: expected header {_TOXDB_HEADER!r}")
    db = ToxicityDB()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ValueError(f"{path} line {lineno}: expected 3 columns")
        smiles, cls, source = fields
        if source not in _TOX_SOURCES:
            raise ValueError(f"{path} line {lineno}: unknown source {source!r}")
        db.add(smiles, int(cls), source)
    return db


def save_toxicity_db(db: ToxicityDB, path) -> None:
    lines = [_TOXDB_HEADER]
    for key in sorted(db.classes):
        cls, source = db.classes[key]
        lines.append(f"{key},{cls},{source}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
