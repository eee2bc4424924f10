"""Vendor price dumps and toxicity classifications to engine CSVs."""

from __future__ import annotations

import csv
import logging
from pathlib import Path

from .lexer import LexError, scan_component

logger = logging.getLogger(__name__)

# dump label -> engine toxicity class
_CLASS_LABELS = {
    "toxic": -1, "-1": -1,
    "neutral": 0, "0": 0,
    "green": 1, "natural": 1, "+1": 1, "1": 1,
}

# dump source -> engine source tag
_TOX_SOURCES = {
    "acs": "acs", "acs_solvent_guide": "acs",
    "supernatural": "supernatural", "supernatural3": "supernatural",
    "t3db": "t3db",
}


def _valid_smiles(smiles: str) -> bool:
    try:
        for part in smiles.split("."):
            scan_component(part)
        return True
    except LexError as exc:
        logger.info("dropping %r: %s", smiles, exc)
        return False


def build_catalog(dump_path, out_path) -> dict:
    """Price dump CSV (smiles,price_usd_per_g,vendor[,retrieved_at]) to the
    engine catalog format; duplicate (smiles, vendor) rows keep the minimum."""
    best: dict[tuple[str, str], tuple[float, str]] = {}
    rows_in = 0
    dropped = 0
    with open(dump_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"smiles", "price_usd_per_g", "vendor"}
        if not required <= set(reader.fieldnames or []):
            raise ValueError(f"{dump_path}: need columns {sorted(required)}")
        for row in reader:
            rows_in += 1
            smiles = row["smiles"].strip()
            try:
                price = float(row["price_usd_per_g"])
            except ValueError:
                dropped += 1
                continue
            if price < 0 or not _valid_smiles(smiles):
                dropped += 1
                continue
            key = (smiles, row["vendor"].strip())
            stamp = (row.get("retrieved_at") or "").strip()
            if key not in best or price < best[key][0]:
                best[key] = (price, stamp)

    lines = ["canonical_smiles,usd_per_g,source,retrieved_at"]
    for (smiles, vendor), (price, stamp) in sorted(best.items()):
        lines.append(f"{smiles},{price},{vendor},{stamp}")
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"rows": rows_in, "entries": len(best), "dropped": dropped}


def build_toxdb(dump_path, out_path) -> dict:
    """Toxicity dump CSV (smiles,label,source) to the engine toxicity DB.

    Labels map to {-1, 0, +1}; molecules absent from the dump are simply not
    emitted (the engine treats unknown molecules as neutral)."""
    rows_in = 0
    dropped = 0
    classes: dict[str, tuple[int, str]] = {}
    with open(dump_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"smiles", "label", "source"}
        if not required <= set(reader.fieldnames or []):
            raise ValueError(f"{dump_path}: need columns {sorted(required)}")
        for row in reader:
            rows_in += 1
            label = row["label"].strip().lower()
            smiles = row["smiles"].strip()
            if label not in _CLASS_LABELS or not _valid_smiles(smiles):
                dropped += 1
                continue
            source = _TOX_SOURCES.get(row["source"].strip().lower(), "user")
            classes[smiles] = (_CLASS_LABELS[label], source)

    lines = ["canonical_smiles,class,source"]
    for smiles, (cls, source) in sorted(classes.items()):
        lines.append(f"{smiles},{cls},{source}")
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"rows": rows_in, "entries": len(classes), "dropped": dropped}
