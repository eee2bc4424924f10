"""Regenerate the bundled test fixtures.

Run from the repo root:  python3 tools/make_fixtures.py
Writes tests/fixtures/*. Deterministic; safe to re-run.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from mhnpath import parse_smiles, parse_smiles_set, write_canonical_smiles  # noqa: E402
from mhnpath.smiles import canonical_set_key  # noqa: E402
from mhnpath.templates import apply_template, extract_template  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

# -- mapped substituent strings -------------------------------------------------

R_GROUPS = {
    "Me": "[CH3:{0}]",
    "Et": "[CH2:{0}][CH3:{1}]",
    "Pr": "[CH2:{0}][CH2:{1}][CH3:{2}]",
    "iPr": "[CH:{0}]([CH3:{1}])[CH3:{2}]",
    "Ph": "[c:{0}]1[cH:{1}][cH:{2}][cH:{3}][cH:{4}][cH:{5}]1",
}


def fill(name: str, base: int) -> str:
    template = R_GROUPS[name]
    count = template.count("{")
    return template.format(*range(base, base + count))


# -- reaction families -----------------------------------------------------------
# Each returns (reactants_smiles, product_smiles); maps 1-9 are core atoms,
# 10+/20+/30+ are substituents.

def esterification(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[C:1](=[O:2])([OH:3]){a}.[OH:4]{b}",
            f"[C:1](=[O:2])([O:4]{b}){a}")


def amide_coupling(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[C:1](=[O:2])([OH:3]){a}.[NH2:4]{b}",
            f"[C:1](=[O:2])([NH:4]{b}){a}")


def williamson_ether(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[OH:1]{a}.[Br:3][CH2:2]{b}",
            f"[O:1]({a})[CH2:2]{b}")


def imine_condensation(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[C:1](=[O:2])({a}){b}.[NH2:3][CH3:30]",
            f"[C:1](=[N:3][CH3:30])({a}){b}")


def alkene_hydration(r1, _r2):
    a = fill(r1, 10)
    return (f"[CH:1](=[CH2:2]){a}.[OH2:3]",
            f"[CH:1]([OH:3])([CH3:2]){a}")


def alcohol_oxidation(r1, _r2):
    a = fill(r1, 10)
    return (f"[CH2:1]([OH:2]){a}",
            f"[CH:1](=[O:2]){a}")


def n_alkylation(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[NH2:1]{a}.[Br:3][CH2:2]{b}",
            f"[NH:1]({a})[CH2:2]{b}")


def aromatic_bromination(r1, _r2):
    a = fill(r1, 10)
    return (f"[cH:1]1[cH:2][c:3]({a})[cH:4][cH:5][cH:6]1.[Br:7][Br:8]",
            f"[c:1]1([Br:7])[cH:2][c:3]({a})[cH:4][cH:5][cH:6]1")


def ketone_reduction(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[C:1](=[O:2])({a}){b}",
            f"[CH:1]([OH:2])({a}){b}")


def ester_hydrolysis(r1, r2):
    a, b = fill(r1, 10), fill(r2, 20)
    return (f"[C:1](=[O:2])([O:3]{b}){a}.[OH2:4]",
            f"[C:1](=[O:2])([OH:4]){a}")


FAMILIES = [
    ("esterification", esterification, "syn"),
    ("amide_coupling", amide_coupling, "syn"),
    ("williamson_ether", williamson_ether, "syn"),
    ("imine_condensation", imine_condensation, "enz"),
    ("alkene_hydration", alkene_hydration, "enz"),
    ("alcohol_oxidation", alcohol_oxidation, "enz"),
    ("n_alkylation", n_alkylation, "syn"),
    ("aromatic_bromination", aromatic_bromination, "syn"),
    ("ketone_reduction", ketone_reduction, "enz"),
    ("ester_hydrolysis", ester_hydrolysis, "syn"),
]

ALKYLS = ["Me", "Et", "Pr", "iPr"]
WITH_PH = ALKYLS + ["Ph"]


def reaction_rows():
    rows = []
    seen = set()
    combos = [(x, y) for x in ALKYLS for y in ALKYLS]
    ph_combos = [("Ph", y) for y in ALKYLS] + [(x, "Ph") for x in ALKYLS]
    for fam_name, fam, source in FAMILIES:
        for r1, r2 in combos + ph_combos:
            if fam is williamson_ether and r1 == "Ph":
                continue  # phenol O-H is fine, but keep phenyl only on the O side
            if fam is alkene_hydration and r1 == "Ph":
                pass  # styrene hydration is fine
            try:
                react, prod = fam(r1, r2)
                reactants = parse_smiles_set(react)
                product = parse_smiles(prod)
            except Exception:
                continue
            key = f"{reactants.canonical_key}>>{write_canonical_smiles(product)}"
            if key in seen:
                continue
            seen.add(key)
            rows.append((f"{react}>>{prod}", source, reactants, product, fam_name))
    return rows


def verify_round_trip(rows):
    good, bad = [], []
    for text, source, reactants, product, fam in rows:
        try:
            template = extract_template(reactants, product, env_radius=1)
            results = apply_template(template, product, max_matches=8)
            keys = {r.canonical_key for r in results}
            if reactants.canonical_key in keys:
                good.append((text, source))
            else:
                bad.append((text, fam, "reactants not recovered"))
        except Exception as exc:
            bad.append((text, fam, f"{type(exc).__name__}: {exc}"))
    return good, bad


def write_reactions(good):
    lines = ["reaction_smiles\tsource"]
    lines += [f"{text}\t{source}" for text, source in good[:100]]
    (FIXTURES / "reactions_100.tsv").write_text("\n".join(lines) + "\n",
                                                encoding="utf-8")
    return len(lines) - 1


def write_data_files(good):
    """Price catalog, toxicity classes, and a conditions table covering the
    fixture chemistry plus the search-test universe."""
    buyables = {
        "CCO": 0.05, "CO": 0.04, "O": 0.001, "CC(C)O": 0.08, "CCCO": 0.09,
        "CC(=O)O": 0.06, "CCC(=O)O": 0.11, "CN": 0.20, "CCN": 0.22,
        "BrBr": 0.45, "BrCC": 0.80, "BrCCC": 0.85, "BrCc1ccccc1": 2.50,
        "c1ccccc1": 0.30, "Cc1ccccc1": 0.35, "CC=O": 0.40, "CCC=O": 0.55,
        "CC(C)=O": 0.30, "C=C": 0.10, "C=CC": 0.15, "NCC": 0.60,
        "OCC(=O)O": 1.20, "OCc1ccccc1": 1.10,
    }
    lines = ["canonical_smiles,usd_per_g,source,retrieved_at"]
    for smiles, price in sorted(buyables.items()):
        key = write_canonical_smiles(parse_smiles(smiles))
        lines.append(f"{key},{price},fixture,2026-01-01T00:00:00Z")
    (FIXTURES / "catalog.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    tox = {"O": 1, "CCO": 1, "CO": 0, "ClCCl": -1, "c1ccccc1": -1, "CC(=O)O": 1,
           "CCOCC": 0, "CC(C)=O": 0, "CN(C)C=O": -1, "CCCCCC": 0}
    lines = ["canonical_smiles,class,source"]
    for smiles, cls in sorted(tox.items()):
        key = write_canonical_smiles(parse_smiles(smiles))
        lines.append(f"{key},{cls},acs")
    (FIXTURES / "toxdb.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    conditions = [
        ("CC(=O)O.CCO>>CC(=O)OCC", 1, 1.0, 78.0, "CCO", ""),
        ("CC(=O)O.CCO>>CC(=O)OCC", 2, 0.5, 65.0, "CCO", "CC(=O)O"),
        ("CCO.CC(=O)O>>CC(=O)OCC", 3, 0.25, 90.0, "", ""),
        ("C.CCO>>CCOC", 1, 2.0, 25.0, "O", ""),
        ("BrCC.CCO>>CCOCC", 1, 1.0, 60.0, "CCO", ""),
    ]
    lines = ["reaction_key,rank,weight,temperature_c,solvents,reagents"]
    for key, rank, weight, temp, solvents, reagents in conditions:
        lines.append(f"{key},{rank},{weight},{temp},{solvents},{reagents}")
    (FIXTURES / "conditions.csv").write_text("\n".join(lines) + "\n",
                                             encoding="utf-8")

    molecules = ["CCO", "CC(=O)OCC", "c1ccccc1", "Cc1ccccc1", "CC(C)O"]
    (FIXTURES / "molecules.smi").write_text(
        "# fixture molecule list\n" + "\n".join(molecules) + "\n", encoding="utf-8")


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    rows = reaction_rows()
    good, bad = verify_round_trip(rows)
    print(f"candidate reactions: {len(rows)}; round-trip ok: {len(good)}; bad: {len(bad)}")
    for text, fam, why in bad[:10]:
        print(f"  BAD [{fam}] {why}: {text}")
    if len(good) < 100:
        print("NOT ENOUGH GOOD REACTIONS", file=sys.stderr)
        return 1
    count = write_reactions(good)
    write_data_files(good)
    print(f"wrote {count} reactions and data fixtures to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
