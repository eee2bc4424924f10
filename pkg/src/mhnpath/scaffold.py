"""Ring-and-linker scaffolds and scaffold-grouped dataset splitting."""

from __future__ import annotations

import random
from collections import defaultdict
from pathlib import Path

from .canon import induced_subgraph, write_canonical_smiles
from .molecule import Atom, EMPTY_MOLECULE, Molecule
from .smiles import parse_smiles


class EmptyInput(ValueError):
    pass


def murcko_scaffold(mol: Molecule) -> Molecule:
    """Strip terminal atoms until only ring systems and inter-ring linkers remain.

    Acyclic molecules reduce to the empty scaffold (zero atoms, written as "").
    Each removed substituent is replaced by hydrogens on the surviving atom.
    """
    if mol.is_empty():
        return EMPTY_MOLECULE
    alive = set(range(mol.num_atoms))
    h_bonus: dict[int, int] = defaultdict(int)

    while True:
        terminals = [
            i for i in alive
            if sum(1 for j in mol.neighbors[i] if j in alive) <= 1
        ]
        if not terminals:
            break
        doomed = set(terminals)
        for i in terminals:
            for j in mol.neighbors[i]:
                if j in alive and j not in doomed:
                    h_bonus[j] += mol.bond_between(i, j).order.valence_contrib
        alive -= doomed

    if not alive:
        return EMPTY_MOLECULE
    scaffold = induced_subgraph(mol, alive)
    if not h_bonus:
        return scaffold
    kept = sorted(alive)
    atoms = list(scaffold.atoms)
    for new_idx, old_idx in enumerate(kept):
        bonus = h_bonus.get(old_idx, 0)
        if bonus:
            a = atoms[new_idx]
            atoms[new_idx] = Atom(a.element, a.charge, a.hydrogens + bonus,
                                  a.aromatic, a.map_id)
    return Molecule(atoms, scaffold.bonds, scaffold.provenance_text)


def scaffold_key(mol: Molecule) -> str:
    return write_canonical_smiles(murcko_scaffold(mol))


def scaffold_split(molecules, k: int, seed: int = 0) -> list[list[int]]:
    """Partition molecule indices into k groups with no scaffold straddling two.

    Whole scaffold groups go greedily to the currently smallest partition,
    largest group first; equal-sized groups are ordered by a seeded shuffle.
    """
    molecules = list(molecules)
    if not molecules:
        raise EmptyInput("no molecules to split")
    if k < 2:
        raise ValueError("k must be >= 2")

    groups: dict[str, list[int]] = defaultdict(list)
    for idx, mol in enumerate(molecules):
        groups[scaffold_key(mol)].append(idx)

    keys = sorted(groups)
    random.Random(seed).shuffle(keys)
    keys.sort(key=lambda key: -len(groups[key]))

    partitions: list[list[int]] = [[] for _ in range(k)]
    sizes = [0] * k
    for key in keys:
        target = sizes.index(min(sizes))
        partitions[target].extend(groups[key])
        sizes[target] += len(groups[key])
    return partitions


# -- molecule list files (one SMILES per line, '#' comments) -----------------

def read_molecule_list(path) -> list[Molecule]:
    molecules = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            molecules.append(parse_smiles(line))
    return molecules


def write_molecule_list(path, molecules) -> None:
    lines = [write_canonical_smiles(m) for m in molecules]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                          encoding="utf-8")


def write_scaffold_split(molecules, partitions, out_dir,
                         prefix: str = "partition") -> list[Path]:
    """One molecule-list file per partition: <prefix>_<k>.smi."""
    molecules = list(molecules)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, indices in enumerate(partitions):
        path = out_dir / f"{prefix}_{k}.smi"
        write_molecule_list(path, [molecules[i] for i in indices])
        paths.append(path)
    return paths
