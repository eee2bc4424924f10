"""Canonical SMILES generation.

Canonical ranks come from iterative neighborhood refinement; remaining ties
are broken by branching over every member of the first tied class and keeping
the lexicographically smallest emitted string, which makes the output
independent of input atom order. Atom-map ids are not part of molecular
identity and are dropped from the output.
"""

from __future__ import annotations

from collections import Counter

from .elements import AROMATIC_ORGANIC, ORGANIC_SUBSET, implicit_hydrogens
from .molecule import Bond, BondOrder, Molecule


def write_canonical_smiles(mol: Molecule) -> str:
    if mol.is_empty():
        return ""
    comps = mol.connected_components()
    if len(comps) == 1:
        return _canonical_connected(mol)
    parts = [_canonical_connected(induced_subgraph(mol, comp)) for comp in comps]
    return ".".join(sorted(parts))


def induced_subgraph(mol: Molecule, atom_indices) -> Molecule:
    keep = sorted(atom_indices)
    remap = {old: new for new, old in enumerate(keep)}
    atoms = [mol.atoms[i] for i in keep]
    bonds = [Bond(remap[b.a], remap[b.b], b.order)
             for b in mol.bonds if b.a in remap and b.b in remap]
    return Molecule(atoms, bonds, mol.provenance_text)


def _canonical_connected(mol: Molecule) -> str:
    best = None
    for ranks in _discrete_rankings(mol):
        text = _emit(mol, ranks)
        if best is None or text < best:
            best = text
    return best


# -- canonical ranking ------------------------------------------------------

def _initial_keys(mol: Molecule):
    return [
        (a.element, a.charge, a.hydrogens, int(a.aromatic), mol.degree(i))
        for i, a in enumerate(mol.atoms)
    ]


def _dense_ranks(keys) -> list[int]:
    position = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [position[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    n = mol.num_atoms
    while True:
        keys = []
        for i in range(n):
            around = sorted(
                (int(mol.bond_between(i, j).order), ranks[j]) for j in mol.neighbors[i]
            )
            keys.append((ranks[i], tuple(around)))
        new_ranks = _dense_ranks(keys)
        if new_ranks == ranks:
            return ranks
        ranks = new_ranks


def _discrete_rankings(mol: Molecule):
    ranks = _refine(mol, _dense_ranks(_initial_keys(mol)))
    yield from _branch(mol, ranks)


def _branch(mol: Molecule, ranks: list[int]):
    counts = Counter(ranks)
    tied = sorted(r for r, c in counts.items() if c > 1)
    if not tied:
        yield ranks
        return
    target = tied[0]
    for atom in [i for i, r in enumerate(ranks) if r == target]:
        split = _dense_ranks(
            [(r, 0 if i == atom else 1) for i, r in enumerate(ranks)]
        )
        yield from _branch(mol, _refine(mol, split))


# -- string emission --------------------------------------------------------

def _emit(mol: Molecule, ranks: list[int]) -> str:
    n = mol.num_atoms
    root = ranks.index(0)

    children: list[list[int]] = [[] for _ in range(n)]
    ring_partners: list[list[int]] = [[] for _ in range(n)]  # per-atom, discovery order
    ring_ids: dict[tuple[int, int], int] = {}
    parent = [-1] * n
    visited = [False] * n
    visited[root] = True
    order_key = lambda j: ranks[j]

    stack = [(root, iter(sorted(mol.neighbors[root], key=order_key)))]
    while stack:
        i, it = stack[-1]
        advanced = False
        for j in it:
            if not visited[j]:
                visited[j] = True
                parent[j] = i
                children[i].append(j)
                stack.append((j, iter(sorted(mol.neighbors[j], key=order_key))))
                advanced = True
                break
            if j != parent[i]:
                pair = (min(i, j), max(i, j))
                if pair not in ring_ids:
                    ring_ids[pair] = len(ring_ids)
                    ring_partners[j].append(i)
                    ring_partners[i].append(j)
        if not advanced:
            stack.pop()

    digit_for: dict[tuple[int, int], str] = {}
    in_use: set[int] = set()

    def take_digit() -> int:
        num = 1
        while num in in_use:
            num += 1
        in_use.add(num)
        return num

    def fmt_digit(num: int) -> str:
        return str(num) if num <= 9 else f"%{num:02d}"

    def bond_text(a: int, b: int) -> str:
        order = mol.bond_between(a, b).order
        both_aromatic = mol.atoms[a].aromatic and mol.atoms[b].aromatic
        if order is BondOrder.SINGLE:
            return "-" if both_aromatic else ""
        if order is BondOrder.AROMATIC:
            return ""
        if order is BondOrder.DOUBLE:
            return "="
        return "#"

    out: list[str] = []

    def emit_atom(i: int):
        out.append(_atom_text(mol, i))
        for j in ring_partners[i]:
            pair = (min(i, j), max(i, j))
            if pair in digit_for:
                out.append(bond_text(i, j) + digit_for[pair])
                num = int(digit_for[pair].lstrip("%"))
                in_use.discard(num)
            else:
                num = take_digit()
                digit_for[pair] = fmt_digit(num)
                out.append(bond_text(i, j) + digit_for[pair])
        kids = children[i]
        for k, child in enumerate(kids):
            last = k == len(kids) - 1
            if not last:
                out.append("(")
            out.append(bond_text(i, child))
            emit_atom(child)
            if not last:
                out.append(")")

    emit_atom(root)
    return "".join(out)


def _atom_text(mol: Molecule, i: int) -> str:
    atom = mol.atoms[i]
    symbol = atom.symbol
    bare = symbol.lower() if atom.aromatic else symbol
    organic_ok = (symbol in ORGANIC_SUBSET if not atom.aromatic
                  else bare in AROMATIC_ORGANIC)
    if organic_ok and atom.charge == 0:
        expected = implicit_hydrogens(atom.element, mol.bond_order_sum(i), atom.aromatic)
        if expected == atom.hydrogens:
            return bare
    if atom.hydrogens == 0:
        h_txt = ""
    elif atom.hydrogens == 1:
        h_txt = "H"
    else:
        h_txt = f"H{atom.hydrogens}"
    if atom.charge == 0:
        c_txt = ""
    elif atom.charge == 1:
        c_txt = "+"
    elif atom.charge == -1:
        c_txt = "-"
    else:
        c_txt = f"+{atom.charge}" if atom.charge > 0 else str(atom.charge)
    return f"[{bare}{h_txt}{c_txt}]"
