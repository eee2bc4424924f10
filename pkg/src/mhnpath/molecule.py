"""Attributed molecular graphs: the unit every other module operates on."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .elements import (
    AROMATIC_CAPABLE,
    NUMBER_TO_SYMBOL,
    ORGANIC_NUMBERS,
    implicit_hydrogens,
    max_valence,
)


class MoleculeError(ValueError):
    """Base class for molecule construction and parsing errors."""


class SmilesSyntaxError(MoleculeError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class RingError(SmilesSyntaxError):
    pass


class ValenceError(MoleculeError):
    pass


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence_contrib(self) -> int:
        # Aromatic bonds count 1 toward the valence sum; the aromatic atom
        # itself contributes the extra connection (see elements.implicit_hydrogens).
        return 1 if self is BondOrder.AROMATIC else int(self)


BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE,
                "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}
SYMBOL_FOR_ORDER = {BondOrder.SINGLE: "-", BondOrder.DOUBLE: "=",
                    BondOrder.TRIPLE: "#", BondOrder.AROMATIC: ":"}


@dataclass(frozen=True)
class Atom:
    element: int
    charge: int = 0
    hydrogens: int = 0
    aromatic: bool = False
    map_id: int = 0

    @property
    def symbol(self) -> str:
        return NUMBER_TO_SYMBOL[self.element]


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder

    def __post_init__(self):
        if self.a == self.b:
            raise MoleculeError(f"self-loop bond on atom {self.a}")
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


class Molecule:
    """Immutable attributed graph. Simple (no duplicate bonds, no self-loops)."""

    __slots__ = ("atoms", "bonds", "provenance_text", "_neighbors", "_bond_map")

    def __init__(self, atoms, bonds, provenance_text: str = ""):
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        self.bonds: tuple[Bond, ...] = tuple(bonds)
        self.provenance_text = provenance_text
        self._neighbors = None
        self._bond_map = None
        self._validate()

    def _validate(self):
        n = len(self.atoms)
        seen_pairs = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise MoleculeError(f"bond {bond.a}-{bond.b} out of range")
            pair = (min(bond.a, bond.b), max(bond.a, bond.b))
            if pair in seen_pairs:
                raise MoleculeError(f"duplicate bond {pair[0]}-{pair[1]}")
            seen_pairs.add(pair)
            if bond.order is BondOrder.AROMATIC:
                if not (self.atoms[bond.a].aromatic and self.atoms[bond.b].aromatic):
                    raise SmilesSyntaxError(
                        f"aromatic bond {bond.a}-{bond.b} between non-aromatic atoms")
        maps = [a.map_id for a in self.atoms if a.map_id]
        if len(maps) != len(set(maps)):
            raise MoleculeError("duplicate atom-map ids")
        for i, atom in enumerate(self.atoms):
            if atom.aromatic and atom.element not in AROMATIC_CAPABLE:
                raise MoleculeError(f"atom {i} ({atom.symbol}) cannot be aromatic")

    # -- graph views -------------------------------------------------------

    @property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        if self._neighbors is None:
            nbrs = [[] for _ in self.atoms]
            for bond in self.bonds:
                nbrs[bond.a].append(bond.b)
                nbrs[bond.b].append(bond.a)
            self._neighbors = tuple(tuple(sorted(x)) for x in nbrs)
        return self._neighbors

    def bond_between(self, a: int, b: int) -> Bond | None:
        if self._bond_map is None:
            self._bond_map = {(min(x.a, x.b), max(x.a, x.b)): x for x in self.bonds}
        return self._bond_map.get((min(a, b), max(a, b)))

    def degree(self, idx: int) -> int:
        return len(self.neighbors[idx])

    def bond_order_sum(self, idx: int) -> int:
        return sum(
            self.bond_between(idx, j).order.valence_contrib for j in self.neighbors[idx]
        )

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def is_empty(self) -> bool:
        return not self.atoms

    def connected_components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in self.neighbors[i]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            comps.append(sorted(comp))
        return comps

    def ring_atoms(self) -> set[int]:
        """Atoms on at least one cycle, found by iteratively pruning leaves."""
        degree = [self.degree(i) for i in range(len(self.atoms))]
        alive = [True] * len(self.atoms)
        queue = [i for i, d in enumerate(degree) if d <= 1]
        while queue:
            i = queue.pop()
            if not alive[i]:
                continue
            alive[i] = False
            for j in self.neighbors[i]:
                if alive[j]:
                    degree[j] -= 1
                    if degree[j] <= 1:
                        queue.append(j)
        return {i for i, a in enumerate(alive) if a}

    def permuted(self, order: list[int]) -> "Molecule":
        """New molecule with atoms re-indexed so new index i holds old atom order[i]."""
        inverse = {old: new for new, old in enumerate(order)}
        atoms = [self.atoms[old] for old in order]
        bonds = [Bond(inverse[b.a], inverse[b.b], b.order) for b in self.bonds]
        return Molecule(atoms, bonds, self.provenance_text)

    def __repr__(self):
        return f"Molecule({len(self.atoms)} atoms, {len(self.bonds)} bonds)"


EMPTY_MOLECULE = Molecule((), (), "")


def check_organic_valences(mol: Molecule, source_text: str = "") -> None:
    """Raise ValenceError for bare organic-subset atoms bonded beyond any allowed valence.

    Atoms with charge or explicit hydrogens set by brackets are exempt: their
    valence is whatever was written.
    """
    for i, atom in enumerate(mol.atoms):
        if atom.element not in ORGANIC_NUMBERS or atom.charge != 0:
            continue
        cap = max_valence(atom.element)
        if cap is None:
            continue
        # Aromatic atoms are checked on raw bond count: the extra aromatic
        # connection may be a lone pair (furan O, thiophene S), not a bond.
        used = mol.bond_order_sum(i)
        if used + atom.hydrogens > cap and atom.hydrogens == 0:
            raise ValenceError(
                f"atom {i} ({atom.symbol}) has valence {used} exceeding {cap}"
                + (f" in {source_text!r}" if source_text else ""))


def recompute_hydrogens(element: int, aromatic: bool, bond_order_sum: int) -> int:
    return implicit_hydrogens(element, bond_order_sum, aromatic)


@dataclass
class MoleculeBuilder:
    """Mutable construction helper; freeze() yields a validated Molecule."""

    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    provenance_text: str = ""

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        return len(self.atoms) - 1

    def add_bond(self, a: int, b: int, order: BondOrder) -> None:
        self.bonds.append(Bond(min(a, b), max(a, b), order))

    def freeze(self) -> Molecule:
        return Molecule(self.atoms, self.bonds, self.provenance_text)
