"""SMILES parsing for the supported subset.

Grammar: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I), lowercase
aromatics (b, c, n, o, p, s), bracket atoms [symbol H-count charge :map],
bond symbols - = # :, ring closures (digits and %nn), parenthesized branches.
Stereo marks (@ / \\) and isotopes are rejected, not dropped. '.' is rejected
here; multi-component input goes through parse_smiles_set.
"""

from __future__ import annotations

from .canon import write_canonical_smiles
from .elements import (
    AROMATIC_CAPABLE,
    AROMATIC_ORGANIC,
    ORGANIC_SUBSET,
    SYMBOL_TO_NUMBER,
    implicit_hydrogens,
)
from .molecule import (
    Atom,
    Bond,
    BondOrder,
    BOND_SYMBOLS,
    Molecule,
    MoleculeBuilder,
    RingError,
    SmilesSyntaxError,
    check_organic_valences,
)

_TWO_LETTER_ORGANIC = ("Cl", "Br")


class MoleculeSet:
    """Non-empty bag of molecules with an order-independent canonical key."""

    __slots__ = ("members", "canonical_key")

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise SmilesSyntaxError("molecule set must be non-empty")
        self.members = members
        self.canonical_key = canonical_set_key(members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __repr__(self):
        return f"MoleculeSet({self.canonical_key!r})"


def canonical_set_key(molecules) -> str:
    return ".".join(sorted(write_canonical_smiles(m) for m in molecules))


def parse_smiles(text: str) -> Molecule:
    """Parse a single-component SMILES string into a Molecule."""
    if not text:
        raise SmilesSyntaxError("empty SMILES")
    if "." in text:
        raise SmilesSyntaxError("'.' not allowed in a single molecule; "
                                "use parse_smiles_set", text.index("."))
    builder = MoleculeBuilder(provenance_text=text)
    prev_atom: int | None = None
    pending_bond: BondOrder | None = None
    branch_stack: list[int | None] = []
    # ring number -> (atom index, bond symbol or None, position)
    open_rings: dict[int, tuple[int, BondOrder | None, int]] = {}
    raw_hydrogens: list[bool] = []  # True where H count was explicit (bracket)

    i = 0
    n = len(text)

    def attach(atom_idx: int, pos: int):
        nonlocal prev_atom, pending_bond
        if prev_atom is not None:
            order = pending_bond
            if order is None:
                both_aromatic = (builder.atoms[prev_atom].aromatic
                                 and builder.atoms[atom_idx].aromatic)
                order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
            builder.add_bond(prev_atom, atom_idx, order)
        elif pending_bond is not None:
            raise SmilesSyntaxError("bond symbol with no preceding atom", pos)
        prev_atom = atom_idx
        pending_bond = None

    while i < n:
        ch = text[i]

        if ch in "@/\\":
            raise SmilesSyntaxError("stereo descriptors are not supported", i)

        if ch == "(":
            if prev_atom is None:
                raise SmilesSyntaxError("branch before any atom", i)
            branch_stack.append(prev_atom)
            i += 1
            continue

        if ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unmatched ')'", i)
            if pending_bond is not None:
                raise SmilesSyntaxError("dangling bond before ')'", i)
            prev_atom = branch_stack.pop()
            i += 1
            continue

        if ch in BOND_SYMBOLS:
            if pending_bond is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", i)
            pending_bond = BOND_SYMBOLS[ch]
            i += 1
            continue

        if ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not (text[i + 1].isdigit() and text[i + 2].isdigit()):
                    raise SmilesSyntaxError("'%' needs two digits", i)
                ring_num = int(text[i + 1 : i + 3])
                advance = 3
            else:
                ring_num = int(ch)
                advance = 1
            if prev_atom is None:
                raise SmilesSyntaxError("ring closure before any atom", i)
            if ring_num in open_rings:
                other, opened_bond, _ = open_rings.pop(ring_num)
                if other == prev_atom:
                    raise RingError(f"ring bond {ring_num} closes on its own atom", i)
                order = _resolve_ring_bond(
                    builder, opened_bond, pending_bond, other, prev_atom, i)
                builder.add_bond(other, prev_atom, order)
            else:
                open_rings[ring_num] = (prev_atom, pending_bond, i)
            pending_bond = None
            i += advance
            continue

        if ch == "[":
            close = text.find("]", i)
            if close < 0:
                raise SmilesSyntaxError("unclosed '['", i)
            atom, explicit_h = _parse_bracket(text[i + 1 : close], i + 1)
            idx = builder.add_atom(atom)
            raw_hydrogens.append(True)
            attach(idx, i)
            i = close + 1
            continue

        matched = _match_bare_atom(text, i)
        if matched is not None:
            symbol, aromatic, advance = matched
            element = SYMBOL_TO_NUMBER[symbol]
            idx = builder.add_atom(Atom(element=element, aromatic=aromatic))
            raw_hydrogens.append(False)
            attach(idx, i)
            i += advance
            continue

        raise SmilesSyntaxError(f"unknown symbol {ch!r}", i)

    if branch_stack:
        raise SmilesSyntaxError("unclosed '('", n - 1)
    if pending_bond is not None:
        raise SmilesSyntaxError("dangling bond at end of input", n - 1)
    if open_rings:
        num, (_, _, pos) = next(iter(open_rings.items()))
        raise RingError(f"unclosed ring index {num}", pos)

    mol = builder.freeze()
    mol = _fill_implicit_hydrogens(mol, raw_hydrogens)
    check_organic_valences(mol, text)
    return mol


def parse_smiles_set(text: str) -> MoleculeSet:
    """Parse dot-separated SMILES components into a MoleculeSet."""
    if not text:
        raise SmilesSyntaxError("empty SMILES set")
    members = []
    for k, part in enumerate(text.split(".")):
        try:
            members.append(parse_smiles(part))
        except SmilesSyntaxError as exc:
            raise type(exc)(f"component {k}: {exc}") from exc
    return MoleculeSet(members)


def _match_bare_atom(text: str, i: int):
    for sym in _TWO_LETTER_ORGANIC:
        if text.startswith(sym, i):
            return sym, False, 2
    ch = text[i]
    if ch in ORGANIC_SUBSET:
        return ch, False, 1
    if ch in AROMATIC_ORGANIC:
        return ch.upper(), True, 1
    return None


def _parse_bracket(body: str, offset: int) -> tuple[Atom, bool]:
    """Parse bracket-atom content: symbol, optional Hn, charge, :map."""
    if not body:
        raise SmilesSyntaxError("empty bracket atom", offset)
    j = 0
    if body[0].isdigit():
        raise SmilesSyntaxError("isotopes are not supported", offset)

    aromatic = False
    symbol = None
    if body[0].islower():
        for cand in ("se", "as"):
            if body.startswith(cand):
                symbol, aromatic, j = cand.capitalize(), True, 2
                break
        if symbol is None:
            cand = body[0].upper()
            if cand.upper() in SYMBOL_TO_NUMBER:
                symbol, aromatic, j = cand, True, 1
            else:
                raise SmilesSyntaxError(f"unknown element {body[0]!r}", offset)
    else:
        if len(body) > 1 and body[:2] in SYMBOL_TO_NUMBER and body[1].islower():
            symbol, j = body[:2], 2
        elif body[0] in SYMBOL_TO_NUMBER:
            symbol, j = body[0], 1
        else:
            raise SmilesSyntaxError(f"unknown element in bracket: {body!r}", offset)

    element = SYMBOL_TO_NUMBER[symbol]
    if aromatic and element not in AROMATIC_CAPABLE:
        raise SmilesSyntaxError(f"{symbol} cannot be aromatic", offset)

    hydrogens = 0
    explicit_h = False
    if j < len(body) and body[j] == "H":
        explicit_h = True
        j += 1
        digits = ""
        while j < len(body) and body[j].isdigit():
            digits += body[j]
            j += 1
        hydrogens = int(digits) if digits else 1

    charge = 0
    if j < len(body) and body[j] in "+-":
        sign = 1 if body[j] == "+" else -1
        symbol_char = body[j]
        j += 1
        digits = ""
        while j < len(body) and body[j].isdigit():
            digits += body[j]
            j += 1
        if digits:
            charge = sign * int(digits)
        else:
            charge = sign
            while j < len(body) and body[j] == symbol_char:
                charge += sign
                j += 1

    map_id = 0
    if j < len(body) and body[j] == ":":
        j += 1
        digits = ""
        while j < len(body) and body[j].isdigit():
            digits += body[j]
            j += 1
        if not digits:
            raise SmilesSyntaxError("':' in bracket needs a map number", offset + j)
        map_id = int(digits)

    if j != len(body):
        raise SmilesSyntaxError(f"unsupported bracket content {body[j:]!r}", offset + j)

    atom = Atom(element=element, charge=charge, hydrogens=hydrogens,
                aromatic=aromatic, map_id=map_id)
    return atom, explicit_h


def _resolve_ring_bond(builder, opened: BondOrder | None, closing: BondOrder | None,
                       a: int, b: int, pos: int) -> BondOrder:
    if opened is not None and closing is not None and opened is not closing:
        raise RingError("conflicting bond orders on ring closure", pos)
    order = opened if opened is not None else closing
    if order is None:
        both_aromatic = builder.atoms[a].aromatic and builder.atoms[b].aromatic
        order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
    return order


def _fill_implicit_hydrogens(mol: Molecule, explicit_flags: list[bool]) -> Molecule:
    atoms = list(mol.atoms)
    changed = False
    for i, atom in enumerate(atoms):
        if explicit_flags[i]:
            continue
        h = implicit_hydrogens(atom.element, mol.bond_order_sum(i), atom.aromatic)
        if h != atom.hydrogens:
            atoms[i] = Atom(atom.element, atom.charge, h, atom.aromatic, atom.map_id)
            changed = True
    if not changed:
        return mol
    return Molecule(atoms, mol.bonds, mol.provenance_text)
