"""Pattern graphs for reaction rules: a SMARTS subset with atom constraints
(element, aromatic/aliphatic, H-count, degree, charge) plus atom maps.
"""

from __future__ import annotations

from dataclasses import dataclass

from .elements import NUMBER_TO_SYMBOL, SYMBOL_TO_NUMBER
from .molecule import BondOrder, Molecule


class TemplateSyntaxError(ValueError):
    pass


class UnsupportedPrimitive(TemplateSyntaxError):
    def __init__(self, token: str, context: str = ""):
        self.token = token
        message = f"unsupported SMARTS primitive {token!r}"
        if context:
            message += f" in {context!r}"
        super().__init__(message)


_AROMATIC_SYMBOLS = {"b", "c", "n", "o", "p", "s"}
_UNSUPPORTED_CHARS = {
    "$": "recursive SMARTS '$(...)'",
    ",": "logical OR ','",
    "!": "negation '!'",
    "*": "wildcard '*'",
    "~": "any-bond '~'",
    "@": "stereo/ring-bond '@'",
    "&": "high-precedence AND '&'",
    "R": "ring-count 'R'",
    "r": "ring-size 'r'",
    "X": "connectivity 'X'",
    "x": "ring-connectivity 'x'",
    "v": "valence 'v'",
    "/": "directional bond '/'",
    "\\": "directional bond '\\'",
}


@dataclass(frozen=True)
class AtomPattern:
    element: int | None = None
    aromatic: bool | None = None
    hydrogens: int | None = None
    degree: int | None = None
    charge: int | None = None
    map_id: int = 0

    def matches(self, mol: Molecule, idx: int) -> bool:
        atom = mol.atoms[idx]
        if self.element is not None and atom.element != self.element:
            return False
        if self.aromatic is not None and atom.aromatic != self.aromatic:
            return False
        if self.hydrogens is not None and atom.hydrogens != self.hydrogens:
            return False
        if self.degree is not None and mol.degree(idx) != self.degree:
            return False
        if self.charge is not None and atom.charge != self.charge:
            return False
        return True

    @property
    def fully_pinned(self) -> bool:
        return None not in (self.element, self.aromatic, self.hydrogens,
                            self.degree, self.charge)


@dataclass(frozen=True)
class PatternBond:
    a: int
    b: int
    order: BondOrder | None  # None accepts single or aromatic

    def accepts(self, order: BondOrder) -> bool:
        if self.order is None:
            return order in (BondOrder.SINGLE, BondOrder.AROMATIC)
        return order is self.order


class PatternGraph:
    __slots__ = ("atoms", "bonds", "_neighbors")

    def __init__(self, atoms, bonds):
        self.atoms: tuple[AtomPattern, ...] = tuple(atoms)
        self.bonds: tuple[PatternBond, ...] = tuple(bonds)
        self._neighbors = None
        maps = [a.map_id for a in self.atoms if a.map_id]
        if len(maps) != len(set(maps)):
            raise TemplateSyntaxError("duplicate map id within a pattern graph")

    def __eq__(self, other):
        return (isinstance(other, PatternGraph)
                and self.atoms == other.atoms and self.bonds == other.bonds)

    def __hash__(self):
        return hash((self.atoms, self.bonds))

    @property
    def neighbors(self):
        if self._neighbors is None:
            nbrs = [[] for _ in self.atoms]
            for k, bond in enumerate(self.bonds):
                nbrs[bond.a].append((bond.b, k))
                nbrs[bond.b].append((bond.a, k))
            self._neighbors = tuple(tuple(x) for x in nbrs)
        return self._neighbors

    @property
    def map_ids(self) -> set[int]:
        return {a.map_id for a in self.atoms if a.map_id}

    def __len__(self):
        return len(self.atoms)


# -- parsing -----------------------------------------------------------------

def parse_pattern(text: str) -> PatternGraph:
    """Parse one connected-or-not pattern expression (no '.' separators)."""
    if not text:
        raise TemplateSyntaxError("empty pattern")
    atoms: list[AtomPattern] = []
    bonds: list[PatternBond] = []
    prev: int | None = None
    pending: BondOrder | None = None
    pending_explicit = False
    branch_stack: list[int | None] = []
    open_rings: dict[int, tuple[int, BondOrder | None, bool]] = {}

    bond_symbols = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE,
                    "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}

    i = 0
    n = len(text)

    def attach(idx: int, pos: int):
        nonlocal prev, pending, pending_explicit
        if prev is not None:
            bonds.append(PatternBond(prev, idx, pending if pending_explicit else None))
        elif pending_explicit:
            raise TemplateSyntaxError(f"bond with no preceding atom at {pos}")
        prev = idx
        pending = None
        pending_explicit = False

    while i < n:
        ch = text[i]
        if ch == "[":
            close = text.find("]", i)
            if close < 0:
                raise TemplateSyntaxError("unclosed '[' in pattern")
            atoms.append(_parse_pattern_atom(text[i + 1 : close]))
            attach(len(atoms) - 1, i)
            i = close + 1
            continue
        if ch == "(":
            if prev is None:
                raise TemplateSyntaxError("branch before any atom")
            branch_stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not branch_stack:
                raise TemplateSyntaxError("unmatched ')' in pattern")
            prev = branch_stack.pop()
            i += 1
            continue
        if ch == "#":
            # '#' is a triple bond between atoms, but an element primitive is
            # only legal inside brackets; outside brackets treat as bond.
            pending, pending_explicit = BondOrder.TRIPLE, True
            i += 1
            continue
        if ch in bond_symbols:
            pending, pending_explicit = bond_symbols[ch], True
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise TemplateSyntaxError("'%' needs two digits")
                num, step = int(text[i + 1 : i + 3]), 3
            else:
                num, step = int(ch), 1
            if prev is None:
                raise TemplateSyntaxError("ring closure before any atom")
            if num in open_rings:
                other, opened, opened_explicit = open_rings.pop(num)
                order, explicit = _merge_ring_bond(
                    opened, opened_explicit, pending, pending_explicit)
                bonds.append(PatternBond(min(other, prev), max(other, prev),
                                         order if explicit else None))
            else:
                open_rings[num] = (prev, pending, pending_explicit)
            pending, pending_explicit = None, False
            i += step
            continue
        if ch in _UNSUPPORTED_CHARS:
            raise UnsupportedPrimitive(_UNSUPPORTED_CHARS[ch], text)
        bare = _match_bare_pattern_atom(text, i)
        if bare is not None:
            pattern, step = bare
            atoms.append(pattern)
            attach(len(atoms) - 1, i)
            i += step
            continue
        raise TemplateSyntaxError(f"unexpected character {ch!r} in pattern {text!r}")

    if branch_stack:
        raise TemplateSyntaxError("unclosed '(' in pattern")
    if open_rings:
        num = next(iter(open_rings))
        raise TemplateSyntaxError(f"unclosed ring index {num} in pattern")
    if pending_explicit:
        raise TemplateSyntaxError("dangling bond at end of pattern")
    return PatternGraph(atoms, bonds)


def _merge_ring_bond(opened, opened_explicit, closing, closing_explicit):
    if opened_explicit and closing_explicit and opened is not closing:
        raise TemplateSyntaxError("conflicting ring-closure bond orders")
    if opened_explicit:
        return opened, True
    if closing_explicit:
        return closing, True
    return None, False


def _match_bare_pattern_atom(text: str, i: int):
    for sym in ("Cl", "Br"):
        if text.startswith(sym, i):
            return AtomPattern(element=SYMBOL_TO_NUMBER[sym], aromatic=False), 2
    ch = text[i]
    if ch in _AROMATIC_SYMBOLS:
        return AtomPattern(element=SYMBOL_TO_NUMBER[ch.upper()], aromatic=True), 1
    if ch.isupper() and ch in SYMBOL_TO_NUMBER:
        return AtomPattern(element=SYMBOL_TO_NUMBER[ch], aromatic=False), 1
    return None


def _parse_pattern_atom(body: str) -> AtomPattern:
    if not body:
        raise TemplateSyntaxError("empty pattern atom '[]'")
    context = f"[{body}]"

    map_id = 0
    if ":" in body:
        head, _, tail = body.rpartition(":")
        if not tail.isdigit():
            raise TemplateSyntaxError(f"bad map id in {context}")
        map_id = int(tail)
        body = head

    element = aromatic = hydrogens = degree = charge = None

    def set_once(kind, current, value):
        if current is not None:
            raise TemplateSyntaxError(f"duplicate {kind} constraint in {context}")
        return value

    for part in body.split(";"):
        if not part:
            raise TemplateSyntaxError(f"empty primitive in {context}")
        j = 0
        while j < len(part):
            ch = part[j]
            if ch == "#":
                j += 1
                digits = _take_digits(part, j)
                if not digits:
                    raise TemplateSyntaxError(f"'#' needs an atomic number in {context}")
                element = set_once("element", element, int(digits))
                j += len(digits)
            elif ch == "a":
                aromatic = set_once("aromatic", aromatic, True)
                j += 1
            elif ch == "A":
                aromatic = set_once("aromatic", aromatic, False)
                j += 1
            elif ch == "H":
                digits = _take_digits(part, j + 1)
                hydrogens = set_once("H-count", hydrogens,
                                     int(digits) if digits else 1)
                j += 1 + len(digits)
            elif ch == "D":
                digits = _take_digits(part, j + 1)
                if not digits:
                    raise TemplateSyntaxError(f"'D' needs a digit in {context}")
                degree = set_once("degree", degree, int(digits))
                j += 1 + len(digits)
            elif ch in "+-":
                digits = _take_digits(part, j + 1)
                magnitude = int(digits) if digits else 1
                value = magnitude if ch == "+" else -magnitude
                charge = set_once("charge", charge, value)
                j += 1 + len(digits)
            else:
                try:
                    sym, arom, step = _element_token(part, j, context)
                except TemplateSyntaxError:
                    if ch in _UNSUPPORTED_CHARS:
                        raise UnsupportedPrimitive(_UNSUPPORTED_CHARS[ch], context) from None
                    raise
                element = set_once("element", element, SYMBOL_TO_NUMBER[sym])
                aromatic = set_once("aromatic", aromatic, arom)
                j += step
    return AtomPattern(element=element, aromatic=aromatic, hydrogens=hydrogens,
                       degree=degree, charge=charge, map_id=map_id)


def _take_digits(text: str, j: int) -> str:
    out = ""
    while j < len(text) and text[j].isdigit():
        out += text[j]
        j += 1
    return out


def _element_token(part: str, j: int, context: str):
    for sym in ("Cl", "Br"):
        if part.startswith(sym, j):
            return sym, False, 2
    ch = part[j]
    if ch in _AROMATIC_SYMBOLS:
        return ch.upper(), True, 1
    if ch.isupper():
        if j + 1 < len(part) and part[j : j + 2] in SYMBOL_TO_NUMBER and part[j + 1].islower():
            return part[j : j + 2], False, 2
        if ch in SYMBOL_TO_NUMBER:
            return ch, False, 1
    raise TemplateSyntaxError(f"unknown primitive {part[j:]!r} in {context}")


# -- serialization ------------------------------------------------------------

_BOND_TEXT = {BondOrder.SINGLE: "-", BondOrder.DOUBLE: "=",
              BondOrder.TRIPLE: "#", BondOrder.AROMATIC: ":"}


def atom_pattern_text(p: AtomPattern) -> str:
    parts = []
    if p.element is not None and p.aromatic is True:
        sym = NUMBER_TO_SYMBOL[p.element].lower()
        if sym in _AROMATIC_SYMBOLS:
            parts.append(sym)
        else:
            parts.append(f"#{p.element}")
            parts.append("a")
    elif p.element is not None and p.aromatic is False:
        parts.append(NUMBER_TO_SYMBOL[p.element])
    elif p.element is not None:
        parts.append(f"#{p.element}")
    elif p.aromatic is not None:
        parts.append("a" if p.aromatic else "A")
    if p.hydrogens is not None:
        parts.append(f"H{p.hydrogens}")
    if p.degree is not None:
        parts.append(f"D{p.degree}")
    if p.charge is not None:
        parts.append(f"+{p.charge}" if p.charge >= 0 else str(p.charge))
    if not parts:
        raise TemplateSyntaxError("pattern atom with no constraints")
    text = ";".join(parts)
    if p.map_id:
        text += f":{p.map_id}"
    return f"[{text}]"


def pattern_text(pg: PatternGraph) -> str:
    """Deterministic serialization; stable under parse/serialize round-trips."""
    n = len(pg.atoms)
    visited = [False] * n
    ring_digit: dict[int, int] = {}
    used_digits: set[int] = set()
    ring_bonds_at: list[list[int]] = [[] for _ in range(n)]
    tree_children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    roots = []

    for start in range(n):
        if visited[start]:
            continue
        roots.append(start)
        visited[start] = True
        stack = [(start, iter(sorted(pg.neighbors[start])))]
        parent_bond = {start: -1}
        while stack:
            i, it = stack[-1]
            advanced = False
            for j, bond_idx in it:
                if not visited[j]:
                    visited[j] = True
                    parent_bond[j] = bond_idx
                    tree_children[i].append((j, bond_idx))
                    stack.append((j, iter(sorted(pg.neighbors[j]))))
                    advanced = True
                    break
                if bond_idx != parent_bond.get(i):
                    if bond_idx not in ring_digit:
                        ring_digit[bond_idx] = 0  # assigned at emission
                        ring_bonds_at[j].append(bond_idx)
                        ring_bonds_at[i].append(bond_idx)
            if not advanced:
                stack.pop()

    out: list[str] = []
    live: dict[int, int] = {}

    def bond_text(bond_idx: int) -> str:
        order = pg.bonds[bond_idx].order
        return "" if order is None else _BOND_TEXT[order]

    def emit(i: int):
        out.append(atom_pattern_text(pg.atoms[i]))
        for bond_idx in ring_bonds_at[i]:
            if bond_idx in live:
                digit = live.pop(bond_idx)
                used_digits.discard(digit)
            else:
                digit = 1
                while digit in used_digits:
                    digit += 1
                used_digits.add(digit)
                live[bond_idx] = digit
            out.append(bond_text(bond_idx) + (str(digit) if digit <= 9 else f"%{digit:02d}"))
        kids = tree_children[i]
        for k, (child, bond_idx) in enumerate(kids):
            final = k == len(kids) - 1
            if not final:
                out.append("(")
            out.append(bond_text(bond_idx))
            emit(child)
            if not final:
                out.append(")")

    for k, root in enumerate(roots):
        if k:
            out.append(".")
        emit(root)
    return "".join(out)


# -- matching -----------------------------------------------------------------

def match_pattern(pattern: PatternGraph, mol: Molecule,
                  limit: int | None = None) -> list[tuple[int, ...]]:
    """Enumerate embeddings of pattern into mol.

    Injective on atoms; molecule may carry extra bonds between matched atoms
    (monomorphism, standard SMARTS semantics). Results are sorted
    lexicographically by the matched atom index tuple and deduplicated by
    matched-atom set plus map assignment.
    """
    n = len(pattern.atoms)
    if n == 0 or mol.num_atoms < n:
        return []

    order = _search_order(pattern)
    assignment: dict[int, int] = {}
    used: set[int] = set()
    raw: list[tuple[int, ...]] = []

    def extend(pos: int):
        if pos == n:
            raw.append(tuple(assignment[i] for i in range(n)))
            return
        p_idx = order[pos]
        p_atom = pattern.atoms[p_idx]
        anchored = [
            (q, bond_idx) for q, bond_idx in pattern.neighbors[p_idx]
            if q in assignment
        ]
        if anchored:
            q0, _ = anchored[0]
            candidates = mol.neighbors[assignment[q0]]
        else:
            candidates = range(mol.num_atoms)
        for m_idx in candidates:
            if m_idx in used or not p_atom.matches(mol, m_idx):
                continue
            ok = True
            for q, bond_idx in anchored:
                mb = mol.bond_between(m_idx, assignment[q])
                if mb is None or not pattern.bonds[bond_idx].accepts(mb.order):
                    ok = False
                    break
            if not ok:
                continue
            assignment[p_idx] = m_idx
            used.add(m_idx)
            extend(pos + 1)
            del assignment[p_idx]
            used.discard(m_idx)

    extend(0)
    raw.sort()

    seen = set()
    results = []
    for mapping in raw:
        key = (
            frozenset(mapping),
            tuple(sorted((pattern.atoms[i].map_id, mapping[i])
                         for i in range(n) if pattern.atoms[i].map_id)),
        )
        if key in seen:
            continue
        seen.add(key)
        results.append(mapping)
        if limit is not None and len(results) >= limit:
            break
    return results


def _search_order(pattern: PatternGraph) -> list[int]:
    n = len(pattern.atoms)
    order: list[int] = []
    placed = [False] * n
    while len(order) < n:
        frontier = None
        for i in order:
            for j, _ in pattern.neighbors[i]:
                if not placed[j]:
                    frontier = j
                    break
            if frontier is not None:
                break
        if frontier is None:
            frontier = next(i for i in range(n) if not placed[i])
        placed[frontier] = True
        order.append(frontier)
    return order
