"""Token-level validation of the engine's SMILES subset.

Checks grammar (atoms, bonds, branches, ring pairing, bracket contents) and
collects (element, map id) pairs without building molecular graphs; full
valence semantics stay in the engine.
"""

from __future__ import annotations

ORGANIC_TWO = ("Cl", "Br")
ORGANIC_ONE = set("BCNOPSFI")
AROMATIC_ONE = set("bcnops")

ELEMENTS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "W", "Re", "Os", "Ir", "Pt",
    "Au", "Hg", "Tl", "Pb", "Bi",
}


class LexError(ValueError):
    pass


def scan_component(text: str) -> list[tuple[str, int]]:
    """Validate one dot-free SMILES component; returns [(element, map_id)]."""
    if not text:
        raise LexError("empty component")
    atoms: list[tuple[str, int]] = []
    depth = 0
    rings: dict[int, int] = {}
    saw_atom = False
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "@/\\":
            raise LexError(f"stereo mark {ch!r} unsupported")
        if ch == "(":
            if not saw_atom:
                raise LexError("branch before any atom")
            depth += 1
            i += 1
            continue
        if ch == ")":
            depth -= 1
            if depth < 0:
                raise LexError("unmatched ')'")
            i += 1
            continue
        if ch in "-=#:":
            i += 1
            continue
        if ch.isdigit():
            if not saw_atom:
                raise LexError("ring digit before any atom")
            num = int(ch)
            rings[num] = rings.get(num, 0) + 1
            i += 1
            continue
        if ch == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise LexError("'%' needs two digits")
            num = int(text[i + 1 : i + 3])
            rings[num] = rings.get(num, 0) + 1
            i += 3
            continue
        if ch == "[":
            close = text.find("]", i)
            if close < 0:
                raise LexError("unclosed '['")
            atoms.append(_scan_bracket(text[i + 1 : close]))
            saw_atom = True
            i = close + 1
            continue
        matched = _scan_bare(text, i)
        if matched:
            symbol, step = matched
            atoms.append((symbol, 0))
            saw_atom = True
            i += step
            continue
        raise LexError(f"unknown symbol {ch!r} at {i}")
    if depth != 0:
        raise LexError("unclosed '('")
    odd = [num for num, count in rings.items() if count % 2]
    if odd:
        raise LexError(f"unpaired ring index {odd[0]}")
    if not atoms:
        raise LexError("no atoms")
    return atoms


def _scan_bare(text: str, i: int):
    for sym in ORGANIC_TWO:
        if text.startswith(sym, i):
            return sym, 2
    ch = text[i]
    if ch in ORGANIC_ONE:
        return ch, 1
    if ch in AROMATIC_ONE:
        return ch.upper(), 1
    return None


def _scan_bracket(body: str) -> tuple[str, int]:
    if not body:
        raise LexError("empty bracket")
    if body[0].isdigit():
        raise LexError("isotopes unsupported")
    if "@" in body:
        raise LexError("stereo mark '@' unsupported")
    j = 0
    if body[0].islower():
        for two in ("se", "as"):
            if body.startswith(two):
                symbol, j = two.capitalize(), 2
                break
        else:
            symbol, j = body[0].upper(), 1
    elif len(body) > 1 and body[:2] in ELEMENTS and body[1].islower():
        symbol, j = body[:2], 2
    else:
        symbol, j = body[0], 1
    if symbol not in ELEMENTS:
        raise LexError(f"unknown element {symbol!r}")
    if j < len(body) and body[j] == "H":
        j += 1
        while j < len(body) and body[j].isdigit():
            j += 1
    if j < len(body) and body[j] in "+-":
        sign = body[j]
        j += 1
        if j < len(body) and body[j].isdigit():
            while j < len(body) and body[j].isdigit():
                j += 1
        else:
            while j < len(body) and body[j] == sign:
                j += 1
    map_id = 0
    if j < len(body) and body[j] == ":":
        j += 1
        digits = ""
        while j < len(body) and body[j].isdigit():
            digits += body[j]
            j += 1
        if not digits:
            raise LexError("':' needs a map number")
        map_id = int(digits)
    if j != len(body):
        raise LexError(f"unsupported bracket tail {body[j:]!r}")
    return symbol, map_id


def scan_side(text: str) -> list[list[tuple[str, int]]]:
    """Validate a dot-separated reaction side; one atom list per component."""
    return [scan_component(part) for part in text.split(".")]


def strip_maps(text: str) -> str:
    """Remove :n map suffixes inside brackets (for dedup keys)."""
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            close = text.find("]", i)
            body = text[i + 1 : close]
            head, _, tail = body.rpartition(":")
            if tail.isdigit() and head:
                body = head
            out.append(f"[{body}]")
            i = close + 1
        else:
            out.append(ch)
            i += 1
    return "".join(out)
