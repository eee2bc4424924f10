"""Element symbol tables and valence rules for the supported SMILES subset."""

SYMBOL_TO_NUMBER = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Sc": 21, "Ti": 22,
    "V": 23, "Cr": 24, "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29,
    "Zn": 30, "Ga": 31, "Ge": 32, "As": 33, "Se": 34, "Br": 35, "Kr": 36,
    "Rb": 37, "Sr": 38, "Y": 39, "Zr": 40, "Nb": 41, "Mo": 42, "Tc": 43,
    "Ru": 44, "Rh": 45, "Pd": 46, "Ag": 47, "Cd": 48, "In": 49, "Sn": 50,
    "Sb": 51, "Te": 52, "I": 53, "Xe": 54, "Cs": 55, "Ba": 56, "La": 57,
    "Ce": 58, "Pr": 59, "Nd": 60, "Pm": 61, "Sm": 62, "Eu": 63, "Gd": 64,
    "Tb": 65, "Dy": 66, "Ho": 67, "Er": 68, "Tm": 69, "Yb": 70, "Lu": 71,
    "Hf": 72, "Ta": 73, "W": 74, "Re": 75, "Os": 76, "Ir": 77, "Pt": 78,
    "Au": 79, "Hg": 80, "Tl": 81, "Pb": 82, "Bi": 83, "Po": 84, "At": 85,
    "Rn": 86, "Fr": 87, "Ra": 88, "Ac": 89, "Th": 90, "Pa": 91, "U": 92,
}

NUMBER_TO_SYMBOL = {v: k for k, v in SYMBOL_TO_NUMBER.items()}

# Atoms writable without brackets, keyed by symbol. Two-letter symbols must be
# checked before one-letter ones when tokenizing.
ORGANIC_SUBSET = ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I")

# Lowercase aromatic forms accepted outside brackets.
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")

# Elements that may carry the aromatic flag (inside brackets as lowercase).
AROMATIC_CAPABLE = frozenset(
    SYMBOL_TO_NUMBER[s] for s in ("B", "C", "N", "O", "P", "S", "Se", "As")
)

# Normal valence lists for implicit-hydrogen assignment (Daylight convention).
DEFAULT_VALENCES = {
    SYMBOL_TO_NUMBER["B"]: (3,),
    SYMBOL_TO_NUMBER["C"]: (4,),
    SYMBOL_TO_NUMBER["N"]: (3, 5),
    SYMBOL_TO_NUMBER["O"]: (2,),
    SYMBOL_TO_NUMBER["P"]: (3, 5),
    SYMBOL_TO_NUMBER["S"]: (2, 4, 6),
    SYMBOL_TO_NUMBER["F"]: (1,),
    SYMBOL_TO_NUMBER["Cl"]: (1,),
    SYMBOL_TO_NUMBER["Br"]: (1,),
    SYMBOL_TO_NUMBER["I"]: (1,),
}

ORGANIC_NUMBERS = frozenset(SYMBOL_TO_NUMBER[s] for s in ORGANIC_SUBSET)


def implicit_hydrogens(element: int, bond_order_sum: int, aromatic: bool) -> int:
    """Hydrogen count implied by standard valence for a bare (bracket-free) atom.

    ``bond_order_sum`` counts aromatic bonds as 1 each. Aromatic atoms get one
    extra implied connection and are filled against their lowest valence only,
    which reproduces toolkit behaviour for c/n/o/s ring atoms.
    """
    valences = DEFAULT_VALENCES.get(element)
    if valences is None:
        return 0
    if aromatic:
        used = bond_order_sum + 1
        return max(0, valences[0] - used)
    for v in valences:
        if bond_order_sum <= v:
            return v - bond_order_sum
    return 0


def max_valence(element: int) -> int | None:
    valences = DEFAULT_VALENCES.get(element)
    return valences[-1] if valences else None
