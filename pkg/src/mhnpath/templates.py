"""Reaction templates: directed graph-rewrite rules applied retrosynthetically
(product pattern >> precursor patterns), their extraction from atom-mapped
reactions, and the template library file format.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

from .canon import induced_subgraph
from .elements import DEFAULT_VALENCES, ORGANIC_NUMBERS, implicit_hydrogens, max_valence
from .fingerprint import Fingerprint, atom_environment_id, hash64
from .molecule import Atom, Bond, BondOrder, Molecule, MoleculeError
from .patterns import (
    AtomPattern,
    PatternBond,
    PatternGraph,
    TemplateSyntaxError,
    UnsupportedPrimitive,
    match_pattern,
    parse_pattern,
    pattern_text,
)
from .smiles import MoleculeSet

SOURCE_ENZYMATIC = "enzymatic"
SOURCE_SYNTHETIC = "synthetic"
_SOURCE_TSV = {SOURCE_ENZYMATIC: "enz", SOURCE_SYNTHETIC: "syn"}
_SOURCE_FROM_TSV = {v: k for k, v in _SOURCE_TSV.items()}


class UnmappedAtomError(ValueError):
    pass


class NoChangeError(ValueError):
    pass


class LibraryError(ValueError):
    pass


@dataclass(frozen=True)
class Template:
    id: int
    product_pattern: PatternGraph
    precursor_patterns: tuple[PatternGraph, ...]
    source: str = SOURCE_SYNTHETIC
    enzyme: int = 0
    support: int = 0
    text: str = ""

    def __post_init__(self):
        if self.source not in (SOURCE_ENZYMATIC, SOURCE_SYNTHETIC):
            raise LibraryError(f"unknown template source {self.source!r}")
        if not self.text:
            object.__setattr__(self, "text", serialize_template(self))

    @property
    def introduced_precursor_maps(self) -> set[int]:
        product_maps = self.product_pattern.map_ids
        return {m for pg in self.precursor_patterns
                for m in pg.map_ids if m not in product_maps}


def serialize_template(t: Template) -> str:
    left = pattern_text(t.product_pattern)
    right = ".".join(pattern_text(pg) for pg in t.precursor_patterns)
    return f"{left}>>{right}"


def parse_template(text: str, id: int = 0, source: str = SOURCE_SYNTHETIC,
                   enzyme: int = 0, support: int = 0) -> Template:
    """Parse a rule string. Retro direction: product pattern >> precursors."""
    if text.count(">>") != 1:
        raise TemplateSyntaxError(f"rule must contain exactly one '>>': {text!r}")
    left, right = text.split(">>")
    if not left or not right:
        raise TemplateSyntaxError(f"rule side missing in {text!r}")
    if "." in left:
        raise TemplateSyntaxError("product side must be a single pattern")
    product = parse_pattern(left)
    precursors = tuple(parse_pattern(part) for part in right.split("."))
    template = Template(id=id, product_pattern=product,
                        precursor_patterns=precursors, source=source,
                        enzyme=enzyme, support=support)
    _validate_template(template)
    return template


def _validate_template(t: Template) -> None:
    if not t.product_pattern.atoms:
        raise TemplateSyntaxError("empty product pattern")
    seen: set[int] = set()
    for pg in t.precursor_patterns:
        dup = pg.map_ids & seen
        if dup:
            raise TemplateSyntaxError(f"map id {min(dup)} repeated across precursors")
        seen |= pg.map_ids
    product_maps = t.product_pattern.map_ids
    for pg in t.precursor_patterns:
        for atom in pg.atoms:
            introduced = atom.map_id == 0 or atom.map_id not in product_maps
            if introduced and atom.element is None:
                raise TemplateSyntaxError(
                    "introduced precursor atom needs an element constraint")


# -- application ---------------------------------------------------------------

def apply_template(t: Template, mol: Molecule, max_matches: int = 8) -> list[MoleculeSet]:
    """All distinct precursor sets from rewriting mol with t (retro direction).

    Empty list means "not applicable". Chemically invalid rewrites (valence
    violations, broken aromatic bonds) are filtered, never raised.
    """
    if max_matches < 1:
        raise ValueError("max_matches must be >= 1")
    embeddings = match_pattern(t.product_pattern, mol, limit=max_matches)
    results: list[MoleculeSet] = []
    seen: set[str] = set()
    for emb in embeddings:
        try:
            result = _rewrite(t, mol, emb)
        except MoleculeError:
            continue
        if result is None or result.canonical_key in seen:
            continue
        seen.add(result.canonical_key)
        results.append(result)
    return results


def _rewrite(t: Template, mol: Molecule, emb: tuple[int, ...]) -> MoleculeSet | None:
    product = t.product_pattern
    mol_atom_by_map: dict[int, int] = {}
    matched_atoms: set[int] = set()
    for p_idx, m_idx in enumerate(emb):
        matched_atoms.add(m_idx)
        map_id = product.atoms[p_idx].map_id
        if map_id:
            mol_atom_by_map[map_id] = m_idx

    precursor_maps: set[int] = set()
    for pg in t.precursor_patterns:
        precursor_maps |= pg.map_ids

    # Atoms present only on the product side vanish in the precursors.
    deleted = {
        emb[p_idx] for p_idx, pa in enumerate(product.atoms)
        if pa.map_id == 0 or pa.map_id not in precursor_maps
    }

    atoms: list[Atom | None] = list(mol.atoms)
    bond_orders: dict[tuple[int, int], BondOrder] = {
        (b.a, b.b): b.order for b in mol.bonds
    }
    touched: set[int] = set()
    h_pinned: set[int] = set()

    def bond_key(x: int, y: int) -> tuple[int, int]:
        return (x, y) if x < y else (y, x)

    # Remove product-pattern bonds that the precursor side does not keep,
    # and adjust orders where both sides bond the same mapped pair.
    precursor_bond: dict[tuple[int, int], BondOrder | None] = {}
    for pg in t.precursor_patterns:
        for pb in pg.bonds:
            ma, mb = pg.atoms[pb.a].map_id, pg.atoms[pb.b].map_id
            if ma and mb and ma in mol_atom_by_map and mb in mol_atom_by_map:
                key = bond_key(mol_atom_by_map[ma], mol_atom_by_map[mb])
                precursor_bond[key] = pb.order

    for pb in product.bonds:
        a_map = product.atoms[pb.a].map_id
        b_map = product.atoms[pb.b].map_id
        ka, kb = emb[pb.a], emb[pb.b]
        key = bond_key(ka, kb)
        if key not in bond_orders:
            continue
        if a_map and b_map and a_map in precursor_maps and b_map in precursor_maps:
            if bond_key(ka, kb) in precursor_bond:
                continue  # handled below
            del bond_orders[key]
            touched.update((ka, kb))

    for key, order in precursor_bond.items():
        concrete = _concrete_order(order, atoms[key[0]], atoms[key[1]])
        if bond_orders.get(key) != concrete:
            bond_orders[key] = concrete
            touched.update(key)

    # Apply precursor-side atom constraints to surviving mapped atoms and
    # materialize introduced atoms.
    new_atoms: list[tuple[int, AtomPattern]] = []  # (new index, pattern)
    intro_index: dict[tuple[int, int], int] = {}
    for g_idx, pg in enumerate(t.precursor_patterns):
        for a_idx, pa in enumerate(pg.atoms):
            if pa.map_id and pa.map_id in mol_atom_by_map:
                m_idx = mol_atom_by_map[pa.map_id]
                atoms[m_idx] = _apply_constraints(atoms[m_idx], pa)
                touched.add(m_idx)
                if pa.hydrogens is not None:
                    h_pinned.add(m_idx)
            else:
                idx = len(atoms)
                atom = Atom(
                    element=pa.element,
                    charge=pa.charge if pa.charge is not None else 0,
                    hydrogens=pa.hydrogens if pa.hydrogens is not None else 0,
                    aromatic=bool(pa.aromatic),
                )
                atoms.append(atom)
                intro_index[(g_idx, a_idx)] = idx
                new_atoms.append((idx, pa))
                touched.add(idx)
                if pa.hydrogens is not None:
                    h_pinned.add(idx)

    # Bonds touching introduced atoms.
    for g_idx, pg in enumerate(t.precursor_patterns):
        for pb in pg.bonds:
            ends = []
            introduced_any = False
            for a_idx in (pb.a, pb.b):
                pa = pg.atoms[a_idx]
                if pa.map_id and pa.map_id in mol_atom_by_map:
                    ends.append(mol_atom_by_map[pa.map_id])
                else:
                    ends.append(intro_index[(g_idx, a_idx)])
                    introduced_any = True
            if not introduced_any:
                continue
            key = bond_key(*ends)
            bond_orders[key] = _concrete_order(pb.order, atoms[ends[0]], atoms[ends[1]])
            touched.update(key)

    # Deletion of product-only atoms: drop them and their bonds.
    for d in deleted:
        atoms[d] = None
        touched.discard(d)
    for key in [k for k in bond_orders if atoms[k[0]] is None or atoms[k[1]] is None]:
        for end in key:
            if atoms[end] is not None:
                touched.add(end)
        del bond_orders[key]

    # Recompute implicit hydrogens on touched atoms without an explicit pin.
    survivors = [i for i, a in enumerate(atoms) if a is not None]
    remap = {old: new for new, old in enumerate(survivors)}
    adjacency: dict[int, list[BondOrder]] = {i: [] for i in survivors}
    for (a, b), order in bond_orders.items():
        adjacency[a].append(order)
        adjacency[b].append(order)

    final_atoms: list[Atom] = []
    for old in survivors:
        atom = atoms[old]
        order_sum = sum(o.valence_contrib for o in adjacency[old])
        if old in touched and old not in h_pinned:
            if atom.element in DEFAULT_VALENCES:
                h = implicit_hydrogens(atom.element, order_sum, atom.aromatic)
                atom = replace(atom, hydrogens=h)
        if old in touched:
            cap = max_valence(atom.element)
            if (atom.element in ORGANIC_NUMBERS and atom.charge == 0
                    and cap is not None and order_sum + atom.hydrogens > cap):
                return None
        final_atoms.append(atom)

    bonds = [Bond(remap[a], remap[b], order) for (a, b), order in bond_orders.items()]
    rewritten = Molecule(final_atoms, bonds)  # raises MoleculeError if inconsistent

    members = [induced_subgraph(rewritten, comp)
               for comp in rewritten.connected_components()]
    return MoleculeSet(members)


def _concrete_order(order: BondOrder | None, a: Atom | None, b: Atom | None) -> BondOrder:
    if order is not None:
        return order
    if a is not None and b is not None and a.aromatic and b.aromatic:
        return BondOrder.AROMATIC
    return BondOrder.SINGLE


def _apply_constraints(atom: Atom, pa: AtomPattern) -> Atom:
    return Atom(
        element=pa.element if pa.element is not None else atom.element,
        charge=pa.charge if pa.charge is not None else atom.charge,
        hydrogens=pa.hydrogens if pa.hydrogens is not None else atom.hydrogens,
        aromatic=pa.aromatic if pa.aromatic is not None else atom.aromatic,
        map_id=atom.map_id,
    )


# -- extraction ----------------------------------------------------------------

def extract_template(reactants, product: Molecule, env_radius: int = 1,
                     id: int = 0, source: str = SOURCE_SYNTHETIC,
                     enzyme: int = 0, support: int = 0) -> Template:
    """Derive a retro template from one atom-mapped reaction.

    The reaction center is every atom whose bonding, charge, or hydrogen count
    differs between sides, expanded by env_radius bonds; constraints are
    recorded from the product side for the product pattern and from the
    reactant side for the precursor patterns.
    """
    reactant_mols = list(reactants.members if isinstance(reactants, MoleculeSet)
                         else reactants)
    combined = _combine(reactant_mols)

    product_by_map: dict[int, int] = {}
    for i, atom in enumerate(product.atoms):
        if atom.map_id == 0:
            raise UnmappedAtomError(f"product atom {i} has no map id")
        product_by_map[atom.map_id] = i
    reactant_by_map = {a.map_id: i for i, a in enumerate(combined.atoms) if a.map_id}
    missing = set(product_by_map) - set(reactant_by_map)
    if missing:
        raise UnmappedAtomError(f"product map ids absent from reactants: {sorted(missing)}")

    shared = set(product_by_map)
    center_maps: set[int] = set()
    for m in shared:
        p_idx, r_idx = product_by_map[m], reactant_by_map[m]
        pa, ra = product.atoms[p_idx], combined.atoms[r_idx]
        if (pa.charge, pa.hydrogens, pa.aromatic) != (ra.charge, ra.hydrogens, ra.aromatic):
            center_maps.add(m)
            continue
        if _bond_profile(product, p_idx, shared) != _bond_profile(combined, r_idx, shared):
            center_maps.add(m)
    if not center_maps:
        raise NoChangeError("reaction sides are identical on mapped atoms")

    # Product pattern: centers plus env_radius neighborhood, on the product graph.
    p_atoms = {product_by_map[m] for m in center_maps}
    frontier = set(p_atoms)
    for _ in range(env_radius):
        frontier = {j for i in frontier for j in product.neighbors[i]} - p_atoms
        p_atoms |= frontier
    product_pattern = _pattern_from(product, sorted(p_atoms), keep_all_maps=True)
    if len(_components(product, sorted(p_atoms))) > 1:
        raise NoChangeError("reaction center is disconnected on the product side; "
                            "increase env_radius")

    # Precursor side: counterparts of the product-pattern atoms, closed over
    # attached atoms that have no product counterpart (leaving fragments).
    included_maps = {product.atoms[i].map_id for i in p_atoms}
    r_atoms = {reactant_by_map[m] for m in included_maps}
    grew = True
    while grew:
        grew = False
        for i in sorted(r_atoms):
            for j in combined.neighbors[i]:
                if j in r_atoms:
                    continue
                if combined.atoms[j].map_id not in shared:
                    r_atoms.add(j)
                    grew = True

    precursor_patterns = []
    for comp in _components(combined, sorted(r_atoms)):
        precursor_patterns.append(
            _pattern_from(combined, comp, keep_maps=shared))

    return Template(id=id, product_pattern=product_pattern,
                    precursor_patterns=tuple(precursor_patterns),
                    source=source, enzyme=enzyme, support=support)


def _combine(mols: list[Molecule]) -> Molecule:
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    for mol in mols:
        offset = len(atoms)
        atoms.extend(mol.atoms)
        bonds.extend(Bond(b.a + offset, b.b + offset, b.order) for b in mol.bonds)
    return Molecule(atoms, bonds)


def _bond_profile(mol: Molecule, idx: int, shared: set[int]):
    profile = []
    for j in mol.neighbors[idx]:
        nbr_map = mol.atoms[j].map_id
        key = nbr_map if nbr_map in shared else 0
        profile.append((key, int(mol.bond_between(idx, j).order)))
    return sorted(profile)


def _components(mol: Molecule, atom_indices: list[int]) -> list[list[int]]:
    keep = set(atom_indices)
    seen: set[int] = set()
    comps = []
    for start in atom_indices:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in mol.neighbors[i]:
                if j in keep and j not in seen:
                    seen.add(j)
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def _pattern_from(mol: Molecule, atom_indices: list[int],
                  keep_all_maps: bool = False, keep_maps: set[int] | None = None):
    index = {old: new for new, old in enumerate(atom_indices)}
    atoms = []
    for old in atom_indices:
        a = mol.atoms[old]
        if keep_all_maps:
            map_id = a.map_id
        else:
            map_id = a.map_id if (keep_maps and a.map_id in keep_maps) else 0
        atoms.append(AtomPattern(element=a.element, aromatic=a.aromatic,
                                 hydrogens=a.hydrogens, degree=mol.degree(old),
                                 charge=a.charge, map_id=map_id))
    bonds = []
    for b in mol.bonds:
        if b.a in index and b.b in index:
            bonds.append(PatternBond(index[b.a], index[b.b], b.order))
    return PatternGraph(atoms, bonds)


# -- template fingerprints and screen bits --------------------------------------

def template_fingerprint(t: Template, n_bits: int = 4096, radius: int = 2) -> Fingerprint:
    """Union of hashed pattern environments from both sides of the rule."""
    identifiers: set[int] = set()
    for pg in (t.product_pattern, *t.precursor_patterns):
        identifiers |= _pattern_identifiers(pg, radius)
    bits = frozenset(i % n_bits for i in identifiers)
    return Fingerprint(bits=bits, radius=radius, n_bits=n_bits)


def _pattern_invariant(pa: AtomPattern) -> int:
    return hash64(
        4,
        pa.element if pa.element is not None else -1,
        2 if pa.aromatic is None else int(pa.aromatic),
        pa.hydrogens if pa.hydrogens is not None else -1,
        pa.degree if pa.degree is not None else -1,
        pa.charge if pa.charge is not None else 1 << 30,
    )


def _pattern_identifiers(pg: PatternGraph, radius: int) -> set[int]:
    current = [_pattern_invariant(pa) for pa in pg.atoms]
    collected = set(current)
    for _ in range(radius):
        fresh = []
        for i in range(len(pg.atoms)):
            nbrs = pg.neighbors[i]
            if not nbrs:
                fresh.append(current[i])
                continue
            around = sorted(
                (int(pg.bonds[k].order) if pg.bonds[k].order is not None else 0,
                 current[j])
                for j, k in nbrs
            )
            flat = [5, current[i]]
            for order, ident in around:
                flat.extend((order, ident))
            fresh.append(hash64(*flat))
        current = fresh
        collected.update(current)
    return collected


def required_screen_bits(t: Template, n_bits: int) -> frozenset:
    """Radius-0 bits every matching molecule must have: one per fully pinned
    product-pattern atom. Guarantees no false negatives for the screen."""
    bits = set()
    for pa in t.product_pattern.atoms:
        if pa.fully_pinned:
            ident = atom_environment_id(pa.element, pa.charge, pa.degree,
                                        pa.hydrogens, pa.aromatic)
            bits.add(ident % n_bits)
    return frozenset(bits)


# -- library -------------------------------------------------------------------

class TemplateLibrary:
    """Immutable, densely indexed collection of templates."""

    def __init__(self, templates):
        self.templates: tuple[Template, ...] = tuple(templates)
        for expect, t in enumerate(self.templates):
            if t.id != expect:
                raise LibraryError(f"template ids must be dense: got {t.id}, "
                                   f"expected {expect}")
        texts = [t.text for t in self.templates]
        dupes = [text for text, c in Counter(texts).items() if c > 1]
        if dupes:
            raise LibraryError(f"duplicate canonical rule text: {dupes[0]!r}")
        self.index: dict[str, int] = {t.text: t.id for t in self.templates}

    def __len__(self):
        return len(self.templates)

    def __getitem__(self, tid: int) -> Template:
        return self.templates[tid]

    def __iter__(self):
        return iter(self.templates)

    def checksum(self) -> bytes:
        h = hashlib.sha256()
        for t in self.templates:
            row = f"{t.id}\t{t.text}\t{t.source}\t{t.enzyme}\t{t.support}\n"
            h.update(row.encode("utf-8"))
        return h.digest()


_LIBRARY_HEADER = ["id", "rule_text", "source", "enzyme_id", "support"]


def save_template_library(lib: TemplateLibrary, path) -> None:
    lines = ["\t".join(_LIBRARY_HEADER)]
    for t in lib:
        lines.append(f"{t.id}\t{t.text}\t{_SOURCE_TSV[t.source]}\t{t.enzyme}\t{t.support}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_template_library(path) -> TemplateLibrary:
    """Load a TSV library; either every rule parses or the error names them all."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = "\t".join(_LIBRARY_HEADER)
    if not lines or lines[0].split("\t") != _LIBRARY_HEADER:
        raise LibraryError(f"{path}: expected header {header!r}")
    templates = []
    problems = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            problems.append(f"line {lineno}: expected 5 columns")
            continue
        tid, rule_text, source, enzyme_id, support = fields
        try:
            template = parse_template(
                rule_text, id=int(tid),
                source=_SOURCE_FROM_TSV.get(source, source),
                enzyme=int(enzyme_id), support=int(support))
            templates.append(template)
        except (TemplateSyntaxError, LibraryError, ValueError) as exc:
            problems.append(f"line {lineno}: {exc}")
    if problems:
        raise LibraryError(f"{path}: " + "; ".join(problems))
    return TemplateLibrary(templates)


def build_library_from_reactions(reactions, env_radius: int = 1):
    """Extract and deduplicate templates from mapped reactions.

    Returns (TemplateLibrary, rejects) where rejects is a list of
    (row_index, error_name, message) for reactions that failed extraction.
    Support counts how many reactions produced each template.
    """
    templates: list[Template] = []
    index: dict[str, int] = {}
    rejects: list[tuple[int, str, str]] = []
    for row, rxn in enumerate(reactions):
        try:
            template = extract_template(
                rxn.reactants, rxn.product, env_radius=env_radius,
                id=len(templates), source=rxn.source)
        except (UnmappedAtomError, NoChangeError, TemplateSyntaxError,
                MoleculeError, ValueError) as exc:
            rejects.append((row, type(exc).__name__, str(exc)))
            continue
        if template.text in index:
            tid = index[template.text]
            old = templates[tid]
            templates[tid] = Template(
                id=old.id, product_pattern=old.product_pattern,
                precursor_patterns=old.precursor_patterns, source=old.source,
                enzyme=old.enzyme, support=old.support + 1, text=old.text)
        else:
            index[template.text] = template.id
            templates.append(Template(
                id=template.id, product_pattern=template.product_pattern,
                precursor_patterns=template.precursor_patterns,
                source=template.source, enzyme=template.enzyme,
                support=1, text=template.text))
    return TemplateLibrary(templates), rejects


# -- atom-mapped reaction files --------------------------------------------------

_REACTION_HEADER = ["reaction_smiles", "source"]


@dataclass(frozen=True)
class MappedReaction:
    reactants: MoleculeSet
    product: Molecule
    source: str
    text: str


def parse_mapped_reaction(text: str, source: str = SOURCE_SYNTHETIC) -> MappedReaction:
    from .smiles import parse_smiles, parse_smiles_set

    if text.count(">>") != 1:
        raise TemplateSyntaxError(f"reaction needs exactly one '>>': {text!r}")
    left, right = text.split(">>")
    reactants = parse_smiles_set(left)
    product = parse_smiles(right)
    return MappedReaction(reactants=reactants, product=product,
                          source=source, text=text)


def load_reactions(path) -> list[MappedReaction]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = "\t".join(_REACTION_HEADER)
    if not lines or lines[0].split("\t") != _REACTION_HEADER:
        raise LibraryError(f"{path}: expected header {header!r}")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise LibraryError(f"{path} line {lineno}: expected 2 columns")
        rxn_text, source = fields
        out.append(parse_mapped_reaction(
            rxn_text, source=_SOURCE_FROM_TSV.get(source, source)))
    return out


def save_reactions(reactions, path) -> None:
    lines = ["\t".join(_REACTION_HEADER)]
    for rxn in reactions:
        lines.append(f"{rxn.text}\t{_SOURCE_TSV[rxn.source]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
