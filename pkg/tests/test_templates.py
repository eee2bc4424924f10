import pytest

from mhnpath import parse_smiles, parse_smiles_set, write_canonical_smiles
from mhnpath.fingerprint import fingerprint
from mhnpath.templates import (
    LibraryError,
    NoChangeError,
    TemplateLibrary,
    TemplateSyntaxError,
    UnmappedAtomError,
    apply_template,
    build_library_from_reactions,
    extract_template,
    load_template_library,
    parse_template,
    required_screen_bits,
    save_template_library,
    serialize_template,
    template_fingerprint,
)


def key_of(smiles):
    return parse_smiles_set(smiles).canonical_key


# -- parsing ---------------------------------------------------------------

def test_parse_two_precursors():
    t = parse_template("[C:1][O:2]>>[C:1].[O:2]")
    assert len(t.precursor_patterns) == 2
    assert all(len(pg) == 1 for pg in t.precursor_patterns)


def test_parse_identity():
    t = parse_template("[C:1]>>[C:1]")
    assert len(t.precursor_patterns) == 1


def test_parse_recursive_rejected():
    from mhnpath.patterns import UnsupportedPrimitive

    with pytest.raises(UnsupportedPrimitive):
        parse_template("[C$(CO):1]>>[C:1]")


def test_parse_serialize_closure():
    text = "[C;H0;D3;+0:2]-[O;H0;D2;+0:5]>>[C;H0;D3;+0:2]-[O;H1;D1;+0].[O;H1;D1;+0:5]"
    once = serialize_template(parse_template(text))
    twice = serialize_template(parse_template(once))
    assert once == twice


def test_parse_structural_round_trip():
    text = "[C:1][O:2]>>[C:1].[O:2]"
    t = parse_template(text)
    t2 = parse_template(serialize_template(t))
    assert t2.product_pattern == t.product_pattern
    assert t2.precursor_patterns == t.precursor_patterns


def test_introduced_atom_needs_element():
    with pytest.raises(TemplateSyntaxError, match="element"):
        parse_template("[C:1]>>[C:1][a]")


def test_product_side_single_pattern():
    with pytest.raises(TemplateSyntaxError):
        parse_template("[C:1].[O:2]>>[C:1][O:2]")


# -- application -------------------------------------------------------------

def test_ether_cleavage():
    t = parse_template("[C:1][O:2][C:3]>>[C:1][O:2].[C:3]")
    results = apply_template(t, parse_smiles("COC"))
    assert {r.canonical_key for r in results} == {key_of("CO.C")}


def test_identity_application():
    t = parse_template("[C:1]>>[C:1]")
    mol = parse_smiles("CCO")
    results = apply_template(t, mol)
    assert len(results) == 1
    assert results[0].canonical_key == key_of("CCO")


def test_not_applicable_empty():
    t = parse_template("[N:1]>>[N:1]")
    assert apply_template(t, parse_smiles("CCO")) == []


def test_max_matches_bounds_embeddings():
    t = parse_template("[C:1][C:2]>>[C:1].[C:2]")
    long_chain = parse_smiles("C" * 12)
    all_results = apply_template(t, long_chain, max_matches=64)
    capped = apply_template(t, long_chain, max_matches=1)
    assert len(capped) == 1
    assert len(all_results) > len(capped)


def test_apply_permutation_invariant():
    import random

    t = parse_template("[C:1][O:2][C:3]>>[C:1][O:2].[C:3]")
    mol = parse_smiles("CCOC(C)C")
    want = {r.canonical_key for r in apply_template(t, mol, max_matches=32)}
    rng = random.Random(1)
    for _ in range(20):
        order = list(range(mol.num_atoms))
        rng.shuffle(order)
        got = {r.canonical_key
               for r in apply_template(t, mol.permuted(order), max_matches=32)}
        assert got == want


def test_apply_splits_components():
    t = parse_template("[C:1][O:2][C:3]>>[C:1][O:2].[C:3]")
    results = apply_template(t, parse_smiles("COC"))
    assert len(results[0].members) == 2


def test_invalid_chemistry_filtered_not_raised():
    # rewriting the carbon into a 5-bond state must be dropped silently
    t = parse_template("[C;H0:1]>>[C;H0;D5:1](C)(C)(C)(C)C")
    assert apply_template(t, parse_smiles("C(F)(F)(F)F")) == []


# -- extraction ---------------------------------------------------------------

ESTER_REACTANTS = "[CH3:1][C:2](=[O:3])[OH:4].[OH:5][CH3:6]"
ESTER_PRODUCT = "[CH3:1][C:2](=[O:3])[O:5][CH3:6]"


def test_esterification_round_trip_radius0():
    reactants = parse_smiles_set(ESTER_REACTANTS)
    product = parse_smiles(ESTER_PRODUCT)
    t = extract_template(reactants, product, env_radius=0)
    # the ester C-O bond sits inside the product pattern
    assert len(t.product_pattern.atoms) == 2
    assert len(t.product_pattern.bonds) == 1
    keys = {r.canonical_key for r in apply_template(t, product)}
    assert reactants.canonical_key in keys


def test_no_change_error():
    reactants = parse_smiles_set("[CH3:1][OH:2]")
    product = parse_smiles("[CH3:1][OH:2]")
    with pytest.raises(NoChangeError):
        extract_template(reactants, product, env_radius=1)


def test_unmapped_product_atom():
    reactants = parse_smiles_set("[CH3:1][OH:2]")
    product = parse_smiles("[CH3:1]O")
    with pytest.raises(UnmappedAtomError):
        extract_template(reactants, product, env_radius=0)


def test_product_map_missing_from_reactants():
    reactants = parse_smiles_set("[CH3:1][OH:2]")
    product = parse_smiles("[CH3:1][OH:7]")
    with pytest.raises(UnmappedAtomError):
        extract_template(reactants, product, env_radius=0)


def test_fixture_round_trip_rate(fixture_reactions):
    hits = 0
    for rxn in fixture_reactions:
        t = extract_template(rxn.reactants, rxn.product, env_radius=1)
        keys = {r.canonical_key for r in apply_template(t, rxn.product)}
        if rxn.reactants.canonical_key in keys:
            hits += 1
    assert hits / len(fixture_reactions) >= 0.90


# -- template fingerprints -----------------------------------------------------

def test_identity_fingerprint_matches_single_side():
    t = parse_template("[C:1]>>[C:1]")
    one_sided = parse_template("[C:1]>>[C:1]")
    assert template_fingerprint(t, 1024).bits == \
        template_fingerprint(one_sided, 1024).bits


def test_fingerprint_id_independent():
    a = parse_template("[C:1][O:2]>>[C:1].[O:2]", id=0)
    b = parse_template("[C:1][O:2]>>[C:1].[O:2]", id=7)
    assert template_fingerprint(a, 1024).bits == template_fingerprint(b, 1024).bits


def test_cleavage_fp_differs_from_identity():
    ether = parse_template("[C:1][O:2][C:3]>>[C:1][O:2].[C:3]")
    ident = parse_template("[C:1]>>[C:1]")
    assert template_fingerprint(ether, 4096).bits - \
        template_fingerprint(ident, 4096).bits


def test_screen_bits_subset_when_applicable():
    t = parse_template(
        "[C;H0;D3;+0:2]-[O;H0;D2;+0:5]>>[C;H0;D3;+0:2]-[O;H1;D1;+0].[O;H1;D1;+0:5]")
    mol = parse_smiles("CC(=O)OC")
    assert apply_template(t, mol)
    bits = required_screen_bits(t, 2048)
    assert bits <= fingerprint(mol, 2, 2048).bits


def test_screen_unpinned_empty():
    t = parse_template("[C:1]>>[C:1]")
    assert required_screen_bits(t, 2048) == frozenset()


# -- library -------------------------------------------------------------------

def test_library_round_trip(tmp_path, fixture_library):
    path = tmp_path / "lib.tsv"
    save_template_library(fixture_library, path)
    loaded = load_template_library(path)
    assert len(loaded) == len(fixture_library)
    assert [t.text for t in loaded] == [t.text for t in fixture_library]
    assert loaded.checksum() == fixture_library.checksum()


def test_library_dense_ids_enforced():
    t0 = parse_template("[C:1][O:2]>>[C:1].[O:2]", id=0)
    t2 = parse_template("[C:1][N:2]>>[C:1].[N:2]", id=2)
    with pytest.raises(LibraryError, match="dense"):
        TemplateLibrary([t0, t2])


def test_library_duplicate_rule_rejected():
    t0 = parse_template("[C:1][O:2]>>[C:1].[O:2]", id=0)
    t1 = parse_template("[C:1][O:2]>>[C:1].[O:2]", id=1)
    with pytest.raises(LibraryError, match="duplicate"):
        TemplateLibrary([t0, t1])


def test_library_load_reports_every_bad_line(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text(
        "id\trule_text\tsource\tenzyme_id\tsupport\n"
        "0\t[C:1]>>[C:1]\tsyn\t0\t1\n"
        "1\t[C$(CO):1]>>[C:1]\tsyn\t0\t1\n"
        "2\tnot a rule\tsyn\t0\t1\n",
        encoding="utf-8")
    with pytest.raises(LibraryError) as err:
        load_template_library(path)
    message = str(err.value)
    assert "line 3" in message and "line 4" in message


def test_build_library_counts_support(fixture_reactions):
    lib, rejects = build_library_from_reactions(fixture_reactions, env_radius=1)
    assert not rejects
    assert sum(t.support for t in lib) == len(fixture_reactions)
    assert [t.id for t in lib] == list(range(len(lib)))
