import pytest

from mhnpath_ingest.lexer import LexError, scan_component, scan_side, strip_maps


def test_scan_plain():
    atoms = scan_component("CCO")
    assert atoms == [("C", 0), ("C", 0), ("O", 0)]


def test_scan_mapped_brackets():
    atoms = scan_component("[CH3:1][C:2](=[O:3])[OH:4]")
    assert atoms == [("C", 1), ("C", 2), ("O", 3), ("O", 4)]


def test_scan_aromatics_and_rings():
    atoms = scan_component("c1ccccc1")
    assert [a for a, _ in atoms] == ["C"] * 6
    scan_component("C%12CC%12")


def test_scan_two_letter():
    assert scan_component("ClCBr") == [("Cl", 0), ("C", 0), ("Br", 0)]


def test_scan_charges():
    assert scan_component("[NH4+]") == [("N", 0)]
    assert scan_component("[O-2]") == [("O", 0)]


@pytest.mark.parametrize("bad", [
    "", "C(", "C)", "C1CC", "[CH3", "[13C]", "[C@H](N)C", "F/C=C/F",
    "[XX:1]", "C?C", "[C:]",
])
def test_scan_rejects(bad):
    with pytest.raises(LexError):
        scan_component(bad)


def test_scan_side_splits_dots():
    sides = scan_side("CC.O")
    assert len(sides) == 2


def test_strip_maps():
    assert strip_maps("[CH3:1][OH:22]") == "[CH3][OH]"
    assert strip_maps("CCO") == "CCO"
    assert strip_maps("[NH4+]") == "[NH4+]"
