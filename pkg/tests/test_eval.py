import pytest

from mhnpath import parse_smiles
from mhnpath.evalharness import (
    EmptyCases,
    EvalCase,
    NoRoutes,
    any_applicable_accuracy,
    avg_applicable_rules,
    build_report,
    route_replicated,
    length_comparison,
    literature_rule_accuracy,
)
from mhnpath.mhn import rank_templates
from mhnpath.search.routes import Route
from mhnpath.search.tree import SearchEdge
from mhnpath.templates import apply_template


@pytest.fixture(scope="module")
def cases(fixture_reactions, fixture_library):
    """50 (product, true extracted template) cases from the bundled reactions."""
    out = []
    for rxn in fixture_reactions[:50]:
        from mhnpath.templates import extract_template

        t = extract_template(rxn.reactants, rxn.product, env_radius=1)
        out.append(EvalCase(product=rxn.product,
                            true_template_id=fixture_library.index[t.text]))
    return out


def brute_force_metrics(cases, ensemble, n, max_matches=8):
    """Independent recount with no shortcuts: full score vectors, hand sort."""
    lit_hits = 0
    applicable_counts = []
    any_hits = 0
    for case in cases:
        fp = ensemble.molecule_fingerprint(case.product)
        scores = ensemble.collated_scores(fp)
        full_order = sorted(range(len(scores)), key=lambda t: (-scores[t], t))
        if case.true_template_id in full_order[:n]:
            lit_hits += 1
        screened = [t for t in full_order if ensemble.screen_pass(fp, t)][:n]
        count = sum(
            1 for t in screened
            if apply_template(ensemble.library[t], case.product, max_matches))
        applicable_counts.append(count)
        any_hits += 1 if count else 0
    return (lit_hits / len(cases),
            sum(applicable_counts) / len(cases),
            any_hits / len(cases))


@pytest.mark.parametrize("n", [1, 10, 50])
def test_metrics_match_brute_force(cases, fixture_ensemble, n):
    lit, avg, any_ = brute_force_metrics(cases, fixture_ensemble, n)
    assert literature_rule_accuracy(cases, fixture_ensemble, n) == lit
    assert avg_applicable_rules(cases, fixture_ensemble, n) == avg
    assert any_applicable_accuracy(cases, fixture_ensemble, n) == any_


def test_metrics_invariant_to_case_order(cases, fixture_ensemble):
    reversed_cases = list(reversed(cases))
    for metric in (literature_rule_accuracy, avg_applicable_rules,
                   any_applicable_accuracy):
        assert metric(cases, fixture_ensemble, 10) == \
            metric(reversed_cases, fixture_ensemble, 10)


def test_avg_applicable_monotone_in_n(cases, fixture_ensemble):
    values = [avg_applicable_rules(cases[:10], fixture_ensemble, n)
              for n in (1, 5, 10, 25)]
    assert values == sorted(values)


def test_lit_accuracy_full_list_is_one(cases, fixture_ensemble):
    k = len(fixture_ensemble.library)
    assert literature_rule_accuracy(cases[:10], fixture_ensemble, k) == 1.0


def test_empty_cases():
    with pytest.raises(EmptyCases):
        literature_rule_accuracy([], None, 1)
    with pytest.raises(EmptyCases):
        avg_applicable_rules([], None, 1)
    with pytest.raises(EmptyCases):
        any_applicable_accuracy([], None, 1)


def test_report_structure(cases, fixture_ensemble):
    report = build_report(cases[:5], fixture_ensemble, ns=(1, 10))
    assert report.case_count == 5
    csv = report.as_csv()
    assert csv.splitlines()[0] == "n,lit_rule_acc,avg_applicable,any_applicable"
    table = report.as_table()
    assert "T1" in table and "T10" in table
    assert "unscreened" in table  # footer note on the screen decision


def fake_route(steps):
    edges = [SearchEdge(reaction_smiles=f"{s}>>X", temperature=25.0, enzyme=0,
                        score=-0.1, rule="", label=i)
             for i, s in enumerate(steps)]
    return Route(edges=edges, leaf=None)


def test_route_replicated_exact():
    predicted = [fake_route(["CC.O", "CCO"])]
    reference = ["O.CC", "OCC"]  # same chemistry, different writing
    assert route_replicated(predicted, reference)


def test_route_replicated_different_intermediate():
    predicted = [fake_route(["CC.O", "CCO"])]
    assert not route_replicated(predicted, ["CC.O", "CCN"])


def test_route_replicated_order_matters():
    predicted = [fake_route(["CC.O", "CCO"])]
    assert not route_replicated(predicted, ["CCO", "CC.O"])


def test_route_replicated_length_must_match():
    predicted = [fake_route(["CC.O"])]
    assert not route_replicated(predicted, ["CC.O", "CCO"])


def test_length_comparison():
    predicted = [fake_route(["A>>" and "CC"] * 3), fake_route(["CC"] * 5)]
    label, delta = length_comparison(predicted, 5)
    assert (label, delta) == ("shorter", -2)
    label, delta = length_comparison([fake_route(["CC"] * 4)], 4)
    assert (label, delta) == ("equal", 0)
    label, delta = length_comparison([fake_route(["CC"] * 4)], 3)
    assert (label, delta) == ("longer", 1)


def test_length_comparison_no_routes():
    with pytest.raises(NoRoutes):
        length_comparison([], 3)
