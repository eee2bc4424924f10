"""Ranking metrics (literature-rule accuracy, applicable-rule counts) and
route comparison against reference pathways."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .mhn.ensemble import Ensemble, rank_templates
from .molecule import Molecule
from .smiles import parse_smiles_set
from .templates import apply_template

TOP_NS = (1, 10, 50, 100)


class EmptyCases(ValueError):
    pass


class NoRoutes(ValueError):
    pass


@dataclass(frozen=True)
class EvalCase:
    product: Molecule
    true_template_id: int


def load_cases(path) -> list[EvalCase]:
    from .mhn.train import load_training_set

    return [EvalCase(mol, tid) for mol, tid in load_training_set(path)]


def literature_rule_accuracy(cases, ensemble: Ensemble, n: int) -> float:
    """Fraction of cases whose true template ranks in the unscreened top n."""
    cases = list(cases)
    if not cases:
        raise EmptyCases("no evaluation cases")
    hits = 0
    for case in cases:
        ranked = rank_templates(ensemble, case.product, n, screen=False)
        if any(tid == case.true_template_id for tid, _ in ranked):
            hits += 1
    return hits / len(cases)


def _applicable_count(case: EvalCase, ensemble: Ensemble, n: int,
                      max_matches: int) -> int:
    ranked = rank_templates(ensemble, case.product, n, screen=True)
    count = 0
    for tid, _ in ranked:
        if apply_template(ensemble.library[tid], case.product, max_matches):
            count += 1
    return count


def avg_applicable_rules(cases, ensemble: Ensemble, n: int,
                         max_matches: int = 8) -> float:
    """Mean number of top-n templates that actually apply to the product."""
    cases = list(cases)
    if not cases:
        raise EmptyCases("no evaluation cases")
    total = sum(_applicable_count(c, ensemble, n, max_matches) for c in cases)
    return total / len(cases)


def any_applicable_accuracy(cases, ensemble: Ensemble, n: int,
                            max_matches: int = 8) -> float:
    """Fraction of cases with at least one applicable template in the top n."""
    cases = list(cases)
    if not cases:
        raise EmptyCases("no evaluation cases")
    hits = sum(
        1 for c in cases if _applicable_count(c, ensemble, n, max_matches) > 0)
    return hits / len(cases)


@dataclass
class MetricReport:
    case_count: int
    rows: dict  # n -> {"lit_rule_acc": x, "avg_applicable": y, "any_applicable": z}

    def as_csv(self) -> str:
        lines = ["n,lit_rule_acc,avg_applicable,any_applicable"]
        for n in sorted(self.rows):
            row = self.rows[n]
            lines.append(f"{n},{row['lit_rule_acc']!r},{row['avg_applicable']!r},"
                         f"{row['any_applicable']!r}")
        return "\n".join(lines) + "\n"

    def as_table(self) -> str:
        ns = sorted(self.rows)
        header = ["Metric"] + [f"T{n}" for n in ns]
        body = [
            ["Lit. Rule Accuracy"] + [f"{self.rows[n]['lit_rule_acc']:.3f}" for n in ns],
            ["Avg. Applicable Rules"] + [f"{self.rows[n]['avg_applicable']:.3f}" for n in ns],
            ["Presence of Applicable Rule"] + [f"{self.rows[n]['any_applicable']:.3f}" for n in ns],
        ]
        widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*header)]
        lines += [fmt.format(*row) for row in body]
        lines.append("")
        lines.append(f"cases: {self.case_count}")
        lines.append("note: rule accuracy is computed on unscreened rankings; "
                     "applicability metrics on screened rankings.")
        return "\n".join(lines) + "\n"


def build_report(cases, ensemble: Ensemble, ns=TOP_NS,
                 max_matches: int = 8) -> MetricReport:
    cases = list(cases)
    if not cases:
        raise EmptyCases("no evaluation cases")
    rows = {}
    for n in ns:
        rows[n] = {
            "lit_rule_acc": literature_rule_accuracy(cases, ensemble, n),
            "avg_applicable": avg_applicable_rules(cases, ensemble, n, max_matches),
            "any_applicable": any_applicable_accuracy(cases, ensemble, n, max_matches),
        }
    return MetricReport(case_count=len(cases), rows=rows)


def save_report(report: MetricReport, csv_path, table_path=None) -> None:
    Path(csv_path).write_text(report.as_csv(), encoding="utf-8")
    if table_path is not None:
        Path(table_path).write_text(report.as_table(), encoding="utf-8")


# -- route comparison ------------------------------------------------------------

def _as_step_keys(reference) -> tuple[str, ...]:
    if hasattr(reference, "step_keys"):
        return tuple(reference.step_keys)
    return tuple(parse_smiles_set(step).canonical_key for step in reference)


def route_replicated(predicted, reference) -> bool:
    """True iff some predicted route matches the reference step for step
    (same length, identical precursor sets by canonical key; template
    identity is irrelevant)."""
    want = _as_step_keys(reference)
    return any(tuple(route.step_keys) == want for route in predicted)


def length_comparison(predicted, reference) -> tuple[str, int]:
    """Best predicted route length vs the reference: (classification, delta)."""
    predicted = list(predicted)
    if not predicted:
        raise NoRoutes("no predicted routes")
    reference_length = (reference if isinstance(reference, int)
                        else len(_as_step_keys(reference)))
    best = min(route.length for route in predicted)
    delta = best - reference_length
    label = "shorter" if delta < 0 else ("equal" if delta == 0 else "longer")
    return label, delta
