"""Ensembles: per-template max collation over members plus the fingerprint
substructure screen."""

from __future__ import annotations

import numpy as np

from ..fingerprint import Fingerprint, fingerprint
from ..molecule import Molecule
from ..templates import Template, TemplateLibrary, required_screen_bits
from .model import PrioritizerModel


class Ensemble:
    """Non-empty set of prioritizers bound to one template library."""

    def __init__(self, models, library: TemplateLibrary):
        models = list(models)
        if not models:
            raise ValueError("ensemble needs at least one model")
        first_cfg = models[0].cfg
        for model in models:
            if (model.cfg.fp_bits, model.cfg.fp_radius) != (
                    first_cfg.fp_bits, first_cfg.fp_radius):
                raise ValueError("ensemble members must share fingerprint settings")
            model.bind_library(library)
            model.build_template_cache()
        self.models = models
        self.library = library
        self._screen_bits = [
            required_screen_bits(t, first_cfg.fp_bits) for t in library
        ]

    @property
    def fp_bits(self) -> int:
        return self.models[0].cfg.fp_bits

    @property
    def fp_radius(self) -> int:
        return self.models[0].cfg.fp_radius

    def molecule_fingerprint(self, mol: Molecule) -> Fingerprint:
        return fingerprint(mol, self.fp_radius, self.fp_bits)

    def collated_scores(self, mol_fp: Fingerprint) -> np.ndarray:
        """Per-template score: max of members' probabilities."""
        scores = None
        for model in self.models:
            p = model.forward(mol_fp)
            scores = p if scores is None else np.maximum(scores, p)
        return scores

    def screen_pass(self, mol_fp: Fingerprint, template_id: int) -> bool:
        return self._screen_bits[template_id] <= mol_fp.bits


def substructure_screen(mol_fp: Fingerprint, template: Template) -> bool:
    """True iff every bit the template requires is present in the molecule
    fingerprint. Never falsely negative: required bits are radius-0 ids of
    fully pinned product-pattern atoms."""
    return required_screen_bits(template, mol_fp.n_bits) <= mol_fp.bits


def rank_templates(ensemble: Ensemble, mol: Molecule, top_n: int,
                   screen: bool = True) -> list[tuple[int, float]]:
    """Top templates by collated score, descending; ties broken by ascending id."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    mol_fp = ensemble.molecule_fingerprint(mol)
    scores = ensemble.collated_scores(mol_fp)
    order = sorted(range(len(scores)), key=lambda t: (-scores[t], t))
    out = []
    for tid in order:
        if screen and not ensemble.screen_pass(mol_fp, tid):
            continue
        out.append((tid, float(scores[tid])))
        if len(out) == top_n:
            break
    return out
