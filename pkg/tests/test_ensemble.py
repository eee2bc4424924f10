import numpy as np
import pytest

from mhnpath import parse_smiles
from mhnpath.mhn import Ensemble, ModelConfig, init_model, rank_templates, substructure_screen
from mhnpath.templates import TemplateLibrary, apply_template, parse_template


def make_lib():
    rules = ["[C:1][O:2]>>[C:1].[O:2]", "[C:1][N:2]>>[C:1].[N:2]",
             "[C:1][C:2]>>[C:1].[C:2]", "[N;H2;D1;+0:1]>>[N;H2;D1;+0:1]"]
    return TemplateLibrary([parse_template(r, id=i) for i, r in enumerate(rules)])


def make_ensemble(lib, n_models=1, base_seed=0, beta=0.05):
    models = [
        init_model(ModelConfig(fp_bits=128, d_assoc=16, seed=base_seed + i,
                               beta=beta, dropout=0.0), lib)
        for i in range(n_models)
    ]
    return Ensemble(models, lib)


def test_single_model_matches_forward():
    lib = make_lib()
    ens = make_ensemble(lib)
    mol = parse_smiles("CCO")
    fp = ens.molecule_fingerprint(mol)
    p = ens.models[0].forward(fp)
    ranked = rank_templates(ens, mol, top_n=len(lib), screen=False)
    expected = sorted(range(len(lib)), key=lambda t: (-p[t], t))
    assert [tid for tid, _ in ranked] == expected


def test_max_collation_rule():
    lib = make_lib()
    ens = make_ensemble(lib, n_models=2)
    mol = parse_smiles("CCO")
    fp = ens.molecule_fingerprint(mol)
    scores = ens.collated_scores(fp)
    per_model = [m.forward(fp) for m in ens.models]
    for t in range(len(lib)):
        assert scores[t] == max(p[t] for p in per_model)
        for p in per_model:
            assert scores[t] >= p[t]  # ensemble dominance


def test_beta_scaling_preserves_ranking():
    lib = make_lib()
    rng = np.random.default_rng(1)
    base = make_ensemble(lib, beta=0.05)
    scaled = make_ensemble(lib, beta=0.05 * 7.0)
    for _ in range(100):
        bits = rng.random(128) < 0.3
        fp_arr = bits.astype(np.float64)
        p_base = base.models[0].forward(fp_arr)
        p_scaled = scaled.models[0].forward(fp_arr)
        assert np.array_equal(np.argsort(-p_base, kind="stable"),
                              np.argsort(-p_scaled, kind="stable"))


def test_rank_ties_broken_by_ascending_id():
    lib = make_lib()
    ens = make_ensemble(lib)
    model = ens.models[0]
    model._tfp = np.tile(model._tfp[0], (len(lib), 1))  # exact score ties
    model.template_matrix_cache = None
    model.build_template_cache()
    ranked = rank_templates(ens, parse_smiles("CCO"), top_n=4, screen=False)
    assert [tid for tid, _ in ranked] == [0, 1, 2, 3]


def test_screen_removes_impossible_templates():
    lib = make_lib()
    ens = make_ensemble(lib)
    mol = parse_smiles("CCO")  # no nitrogen: template 3 (pinned NH2) cannot apply
    unscreened = rank_templates(ens, mol, top_n=4, screen=False)
    screened = rank_templates(ens, mol, top_n=4, screen=True)
    assert 3 in [t for t, _ in unscreened]
    assert 3 not in [t for t, _ in screened]


def test_screen_soundness_on_fixture(fixture_reactions, fixture_library, fixture_ensemble):
    from mhnpath.fingerprint import fingerprint

    cfg = fixture_ensemble.models[0].cfg
    violations = 0
    for rxn in fixture_reactions:
        fp = fingerprint(rxn.product, cfg.fp_radius, cfg.fp_bits)
        for template in fixture_library:
            if apply_template(template, rxn.product, max_matches=4):
                if not substructure_screen(fp, template):
                    violations += 1
    assert violations == 0


def test_screen_flag_function():
    lib = make_lib()
    from mhnpath.fingerprint import fingerprint

    mol_fp = fingerprint(parse_smiles("CCO"), 2, 128)
    assert substructure_screen(mol_fp, lib[0])  # unpinned template: empty bits
    assert not substructure_screen(mol_fp, lib[3])


def test_rank_top_n_validation():
    lib = make_lib()
    ens = make_ensemble(lib)
    with pytest.raises(ValueError):
        rank_templates(ens, parse_smiles("C"), top_n=0)


def test_mixed_fp_settings_rejected():
    lib = make_lib()
    a = init_model(ModelConfig(fp_bits=128, d_assoc=8, seed=0), lib)
    b = init_model(ModelConfig(fp_bits=256, d_assoc=8, seed=1), lib)
    with pytest.raises(ValueError):
        Ensemble([a, b], lib)


def test_empty_ensemble_rejected():
    with pytest.raises(ValueError):
        Ensemble([], make_lib())
