from pathlib import Path

import pytest

from mhnpath.mhn import Ensemble, ModelConfig, init_model
from mhnpath.templates import build_library_from_reactions, load_reactions

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_reactions():
    return load_reactions(FIXTURES / "reactions_100.tsv")


@pytest.fixture(scope="session")
def fixture_library(fixture_reactions):
    lib, rejects = build_library_from_reactions(fixture_reactions, env_radius=1)
    assert not rejects
    return lib


@pytest.fixture(scope="session")
def small_model_config():
    return ModelConfig(fp_bits=512, d_assoc=32, mol_layers=1, temp_layers=2,
                       epochs=2, batch_size=16, dropout=0.0, seed=11)


@pytest.fixture(scope="session")
def fixture_ensemble(fixture_library, small_model_config):
    """Untrained but deterministic prioritizer over the fixture library."""
    model = init_model(small_model_config, fixture_library)
    return Ensemble([model], fixture_library)
