from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def cleaned_tsv(tmp_path_factory):
    from mhnpath_ingest import clean_reactions

    out = tmp_path_factory.mktemp("clean") / "cleaned.tsv"
    stats = clean_reactions(FIXTURES / "raw_reactions.txt", out, source="syn")
    return out, stats
