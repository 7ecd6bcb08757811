import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from segforms.corpus import ingest_csv
from segforms.extract import StopLexicon, aggregate_firsts, canonicalize_reversed, extract_candidates

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus20():
    return ingest_csv(FIXTURES / "corpus20.csv")


@pytest.fixture(scope="session")
def lexicon():
    return StopLexicon.bundled()


@pytest.fixture(scope="session")
def candidates20(corpus20, lexicon):
    cands = extract_candidates(corpus20, "segregation", lexicon)
    cands = aggregate_firsts(cands, corpus20)
    cands = canonicalize_reversed(cands)
    return aggregate_firsts(cands, corpus20)


@pytest.fixture(scope="session")
def stopset(lexicon):
    return set().union(*lexicon.categories.values())
