import itertools
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))  # make tests/ helper modules importable

from synthlab import create_session, ingest_into_session, load_fixture

FIXTURES_DIR = TESTS_DIR.parent / "fixtures"
CORPUS_PATH = FIXTURES_DIR / "sample_corpus.json"


def make_clock(label: str = "2026-04-01"):
    """Deterministic clock: each call is one microsecond after the last."""
    counter = itertools.count()

    def clock() -> str:
        n = next(counter)
        seconds, micros = divmod(n, 1_000_000)
        minutes, seconds = divmod(seconds, 60)
        hours, minutes = divmod(minutes, 60)
        return f"{label}T{hours:02d}:{minutes:02d}:{seconds:02d}.{micros:06d}Z"

    return clock


@pytest.fixture
def clock():
    return make_clock()


@pytest.fixture(scope="session")
def corpus():
    return load_fixture(CORPUS_PATH)


@pytest.fixture
def session(clock, corpus):
    """A live session preloaded with the 12-annotation sample corpus."""
    s = create_session("ses-000001", "maya", clock=clock)
    ingest_into_session(s, list(corpus), origin="fixture")
    return s
