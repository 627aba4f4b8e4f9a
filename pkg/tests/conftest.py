from pathlib import Path

import pytest

from ontoforge.corpus import build_frequency_index, ingest_directory
from ontoforge.frames import FrameExtractor
from ontoforge.termhood import TermRecognizer

FIXTURES = Path(__file__).parent / "fixtures"
MINICORPUS = FIXTURES / "minicorpus"
EXAMPLE_SENTENCE = FIXTURES / "example_sentence.conllu"


@pytest.fixture(scope="session")
def domain_docs():
    return ingest_directory(MINICORPUS / "domain", "domain")


@pytest.fixture(scope="session")
def contrastive_docs():
    return ingest_directory(MINICORPUS / "contrastive", "contrastive")


@pytest.fixture(scope="session")
def domain_index(domain_docs):
    return build_frequency_index(domain_docs)


@pytest.fixture(scope="session")
def contrastive_index(contrastive_docs):
    return build_frequency_index(contrastive_docs)


@pytest.fixture(scope="session")
def fixture_frames(domain_docs, domain_index):
    return FrameExtractor(index=domain_index).fit(domain_docs).transform(domain_docs)


@pytest.fixture(scope="session")
def recognizer(domain_index, contrastive_index, fixture_frames):
    return TermRecognizer(domain_index, contrastive_index, top_n=36).fit(fixture_frames)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
