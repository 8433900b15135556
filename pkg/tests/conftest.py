import numpy as np
import pytest

from fragscan.corpus import build_attack_corpus, generate_synthetic


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """14 plain + 8 encrypted synthetic files, 4-64 KiB."""
    root = tmp_path_factory.mktemp("small")
    return generate_synthetic(root, {"plain": 14, "encrypted": 8}, seed=3, max_size=65536)


@pytest.fixture(scope="session")
def attack_corpus(tmp_path_factory):
    """Default attack corpus: 200 plain + 90 encrypted, each encrypted file forged 3 ways."""
    return build_attack_corpus(tmp_path_factory.mktemp("attack"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
