import numpy as np
import pytest

from corrnet.corpus import Corpus, Finding, load_corpus
from corrnet.embeddings import load_embeddings, random_table


@pytest.fixture(scope="session")
def mini_table():
    """16-dim vectors for the words used by the hand-written corpora."""
    return load_embeddings("tests/data/mini_vectors.txt")


@pytest.fixture(scope="session")
def synth_vocab():
    return random_table(50, 8, seed=0)


@pytest.fixture
def demo_corpus(tmp_path):
    lines = [
        "p1\t2010\tJob satisfaction\tJob performance\t0.30",
        "p1\t2010\tJob satisfaction\tAge\t0.10",
        "p2\t2011\tAge\tIncome\t0.25",
        "p2\t2011\tIncome\tJob performance\t0.15",
    ]
    path = tmp_path / "demo.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return load_corpus(path)


def random_corpus(rng, n_correlates=8, n_findings=20):
    """Small random corpus built directly from domain objects."""
    from corrnet.corpus import Correlate
    correlates = {i: Correlate(i, f"var {i}", (f"var{i}",)) for i in range(n_correlates)}
    findings = []
    for _ in range(n_findings):
        a, b = rng.choice(n_correlates, size=2, replace=False)
        findings.append(Finding(int(a), int(b), float(rng.uniform(-1, 1)),
                                f"p{int(rng.integers(3))}", 2010))
    return Corpus(correlates, findings)
