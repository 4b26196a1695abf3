import pytest

from corrnet.textnorm import NormalizationConfig, normalize


def test_basic_examples():
    assert normalize("Job satisfaction") == ["job", "satisfaction"]
    assert normalize("Gross domestic product (GDP)") == ["gross", "domestic", "product", "gdp"]
    assert normalize("self-esteem") == ["self-esteem"]


def test_apostrophes_kept_in_word():
    assert normalize("worker's commitment") == ["worker's", "commitment"]


def test_edge_punctuation_stripped():
    assert normalize("--dash-- 'quoted'") == ["dash", "quoted"]
    for tok in normalize("  a,b;c:  (d) [e] ?!"):
        assert tok == tok.strip()
        assert not any(ch.isspace() for ch in tok)
        assert not tok.startswith(("-", "'"))
        assert not tok.endswith(("-", "'"))


def test_truncation():
    raw = " ".join(f"w{i}" for i in range(50))
    assert len(normalize(raw, NormalizationConfig(max_tokens=5))) == 5
    assert normalize(raw)[:3] == ["w0", "w1", "w2"]


def test_flags():
    cfg = NormalizationConfig(lowercase=False, strip_punctuation=False)
    assert normalize("Job (GDP)", cfg) == ["Job", "(GDP)"]


def test_invalid_config():
    with pytest.raises(ValueError):
        NormalizationConfig(max_tokens=0)


def test_idempotence():
    samples = [
        "Gross domestic product (GDP)",
        "worker's  self-esteem!!",
        "Émotions & bien-être",
        "a---b  c'd'",
        "",
    ]
    for raw in samples:
        once = normalize(raw)
        assert normalize(" ".join(once)) == once


def test_empty_result_is_valid():
    assert normalize("???") == []
