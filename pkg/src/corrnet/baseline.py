"""Mean-value comparative baseline: predict from reported correlations only."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, _pair_key


@dataclass
class BaselineModel:
    per_correlate: dict[int, tuple[float, int]]  # id -> (sum of r, count)
    per_pair: dict[tuple[int, int], tuple[float, int]]
    global_mean: float
    mode: str = "pool"  # "pool": union of findings; "average": mean of the two means


def fit_baseline(corpus: Corpus, train_indices, mode: str = "pool") -> BaselineModel:
    """Accumulate per-correlate r sums/counts over the training findings."""
    if mode not in ("pool", "average"):
        raise ValueError("mode must be 'pool' or 'average'")
    train_indices = list(train_indices)
    if not train_indices:
        raise ValueError("train set is empty")
    per_correlate: dict[int, tuple[float, int]] = {}
    per_pair: dict[tuple[int, int], tuple[float, int]] = {}
    total = 0.0
    for i in train_indices:
        f = corpus.findings[i]
        total += f.r
        for cid in (f.correlate_a, f.correlate_b):
            s, c = per_correlate.get(cid, (0.0, 0))
            per_correlate[cid] = (s + f.r, c + 1)
        key = _pair_key(f.correlate_a, f.correlate_b)
        s, c = per_pair.get(key, (0.0, 0))
        per_pair[key] = (s + f.r, c + 1)
    return BaselineModel(per_correlate, per_pair, total / len(train_indices), mode)


def baseline_predict(model: BaselineModel, c_i: int, c_j: int) -> float:
    """Mean reported r over training findings containing either correlate.

    Findings that contain both correlates (i.e. report this very pair) are
    counted once. Pairs with no training coverage fall back to the global
    training mean. The "average" mode instead averages the two correlates'
    individual means.
    """
    seen_i = model.per_correlate.get(c_i)
    seen_j = model.per_correlate.get(c_j)
    if seen_i is None and seen_j is None:
        return model.global_mean
    if model.mode == "average":
        means = [s / c for entry in (seen_i, seen_j) if entry is not None
                 for s, c in [entry]]
        return sum(means) / len(means)
    s_i, c_count_i = seen_i if seen_i is not None else (0.0, 0)
    s_j, c_count_j = seen_j if seen_j is not None else (0.0, 0)
    s_ij, c_ij = model.per_pair.get(_pair_key(c_i, c_j), (0.0, 0))
    return (s_i + s_j - s_ij) / (c_count_i + c_count_j - c_ij)
