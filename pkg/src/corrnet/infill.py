"""Multi-paper correlation tables with model-predicted infilling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, _pair_key
from .embeddings import EmbeddingTable, OovPolicy
from .ensemble import Ensemble, ensemble_estimate
from .neural import ModelParams, predict_pair
from .training import SequenceCache

KIND_DIAGONAL = "D"
KIND_REPORTED = "R"
KIND_PREDICTED = "P"


@dataclass
class CorrelationTable:
    correlate_order: list[int]
    texts: list[str]
    values: np.ndarray   # (n, n), nan on the diagonal
    kinds: np.ndarray    # (n, n) of {"D", "R", "P"}
    infill_fraction: float


def _predictor(model, cache):
    if isinstance(model, Ensemble):
        return lambda a, b: ensemble_estimate(model, cache[a], cache[b], (a, b)).mean
    if isinstance(model, ModelParams):
        return lambda a, b: predict_pair(cache[a], cache[b], model)[0].r_hat
    raise TypeError("model must be ModelParams or Ensemble")


def build_table(corpus: Corpus, paper_ids: list[str], model,
                table: EmbeddingTable, oov: OovPolicy = OovPolicy.MEAN) -> CorrelationTable:
    """Assemble the symmetric correlation table over the papers' correlates.

    Rows/columns are the union of the papers' correlates, grouped by paper
    in input order (a correlate appearing in several papers is placed at its
    first paper). Cells with corpus findings are Reported (mean r over
    reports); every other off-diagonal cell is Predicted by the model.
    """
    known_papers = {f.paper_id for f in corpus.findings}
    order: list[int] = []
    placed: set[int] = set()
    for pid in paper_ids:
        if pid not in known_papers:
            raise ValueError(f"unknown paper id {pid!r}")
        for f in corpus.findings:
            if f.paper_id != pid:
                continue
            for cid in (f.correlate_a, f.correlate_b):
                if cid not in placed:
                    placed.add(cid)
                    order.append(cid)
    n = len(order)
    if n < 2:
        raise ValueError("selected papers contribute fewer than 2 correlates")

    cache = SequenceCache(corpus, table, oov)
    predict = _predictor(model, cache)
    values = np.full((n, n), np.nan)
    kinds = np.full((n, n), KIND_DIAGONAL, dtype=object)
    n_reported = 0
    n_predicted = 0
    for i in range(n):
        for j in range(i + 1, n):
            a, b = order[i], order[j]
            finding_idx = corpus.pair_index.get(_pair_key(a, b))
            if finding_idx:
                val = float(np.mean([corpus.findings[k].r for k in finding_idx]))
                kind = KIND_REPORTED
                n_reported += 1
            else:
                val = predict(a, b)
                kind = KIND_PREDICTED
                n_predicted += 1
            values[i, j] = values[j, i] = val
            kinds[i, j] = kinds[j, i] = kind
    return CorrelationTable(
        order, [corpus.correlates[c].raw_text for c in order],
        values, kinds, n_predicted / (n_reported + n_predicted))


def export_table(ct: CorrelationTable, prefix) -> tuple[str, str]:
    """Write <prefix>.values.tsv and <prefix>.mask.tsv.

    Both files carry a header row and column of correlate texts; values are
    written to 6 decimals, diagonal cells are empty.
    """
    values_path = f"{prefix}.values.tsv"
    mask_path = f"{prefix}.mask.tsv"
    n = len(ct.correlate_order)
    header = "\t" + "\t".join(ct.texts)
    with open(values_path, "w", encoding="utf-8") as vf, \
            open(mask_path, "w", encoding="utf-8") as mf:
        vf.write(header + "\n")
        mf.write(header + "\n")
        for i in range(n):
            row_v = [ct.texts[i]]
            row_m = [ct.texts[i]]
            for j in range(n):
                if i == j:
                    row_v.append("")
                else:
                    row_v.append("%.6f" % ct.values[i, j])
                row_m.append(str(ct.kinds[i, j]))
            vf.write("\t".join(row_v) + "\n")
            mf.write("\t".join(row_m) + "\n")
    return values_path, mask_path
