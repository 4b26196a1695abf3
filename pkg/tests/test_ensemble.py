import math

import numpy as np
import pytest

from corrnet.corpus import generate_synthetic, split_corpus
from corrnet.ensemble import (Ensemble, EnsembleEstimate, disagreement_trend,
                              ensemble_estimate, qbc_search,
                              sample_untested_pairs, summarize_predictions,
                              train_ensemble)
from corrnet.neural import init_params, predict_pair
from corrnet.stats import DegenerateDataError
from corrnet.training import TrainConfig

FAST = TrainConfig(epochs=2, hidden_size=8, head_width=4, seed=0)


@pytest.fixture(scope="module")
def small_setup(synth_vocab):
    corpus, _ = generate_synthetic(30, 40, synth_vocab, noise_sd=0.1, seed=7)
    split = split_corpus(corpus, 0.8, seed=0)
    return corpus, split


def test_ensemble_needs_two_members():
    p = init_params(2, 2, 2, seed=0)
    with pytest.raises(ValueError):
        Ensemble([p], [0], False)


class TestSummary:
    def test_two_member_hand_arithmetic(self):
        est = summarize_predictions([0.1, 0.3])
        assert est.mean == pytest.approx(0.2)
        assert est.disagreement == pytest.approx(0.2 / math.sqrt(2), abs=1e-12)
        assert est.ci_half_width == pytest.approx(1.96 * est.disagreement / math.sqrt(2))

    def test_published_interval_scale(self):
        # 50 values centered at -0.37 with sample sd exactly 0.1659
        delta = 0.1659 * math.sqrt(49 / 50)
        preds = [-0.37 + delta] * 25 + [-0.37 - delta] * 25
        est = summarize_predictions(preds)
        assert est.mean == pytest.approx(-0.37)
        assert est.disagreement == pytest.approx(0.1659, abs=1e-12)
        assert est.ci_half_width == pytest.approx(0.046, abs=1e-3)

    def test_identical_predictions(self):
        est = summarize_predictions([0.25] * 5)
        assert est.disagreement == 0.0
        assert est.ci_half_width == 0.0


class TestEstimate:
    def test_matches_member_predictions(self, synth_vocab):
        rng = np.random.default_rng(0)
        members = [init_params(synth_vocab.dim, 4, 3, seed=k) for k in range(3)]
        ens = Ensemble(members, [0, 1, 2], False)
        a = [rng.standard_normal(synth_vocab.dim) for _ in range(2)]
        b = [rng.standard_normal(synth_vocab.dim) for _ in range(3)]
        est = ensemble_estimate(ens, a, b)
        preds = [predict_pair(a, b, p)[0].r_hat for p in members]
        assert est.mean == pytest.approx(np.mean(preds))
        assert est.disagreement == pytest.approx(np.std(preds, ddof=1))
        assert -1.0 <= est.mean <= 1.0
        assert est.disagreement <= 1.0


class TestTrainEnsemble:
    def test_distinct_members(self, small_setup, synth_vocab):
        corpus, split = small_setup
        ens = train_ensemble(corpus, split, synth_vocab, FAST, 2)
        assert ens.member_seeds == [0, 1]
        diff = any(not np.array_equal(ens.members[0].weights[n], ens.members[1].weights[n])
                   for n in ens.members[0].weights)
        assert diff

    def test_forced_identical_seeds_no_bagging(self, small_setup, synth_vocab):
        corpus, split = small_setup
        ens = train_ensemble(corpus, split, synth_vocab, FAST, 2,
                             bagging=False, member_seeds=[5, 5])
        for name in ens.members[0].weights:
            np.testing.assert_array_equal(ens.members[0].weights[name],
                                          ens.members[1].weights[name])

    def test_bad_member_count(self, small_setup, synth_vocab):
        corpus, split = small_setup
        with pytest.raises(ValueError):
            train_ensemble(corpus, split, synth_vocab, FAST, 1)


class TestQbcSearch:
    def test_contract(self, small_setup, synth_vocab):
        corpus, split = small_setup
        ens = train_ensemble(corpus, split, synth_vocab, FAST, 2)
        estimates = qbc_search(ens, corpus, synth_vocab, 100, seed=9, top_fraction=0.05)
        assert len(estimates) == 100
        pairs = [e.pair for e in estimates]
        assert len(set(pairs)) == 100
        assert all(p not in corpus.pair_index for p in pairs)
        sds = [e.disagreement for e in estimates]
        assert sds == sorted(sds, reverse=True)
        assert sum(e.flagged for e in estimates) == 5
        assert all(e.flagged for e in estimates[:5])

    def test_determinism(self, small_setup, synth_vocab):
        corpus, split = small_setup
        ens = train_ensemble(corpus, split, synth_vocab, FAST, 2)
        e1 = qbc_search(ens, corpus, synth_vocab, 50, seed=4)
        e2 = qbc_search(ens, corpus, synth_vocab, 50, seed=4)
        assert [(e.pair, e.mean, e.disagreement, e.flagged) for e in e1] == \
               [(e.pair, e.mean, e.disagreement, e.flagged) for e in e2]

    def test_all_pairs_tested_errors(self, synth_vocab):
        corpus, _ = generate_synthetic(4, 6, synth_vocab, seed=0)  # complete graph
        with pytest.raises(ValueError, match="0 untested"):
            sample_untested_pairs(corpus, 1, seed=0)

    def test_bad_top_fraction(self, small_setup, synth_vocab):
        corpus, split = small_setup
        ens = train_ensemble(corpus, split, synth_vocab, FAST, 2)
        with pytest.raises(ValueError):
            qbc_search(ens, corpus, synth_vocab, 10, seed=0, top_fraction=0.0)


class TestDisagreementTrend:
    def make(self, means, sds):
        return [EnsembleEstimate((i, i + 1), m, s, 0.0)
                for i, (m, s) in enumerate(zip(means, sds))]

    def test_exact_linear_relation(self):
        means = list(np.linspace(-0.5, 0.5, 20))
        sds = [0.1 + 0.2 * m for m in means]
        out = disagreement_trend(self.make(means, sds))
        assert out["pearson_r"] == pytest.approx(1.0)
        assert out["mwu"].p_value < 0.05

    def test_constant_disagreement_is_degenerate(self):
        means = list(np.linspace(-0.5, 0.5, 10))
        with pytest.raises(DegenerateDataError):
            disagreement_trend(self.make(means, [0.1] * 10))

    def test_too_few(self):
        with pytest.raises(ValueError):
            disagreement_trend(self.make([0.1] * 5, [0.1] * 5))
