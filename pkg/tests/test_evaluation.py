"""Confusion-matrix metrics checked against naive reference loops."""

import numpy as np
import pytest

from oracles import brute_force_metrics

from namelink.blocking import SplitAssignment
from namelink.evaluation import (
    MODES,
    evaluate_block,
    format_report,
    metrics_from_confusion,
)
from namelink.network import HiddenSpec, fit, FitConfig, init_model
from namelink.training import build_training_samples, samples_to_batch


def _random_confusion(rng, n, max_count=40):
    return rng.integers(0, max_count, size=(n, n))


class TestMetricsAgainstOracle:
    def test_many_random_matrices(self):
        rng = np.random.default_rng(123)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            cm = _random_confusion(rng, n)
            if cm.sum() == 0:
                cm[0, 0] = 1
            got = metrics_from_confusion(cm)
            want = brute_force_metrics(cm)
            assert got.accuracy == pytest.approx(want["accuracy"], abs=1e-12)
            assert got.micro_f1 == pytest.approx(want["micro_f1"], abs=1e-12)
            assert got.macro_f1 == pytest.approx(want["macro_f1"], abs=1e-12)
            assert got.macro_precision == pytest.approx(
                want["macro_precision"], abs=1e-12
            )
            assert got.macro_recall == pytest.approx(want["macro_recall"], abs=1e-12)
            for i, cls in enumerate(got.per_class):
                assert cls.precision == pytest.approx(want["precision"][i], abs=1e-12)
                assert cls.recall == pytest.approx(want["recall"][i], abs=1e-12)
                assert cls.f1 == pytest.approx(want["f1"][i], abs=1e-12)

    def test_micro_f1_equals_accuracy_exactly(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            cm = _random_confusion(rng, int(rng.integers(2, 7)))
            cm[0, 0] += 1  # keep total positive
            m = metrics_from_confusion(cm)
            assert m.micro_f1 == m.accuracy
            assert m.micro_precision == m.accuracy
            assert m.micro_recall == m.accuracy

    def test_identity_matrix_is_perfect(self):
        m = metrics_from_confusion(np.eye(4, dtype=int) * 7)
        assert m.accuracy == 1.0
        assert m.macro_f1 == 1.0
        assert m.micro_f1 == 1.0
        assert all(c.f1 == 1.0 for c in m.per_class)

    def test_consistent_relabeling_preserves_aggregates(self):
        rng = np.random.default_rng(77)
        cm = _random_confusion(rng, 5)
        cm[0, 0] += 1
        perm = rng.permutation(5)
        permuted = cm[np.ix_(perm, perm)]
        a = metrics_from_confusion(cm)
        b = metrics_from_confusion(permuted)
        assert a.accuracy == pytest.approx(b.accuracy, abs=1e-12)
        assert a.macro_f1 == pytest.approx(b.macro_f1, abs=1e-12)
        assert sorted(c.f1 for c in a.per_class) == pytest.approx(
            sorted(c.f1 for c in b.per_class), abs=1e-12
        )


class TestZeroDenominators:
    def test_never_predicted_class_gets_zero_precision(self):
        # class 1 never predicted, never true
        cm = np.array([[5, 0], [0, 0]])
        m = metrics_from_confusion(cm)
        assert m.per_class[1].precision == 0.0
        assert m.per_class[1].recall == 0.0
        assert m.per_class[1].f1 == 0.0
        assert m.accuracy == 1.0

    def test_empty_class_included_in_macro_by_default(self):
        cm = np.array([[5, 0], [0, 0]])
        m = metrics_from_confusion(cm)
        assert m.macro_f1 == pytest.approx(0.5)

    def test_macro_over_support_only(self):
        cm = np.array([[5, 0], [0, 0]])
        m = metrics_from_confusion(cm, macro_over_support_only=True)
        assert m.macro_f1 == pytest.approx(1.0)
        # per-class rows still cover every label
        assert len(m.per_class) == 2

    def test_all_wrong(self):
        cm = np.array([[0, 3], [4, 0]])
        m = metrics_from_confusion(cm)
        assert m.accuracy == 0.0
        assert m.macro_f1 == 0.0


class TestValidation:
    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            metrics_from_confusion(np.zeros((2, 3)))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            metrics_from_confusion(np.array([[1, -1], [0, 1]]))

    def test_empty_total_rejected(self):
        with pytest.raises(ValueError):
            metrics_from_confusion(np.zeros((3, 3)))

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError):
            metrics_from_confusion(np.eye(3), labels=["a", "b"])


@pytest.fixture(scope="module")
def trained_block():
    """Train a small separable block well enough to evaluate."""
    from namelink.blocking import assemble_block, build_name_index, split_block
    from namelink.embeddings import HashingNameEmbedder, Providers, StoreProvider
    from namelink.synth import SynthSpec, build_text_store, generate_corpus

    spec = SynthSpec(authors=3, records_per_author=12, overlap=0.0, seed=5)
    records, _ = generate_corpus(spec)
    index = build_name_index(records)
    block = assemble_block("T Shared", records, index)
    split = split_block(block, seed=3)
    store = build_text_store(records, dim=24, seed=6)
    providers = Providers(names=HashingNameEmbedder(), texts=StoreProvider(store))

    train = samples_to_batch(
        build_training_samples(block, split, "train", seed=1), providers
    )
    val = samples_to_batch(
        build_training_samples(block, split, "validation", seed=1), providers
    )
    params = init_model(
        24,
        len(block.authors),
        hidden=HiddenSpec((32,), (32,), (16,), 0.25),
        seed=0,
        classes=block.authors,
        anv=block.anv,
    )
    config = FitConfig(max_epochs=60, patience=60, seed=0)
    best, _ = fit(params, train, val, config)
    return {
        "block": block,
        "split": split,
        "providers": providers,
        "model": best,
    }


class TestEvaluateBlock:
    def test_trial_counts_all_mode(self, trained_block):
        tb = trained_block
        report = evaluate_block(
            tb["model"], tb["block"], tb["split"], tb["providers"], "all"
        )
        test_pairs = tb["split"].pairs("test")
        assert report.trials == 2 * len(test_pairs)
        assert report.mode == "all"
        assert report.confusion.sum() == report.trials

    def test_trial_counts_anv_mode(self, trained_block):
        tb = trained_block
        report = evaluate_block(
            tb["model"], tb["block"], tb["split"], tb["providers"], "anv"
        )
        test_pairs = tb["split"].pairs("test")
        assert report.trials == len(test_pairs)
        assert report.mode == "anv"

    def test_separable_block_scores_high(self, trained_block):
        tb = trained_block
        report = evaluate_block(
            tb["model"], tb["block"], tb["split"], tb["providers"], "all"
        )
        assert report.metrics.macro_f1 >= 0.9
        assert report.metrics.accuracy >= 0.9

    def test_report_classes_match_block(self, trained_block):
        tb = trained_block
        report = evaluate_block(
            tb["model"], tb["block"], tb["split"], tb["providers"], "all"
        )
        n = len(tb["block"].authors)
        assert 0 < report.included_classes <= n
        assert report.confusion.shape == (n, n)
        assert [c.label for c in report.metrics.per_class] == list(
            tb["block"].authors
        )

    def test_mode_validated(self, trained_block):
        tb = trained_block
        assert MODES == ("all", "anv")
        with pytest.raises(ValueError):
            evaluate_block(
                tb["model"],
                tb["block"],
                tb["split"],
                tb["providers"],
                "sometimes",
            )

    def test_class_mismatch_rejected(self, trained_block):
        tb = trained_block
        wrong = init_model(
            24,
            3,
            hidden=HiddenSpec((4,), (4,), (4,), 0.0),
            classes=["X 1", "X 2", "X 3"],
            anv=tb["block"].anv,
        )
        with pytest.raises(ValueError, match="classes"):
            evaluate_block(
                wrong, tb["block"], tb["split"], tb["providers"], "all"
            )

    def test_empty_test_split_rejected(self, trained_block):
        tb = trained_block
        starved = SplitAssignment(
            {pair: "train" for pair in tb["split"].assignment}
        )
        with pytest.raises(ValueError, match="test"):
            evaluate_block(
                tb["model"], tb["block"], starved, tb["providers"], "all"
            )


class TestFormatReport:
    def test_renders_key_numbers(self, trained_block):
        tb = trained_block
        report = evaluate_block(
            tb["model"], tb["block"], tb["split"], tb["providers"], "all"
        )
        text = format_report(report)
        assert "macro_f1" in text
        assert "T Shared" in text
        assert str(report.trials) in text
