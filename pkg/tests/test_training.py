"""Sample generation laws, co-author redraws, class weights, config."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from namelink.network import HiddenSpec
from namelink.records import make_record, variate_of_name
from namelink.training import (
    TrainConfig,
    build_training_samples,
    class_sample_counts,
    class_weights,
    encode_samples,
    generate_samples,
    parse_train_config,
    reassign_drawn_coauthors,
    samples_to_batch,
    train_block,
)


def _record(n_authors: int, record_id: str = "r"):
    names = [f"Author{i} Surname{i}" for i in range(n_authors)]
    return make_record(record_id, "A title.", names, source="A venue")


class TestGenerateSamples:
    def test_sample_count_three_authors(self):
        record = _record(3)
        rng = np.random.default_rng(0)
        samples = generate_samples(record, "Author0 Surname0", rng)
        assert len(samples) == 6

    @settings(max_examples=30, deadline=None)
    @given(w=st.integers(min_value=1, max_value=9), seed=st.integers(0, 1000))
    def test_sample_count_law(self, w, seed):
        record = _record(w)
        rng = np.random.default_rng(seed)
        samples = generate_samples(record, "Author0 Surname0", rng)
        assert len(samples) == 2 * w

    def test_solo_author_self_referential(self):
        record = make_record("solo", "T.", ["Ann Droid"])
        samples = generate_samples(record, "Ann Droid", np.random.default_rng(1))
        assert len(samples) == 2
        full, abbrev = samples
        assert full.coauthor_p == "Ann Droid" and full.coauthor_j == "Ann Droid"
        assert abbrev.coauthor_p == "A Droid" and abbrev.coauthor_j == "A Droid"

    def test_first_half_full_second_half_abbreviated(self):
        record = _record(4)
        samples = generate_samples(record, "Author2 Surname2", np.random.default_rng(2))
        assert [s.abbreviated for s in samples] == [False] * 4 + [True] * 4

    def test_names_never_mixed_within_sample(self):
        record = _record(5)
        samples = generate_samples(record, "Author1 Surname1", np.random.default_rng(3))
        full_names = {a.display_name for a in record.authors}
        variates = {variate_of_name(n) for n in full_names}
        for s in samples:
            bag = {s.target_name, s.coauthor_p, s.coauthor_j}
            if s.abbreviated:
                assert bag <= variates
            else:
                assert bag <= full_names

    def test_every_slot_appears_as_first_coauthor(self):
        record = _record(4)
        samples = generate_samples(record, "Author0 Surname0", np.random.default_rng(4))
        full = [s for s in samples if not s.abbreviated]
        assert [s.coauthor_p for s in full] == [
            a.display_name for a in record.authors
        ]

    def test_abbreviated_mirrors_same_draw(self):
        record = _record(6)
        samples = generate_samples(record, "Author3 Surname3", np.random.default_rng(5))
        full, abbrev = samples[:6], samples[6:]
        for f, a in zip(full, abbrev):
            assert a.coauthor_p == variate_of_name(f.coauthor_p)
            assert a.coauthor_j == variate_of_name(f.coauthor_j)
            assert a.target_name == variate_of_name(f.target_name)

    def test_target_class_and_metadata_attached(self):
        record = _record(2, record_id="some/id")
        samples = generate_samples(
            record, "Author1 Surname1", np.random.default_rng(6), target_class=7
        )
        for s in samples:
            assert s.target_class == 7
            assert s.record_id == "some/id"
            assert s.title == "A title."
            assert s.source == "A venue"

    def test_unknown_target_rejected(self):
        with pytest.raises(ValueError, match="does not appear"):
            generate_samples(_record(2), "Nobody Known", np.random.default_rng(0))

    def test_deterministic_in_rng(self):
        record = _record(5)
        a = generate_samples(record, "Author0 Surname0", np.random.default_rng(42))
        b = generate_samples(record, "Author0 Surname0", np.random.default_rng(42))
        assert a == b


class TestReassignment:
    def _setup(self):
        record = _record(5, "rid")
        samples = generate_samples(record, "Author0 Surname0", np.random.default_rng(0))
        return record, samples

    def test_off_schedule_unchanged(self):
        record, samples = self._setup()
        out = reassign_drawn_coauthors(
            samples, {"rid": record}, epoch=7, period=10,
            rng=np.random.default_rng(1),
        )
        assert out == samples

    def test_on_schedule_only_second_coauthor_moves(self):
        record, samples = self._setup()
        out = reassign_drawn_coauthors(
            samples, {"rid": record}, epoch=20, period=10,
            rng=np.random.default_rng(2),
        )
        assert len(out) == len(samples)
        changed = 0
        for before, after in zip(samples, out):
            assert after.target_name == before.target_name
            assert after.coauthor_p == before.coauthor_p
            assert after.abbreviated == before.abbreviated
            if after.coauthor_j != before.coauthor_j:
                changed += 1
        assert changed > 0

    def test_redrawn_names_respect_abbreviation(self):
        record, samples = self._setup()
        out = reassign_drawn_coauthors(
            samples, {"rid": record}, epoch=10, period=10,
            rng=np.random.default_rng(3),
        )
        full_names = {a.display_name for a in record.authors}
        variates = {variate_of_name(n) for n in full_names}
        for s in out:
            assert s.coauthor_j in (variates if s.abbreviated else full_names)

    def test_period_validation(self):
        record, samples = self._setup()
        with pytest.raises(ValueError, match="period"):
            reassign_drawn_coauthors(
                samples, {"rid": record}, epoch=1, period=0,
                rng=np.random.default_rng(0),
            )


class TestClassWeights:
    def test_inverse_frequency_example(self):
        weights = class_weights({0: 30, 1: 10}, 2)
        np.testing.assert_allclose(weights, [40 / 60, 40 / 20], rtol=1e-12)

    def test_balanced_is_one(self):
        np.testing.assert_allclose(class_weights({0: 5, 1: 5, 2: 5}, 3), np.ones(3))

    def test_lower_clip_binds_with_many_classes(self):
        # 20 classes, one with nearly everything: raw weight 2000/(20*1900)
        counts = {c: 5 for c in range(20)}
        counts[0] = 1905
        weights = class_weights(counts, 20)
        assert weights[0] == 0.1
        assert np.all(weights >= 0.1) and np.all(weights <= 10.0)

    def test_upper_clip_binds_for_rare_class(self):
        weights = class_weights({0: 10000, 1: 1}, 2)
        assert weights[1] == 10.0

    def test_missing_class_gets_upper_clip(self):
        weights = class_weights({0: 4}, 3)
        assert weights[1] == 10.0 and weights[2] == 10.0


class TestEncoding:
    def test_batch_shapes_and_labels(self, random_providers):
        record = _record(3)
        samples = generate_samples(
            record, "Author1 Surname1", np.random.default_rng(0), target_class=1
        )
        batch = samples_to_batch(samples, random_providers)
        assert batch.x1.shape == (6, 16)
        assert batch.x2.shape == (6, 12)
        assert np.all(batch.y == 1)

    def test_encode_uses_first_name_token(self, random_providers):
        record = _record(2)
        samples = generate_samples(
            record, "Author0 Surname0", np.random.default_rng(0)
        )
        x1, _ = encode_samples(samples[:1], random_providers)
        expected = random_providers.names.embed("Author0")
        np.testing.assert_array_equal(x1[0, :8], expected)


class TestTrainConfig:
    def test_parse_full(self):
        config = parse_train_config(
            "# comment\n"
            "seed=9\nbatch=32\nlr=0.01\npatience=5\nmax_epochs=40\n"
            "reassign_period=4\nbranch1=16,8\nbranch2=12\nmerge=10,6\ndropout=0.25\n"
        )
        assert config.seed == 9
        assert config.batch_size == 32
        assert config.lr == 0.01
        assert config.patience == 5
        assert config.max_epochs == 40
        assert config.reassign_period == 4
        assert config.hidden == HiddenSpec((16, 8), (12,), (10, 6), 0.25)

    def test_seed_required(self):
        with pytest.raises(ValueError, match="seed"):
            parse_train_config("batch=2\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            parse_train_config("seed=1\nwat=2\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ValueError, match="bad value"):
            parse_train_config("seed=banana\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="key=value"):
            parse_train_config("seed 1\n")


class TestBuildTrainingSamples:
    def test_respects_split_and_is_deterministic(self, synth_block_setup):
        block = synth_block_setup["block"]
        split = synth_block_setup["split"]
        a = build_training_samples(block, split, "train", seed=3)
        b = build_training_samples(block, split, "train", seed=3)
        assert a == b
        train_pairs = set(split.pairs("train"))
        assert {(s.record_id, block.authors[s.target_class]) for s in a} == train_pairs
        # 2 samples per author slot, 3 authors per synth record
        assert len(a) == 6 * len(train_pairs)

    def test_class_counts_cover_all_authors(self, synth_block_setup):
        block = synth_block_setup["block"]
        split = synth_block_setup["split"]
        samples = build_training_samples(block, split, "train", seed=0)
        counts = class_sample_counts(samples)
        assert set(counts) == set(range(len(block.authors)))


class TestTrainBlock:
    def test_persists_checkpoint_and_history(self, tmp_path, synth_block_setup):
        block = synth_block_setup["block"]
        split = synth_block_setup["split"]
        providers = synth_block_setup["providers"]
        config = TrainConfig(
            seed=1,
            max_epochs=8,
            patience=100,
            reassign_period=3,
            hidden=HiddenSpec((16,), (16,), (12,), 0.2),
        )
        ckpt = tmp_path / "block.wmdl"
        hist = tmp_path / "block.history"
        result = train_block(
            block, split, providers, config,
            checkpoint_path=ckpt, history_path=hist,
        )
        assert ckpt.is_file() and hist.is_file()
        assert len(result.history) == 8
        header, *rows = hist.read_text().strip().splitlines()
        assert header.split("\t") == [
            "epoch", "train_loss", "val_loss", "val_accuracy", "train_accuracy",
        ]
        assert len(rows) == 8
        from namelink.network import checkpoint_load

        again = checkpoint_load(ckpt)
        assert again.anv == "T Shared"
        assert tuple(again.classes) == block.authors

    def test_deterministic_given_seed(self, synth_block_setup):
        block = synth_block_setup["block"]
        split = synth_block_setup["split"]
        providers = synth_block_setup["providers"]
        config = TrainConfig(
            seed=5, max_epochs=4, patience=50,
            hidden=HiddenSpec((8,), (8,), (6,), 0.5),
        )
        r1 = train_block(block, split, providers, config)
        r2 = train_block(block, split, providers, config)
        for a, b in zip(r1.params.param_arrays(), r2.params.param_arrays()):
            np.testing.assert_array_equal(a, b)
        assert [h.train_loss for h in r1.history] == [h.train_loss for h in r2.history]
