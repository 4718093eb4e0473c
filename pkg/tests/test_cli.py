"""End-to-end command-line pipeline plus exit code contract."""

import json

import pytest

from namelink.cli import run
from namelink.records import make_record, read_records, record_to_json


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth -> index -> train, shared by the read-only CLI tests below."""
    root = tmp_path_factory.mktemp("cli")
    spec = root / "corpus.spec"
    spec.write_text(
        "authors = 3\nrecords_per_author = 12\noverlap = 0.0\nseed = 5\n"
    )
    records = root / "records.jsonl"
    store = root / "texts.wemb"
    index = root / "names.widx"
    config = root / "train.cfg"
    config.write_text(
        "seed = 0\nmax_epochs = 60\npatience = 60\n"
        "branch1 = 64\nbranch2 = 64\nmerge = 32\ndropout = 0.25\n"
    )
    ckpt = root / "tshared.wmdl"

    assert run(
        ["synth", str(spec), "-o", str(records), "--store", str(store),
         "--store-dim", "24"]
    ) == 0
    assert run(["index", str(records), "-o", str(index)]) == 0
    assert run(
        ["train", str(records), str(index), "--config", str(config),
         "--embeddings", str(store), "--anv", "T Shared", "-o", str(ckpt)]
    ) == 0
    return {
        "root": root,
        "spec": spec,
        "records": records,
        "store": store,
        "index": index,
        "config": config,
        "ckpt": ckpt,
    }


class TestPipeline:
    def test_synth_outputs_exist(self, pipeline):
        assert pipeline["records"].exists()
        assert (pipeline["root"] / "records.jsonl.truth").exists()
        assert pipeline["store"].exists()
        loaded = list(read_records(pipeline["records"]))
        assert len(loaded) == 36

    def test_train_artifacts_exist(self, pipeline):
        ckpt = pipeline["ckpt"]
        assert ckpt.exists()
        assert (pipeline["root"] / (ckpt.name + ".split")).exists()
        assert (pipeline["root"] / (ckpt.name + ".history")).exists()

    def test_train_reports_block(self, pipeline, capsys):
        # rerun is cheap and lets us capture the summary line
        assert run(
            ["train", str(pipeline["records"]), str(pipeline["index"]),
             "--config", str(pipeline["config"]),
             "--embeddings", str(pipeline["store"]),
             "--anv", "T Shared", "-o", str(pipeline["ckpt"])]
        ) == 0
        out = capsys.readouterr().out
        assert out.startswith("trained\tT Shared\tclasses=3")

    def test_stats_global(self, pipeline, capsys):
        assert run(["stats", str(pipeline["records"])]) == 0
        out = dict(
            line.split("\t") for line in capsys.readouterr().out.splitlines()
        )
        assert out["records"] == "36"
        assert out["authors"] == "12"  # 3 targets + 9 clique members

    def test_stats_block(self, pipeline, capsys):
        assert run(["stats", str(pipeline["records"]), "--anv", "T Shared"]) == 0
        out = dict(
            line.split("\t") for line in capsys.readouterr().out.splitlines()
        )
        assert out["uta"] == "3"
        assert out["rcd"] == "36"

    def test_stats_histograms(self, pipeline, capsys):
        assert run(["stats", str(pipeline["records"]), "--histograms"]) == 0
        out = capsys.readouterr().out
        assert "authors_per_name" in out
        assert "authors_per_variate" in out
        assert "records_per_name" in out

    def test_index_summary(self, pipeline, capsys):
        other = pipeline["root"] / "again.widx"
        assert run(["index", str(pipeline["records"]), "-o", str(other)]) == 0
        out = dict(
            line.split("\t") for line in capsys.readouterr().out.splitlines()
        )
        assert out["authors"] == "12"
        assert other.read_bytes() == pipeline["index"].read_bytes()

    def test_evaluate(self, pipeline, capsys):
        split = pipeline["root"] / (pipeline["ckpt"].name + ".split")
        assert run(
            ["evaluate", str(pipeline["ckpt"]), str(pipeline["records"]),
             str(split), "--embeddings", str(pipeline["store"])]
        ) == 0
        out = capsys.readouterr().out
        fields = dict(line.split("\t") for line in out.splitlines())
        assert fields["block"] == "T Shared"
        assert fields["mode"] == "all"
        assert float(fields["macro_f1"]) >= 0.9

    def test_evaluate_anv_mode(self, pipeline, capsys):
        split = pipeline["root"] / (pipeline["ckpt"].name + ".split")
        assert run(
            ["evaluate", str(pipeline["ckpt"]), str(pipeline["records"]),
             str(split), "--embeddings", str(pipeline["store"]),
             "--mode", "anv"]
        ) == 0
        assert "mode\tanv" in capsys.readouterr().out

    def _query_json(self, pipeline):
        sample = next(iter(read_records(pipeline["records"])))
        query = make_record(
            "query/1",
            sample.title,
            ["T Shared", sample.authors[1].raw],
            source=sample.source,
        )
        return record_to_json(query)

    def test_predict_single_ambiguous(self, pipeline, capsys):
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", self._query_json(pipeline), "--target", "T Shared"]
        ) == 0
        parts = capsys.readouterr().out.strip().split("\t")
        assert parts[0] == "query/1"
        assert parts[2] == "predicted"
        assert parts[3].startswith("T") and parts[3].endswith("Shared")

    def test_predict_single_direct(self, pipeline, capsys):
        sample = next(iter(read_records(pipeline["records"])))
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", record_to_json(sample),
             "--target", sample.authors[0].display_name]
        ) == 0
        assert capsys.readouterr().out.split("\t")[2] == "direct"

    def test_predict_new_author(self, pipeline, capsys):
        sample = next(iter(read_records(pipeline["records"])))
        query = make_record(
            "query/2", sample.title, ["Zz Unknown"], source=sample.source
        )
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", record_to_json(query), "--target", "Zz Unknown"]
        ) == 0
        assert capsys.readouterr().out.split("\t")[2] == "new_author"

    def test_predict_batch(self, pipeline, capsys):
        batch = pipeline["root"] / "queries.tsv"
        batch.write_text(f"T Shared\t{self._query_json(pipeline)}\n" * 2)
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]), "--batch", str(batch)]
        ) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        assert all(ln.split("\t")[2] == "predicted" for ln in lines)

    def test_train_skips_unambiguous_name(self, pipeline, capsys):
        scratch = pipeline["root"] / "scratch.wmdl"
        assert run(
            ["train", str(pipeline["records"]), str(pipeline["index"]),
             "--config", str(pipeline["config"]),
             "--embeddings", str(pipeline["store"]),
             "--anv", "T0 Shared", "-o", str(scratch)]
        ) == 0
        assert capsys.readouterr().out.startswith("skipped\tT0 Shared")
        assert not scratch.exists()


class TestTopN:
    def test_trains_most_ambiguous_blocks(self, pipeline, capsys, tmp_path):
        quick = tmp_path / "quick.cfg"
        quick.write_text(
            "seed = 0\nmax_epochs = 2\npatience = 2\n"
            "branch1 = 8\nbranch2 = 8\nmerge = 8\n"
        )
        model_dir = tmp_path / "models"
        assert run(
            ["train", str(pipeline["records"]), str(pipeline["index"]),
             "--config", str(quick), "--embeddings", str(pipeline["store"]),
             "--top-n", "2", "-o", str(model_dir), "--workers", "2"]
        ) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        trained = [ln.split("\t")[1] for ln in lines if ln.startswith("trained")]
        # tie on candidate count (3 each) breaks alphabetically
        assert trained == ["C Pool1", "C Pool2"]
        assert sorted(p.name for p in model_dir.glob("*.wmdl")) == [
            "C%20Pool1.wmdl",
            "C%20Pool2.wmdl",
        ]


class TestExitCodes:
    def test_usage_error_unknown_command(self, capsys):
        assert run(["defragment"]) == 1
        assert "error" in capsys.readouterr().err

    def test_usage_error_missing_required(self, capsys):
        assert run(["train", "a", "b"]) == 1

    def test_usage_error_no_command(self, capsys):
        assert run([]) == 1

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "namelink" in capsys.readouterr().out

    def test_missing_records_file(self, capsys, tmp_path):
        assert run(["stats", str(tmp_path / "nope.jsonl")]) == 2
        assert "namelink: error" in capsys.readouterr().err

    def test_corrupt_store(self, pipeline, capsys, tmp_path):
        bad = tmp_path / "bad.wemb"
        bad.write_bytes(pipeline["store"].read_bytes()[:10])
        assert run(
            ["train", str(pipeline["records"]), str(pipeline["index"]),
             "--config", str(pipeline["config"]), "--embeddings", str(bad),
             "--anv", "T Shared", "-o", str(tmp_path / "x.wmdl")]
        ) == 2

    def test_missing_embedding_key_named(self, pipeline, capsys):
        query = make_record(
            "q", "unseen words only.", ["T Shared", "Coa0 Pool1"], source="Nowhere"
        )
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", record_to_json(query), "--target", "T Shared"]
        ) == 2
        assert "unseen words only." in capsys.readouterr().err

    def test_model_for_wrong_block(self, pipeline, capsys):
        sample = next(iter(read_records(pipeline["records"])))
        query = make_record(
            "q", sample.title, ["C Pool1", "T0 Shared"], source=sample.source
        )
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", record_to_json(query), "--target", "C Pool1"]
        ) == 2
        assert "C Pool1" in capsys.readouterr().err

    def test_malformed_record_json(self, pipeline, capsys):
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", json.dumps({"id": "x"}), "--target", "T Shared"]
        ) == 2

    def test_record_without_target_flag(self, pipeline, capsys):
        assert run(
            ["predict", str(pipeline["ckpt"]), str(pipeline["index"]),
             "--embeddings", str(pipeline["store"]),
             "--record", self_json()]
        ) == 2
        assert "--target" in capsys.readouterr().err

    def test_bad_config_key(self, pipeline, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("seed = 1\nwombats = 3\n")
        assert run(
            ["train", str(pipeline["records"]), str(pipeline["index"]),
             "--config", str(cfg), "--embeddings", str(pipeline["store"]),
             "--anv", "T Shared", "-o", str(tmp_path / "x.wmdl")]
        ) == 2


def self_json():
    return record_to_json(make_record("q", "T.", ["T Shared", "X Y"], source="V"))
