"""Config schema, metrics journal, model dump, comparison CSVs."""

import json
import struct

import numpy as np
import pytest

from ashlab import nn
from ashlab.harness import compare, config, journal
from ashlab.harness.config import ConfigError
from ashlab.tensor import Tensor

GOOD_DOC = {
    "model": {"layers": [
        {"kind": "dense", "in": 2, "out": 8},
        {"kind": "activation", "spec": {"kind": "smooth_ash", "alpha": 1.0,
                                        "z_k_init": 0.0, "grad_mode": "through-stats"}},
        {"kind": "dense", "in": 8, "out": 2},
    ]},
    "train": {"optimizer": {"kind": "adam", "lr": 0.001}, "batch_size": 32,
              "epochs": 5, "seed": 0, "loss": "softmax_xent", "val_split": 0.25},
    "dataset": {"builtin": "two_moons", "n": 64, "noise": 0.1, "seed": 1},
    "out_dir": "runs/demo",
}


class TestConfig:
    def test_parse_and_round_trip_identity(self):
        cfg = config.parse_config(GOOD_DOC)
        again = config.parse_config(config.config_to_json(cfg))
        assert cfg == again

    def test_parse_from_json_text(self):
        cfg = config.parse_config(json.dumps(GOOD_DOC))
        assert cfg.train.epochs == 5
        assert cfg.dataset.builtin == "two_moons"
        assert isinstance(cfg.layers[1], nn.Activation)

    @pytest.mark.parametrize("mutate", [
        lambda d: d.update(extra=1),
        lambda d: d["model"].update(name="x"),
        lambda d: d["model"]["layers"][0].update(bias=True),
        lambda d: d["train"].update(lr=0.1),
        lambda d: d["train"]["optimizer"].update(nesterov=True),
        lambda d: d["dataset"].update(shuffle=True),
        lambda d: d["model"]["layers"][1]["spec"].update(beta=2.0),
    ])
    def test_unknown_keys_rejected(self, mutate):
        doc = json.loads(json.dumps(GOOD_DOC))
        mutate(doc)
        with pytest.raises(ConfigError):
            config.parse_config(doc)

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("model"),
        lambda d: d.pop("train"),
        lambda d: d.pop("dataset"),
        lambda d: d["train"].pop("epochs"),
        lambda d: d["model"]["layers"][0].pop("out"),
    ])
    def test_missing_keys_rejected(self, mutate):
        doc = json.loads(json.dumps(GOOD_DOC))
        mutate(doc)
        with pytest.raises(ConfigError):
            config.parse_config(doc)

    def test_bad_values_rejected(self):
        doc = json.loads(json.dumps(GOOD_DOC))
        doc["train"]["optimizer"]["lr"] = 0.0
        with pytest.raises(ConfigError):
            config.parse_config(doc)
        doc = json.loads(json.dumps(GOOD_DOC))
        doc["dataset"] = {"builtin": "imagenet"}
        with pytest.raises(ConfigError):
            config.parse_config(doc)
        doc = json.loads(json.dumps(GOOD_DOC))
        doc["train"]["loss"] = "hinge"
        with pytest.raises(ConfigError):
            config.parse_config(doc)

    def test_sgd_and_file_datasets_round_trip(self):
        doc = json.loads(json.dumps(GOOD_DOC))
        doc["train"]["optimizer"] = {"kind": "sgd", "lr": 0.1, "momentum": 0.9}
        doc["dataset"] = {"idx": {"images": "a.idx", "labels": "b.idx"}}
        cfg = config.parse_config(doc)
        assert cfg == config.parse_config(config.config_to_json(cfg))
        doc["dataset"] = {"csv": "data.csv"}
        cfg = config.parse_config(doc)
        assert cfg == config.parse_config(config.config_to_json(cfg))

    def test_builds_runnable_model(self):
        cfg = config.parse_config(GOOD_DOC)
        model = cfg.build_model()
        data = cfg.dataset.load()
        recs = nn.train(model, cfg.train, data)
        assert len(recs) == 5


class TestJournal:
    def make_records(self, n=4):
        return [nn.EpochRecord(epoch=i, train_loss=1.0 / (i + 1), val_loss=1.1 / (i + 1),
                               val_acc=min(1.0, 0.2 * i), zk_snapshot={"act1": [0.01 * i]},
                               wall_ms=3.25)
                for i in range(n)]

    def test_lines_are_standalone_json_and_increasing(self, tmp_path):
        path = str(tmp_path / "metrics.jsonl")
        with journal.JournalWriter(path) as w:
            for r in self.make_records():
                w.append(r)
        raw = open(path).read()
        assert raw.endswith("\n")
        lines = raw.splitlines()
        epochs = [json.loads(line)["epoch"] for line in lines]
        assert epochs == sorted(epochs) == [0, 1, 2, 3]

    def test_read_round_trip(self, tmp_path):
        path = str(tmp_path / "metrics.jsonl")
        records = self.make_records()
        with journal.JournalWriter(path) as w:
            for r in records:
                w.append(r)
        assert journal.read_journal(path) == records

    def test_non_increasing_epochs_rejected(self, tmp_path):
        path = str(tmp_path / "metrics.jsonl")
        records = self.make_records(2)
        with journal.JournalWriter(path) as w:
            w.append(records[1])
            w.append(records[0])
        with pytest.raises(ValueError, match="non-increasing"):
            journal.read_journal(path)

    def test_flush_leaves_complete_lines(self, tmp_path):
        path = str(tmp_path / "metrics.jsonl")
        w = journal.JournalWriter(path)
        w.append(self.make_records(1)[0])
        # Before close, the line must already be on disk and parseable.
        line = open(path).readline()
        assert json.loads(line)["epoch"] == 0
        w.close()


class TestModelDump:
    def test_round_trip_names_shapes_values(self, tmp_path):
        rng = np.random.default_rng(0)
        params = {
            "dense0.W": Tensor(rng.normal(size=(3, 4))),
            "dense0.b": Tensor(rng.normal(size=4)),
            "act1.z_k": Tensor([0.125]),
        }
        path = str(tmp_path / "model.bin")
        journal.save_model_dump(path, params)
        loaded = journal.load_model_dump(path)
        assert list(loaded) == list(params)
        for name, t in params.items():
            assert loaded[name].shape == t.shape
            assert np.array_equal(loaded[name], t.data)

    def test_header_is_little_endian(self, tmp_path):
        path = str(tmp_path / "model.bin")
        journal.save_model_dump(path, {"w": Tensor([1.0, 2.0])})
        raw = open(path, "rb").read()
        assert struct.unpack("<I", raw[:4])[0] == 1        # one parameter
        assert struct.unpack("<I", raw[4:8])[0] == 1       # name length
        assert raw[8:9] == b"w"
        assert struct.unpack("<I", raw[9:13])[0] == 1      # rank
        assert struct.unpack("<I", raw[13:17])[0] == 2     # dim
        np.testing.assert_array_equal(np.frombuffer(raw[17:], dtype="<f8"), [1.0, 2.0])

    def test_truncated_dump_rejected(self, tmp_path):
        path = str(tmp_path / "model.bin")
        journal.save_model_dump(path, {"w": Tensor([1.0, 2.0])})
        raw = open(path, "rb").read()
        open(path, "wb").write(raw[:-5])
        with pytest.raises(ValueError, match="truncated"):
            journal.load_model_dump(path)


class TestComparisonCsvs:
    def fake_results(self):
        def rec(e, vl):
            return nn.EpochRecord(epoch=e, train_loss=vl + 0.1, val_loss=vl,
                                  val_acc=0.5, zk_snapshot={}, wall_ms=1.0)
        return [
            compare.RunResult("relu", 0, [rec(0, 1.0), rec(1, 0.5), rec(2, 0.4)]),
            compare.RunResult("ash", 0, [rec(0, 0.9), rec(1, 0.42), rec(2, 0.3)]),
            compare.RunResult("ash", 1, [], failed=True, error="diverged"),
        ]

    def test_headers_and_shapes(self, tmp_path):
        paths = compare.write_comparison(str(tmp_path), self.fake_results())
        curves = open(paths["curves"]).read().splitlines()
        assert curves[0] == "epoch,activation,seed,train_loss,val_loss,val_acc"
        assert len(curves) == 1 + 6  # two ok runs x three epochs
        mean = open(paths["mean_curves"]).read().splitlines()
        assert mean[0] == "epoch,activation,mean_train_loss,mean_val_loss,mean_val_acc"
        conv = open(paths["convergence"]).read().splitlines()
        assert conv[0] == "activation,seed,status,cut,epochs_to_threshold"

    def test_failed_run_marked(self, tmp_path):
        paths = compare.write_comparison(str(tmp_path), self.fake_results())
        rows = [line.split(",") for line in open(paths["convergence"]).read().splitlines()[1:]]
        failed = [r for r in rows if r[0] == "ash" and r[1] == "1"]
        assert failed and failed[0][2] == "failed"

    def test_relative_cut_uses_relu_best(self, tmp_path):
        paths = compare.write_comparison(str(tmp_path), self.fake_results())
        rows = [line.split(",") for line in open(paths["convergence"]).read().splitlines()[1:]]
        relu_row = next(r for r in rows if r[0] == "relu")
        assert float(relu_row[3]) == pytest.approx(1.10 * 0.4)
        # relu first dips under 0.44 at epoch 2; ash (seed 0) at epoch 1
        assert relu_row[4] == "2"
        ash_row = next(r for r in rows if r[0] == "ash" and r[1] == "0")
        assert ash_row[4] == "1"

    def test_absolute_cut_override(self, tmp_path):
        paths = compare.write_comparison(str(tmp_path), self.fake_results(), cut=0.45)
        rows = [line.split(",") for line in open(paths["convergence"]).read().splitlines()[1:]]
        assert next(r for r in rows if r[0] == "relu")[4] == "2"
        assert next(r for r in rows if r[0] == "ash" and r[1] == "0")[4] == "1"
