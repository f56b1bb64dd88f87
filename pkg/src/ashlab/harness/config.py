"""Experiment configuration: one strict JSON document.

Unknown keys are rejected at every level and parse -> serialize ->
parse is the identity, so configs double as reproducibility records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .. import activations as act
from .. import nn
from . import datasets


class ConfigError(ValueError):
    """Configuration document violates the schema."""


@dataclass(frozen=True)
class DatasetSpec:
    """One of: builtin generator, IDX file pair, or CSV file."""

    source: str                       # "builtin" | "idx" | "csv"
    builtin: str = "two_moons"
    n: int = 256
    noise: float = 0.1
    seed: int = 0
    images: str = ""
    labels: str = ""
    csv_path: str = ""

    def load(self):
        if self.source == "builtin":
            return datasets.gen_builtin(self.builtin, self.n, self.noise, self.seed)
        if self.source == "idx":
            return datasets.ingest_idx(self.images, self.labels)
        if self.source == "csv":
            return datasets.load_csv(self.csv_path)
        raise ConfigError(f"unknown dataset source {self.source!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    layers: tuple[nn.Layer, ...]
    train: nn.TrainConfig
    dataset: DatasetSpec
    out_dir: str | None = None

    def build_model(self) -> nn.Model:
        return nn.Model(list(self.layers), seed=self.train.seed)


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)} in {where}")


def _parse_layer(obj: dict, index: int) -> nn.Layer:
    where = f"model.layers[{index}]"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{where} must be an object with a 'kind' tag")
    kind = obj["kind"]
    try:
        if kind == "dense":
            _require_keys(obj, {"kind", "in", "out"}, {"in", "out"}, where)
            return nn.Dense(int(obj["in"]), int(obj["out"]))
        if kind == "conv2d":
            _require_keys(obj, {"kind", "kh", "kw", "cin", "cout"},
                          {"kh", "kw", "cin", "cout"}, where)
            return nn.Conv2d(int(obj["kh"]), int(obj["kw"]), int(obj["cin"]), int(obj["cout"]))
        if kind == "flatten":
            _require_keys(obj, {"kind"}, set(), where)
            return nn.Flatten()
        if kind == "activation":
            _require_keys(obj, {"kind", "spec"}, {"spec"}, where)
            return nn.Activation(act.spec_from_json(obj["spec"]))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown layer kind {kind!r}")


def _layer_to_json(layer: nn.Layer) -> dict:
    if isinstance(layer, nn.Dense):
        return {"kind": "dense", "in": layer.in_dim, "out": layer.out_dim}
    if isinstance(layer, nn.Conv2d):
        return {"kind": "conv2d", "kh": layer.kh, "kw": layer.kw,
                "cin": layer.cin, "cout": layer.cout}
    if isinstance(layer, nn.Flatten):
        return {"kind": "flatten"}
    if isinstance(layer, nn.Activation):
        return {"kind": "activation", "spec": act.spec_to_json(layer.spec)}
    raise TypeError(f"unknown layer type {type(layer).__name__}")


def _parse_optimizer(obj: dict) -> nn.OptimizerSpec:
    where = "train.optimizer"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{where} must be an object with a 'kind' tag")
    kind = obj["kind"]
    try:
        if kind == "sgd":
            _require_keys(obj, {"kind", "lr", "momentum"}, set(), where)
            return nn.OptimizerSpec(kind="sgd", lr=float(obj.get("lr", 1e-3)),
                                    momentum=float(obj.get("momentum", 0.0)))
        if kind == "adam":
            _require_keys(obj, {"kind", "lr", "beta1", "beta2", "eps"}, set(), where)
            return nn.OptimizerSpec(kind="adam", lr=float(obj.get("lr", 1e-3)),
                                    beta1=float(obj.get("beta1", 0.9)),
                                    beta2=float(obj.get("beta2", 0.999)),
                                    eps=float(obj.get("eps", 1e-8)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown optimizer kind {kind!r}")


def _optimizer_to_json(spec: nn.OptimizerSpec) -> dict:
    if spec.kind == "sgd":
        return {"kind": "sgd", "lr": spec.lr, "momentum": spec.momentum}
    return {"kind": "adam", "lr": spec.lr, "beta1": spec.beta1,
            "beta2": spec.beta2, "eps": spec.eps}


def _parse_train(obj: dict) -> nn.TrainConfig:
    where = "train"
    _require_keys(obj, {"optimizer", "batch_size", "epochs", "seed", "loss", "val_split"},
                  {"epochs"}, where)
    try:
        return nn.TrainConfig(
            epochs=int(obj["epochs"]),
            optimizer=_parse_optimizer(obj.get("optimizer", {"kind": "adam"})),
            batch_size=int(obj.get("batch_size", 32)),
            seed=int(obj.get("seed", 0)),
            loss=obj.get("loss", "softmax_xent"),
            val_split=float(obj.get("val_split", 0.0)),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_dataset(obj: dict) -> DatasetSpec:
    where = "dataset"
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    sources = {"builtin", "idx", "csv"} & set(obj)
    if len(sources) != 1:
        raise ConfigError(f"{where} must have exactly one of 'builtin', 'idx', 'csv'")
    source = sources.pop()
    try:
        if source == "builtin":
            _require_keys(obj, {"builtin", "n", "noise", "seed"}, {"builtin"}, where)
            kind = obj["builtin"]
            if kind not in datasets.BUILTIN_KINDS:
                raise ConfigError(f"{where}: unknown builtin {kind!r}")
            return DatasetSpec(source="builtin", builtin=kind, n=int(obj.get("n", 256)),
                               noise=float(obj.get("noise", 0.1)), seed=int(obj.get("seed", 0)))
        if source == "idx":
            _require_keys(obj, {"idx"}, {"idx"}, where)
            _require_keys(obj["idx"], {"images", "labels"}, {"images", "labels"}, "dataset.idx")
            return DatasetSpec(source="idx", images=str(obj["idx"]["images"]),
                               labels=str(obj["idx"]["labels"]))
        _require_keys(obj, {"csv"}, {"csv"}, where)
        return DatasetSpec(source="csv", csv_path=str(obj["csv"]))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def _dataset_to_json(spec: DatasetSpec) -> dict:
    if spec.source == "builtin":
        return {"builtin": spec.builtin, "n": spec.n, "noise": spec.noise, "seed": spec.seed}
    if spec.source == "idx":
        return {"idx": {"images": spec.images, "labels": spec.labels}}
    return {"csv": spec.csv_path}


def parse_config(doc) -> ExperimentConfig:
    """Parse a config document (dict or JSON text)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    _require_keys(doc, {"model", "train", "dataset", "out_dir"},
                  {"model", "train", "dataset"}, "config")
    _require_keys(doc["model"], {"layers"}, {"layers"}, "model")
    if not isinstance(doc["model"]["layers"], list) or not doc["model"]["layers"]:
        raise ConfigError("model.layers must be a non-empty list")
    layers = tuple(_parse_layer(obj, i) for i, obj in enumerate(doc["model"]["layers"]))
    out_dir = doc.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir must be a string")
    return ExperimentConfig(
        layers=layers,
        train=_parse_train(doc["train"]),
        dataset=_parse_dataset(doc["dataset"]),
        out_dir=out_dir,
    )


def config_to_json(cfg: ExperimentConfig) -> dict:
    doc = {
        "model": {"layers": [_layer_to_json(l) for l in cfg.layers]},
        "train": {
            "optimizer": _optimizer_to_json(cfg.train.optimizer),
            "batch_size": cfg.train.batch_size,
            "epochs": cfg.train.epochs,
            "seed": cfg.train.seed,
            "loss": cfg.train.loss,
            "val_split": cfg.train.val_split,
        },
        "dataset": _dataset_to_json(cfg.dataset),
    }
    if cfg.out_dir is not None:
        doc["out_dir"] = cfg.out_dir
    return doc


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())
