"""Stage-by-stage batch pipeline over plain CSV/JSON artifacts in one output directory.

Every stage reads raw inputs or earlier stage outputs from disk, so rerunning
any stage alone reproduces what the end-to-end run wrote.
"""
from __future__ import annotations

import dataclasses
import functools
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .centrality import MEASURES
from .evaluation import actor_totals, correlation_report, export_embedding_input, \
    export_plot_series, importance_by_timestep
from .features import run_nrm, to_wide
from .graph import build_network, graph_stats
from .ingest import ParseError, align_ground_truth, parse_ground_truth, parse_match_log, write_match_log
from .labels import LabelTable, assign_classes
from .learn import (classification_metrics, load_model, majority_baseline, make_dataset,
                    make_wide_dataset, mdi_importance, save_model, temporal_split,
                    train_decision_tree, train_random_forest)

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@dataclass
class RunConfig:
    events: str | None = None
    truth: str | None = None
    format: str = "generic"
    scope: str = "per-round"
    measures: list[str] = field(default_factory=lambda: list(MEASURES))
    quantiles: list[float] = field(default_factory=lambda: [0.10, 0.90])
    model: str = "rf"
    train_frac: float = 0.8
    trees: int = 100
    max_depth: int | None = 10
    min_samples_split: int = 2
    feature_subsample: str = "sqrt"
    seed: int = 0
    out: str = "out"
    window: int = 50
    sort_by: str = "con1"
    damping: float = 0.85
    jobs: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    @property
    def scope_mode(self) -> str:
        return self.scope.replace("-", "_")

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


# ------------------------------------------------------------------ helpers

def _write(cfg: RunConfig, name: str, data: bytes | str) -> Path:
    path = cfg.out_dir / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data.encode("utf-8") if isinstance(data, str) else data)
    return path


def _csv(cfg: RunConfig, name: str, df: pd.DataFrame, index=False) -> Path:
    return _write(cfg, name, df.to_csv(index=index, lineterminator="\n"))


def _json(cfg: RunConfig, name: str, payload: dict) -> Path:
    body = {"compnet_version": __version__, "config": cfg.to_dict(), **payload}
    return _write(cfg, name, json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _read_csv(cfg: RunConfig, name: str, stage: str) -> pd.DataFrame:
    path = cfg.out_dir / name
    if not path.exists():
        raise StageError(stage, f"missing {path}; run the earlier stage first")
    return pd.read_csv(path, dtype={"actor": str, "competition": str},
                       float_precision="round_trip", keep_default_na=False)


def _need(value, what: str, stage: str):
    if value is None:
        raise StageError(stage, f"no {what} given")
    if not Path(value).exists():
        raise StageError(stage, f"{what} {value} does not exist")
    return value


def load_events(cfg: RunConfig, stage: str, rejects=None):
    return parse_match_log(Path(_need(cfg.events, "match log", stage)), cfg.format,
                           rejects=rejects)


def load_truth(cfg: RunConfig, stage: str):
    return parse_ground_truth(Path(_need(cfg.truth, "ground-truth file", stage)), cfg.format)


def update_manifest(cfg: RunConfig, paths) -> Path:
    """Record sha256 of each produced file in ``manifest.json`` (merged across stages)."""
    manifest_path = cfg.out_dir / "manifest.json"
    files = {}
    if manifest_path.exists():
        files = json.loads(manifest_path.read_text()).get("files", {})
    for p in paths:
        p = Path(p)
        files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    body = {"compnet_version": __version__, "config": cfg.to_dict(), "seed": cfg.seed,
            "files": dict(sorted(files.items()))}
    manifest_path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return manifest_path


# ------------------------------------------------------------------- stages

def _stage(name):
    """Re-raise unexpected failures as a StageError tagged with ``name``."""
    def wrap(fn):
        @functools.wraps(fn)
        def inner(cfg):
            try:
                return fn(cfg)
            except (StageError, ParseError):
                raise
            except Exception as exc:
                raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
        return inner
    return wrap


@_stage("features")
def stage_features(cfg: RunConfig) -> list[Path]:
    events = load_events(cfg, "features")
    network = build_network(events)
    fm = run_nrm(network, cfg.measures, cfg.scope_mode, damping=cfg.damping, n_jobs=cfg.jobs)
    return [
        _write(cfg, "events.csv", write_match_log(events)),
        _csv(cfg, "features_long.csv", fm.long),
        _csv(cfg, "features_wide.csv", to_wide(fm.long, fm.measures), index=True),
        _json(cfg, "features_meta.json", {"runtime_seconds": fm.runtime_seconds,
                                          "measures": list(fm.measures),
                                          "rows": len(fm.long)}),
    ]


@_stage("stats")
def stage_stats(cfg: RunConfig) -> tuple[list[Path], str]:
    rejects = []
    events = load_events(cfg, "stats", rejects)
    network = build_network(events)
    meta = cfg.out_dir / "features_meta.json"
    if meta.exists():
        runtime = json.loads(meta.read_text())["runtime_seconds"]
    else:
        runtime = run_nrm(network, cfg.measures, cfg.scope_mode, damping=cfg.damping,
                          n_jobs=cfg.jobs).runtime_seconds
    counts = None
    labels_path = cfg.out_dir / "labels.csv"
    if labels_path.exists():
        counts = list(_label_table(cfg, "stats").counts())
    stats = graph_stats(network, counts, runtime)
    table = stats.to_table(Path(cfg.events).stem)
    payload = stats.to_dict()
    payload["rejected_rows"] = [dataclasses.asdict(r) for r in rejects]
    if cfg.truth is not None:
        # raw ground-truth size next to the count that survives alignment with the events
        truth = load_truth(cfg, "stats")
        payload["ground_truth_actors"] = len(truth)
        payload["ground_truth_in_network"] = len(align_ground_truth(truth, network.actors).labeled)
    return [_json(cfg, "stats.json", payload), _write(cfg, "stats.txt", table)], table


@_stage("label")
def stage_label(cfg: RunConfig) -> list[Path]:
    truth = load_truth(cfg, "label")
    if cfg.events is not None:
        network = build_network(load_events(cfg, "label"))
        truth = align_ground_truth(truth, network.actors).labeled
    lo, hi = cfg.quantiles
    table = assign_classes(truth, lo, hi)
    return [
        _csv(cfg, "labels.csv", table.to_frame()),
        _json(cfg, "labels_meta.json", {"counts": list(table.counts()),
                                        "lower_cut": table.lower_cut,
                                        "upper_cut": table.upper_cut}),
    ]


def _label_table(cfg, stage) -> LabelTable:
    lo, hi = cfg.quantiles
    return LabelTable.from_frame(_read_csv(cfg, "labels.csv", stage), lo, hi)


def _long_dataset(cfg, stage):
    long = _read_csv(cfg, "features_long.csv", stage)
    labels = _label_table(cfg, stage).as_dict()
    measures = [m for m in MEASURES if m in cfg.measures]
    data = make_dataset(long, labels, measures)
    if len(data) == 0:
        raise StageError(stage, "no labelled feature rows")
    return data


def _split(cfg, data):
    """Temporal split; a single-round log is both train and test set (flagged degenerate)."""
    if len(np.unique(data.rounds)) < 2:
        logger.warning("only one round: evaluating on the training round")
        return data, data, True
    train, test = temporal_split(data, cfg.train_frac)
    return train, test, False


def _fit(cfg, model_name, data):
    if model_name == "dt":
        return train_decision_tree(data, cfg.max_depth, cfg.min_samples_split, cfg.seed)
    if model_name == "rf":
        return train_random_forest(data, cfg.trees, cfg.max_depth, cfg.feature_subsample,
                                   cfg.seed, min_samples_split=cfg.min_samples_split,
                                   n_jobs=cfg.jobs)
    raise StageError("train", f"unknown model {model_name!r}")


@_stage("train")
def stage_train(cfg: RunConfig) -> list[Path]:
    data = _long_dataset(cfg, "train")
    train, _, _ = _split(cfg, data)
    model = _fit(cfg, cfg.model, train)
    run = {"config": cfg.to_dict(), "train_rows": len(train),
           "train_rounds": sorted(set(train.rounds.tolist()))}
    mdi = pd.DataFrame({"feature": data.feature_names, "importance": mdi_importance(model)})
    paths = [
        _write(cfg, f"model_{cfg.model}.json", save_model(model, data.feature_names, run) + "\n"),
        _csv(cfg, f"mdi_{cfg.model}.csv", mdi),
    ]

    # per-time-step importances from a model on the actor x {measure}_t{round} matrix
    wide = _read_csv(cfg, "features_wide.csv", "train").set_index("actor")
    wide_data = make_wide_dataset(wide, _label_table(cfg, "train").as_dict())
    wide_model = _fit(cfg, cfg.model, wide_data)
    wide_mdi = dict(zip(wide_data.feature_names, mdi_importance(wide_model)))
    by_step = importance_by_timestep(wide_mdi, [m for m in MEASURES if m in cfg.measures])
    paths += [
        _csv(cfg, f"mdi_wide_{cfg.model}.csv",
             pd.DataFrame({"feature": list(wide_mdi), "importance": list(wide_mdi.values())})),
        _csv(cfg, f"mdi_timestep_{cfg.model}.csv", by_step.to_frame()),
        _csv(cfg, f"mdi_timestep_means_{cfg.model}.csv",
             by_step.per_measure.rename("mean_importance").rename_axis("measure").reset_index()),
    ]
    return paths


@_stage("evaluate")
def stage_evaluate(cfg: RunConfig) -> tuple[list[Path], dict]:
    model_path = cfg.out_dir / f"model_{cfg.model}.json"
    if not model_path.exists():
        raise StageError("evaluate", f"missing {model_path}; run train first")
    model = load_model(model_path.read_text())
    data = _long_dataset(cfg, "evaluate")
    _, test, degenerate = _split(cfg, data)
    pred = model.predict(test.X)
    report = classification_metrics(test.y, pred).to_dict()
    baseline = majority_baseline(test.y).to_dict()
    payload = {"model": cfg.model, "metrics": report, "majority_baseline": baseline,
               "degenerate_split": degenerate,
               "test_rows": len(test), "test_rounds": sorted(set(test.rounds.tolist()))}
    pred_df = pd.DataFrame({"actor": test.actors, "round": test.rounds,
                            "true": test.y, "pred": pred})
    return [_json(cfg, f"metrics_{cfg.model}.json", payload),
            _csv(cfg, f"predictions_{cfg.model}.csv", pred_df)], payload


@_stage("correlate")
def stage_correlate(cfg: RunConfig) -> tuple[list[Path], str]:
    long = _read_csv(cfg, "features_long.csv", "correlate")
    truth = load_truth(cfg, "correlate")
    measures = [m for m in MEASURES if m in cfg.measures]
    report = correlation_report(actor_totals(long, measures), truth)
    frame = report.to_frame()
    return [_csv(cfg, "correlation.csv", frame),
            _json(cfg, "correlation.json", {"rows": frame.to_dict(orient="records")})], \
        report.to_table()


@_stage("export")
def stage_export(cfg: RunConfig) -> list[Path]:
    long = _read_csv(cfg, "features_long.csv", "export")
    measures = [m for m in MEASURES if m in cfg.measures]
    totals = actor_totals(long, measures)
    truth = load_truth(cfg, "export") if cfg.truth is not None else None
    if cfg.sort_by not in measures:
        raise StageError("export", f"sort measure {cfg.sort_by!r} not among {measures}")
    series = export_plot_series(totals, cfg.sort_by, truth, cfg.window, measures)
    wide = _read_csv(cfg, "features_wide.csv", "export").set_index("actor")
    embedding = export_embedding_input(wide, _label_table(cfg, "export"))
    return [_csv(cfg, "plot_series.csv", series), _csv(cfg, "embedding_input.csv", embedding)]


def run_pipeline(cfg: RunConfig) -> dict:
    """All stages in order; returns the manifest contents."""
    produced: list[Path] = []
    produced += stage_features(cfg)
    produced += stage_label(cfg)
    produced += stage_stats(cfg)[0]
    produced += stage_train(cfg)
    produced += stage_evaluate(cfg)[0]
    produced += stage_correlate(cfg)[0]
    produced += stage_export(cfg)
    return json.loads(update_manifest(cfg, produced).read_text())
