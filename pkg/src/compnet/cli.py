"""Command-line front end.

    compnet pipeline --events games.csv --truth ratings.csv --format chess --out run/
    compnet features --events games.csv --format chess --out run/
    compnet train --model dt --out run/

Settings come from an optional JSON config file (``--config``) with flags
taking precedence. Exit status: 0 ok, 1 usage, 2 input parse error, 3 stage failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .centrality import MEASURES
from .ingest import ParseError
from .pipeline import (RunConfig, StageError, run_pipeline, stage_correlate, stage_evaluate,
                       stage_export, stage_features, stage_label, stage_stats, stage_train,
                       update_manifest)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_STAGE = 0, 1, 2, 3
FORMATS = ("generic", "survivor", "chess", "dota")
# Survivor's reference label counts are roughly 20/60/20, not 10/80/10
SURVIVOR_QUANTILES = (0.20, 0.80)

logger = logging.getLogger("compnet")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for input parse errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _measure_list(text: str) -> list[str]:
    items = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in items if m not in MEASURES]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"unknown measures {bad}; choose from {','.join(MEASURES)}")
    return items


def _quantiles(text: str) -> list[float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two numbers: low,high")
    if not 0 < lo < hi < 1:
        raise argparse.ArgumentTypeError("quantiles need 0 < low < high < 1")
    return [lo, hi]


def _fraction(text: str) -> float:
    f = float(text)
    if not 0 < f < 1:
        raise argparse.ArgumentTypeError("train fraction must lie in (0, 1)")
    return f


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _depth(text: str):
    return None if text.lower() == "none" else _positive(text)


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common() -> argparse.ArgumentParser:
    # suppressed defaults: only flags actually given land in the namespace
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    g.add_argument("--events", help="match log")
    g.add_argument("--truth", help="ground-truth ratings / outcomes")
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--scope", choices=("per-round", "cumulative"))
    g.add_argument("--measures", type=_measure_list, help="comma-separated measure names")
    g.add_argument("--quantiles", type=_quantiles, help="low,high label cut quantiles")
    g.add_argument("--model", choices=("dt", "rf"))
    g.add_argument("--train-frac", dest="train_frac", type=_fraction)
    g.add_argument("--trees", type=_positive)
    g.add_argument("--max-depth", dest="max_depth", type=_depth)
    g.add_argument("--seed", type=_seed)
    g.add_argument("--out", help="output directory")
    g.add_argument("--window", type=_positive, help="moving-average window for plot exports")
    g.add_argument("--sort-by", dest="sort_by", choices=MEASURES)
    g.add_argument("--jobs", type=_positive, help="worker processes")
    g.add_argument("-v", "--verbose", action="store_true", default=False)
    return p


COMMANDS = {
    "pipeline": "run every stage end to end",
    "stats": "graph statistics table",
    "features": "per-round centrality feature matrices",
    "label": "Top/Middle/Bottom classes from ground truth",
    "train": "fit a decision tree or random forest plus MDI tables",
    "evaluate": "test-split metrics against the majority baseline",
    "correlate": "Spearman correlation of each measure with ground truth",
    "export": "chart series and embedding input",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="compnet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    for name, help_text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = {}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        try:
            base = json.loads(config_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}")
        if not isinstance(base, dict):
            raise UsageError("config file must hold a JSON object")
    try:
        cfg = RunConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))
    given = vars(args)
    for key in RunConfig.__dataclass_fields__:
        if key in given:
            setattr(cfg, key, given[key])
    if cfg.format == "survivor" and "quantiles" not in given and "quantiles" not in base:
        cfg.quantiles = list(SURVIVOR_QUANTILES)
    return cfg


def _report(cfg: RunConfig, paths) -> None:
    manifest = json.loads(update_manifest(cfg, paths).read_text())
    for p in paths:
        print(f"{manifest['files'][Path(p).name]}  {p}")


def run(cfg: RunConfig, command: str) -> None:
    if command == "pipeline":
        manifest = run_pipeline(cfg)
        print(json.dumps(manifest, indent=2, sort_keys=True))
        return
    if command == "stats":
        paths, table = stage_stats(cfg)
        print(table, end="")
    elif command == "features":
        paths = stage_features(cfg)
    elif command == "label":
        paths = stage_label(cfg)
    elif command == "train":
        paths = stage_train(cfg)
    elif command == "evaluate":
        paths, payload = stage_evaluate(cfg)
        m, b = payload["metrics"], payload["majority_baseline"]
        print(f"accuracy {m['accuracy']:.4f} (majority {b['accuracy']:.4f})  "
              f"macro-F1 {m['f1']:.4f} (majority {b['f1']:.4f})  n={m['n']}")
    elif command == "correlate":
        paths, table = stage_correlate(cfg)
        print(table, end="")
    elif command == "export":
        paths = stage_export(cfg)
    else:
        raise UsageError(f"unknown command {command!r}")
    _report(cfg, paths)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        run(cfg, args.command)
    except UsageError as exc:
        print(f"compnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"compnet: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StageError as exc:
        print(f"compnet: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as exc:  # any other failure is reported against the command's stage
        print(f"compnet: [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
