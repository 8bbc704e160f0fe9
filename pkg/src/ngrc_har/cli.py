"""Benchmark command line.

Subcommands: ``run``, ``ablate``, ``weighted``, ``esn-sweep``,
``lambda-sweep``, ``digest``.  Exit codes: 0 success, 1 configuration
error, 2 data error, 3 numerical failure.

Options may also come from a plain-text config file (``--config``) with one
``key = value`` pair per line mirroring the long flag names; flags given on
the command line win.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import DatasetDigest
from .exceptions import ConfigurationError, DataError, NumericalError
from .experiments import (
    DEFAULT_LAMBDA_GRID,
    ExperimentConfig,
    RunReport,
    ablation_table,
    run_ablation,
    run_digest,
    run_esn_sweep,
    run_lambda_sweep,
    run_ngrc,
    run_weighted,
)
from .features import FeatureFamily
from .metrics import ConfusionMatrix

logger = logging.getLogger("ngrc")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors (exit 1)."""

    def error(self, message):
        raise ConfigurationError(message)


def _parse_lambda(text: str) -> tuple[float | None, tuple[float, ...] | None]:
    """A fixed value ("1e-3"), "sweep", or a log grid "min:max:steps"."""
    text = text.strip()
    if text == "sweep":
        return None, DEFAULT_LAMBDA_GRID
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"lambda range must be min:max:steps, got {text!r}")
        try:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigurationError(f"bad lambda range {text!r}: {exc}") from None
        if lo <= 0 or hi <= 0 or steps < 1:
            raise ConfigurationError("lambda range needs min, max > 0 and steps >= 1")
        grid = tuple(float(x) for x in np.logspace(np.log10(lo), np.log10(hi), steps))
        return None, grid
    try:
        return float(text), None
    except ValueError:
        raise ConfigurationError(f"bad lambda {text!r}") from None


def _parse_features(text: str) -> tuple[int | None, tuple[str, ...] | None]:
    """A set id ("#3" or "3") or an explicit comma list ("lin,nls")."""
    text = text.strip()
    if text.startswith("#"):
        text = text[1:]
    if text.isdigit():
        return int(text), None
    families = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    if not families:
        raise ConfigurationError("empty feature list")
    return None, families


def _parse_weights(text: str) -> dict:
    weights = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigurationError(f"weights must be fam=value pairs, got {item!r}")
        key, value = item.split("=", 1)
        try:
            weights[FeatureFamily(key.strip())] = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"bad weight {item!r}: {exc}") from None
    if not weights:
        raise ConfigurationError("empty weight list")
    return weights


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigurationError(f"bad {what} list {text!r}: {exc}") from None
    if not values:
        raise ConfigurationError(f"empty {what} list")
    return values


def _read_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for i, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        # full-line comments only: '#' also spells feature-set ids
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}, line {i}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ngrc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"ngrc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--data", help="dataset root directory (train/ and test/)")
        p.add_argument("--config", help="plain-text config file mirroring the flags")
        p.add_argument("--out", help="report output path")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="report file format (default json)")
        p.add_argument("--verbose", action=argparse.BooleanOptionalAction, default=None,
                       help="log progress to stderr")

    def add_feature_opts(p):
        p.add_argument("--features", help="feature set id ('#1'..'#10') or family list "
                                          "('lin,nls,nlq')")
        p.add_argument("--weights", help="per-family weights, e.g. lin=1.0,nls=1.8")
        p.add_argument("--bias", action=argparse.BooleanOptionalAction, default=None,
                       help="append a constant-1 feature")
        p.add_argument("--lambda", dest="lambda_", metavar="LAMBDA",
                       help="ridge lambda: value, 'sweep', or min:max:steps log grid")

    p_run = sub.add_parser("run", help="one NG-RC train/test run")
    add_common(p_run)
    add_feature_opts(p_run)

    p_ablate = sub.add_parser("ablate", help="evaluate feature sets #1..#10")
    add_common(p_ablate)
    p_ablate.add_argument("--lambda", dest="lambda_", metavar="LAMBDA",
                          help="ridge lambda: value, 'sweep', or min:max:steps")
    p_ablate.add_argument("--bias", action=argparse.BooleanOptionalAction, default=None)

    p_weighted = sub.add_parser("weighted", help="NG-RC with nonuniform family weights")
    add_common(p_weighted)
    add_feature_opts(p_weighted)

    p_esn = sub.add_parser("esn-sweep", help="reservoir baseline vs node count")
    add_common(p_esn)
    p_esn.add_argument("--nodes", help="node counts, e.g. 200,400,800,1000,1200")
    p_esn.add_argument("--k", type=int, default=None, help="ring degree parameter (2k neighbors)")
    p_esn.add_argument("--p", type=float, default=None, help="rewiring probability")
    p_esn.add_argument("--rho", type=float, default=None, help="target spectral radius")
    p_esn.add_argument("--input-scale", type=float, default=None)
    p_esn.add_argument("--leak", type=float, default=None, help="leak rate in (0, 1]")
    p_esn.add_argument("--washout", type=int, default=None)
    p_esn.add_argument("--seeds", help="reservoir seeds, e.g. 0,1,2")
    p_esn.add_argument("--lambda", dest="lambda_", metavar="LAMBDA",
                       help="fixed ridge lambda (default 1e-3)")

    p_sweep = sub.add_parser("lambda-sweep", help="validation/test accuracy over a lambda grid")
    add_common(p_sweep)
    p_sweep.add_argument("--features", help="feature set id or family list")
    p_sweep.add_argument("--lambda", dest="lambda_", metavar="LAMBDA",
                         help="grid as min:max:steps (default 1e-6:1e2:9)")
    p_sweep.add_argument("--bias", action=argparse.BooleanOptionalAction, default=None)

    p_digest = sub.add_parser("digest", help="ingestion sanity report for both splits")
    add_common(p_digest)
    p_digest.add_argument("--magnitude", action=argparse.BooleanOptionalAction, default=None,
                          help="include L2-magnitude statistics")
    return parser


def _merge_config(args: argparse.Namespace) -> dict[str, str | None]:
    """Layer config-file values under explicit flags."""
    flag_map = {
        "data": "data", "features": "features", "weights": "weights",
        "lambda": "lambda_", "nodes": "nodes", "k": "k", "p": "p",
        "rho": "rho", "input-scale": "input_scale", "leak": "leak",
        "washout": "washout", "seeds": "seeds", "out": "out",
        "format": "format", "bias": "bias", "magnitude": "magnitude",
        "verbose": "verbose",
    }
    merged = dict(vars(args))
    if getattr(args, "config", None):
        file_values = _read_config_file(args.config)
        unknown = set(file_values) - set(flag_map)
        if unknown:
            raise ConfigurationError(f"unknown config file keys: {sorted(unknown)}")
        for key, raw in file_values.items():
            attr = flag_map[key]
            if merged.get(attr) is not None:
                continue  # explicit flag wins
            if attr in ("k", "washout"):
                merged[attr] = int(raw)
            elif attr in ("p", "rho", "input_scale", "leak"):
                merged[attr] = float(raw)
            elif attr in ("bias", "magnitude", "verbose"):
                merged[attr] = raw.lower() in ("1", "true", "yes", "on")
            else:
                merged[attr] = raw
    return merged


def _experiment_config(command: str, opts: dict) -> ExperimentConfig:
    if not opts.get("data"):
        raise ConfigurationError("--data (or a config-file 'data' entry) is required")
    mode = {"run": "ngrc", "ablate": "ablate", "weighted": "weighted",
            "esn-sweep": "esn-sweep", "lambda-sweep": "lambda-sweep",
            "digest": "digest"}[command]
    feature_set = families = None
    if opts.get("features"):
        feature_set, families = _parse_features(opts["features"])
    weights = _parse_weights(opts["weights"]) if opts.get("weights") else None
    ridge_lambda = lambda_grid = None
    if opts.get("lambda_"):
        ridge_lambda, lambda_grid = _parse_lambda(str(opts["lambda_"]))
    if mode == "lambda-sweep" and ridge_lambda is not None:
        raise ConfigurationError("lambda-sweep needs a grid (min:max:steps), not a value")
    node_counts = _parse_int_list(opts["nodes"], "node") if opts.get("nodes") else None
    if mode == "esn-sweep" and node_counts is None:
        raise ConfigurationError("esn-sweep requires --nodes")
    seeds = _parse_int_list(opts["seeds"], "seed") if opts.get("seeds") else (0, 1, 2)
    return ExperimentConfig(
        dataset_root=opts["data"],
        mode=mode,
        feature_set=feature_set,
        families=families,
        weights=weights,
        ridge_lambda=ridge_lambda,
        lambda_grid=lambda_grid,
        include_bias=bool(opts.get("bias")),
        node_counts=node_counts,
        k=opts.get("k") if opts.get("k") is not None else 4,
        p_rewire=opts.get("p") if opts.get("p") is not None else 0.5,
        target_rho=opts.get("rho") if opts.get("rho") is not None else 8.41,
        input_scale=opts.get("input_scale") if opts.get("input_scale") is not None else 1.0,
        leak_rate=opts.get("leak") if opts.get("leak") is not None else 1.0,
        washout=opts.get("washout") if opts.get("washout") is not None else 8,
        seeds=seeds,
        include_magnitude=bool(opts.get("magnitude")),
        output_path=opts.get("out"),
        output_format=opts.get("format") or "json",
    )


def _csv_rows(reports: list[RunReport]) -> tuple[list[str], list[list]]:
    header = ["mode", "label", "families", "lambda", "accuracy", "validation_accuracy"]
    rows = []
    for r in reports:
        rows.append([
            r.mode,
            r.label,
            "+".join(r.config.get("families", [])),
            "" if r.lambda_used is None else repr(r.lambda_used),
            "" if r.accuracy is None else f"{r.accuracy:.6f}",
            f"{r.extra['validation_accuracy']:.6f}" if "validation_accuracy" in r.extra else "",
        ])
    return header, rows


def _write_report(document: dict, reports: list[RunReport], opts_out, fmt: str) -> None:
    if not opts_out:
        return
    path = Path(opts_out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        header, rows = _csv_rows(reports)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        with path.open("w") as fh:
            json.dump(document, fh, indent=2)
            fh.write("\n")
    print(f"report written to {path}")


def _print_run(report: RunReport) -> None:
    print(f"{report.label}: accuracy {100 * report.accuracy:.2f}%  "
          f"(lambda {report.lambda_used:g})")
    dims = report.feature_dims or {}
    if dims:
        parts = [f"{k}={v}" for k, v in dims.items() if k != "total"]
        print(f"feature dimensions: {', '.join(parts)}  total={dims.get('total')}")
    if report.lambda_curve:
        curve = "  ".join(
            f"{e['lambda']:g}:{100 * e['validation_accuracy']:.1f}%"
            for e in report.lambda_curve
        )
        print(f"validation sweep: {curve}")
    cm = report.confusion
    if cm:
        print(ConfusionMatrix(np.array(cm["counts"]), tuple(cm["class_names"])).to_text())


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = _merge_config(args)
        if opts.get("verbose"):
            logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
        command = args.command
        cfg = _experiment_config(command, opts)
        if command == "run":
            report = run_ngrc(cfg)
            _print_run(report)
            _write_report(report.to_dict(), [report], cfg.output_path, cfg.output_format)
        elif command == "weighted":
            report = run_weighted(cfg)
            _print_run(report)
            _write_report(report.to_dict(), [report], cfg.output_path, cfg.output_format)
        elif command == "ablate":
            reports = run_ablation(cfg)
            print(ablation_table(reports))
            best = reports[0].extra["best_feature_set"]
            print(f"best: feature set #{best} "
                  f"({100 * reports[best - 1].accuracy:.2f}%)")
            document = {"mode": "ablate", "runs": [r.to_dict() for r in reports],
                        "best_feature_set": best}
            _write_report(document, reports, cfg.output_path, cfg.output_format)
        elif command == "lambda-sweep":
            reports, selected = run_lambda_sweep(cfg)
            print("lambda       validation   test")
            for r in reports:
                mark = "  <- selected" if r.extra.get("selected") else ""
                print(f"{r.lambda_used:<11g}  {100 * r.extra['validation_accuracy']:6.2f}%     "
                      f"{100 * r.accuracy:6.2f}%{mark}")
            document = {"mode": "lambda-sweep", "runs": [r.to_dict() for r in reports],
                        "selected_lambda": selected,
                        "selection_rule": "best validation accuracy "
                                          "(last 20% of training windows held out)"}
            _write_report(document, reports, cfg.output_path, cfg.output_format)
        elif command == "esn-sweep":
            reports = run_esn_sweep(cfg)
            print("nodes   mean accuracy   per-seed")
            for r in reports:
                per_seed = "  ".join(
                    f"{s['seed']}:{100 * s['accuracy']:.2f}%" for s in r.extra["per_seed"]
                )
                print(f"{r.extra['n_nodes']:<7} {100 * r.accuracy:6.2f}%         {per_seed}")
            document = {"mode": "esn-sweep", "runs": [r.to_dict() for r in reports]}
            _write_report(document, reports, cfg.output_path, cfg.output_format)
        elif command == "digest":
            reports = run_digest(cfg)
            for r in reports:
                print(DatasetDigest(**r.extra["digest"]).to_text())
                print()
            document = {"mode": "digest", "splits": [r.to_dict() for r in reports]}
            _write_report(document, reports, cfg.output_path, cfg.output_format)
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
