"""Command-line runner: ``cohq run --model A --r-sq 6 --suite full --out report.json``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 no physical states for the requested R^2, 4 operation refused for the model.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import SCHEMA_VERSION, SUITES, RunConfig, load_config, parse_assignments
from .errors import (ConfigError, DomainError, NoPhysicalStates, UnsupportedModel, UnsupportedRepresentation,
                     UsageError)
from .report import CheckReport, _jsonable
from .suites import run_suite

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NO_PHYSICAL = 3
EXIT_UNSUPPORTED = 4

CHECK_COLUMNS = ("name", "status", "deviation", "tolerance", "pass")
SWEEP_PARAMS = ("model", "R_sq", "hbar", "chart_1", "chart_2", "observable")
SWEEP_COLUMNS = SWEEP_PARAMS + ("quantum", "classical", "deviation", "deviation_over_hbar")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohq", description="Coherent-state constraint quantization checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a verification suite and write a report")
    run.add_argument("--config", type=Path, help="flat key = value config file; flags override it")
    run.add_argument("--model", choices=["A", "B", "C"])
    run.add_argument("--r-sq", type=float, dest="r_sq")
    run.add_argument("--hbar", type=float)
    run.add_argument("--cutoff", type=int)
    run.add_argument("--scheme", choices=["total", "permode"])
    run.add_argument("--margin", type=int)
    run.add_argument("--suite", default="full", choices=SUITES)
    run.add_argument("--out", help="report path (default: stdout)")
    run.add_argument("--format", choices=["json", "csv"])
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any config key, e.g. --set tol.kin_phys=1e-9")
    run.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")
    return parser


def config_from_args(args) -> RunConfig:
    pairs = []
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}", "--set")
        pairs.append(tuple(item.split("=", 1)))
    overrides = parse_assignments(pairs)
    for key in ("model", "r_sq", "hbar", "cutoff", "scheme", "margin", "out", "format"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return load_config(args.config, overrides)


def report_document(report: CheckReport, config: RunConfig) -> dict:
    body = report.to_dict()
    resolved = config.resolved()
    env = dict(body["environment"])
    env.update(
        config_hash=config.config_hash(),
        truncation={"scheme": resolved.scheme.value, "cutoff": resolved.cutoff},
        versions={"cohq": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config.config_hash(),
        "suite": body["suite"],
        "pass": body["pass"],
        "config": config.to_dict(),
        "environment": _jsonable(env),
        "checks": body["checks"],
        "tables": body["tables"],
    }


def render(report: CheckReport, config: RunConfig, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report_document(report, config), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    if report.suite == "semiclassical-sweep":
        writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in report.tables.get("semiclassical", []):
            writer.writerow({k: _cell(row.get(k)) for k in SWEEP_COLUMNS})
    else:
        writer = csv.DictWriter(buf, fieldnames=CHECK_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for rec in report.records:
            writer.writerow({k: _cell(v) for k, v in rec.to_dict().items()})
    return buf.getvalue()


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def emit_report(report: CheckReport, config: RunConfig, fmt: str, out=None) -> str:
    """Render and write the report; returns the rendered text."""
    text = render(report, config, fmt)
    if out is None:
        sys.stdout.write(text)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def _fail(code: int, kind: str, exc: Exception) -> int:
    print(f"cohq: {kind}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = run_suite(config, args.suite)
        emit_report(report, config, config.format, config.out)
    except NoPhysicalStates as exc:
        return _fail(EXIT_NO_PHYSICAL, "no physical states", exc)
    except (UnsupportedModel, UnsupportedRepresentation) as exc:
        return _fail(EXIT_UNSUPPORTED, "unsupported", exc)
    except (ConfigError, UsageError, DomainError) as exc:
        return _fail(EXIT_CONFIG, "configuration error", exc)
    except OSError as exc:
        return _fail(EXIT_CONFIG, "cannot write report", exc)
    if not args.quiet:
        for line in report.summary_lines():
            print(line, file=sys.stderr)
        print(f"{report.suite}: {'PASS' if report.passed else 'FAIL'} ({len(report.failures())} failing)",
              file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
