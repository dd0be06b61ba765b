"""Command-line interface.

    centriscan scan <path>... [options]

Exit codes: 0 no findings, 1 findings present, 2 errors occurred.
Debug dumps (--dump-pdg / --dump-facts) go to stderr as JSON lines so the
report stream on stdout stays machine-parseable.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .batch import run_scan
from .config import ScanConfig, config_from_env, parse_rules
from .corpus import ingest
from .reporters import render_json, render_sarif, render_text


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="centriscan", description="Centralization-defect scanner for Solidity sources.")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan files or directories of .sol sources")
    scan.add_argument("paths", nargs="+", help="files or directories to scan")
    scan.add_argument("--format", choices=("text", "json", "sarif"), default=None, help="output format (default text)")
    scan.add_argument("--rules", default=None, help="comma-separated defect codes to enable (default all)")
    scan.add_argument("--metadata", default=None, help="NDJSON sidecar with per-path tx_count/address")
    scan.add_argument("--min-tx", type=int, default=None, help="minimum transaction count (default 2)")
    scan.add_argument("--jobs", type=int, default=None, help="worker pool size (default 4)")
    scan.add_argument("--dump-pdg", action="store_true", help="dump per-function permission graphs to stderr")
    scan.add_argument("--dump-facts", action="store_true", help="dump per-unit sensitive/taint facts to stderr")
    scan.add_argument("--ior-distinct-sites", action="store_true", help="treat each call site as a distinct output source")
    scan.add_argument("--ior-respect-guards", action="store_true", help="ignore sources that are validated in a branch condition")
    scan.add_argument("--exclude-privilege-vars", action="store_true", help="exclude privilege variables from the critical set")
    scan.add_argument("--unsupported-severity", choices=("warn", "error"), default=None, help="severity for unsupported constructs")
    scan.add_argument("--crosschain", default=None, metavar="RECORDS_FILE", help="NDJSON transaction records for the suppression pass")
    scan.add_argument("--governors", default=None, metavar="REGISTRY_FILE", help="governor registry (address + multisig|timelock per line)")
    return parser


def config_from_args(args: argparse.Namespace) -> ScanConfig:
    cfg = config_from_env()
    overrides = {}
    if args.format is not None:
        overrides["output_format"] = args.format
    if args.rules is not None:
        overrides["rules"] = parse_rules(args.rules)
    if args.min_tx is not None:
        overrides["min_tx_count"] = args.min_tx
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.dump_pdg:
        overrides["dump_pdg"] = True
    if args.dump_facts:
        overrides["dump_facts"] = True
    if args.ior_distinct_sites:
        overrides["ior_distinct_sites"] = True
    if args.ior_respect_guards:
        overrides["ior_respect_guards"] = True
    if args.exclude_privilege_vars:
        overrides["exclude_privilege_vars"] = True
    if args.unsupported_severity is not None:
        overrides["unsupported_construct_severity"] = args.unsupported_severity
    if args.crosschain is not None:
        overrides["crosschain_records"] = args.crosschain
    if args.governors is not None:
        overrides["governors"] = args.governors
    return replace(cfg, **overrides)


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_arg_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        config.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    if bool(config.crosschain_records) != bool(config.governors):
        print("error: --crosschain and --governors must be used together", file=stderr)
        return 2

    try:
        index = ingest(args.paths, metadata_path=args.metadata)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2

    try:
        result = run_scan(config, index)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2

    for doc in result.dumps:
        print(json.dumps(doc, sort_keys=True), file=stderr)

    if config.output_format == "json":
        stdout.write(render_json(result))
    elif config.output_format == "sarif":
        stdout.write(render_sarif(result))
    else:
        stdout.write(render_text(result))
    return result.exit_code()


if __name__ == "__main__":
    raise SystemExit(main())
