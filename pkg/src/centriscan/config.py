"""Scan configuration: defaults, config-file loading, flag merging.

Defaults match the reference setup: all six rules enabled and a minimum
transaction count of 2 for corpus filtering. A config file (key=value lines,
`#` comments) can be pointed to by the CENTRISCAN_CONFIG environment
variable; command-line flags override file values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .rules import ALL_CODES

ENV_CONFIG_VAR = "CENTRISCAN_CONFIG"

_BOOL_KEYS = {
    "ior_distinct_sites", "ior_respect_guards", "exclude_privilege_vars",
    "dump_pdg", "dump_facts",
}


@dataclass(frozen=True)
class ScanConfig:
    rules: tuple[str, ...] = ALL_CODES
    ior_distinct_sites: bool = False
    ior_respect_guards: bool = False
    exclude_privilege_vars: bool = False
    unsupported_construct_severity: str = "warn"  # warn | error
    min_tx_count: int = 2
    output_format: str = "text"  # text | json | sarif
    dump_pdg: bool = False
    dump_facts: bool = False
    jobs: int = 4
    crosschain_records: str | None = None
    governors: str | None = None

    def validate(self) -> None:
        unknown = [r for r in self.rules if r not in ALL_CODES]
        if unknown:
            raise ValueError(f"unknown rule codes: {', '.join(unknown)}")
        if self.output_format not in ("text", "json", "sarif"):
            raise ValueError(f"unknown output format: {self.output_format}")
        if self.unsupported_construct_severity not in ("warn", "error"):
            raise ValueError("unsupported_construct_severity must be warn or error")
        if self.min_tx_count < 0:
            raise ValueError("min_tx_count must be >= 0")


def parse_rules(text: str) -> tuple[str, ...]:
    codes = tuple(part.strip().upper() for part in text.split(",") if part.strip())
    return codes or ALL_CODES


def load_config_file(path: str | Path) -> dict:
    """key=value lines; unknown keys are rejected to catch typos."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "rules":
            values["rules"] = parse_rules(value)
        elif key in _BOOL_KEYS:
            values[key] = value.lower() in ("1", "true", "yes", "on")
        elif key == "min_tx_count":
            values[key] = int(value)
        elif key == "jobs":
            values[key] = int(value)
        elif key in ("output_format", "unsupported_construct_severity"):
            values[key] = value
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def config_from_env(base: ScanConfig | None = None) -> ScanConfig:
    cfg = base or ScanConfig()
    path = os.environ.get(ENV_CONFIG_VAR)
    if path:
        cfg = replace(cfg, **load_config_file(path))
    return cfg
