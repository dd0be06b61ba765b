from __future__ import annotations

import json
from pathlib import Path

import pytest

from centriscan.config import ScanConfig
from centriscan.ir import ContractUnit, lower
from centriscan.parser import parse
from centriscan.pipeline import UnitAnalysis, analyze_unit
from centriscan.source import SourceFile

CORPUS_DIR = Path(__file__).parent / "corpus"
DATA_DIR = Path(__file__).parent / "data"

FIGURE_FILES = {
    "mint": "token_mint_owner.sol",
    "fee": "fee_manipulation.sol",
    "proxy": "proxy_single_admin.sol",
    "selfdestruct": "selfdestruct_owner.sol",
    "oracle": "oracle_single_source.sol",
    "fee_timelocked": "fee_manipulation_timelocked.sol",
}


def parse_text(text: str, path: str = "<test>"):
    return parse(SourceFile.from_string(text, path))


def lower_text(text: str, path: str = "<test>") -> list[ContractUnit]:
    ast = parse_text(text, path)
    assert not ast.has_errors(), [d.message for d in ast.diagnostics if d.severity == "error"]
    units, _ = lower(ast)
    return units


def unit_of(text: str, name: str | None = None) -> ContractUnit:
    units = lower_text(text)
    if name is None:
        assert len(units) == 1, [u.name for u in units]
        return units[0]
    for u in units:
        if u.name == name:
            return u
    raise AssertionError(f"no unit named {name}")


def analysis_of(text: str, name: str | None = None, config: ScanConfig | None = None) -> UnitAnalysis:
    return analyze_unit(unit_of(text, name), config)


def fn_by_name(unit: ContractUnit, name: str):
    matches = unit.functions_by_name(name)
    assert len(matches) == 1, f"{name}: {[f.signature for f in matches]}"
    return matches[0]


@pytest.fixture(scope="session")
def corpus_labels() -> dict:
    return json.loads((CORPUS_DIR / "labels.json").read_text())


@pytest.fixture()
def figure_source():
    def load(key: str) -> SourceFile:
        return SourceFile.from_path(CORPUS_DIR / FIGURE_FILES[key])

    return load
