"""centriscan: static detection of centralization defects in Solidity sources.

The pipeline builds per-function control-flow graphs, labels basic blocks
with permission semantics (privilege check / multisig / timelock), derives
function-level permission facts with a call-graph fixpoint, detects sensitive
operations (minting, critical-variable writes, proxy upgrades, self-destruct,
external-output reliance), and reports six defect kinds: MFS, CVS, MT, SPA,
SS, IOR.
"""

from .config import ScanConfig
from .pipeline import analyze_unit, scan_file, scan_source
from .rules import ALL_CODES, DEFECTS, Finding, ScanReport
from .source import SourceFile

__version__ = "0.1.0"

__all__ = [
    "ALL_CODES",
    "DEFECTS",
    "Finding",
    "ScanConfig",
    "ScanReport",
    "SourceFile",
    "analyze_unit",
    "scan_file",
    "scan_source",
    "__version__",
]
