"""Source files, spans, and diagnostics shared by every stage of the pipeline."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class Span:
    """Half-open byte range [start, end) plus the 1-based line/column of start."""

    start: int
    end: int
    line: int
    col: int

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "line": self.line, "col": self.col}

    @staticmethod
    def from_dict(d: dict) -> "Span":
        return Span(d["start"], d["end"], d["line"], d["col"])


DUMMY_SPAN = Span(0, 0, 1, 1)


def content_hash(text: str) -> str:
    """SHA-256 of the UTF-8 bytes; the dedup key for identical sources."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str
    content_hash: str

    @staticmethod
    def from_string(content: str, path: str = "<string>") -> "SourceFile":
        return SourceFile(path=path, content=content, content_hash=content_hash(content))

    @staticmethod
    def from_path(path: str | Path) -> "SourceFile":
        p = Path(path)
        text = p.read_text(encoding="utf-8")
        return SourceFile(path=str(p), content=text, content_hash=content_hash(text))

    def snippet(self, span: Span) -> str:
        return self.content[span.start : span.end]


ERROR = "error"
WARNING = "warning"
NOTE = "note"


@dataclass
class Diagnostic:
    severity: str  # error | warning | note
    code: str
    message: str
    span: Span = field(default=DUMMY_SPAN)

    def format(self, path: str = "") -> str:
        loc = f"{path}:{self.span.line}:{self.span.col}" if path else f"{self.span.line}:{self.span.col}"
        return f"{loc}: {self.severity}: {self.message} [{self.code}]"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "span": self.span.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "Diagnostic":
        return Diagnostic(d["severity"], d["code"], d["message"], Span.from_dict(d["span"]))
