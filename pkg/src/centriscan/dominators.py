"""Dominator computation over arbitrary entry-reachable digraphs.

Implements the iterative immediate-dominator algorithm (Cooper, Harvey,
Kennedy, "A Simple, Fast Dominance Algorithm") over reverse postorder.
The graph interface is plain `entry + successor map`, so tests can feed
synthetic graphs directly; `dominators_for_cfg` adapts a Cfg.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .cfg import Cfg


@dataclass
class DomInfo:
    entry: int
    idom: dict[int, int | None]  # entry maps to None
    rpo: list[int] = field(default_factory=list)

    def dominates(self, d: int, b: int) -> bool:
        """True iff every path entry -> b passes through d (reflexive)."""
        if d == b:
            return d in self.idom
        cur = self.idom.get(b)
        while cur is not None:
            if cur == d:
                return True
            cur = self.idom.get(cur)
        return False

    def strictly_dominates(self, d: int, b: int) -> bool:
        return d != b and self.dominates(d, b)

    def dominators_of(self, b: int) -> set[int]:
        out = {b}
        cur = self.idom.get(b)
        while cur is not None:
            out.add(cur)
            cur = self.idom.get(cur)
        return out

    def depends_on(self, b1: int, b2: int) -> bool:
        """b1 depends on b2: every execution path to b1 passes through b2."""
        return self.dominates(b2, b1)


def compute_dominators(entry: int, succs: Mapping[int, Sequence[int]]) -> DomInfo:
    rpo = _reverse_postorder(entry, succs)
    index = {n: i for i, n in enumerate(rpo)}
    preds: dict[int, list[int]] = {n: [] for n in rpo}
    for n in rpo:
        for s in succs.get(n, ()):
            if s in index:
                preds[s].append(n)

    idom: dict[int, int | None] = {entry: entry}
    changed = True
    while changed:
        changed = False
        for n in rpo:
            if n == entry:
                continue
            new_idom = None
            for p in preds[n]:
                if p not in idom:
                    continue
                new_idom = p if new_idom is None else _intersect(p, new_idom, idom, index)
            if new_idom is not None and idom.get(n) != new_idom:
                idom[n] = new_idom
                changed = True

    result = {n: (None if n == entry else idom[n]) for n in rpo if n in idom}
    return DomInfo(entry=entry, idom=result, rpo=rpo)


def _intersect(a: int, b: int, idom: dict[int, int | None], index: dict[int, int]) -> int:
    while a != b:
        while index[a] > index[b]:
            a = idom[a]  # type: ignore[assignment]
        while index[b] > index[a]:
            b = idom[b]  # type: ignore[assignment]
    return a


def _reverse_postorder(entry: int, succs: Mapping[int, Sequence[int]]) -> list[int]:
    seen: set[int] = set()
    post: list[int] = []

    stack: list[tuple[int, int]] = [(entry, 0)]
    seen.add(entry)
    while stack:
        node, i = stack[-1]
        children = list(succs.get(node, ()))
        if i < len(children):
            stack[-1] = (node, i + 1)
            child = children[i]
            if child not in seen:
                seen.add(child)
                stack.append((child, 0))
        else:
            stack.pop()
            post.append(node)
    return list(reversed(post))


def dominators_for_cfg(cfg: Cfg) -> DomInfo:
    succs = {bid: list(cfg.successors(bid)) for bid in cfg.blocks}
    return compute_dominators(cfg.entry, succs)
