"""Bounded traces: a lasso-shaped (or acyclic) path with propositional
labels on instants ``0..k+1`` and integer valuations on a window around it."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence


class TraceError(ValueError):
    pass


@dataclass
class Trace:
    """``loop == 0`` means no loop; ``loop == i >= 1`` means instant ``k+1``
    stands for instant ``i`` (labels of ``i-1`` and ``k`` coincide)."""

    k: int
    loop: int
    props: dict[str, list[bool]] = field(default_factory=dict)
    vars: dict[str, dict[int, int]] = field(default_factory=dict)
    window: tuple[int, int] | None = None

    def __post_init__(self):
        k, loop = self.k, self.loop
        if k < 1:
            raise TraceError(f"bound must be >= 1, got {k}")
        if not 0 <= loop <= k:
            raise TraceError(f"loop {loop} outside [0, {k}]")
        if self.window is None:
            self.window = (0, k)
        lo, hi = self.window
        for p, vals in self.props.items():
            if len(vals) != k + 2:
                raise TraceError(f"proposition {p!r} needs {k + 2} values, got {len(vals)}")
            if loop and vals[loop - 1] != vals[k]:
                raise TraceError(f"proposition {p!r} differs at instants {loop - 1} and {k}")
            if vals[k + 1] != (vals[loop] if loop else False):
                raise TraceError(f"proposition {p!r} at instant {k + 1} inconsistent with loop")
        for x, vals in self.vars.items():
            missing = [t for t in range(lo, hi + 1) if t not in vals]
            if missing:
                raise TraceError(f"variable {x!r} has no value at instants {missing}")

    @classmethod
    def make(
        cls,
        k: int,
        loop: int = 0,
        props: Mapping[str, Sequence[bool]] | None = None,
        vars: Mapping[str, Sequence[int]] | None = None,
        lo: int = 0,
    ) -> "Trace":
        """Build a trace from labels on ``0..k`` (instant ``k+1`` is derived)
        and integer sequences starting at instant ``lo``."""
        full_props = {}
        for p, vals in (props or {}).items():
            vals = [bool(v) for v in vals]
            if len(vals) == k + 1:
                vals.append(vals[loop] if loop else False)
            full_props[p] = vals
        full_vars = {x: {lo + j: int(v) for j, v in enumerate(vals)} for x, vals in (vars or {}).items()}
        if full_vars:
            hi = lo + max(len(v) for v in (vars or {}).values()) - 1
        else:
            hi = k
        return cls(k, loop, full_props, full_vars, (lo, hi))

    def prop(self, p: str, i: int) -> bool:
        return self.props[p][i]

    def value(self, x: str, i: int) -> int:
        try:
            return self.vars[x][i]
        except KeyError:
            raise TraceError(f"variable {x!r} has no value at instant {i}") from None

    def to_dict(self) -> dict:
        lo, hi = self.window
        return {
            "k": self.k,
            "loop": self.loop,
            "window": [lo, hi],
            "props": {p: list(v) for p, v in sorted(self.props.items())},
            "vars": {x: [v[t] for t in range(lo, hi + 1)] for x, v in sorted(self.vars.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Trace":
        lo, _ = d.get("window", [0, d["k"]])
        return cls.make(d["k"], d.get("loop", 0), d.get("props"), d.get("vars"), lo)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Trace":
        return cls.from_dict(json.loads(text))

    def pretty(self) -> str:
        k = self.k
        lo, hi = self.window
        cols = list(range(min(lo, 0), max(hi, k + 1) + 1))
        width = max(3, *(len(str(c)) for c in cols))
        names = [*sorted(self.props), *sorted(self.vars)]
        pad = max([4, *map(len, names)])
        head = "t".ljust(pad) + " " + " ".join(str(c).rjust(width) for c in cols)
        lines = [f"loop = {self.loop}" + ("  (no loop)" if not self.loop else ""), head]
        for p in sorted(self.props):
            cells = [("T" if self.props[p][c] else ".") if 0 <= c <= k + 1 else "" for c in cols]
            lines.append(p.ljust(pad) + " " + " ".join(s.rjust(width) for s in cells))
        for x in sorted(self.vars):
            cells = [str(self.vars[x][c]) if c in self.vars[x] else "" for c in cols]
            lines.append(x.ljust(pad) + " " + " ".join(s.rjust(width) for s in cells))
        return "\n".join(lines)
