"""Update families for two-dimensional monotone cellular automata.

A family is a finite collection of update rules; each rule is a finite set
of nonzero integer offsets. A site becomes infected once the translate of
some rule by that site is entirely infected.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

Site = tuple[int, int]


def _canon_rule(offsets) -> tuple[Site, ...]:
    out = sorted((int(x), int(y)) for x, y in offsets)
    if not out:
        raise ValueError("update rule must be nonempty")
    if (0, 0) in out:
        raise ValueError("update rule must not contain the origin")
    if len(set(out)) != len(out):
        raise ValueError("duplicate offsets in rule")
    return tuple(out)


@dataclass(frozen=True)
class UpdateRule:
    """A finite set of nonzero offsets; all of them infected => the site fires."""

    offsets: tuple[Site, ...]

    def __init__(self, offsets):
        object.__setattr__(self, "offsets", _canon_rule(offsets))

    def __iter__(self):
        return iter(self.offsets)

    def __len__(self):
        return len(self.offsets)


@dataclass(frozen=True)
class UpdateFamily:
    """A finite nonempty collection of update rules.

    Rules are kept in a canonical sorted order so that equal families hash
    and serialize identically.
    """

    rules: tuple[UpdateRule, ...]
    name: str | None = field(default=None, compare=False)

    def __init__(self, rules, name=None):
        canon = tuple(sorted((r if isinstance(r, UpdateRule) else UpdateRule(r) for r in rules),
                             key=lambda r: r.offsets))
        if not canon:
            raise ValueError("update family must contain at least one rule")
        object.__setattr__(self, "rules", canon)
        object.__setattr__(self, "name", name)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    @property
    def diameter(self) -> int:
        """Largest Chebyshev norm of any rule offset."""
        return max(max(abs(x), abs(y)) for r in self.rules for (x, y) in r)

    def all_offsets(self) -> tuple[Site, ...]:
        """Sorted union of the offsets of all rules."""
        return tuple(sorted({o for r in self.rules for o in r}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def to_dict(self) -> dict:
        return {"name": self.name, "rules": [[list(o) for o in r] for r in self.rules]}

    @staticmethod
    def from_dict(d: dict) -> "UpdateFamily":
        return UpdateFamily(d["rules"], name=d.get("name"))

    @staticmethod
    def from_json(s: str) -> "UpdateFamily":
        return UpdateFamily.from_dict(json.loads(s))


_NEIGHBOURHOOD = ((-1, 0), (1, 0), (0, -1), (0, 1))


def builtin_family(name: str, r: int | None = None) -> UpdateFamily:
    """Return one of the built-in families.

    ``duarte``            three rules: the 2-subsets of {(-1,0),(0,1),(0,-1)}
    ``modified_duarte``   two rules: {(-1,0),(0,-1)} and {(1,0),(0,-1)}
    ``r_neighbour``       the r-subsets of the four nearest neighbours, r in 1..4
                          (also accepted as names "1_neighbour" .. "4_neighbour")
    """
    if name == "duarte":
        base = ((-1, 0), (0, 1), (0, -1))
        return UpdateFamily(itertools.combinations(base, 2), name="duarte")
    if name == "modified_duarte":
        return UpdateFamily(((((-1, 0), (0, -1))), (((1, 0), (0, -1)))), name="modified_duarte")
    if name == "r_neighbour":
        if r not in (1, 2, 3, 4):
            raise ValueError("r_neighbour requires r in {1,2,3,4}")
        return UpdateFamily(itertools.combinations(_NEIGHBOURHOOD, r), name=f"{r}_neighbour")
    if name.endswith("_neighbour") and name[0].isdigit():
        return builtin_family("r_neighbour", r=int(name[0]))
    raise ValueError(f"unknown builtin family: {name!r}")


def parse_family(text: str) -> UpdateFamily:
    """Parse a builtin name, an ``r<k>`` shorthand, or inline JSON."""
    text = text.strip()
    if text.startswith("{"):
        return UpdateFamily.from_json(text)
    if len(text) == 2 and text[0] == "r" and text[1].isdigit():
        return builtin_family("r_neighbour", r=int(text[1]))
    if text in ("duarte", "modified_duarte") or text.endswith("_neighbour"):
        return builtin_family(text)
    raise ValueError(f"not a known family name or family JSON: {text!r}")
