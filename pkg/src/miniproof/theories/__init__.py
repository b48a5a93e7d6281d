"""Background theory management.

A theory unit is a named blob of SMT-LIB2 text with a dependency header:

    ;; theory <name> requires <dep> <dep> ...

Builtin theories ship as package data (ints, heap, seq, set, bag, map).
A class can pull in a custom theory file via `note theory: "file.thy"`;
custom files use the same header format and may depend on builtin or
other custom theories. `theories_for` computes a deterministic,
dependency-closed emission order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from miniproof.diagnostics import InputError, Position, error

BUILTIN_ORDER = ("ints", "heap", "seq", "set", "bag", "map")

_HEADER_RE = re.compile(r"^;;\s*theory\s+(\S+)\s+requires\s*(.*)$")


@dataclass(frozen=True)
class TheoryUnit:
    """One theory: a name, its dependencies, and raw SMT-LIB2 text."""

    name: str
    requires: tuple[str, ...]
    text: str
    builtin: bool = False


def parse_theory(text: str, origin: str = "<theory>") -> TheoryUnit:
    """Parse a .thy blob; the first line must be the dependency header."""
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    m = _HEADER_RE.match(first.strip())
    if not m:
        raise InputError(
            error(
                "theory file must start with ';; theory <name> requires <deps>'",
                Position(1, 0, origin),
            )
        )
    name = m.group(1)
    deps = tuple(d for d in m.group(2).split() if d)
    return TheoryUnit(name=name, requires=deps, text=text)


def builtin_theory(name: str) -> TheoryUnit:
    """Load one of the packaged theories by name."""
    if name not in BUILTIN_ORDER:
        raise InputError(
            error(f"unknown builtin theory '{name}'", Position(0, 0, "<theories>"))
        )
    data = resources.files("miniproof.theories").joinpath(f"data/{name}.thy")
    unit = parse_theory(data.read_text(encoding="utf-8"), origin=f"{name}.thy")
    return TheoryUnit(unit.name, unit.requires, unit.text, builtin=True)


def resolve_custom_theory(file_name: str, search_path: list[str]) -> TheoryUnit:
    """Locate `file_name` in the given directories and parse it."""
    for d in search_path:
        candidate = Path(d) / file_name
        if candidate.is_file():
            return parse_theory(candidate.read_text(encoding="utf-8"),
                                origin=str(candidate))
    raise InputError(
        error(
            f"theory file '{file_name}' not found on the theory path "
            f"{search_path or ['<empty>']}",
            Position(0, 0, file_name),
        )
    )


def theories_for(required: list[str],
                 customs: list[TheoryUnit] | None = None) -> list[TheoryUnit]:
    """Close `required` theory names over dependencies and order them.

    The order is deterministic: a dependency always precedes its
    dependents; ties break by builtin order, then custom-unit name.
    """
    customs = customs or []
    by_name: dict[str, TheoryUnit] = {}
    for name in BUILTIN_ORDER:
        by_name[name] = builtin_theory(name)
    for unit in customs:
        if unit.name in by_name and by_name[unit.name].builtin:
            raise InputError(
                error(f"custom theory '{unit.name}' shadows a builtin theory",
                      Position(0, 0, unit.name))
            )
        by_name[unit.name] = unit

    needed: set[str] = set()

    def visit(name: str, trail: tuple[str, ...]) -> None:
        if name in trail:
            raise InputError(
                error(f"theory dependency cycle: {' -> '.join(trail + (name,))}",
                      Position(0, 0, name))
            )
        if name in needed:
            return
        if name not in by_name:
            raise InputError(
                error(f"unknown theory '{name}'", Position(0, 0, name))
            )
        for dep in by_name[name].requires:
            visit(dep, trail + (name,))
        needed.add(name)

    for name in required:
        visit(name, ())

    def sort_key(name: str) -> tuple[int, str]:
        if name in BUILTIN_ORDER:
            return (BUILTIN_ORDER.index(name), "")
        return (len(BUILTIN_ORDER), name)

    ordered: list[str] = []
    remaining = sorted(needed, key=sort_key)
    placed: set[str] = set()
    while remaining:
        progressed = False
        for name in list(remaining):
            if all(dep in placed for dep in by_name[name].requires):
                ordered.append(name)
                placed.add(name)
                remaining.remove(name)
                progressed = True
        if not progressed:
            raise InputError(
                error(f"theory dependency cycle among {sorted(remaining)}",
                      Position(0, 0, remaining[0]))
            )
    return [by_name[n] for n in ordered]
