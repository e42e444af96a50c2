"""Reference pattern sets of the Petersen fragment and its small sums.

Each list holds one representative per orbit under the spoke swaps a1/a2,
a4/a5 and label permutations; representatives are not necessarily canonical.
"""

from __future__ import annotations

from .constructions import bracket_str, parse_bracket
from .matchcover import PatternSet, parse_pattern

_LISTS = {
    "F": """
A A AB AC AD
A A AB C D
A AB A AC AD
A AB A BC BD
A AB AC A AD
A AB AC B BD
A AB AC C CD
A B AB AB CD
A B AB AC BD
A B AC A D
A B AC AB BD
A B C A AD
A B C C CD
A B CD A A
A B CD AB AB
A B CD AC AC
A B CD C C
A B CD CD CD
A BC A AB BD
A BC B AB AD
A BC B BC CD
A BC BD A AB
A BC BD BC C
A BC BD BD D
A BC D A A
A BC D AB AB
A BC D AD AD
A BC D B B
A BC D BC BC
A BC D BD BD
A BC D D D
AB AB AB AC AD
AB AC AB AB AD
AB AC AB BC CD
AB AC AD A A
AB AC AD AB AB
AB AC AD AD AD
AB AC AD B B
AB AC AD BC BC
AB AC AD BD BD
AB AC AD D D
AB CD AC AB BC
""",
    "F+F": """
A AB C AB BD
A AB C AC CD
A B AC AB BD
A B AC AC CD
A B C A AD
A B C C CD
A BC A A D
A BC A AB BD
A BC B AB AD
A BC B B D
A BC B BC CD
A BC D A A
A BC D AB AB
A BC D AD AD
A BC D B B
A BC D BC BC
A BC D BD BD
A BC D D D
""",
    "F+(F+F)": """
A AB C AB BD
A AB C AC CD
A B AC AB BD
A B AC AC CD
A B C A AD
A B C C CD
A BC A AB BD
A BC B AB AD
A BC B BC CD
""",
    "(F+F)+F": """
A AB A AC AD
A AB A BC BD
A AB C AB BD
A AB C AC CD
A B AC AB BD
A B AC AC CD
A B C A AD
A B C C CD
A BC A A D
A BC A AB BD
A BC AD AB B
A BC AD AD D
A BC B AB AD
A BC B B D
A BC B BC CD
A BC BD A AB
A BC BD BC C
A BC BD BD D
A BC D A A
A BC D AB AB
A BC D AD AD
A BC D B B
A BC D BC BC
A BC D BD BD
A BC D D D
""",
    "(F+F)+(F+F)": """
A B AC AB BD
A B AC AC CD
A BC A AB BD
A BC AD AB B
A BC AD AD D
A BC B AB AD
A BC B BC CD
A BC BD A AB
A BC BD BC C
A BC BD BD D
""",
}


# Orbit counts stated in the list headers.
EXPECTED_COUNTS = {"F": 42, "F+F": 18, "F+(F+F)": 9, "(F+F)+F": 25, "(F+F)+(F+F)": 10}


def fragment_names() -> list[str]:
    return list(_LISTS)


def reference_set(name: str) -> PatternSet:
    key = _key(name)
    for k, text in _LISTS.items():
        if _key(k) == key:
            pats = [parse_pattern(line) for line in text.splitlines() if line.strip()]
            return PatternSet(k, tuple(pats))
    raise KeyError(f"no reference pattern set for {name!r}")


def _key(name: str) -> str:
    return bracket_str(parse_bracket(name))

