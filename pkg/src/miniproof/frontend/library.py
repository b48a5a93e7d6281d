"""Builtin container classes, written in the source language itself.

ARRAY and LIST are reference classes specified against the mathematical
SEQ model: ARRAY exposes a concrete `count` attribute and contract-only
`item`/`put`/`swap`, LIST exposes `count` as a contract-only function and
grows via `extend`. Both carry a `sequence` ghost model field and a
capacity bound; the bound is what lets client-side index arithmetic stay
within machine-integer range.

These units are parsed like user code and participate in the class table
of every program; the driver never schedules them for verification.
"""

from __future__ import annotations

from miniproof.frontend import ast
from miniproof.frontend.parser import parse_unit

ARRAY_SOURCE = """
note
  model: sequence, count
class ARRAY feature
  sequence: SEQ [INTEGER] note status: ghost end
  count: INTEGER

  item (i: INTEGER): INTEGER
    require
      index_in_bounds: 1 <= i and i <= count
    ensure
      definition: Result = sequence [i]
    end

  put (i: INTEGER; v: INTEGER)
    require
      modify (Current)
      index_in_bounds: 1 <= i and i <= count
    ensure
      set: sequence = (old sequence).updated (i, v)
      same_count: count = old count
    end

  swap (i: INTEGER; j: INTEGER)
    require
      modify (Current)
      first_in_bounds: 1 <= i and i <= count
      second_in_bounds: 1 <= j and j <= count
    ensure
      first_set: sequence [i] = old sequence [j]
      second_set: sequence [j] = old sequence [i]
      elements: sequence = ((old sequence).updated (i, old sequence [j])).updated (j, old sequence [i])
      same_count: count = old count
    end
invariant
  count_is_length: count = sequence.count
  capacity: count <= 1000000000
end
"""

LIST_SOURCE = """
note
  model: sequence
class LIST feature
  sequence: SEQ [INTEGER] note status: ghost end

  count: INTEGER
    ensure
      definition: Result = sequence.count
    end

  item (i: INTEGER): INTEGER
    require
      index_in_bounds: 1 <= i and i <= count
    ensure
      definition: Result = sequence [i]
    end

  extend (v: INTEGER)
    require
      modify (Current)
      capacity_left: count < 1000000000
    ensure
      appended: sequence = (old sequence).extended (v)
    end

  make
    require
      modify (Current)
    ensure
      empty: sequence.count = 0
    end
invariant
  capacity: sequence.count <= 1000000000
end
"""


def builtin_units() -> list[ast.ClassDecl]:
    """Freshly parsed builtin class declarations (fresh because the
    typechecker annotates nodes in place)."""
    units: list[ast.ClassDecl] = []
    for name, source in (("ARRAY", ARRAY_SOURCE), ("LIST", LIST_SOURCE)):
        decls = parse_unit(source, path=f"<builtin {name}>")
        for d in decls:
            d.is_builtin = True
        units.extend(decls)
    return units
