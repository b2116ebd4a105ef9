"""Pure-Python lattice construction core.

Incremental enumeration of all closed (extent, intent) pairs of a fuzzy
membership table: objects are table rows, intents are componentwise-minimum
meets of rows, and an extent is the set of all rows that dominate its intent
componentwise.  Rows are inserted one at a time; each insertion descends the
current lattice, creating the meets the new row induces (the addIntent
construction scheme).

This module is the import-time fallback for the compiled twin
``aliasmine._lattice_cy`` and implements the identical algorithm on identical
IEEE doubles, so both backends produce bit-equal results.
"""

from __future__ import annotations


def _leq(a: tuple, b: tuple) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _meet(a: tuple, b: tuple) -> tuple:
    return tuple(x if x <= y else y for x, y in zip(a, b))


def enumerate_closed(rows) -> list[tuple[frozenset, tuple]]:
    """All closed pairs of the row table.

    ``rows`` is a sequence of equal-length sequences of floats in [0, 1].
    Returns ``[(extent, intent), ...]`` with extents as frozensets of row
    indices and intents as float tuples, in creation order.  The pair with
    the all-ones intent is always present; its extent collects exactly the
    all-ones rows (usually none, leaving the empty extent).
    """
    table = [tuple(float(v) for v in row) for row in rows]
    if not table:
        return []
    width = len(table[0])
    if any(len(r) != width for r in table):
        raise ValueError("rows must share one length")

    intents: list[tuple] = [tuple([1.0] * width)]  # index 0: minimum concept
    extents: list[set] = [set()]
    parents: list[set] = [set()]  # upper covers (larger extent)

    def maximal_concept(intent: tuple, c: int) -> int:
        # climb while some upper cover still dominates the target intent
        climbing = True
        while climbing:
            climbing = False
            for p in sorted(parents[c]):
                if _leq(intent, intents[p]):
                    c = p
                    climbing = True
                    break
        return c

    def add_intent(intent: tuple, generator: int) -> int:
        generator = maximal_concept(intent, generator)
        if intents[generator] == intent:
            return generator
        new_parents: list[int] = []
        for cand in sorted(parents[generator]):  # snapshot: recursion relinks
            if not _leq(intents[cand], intent):
                cand = add_intent(_meet(intents[cand], intent), cand)
            keep = True
            for p in list(new_parents):
                if _leq(intents[cand], intents[p]):
                    keep = False  # an existing parent is at least as close
                    break
                if _leq(intents[p], intents[cand]):
                    new_parents.remove(p)
            if keep:
                new_parents.append(cand)
        new = len(intents)
        intents.append(intent)
        extents.append(set(extents[generator]))
        parents.append(set())
        for p in new_parents:
            parents[generator].discard(p)
            parents[new].add(p)
        parents[generator].add(new)
        return new

    for g, row in enumerate(table):
        c = add_intent(row, 0)
        # the new object belongs to this concept and everything above it
        stack, seen = [c], {c}
        while stack:
            v = stack.pop()
            extents[v].add(g)
            for p in parents[v]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)

    return [(frozenset(e), d) for e, d in zip(extents, intents)]
