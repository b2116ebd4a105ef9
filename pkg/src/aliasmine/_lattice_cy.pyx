# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled lattice construction core.

Same incremental closed-pair enumeration as ``aliasmine._lattice_py`` (see
there for the algorithm notes), with all intent vectors kept in one
contiguous C double arena so the meet / dominance comparisons that dominate
the runtime are plain C loops.  Arena slots are append-only and addressed by
index; pointers are re-derived after any append because the arena may
relocate when it grows.

Both backends operate on IEEE doubles and must return bit-equal results; the
pure-Python twin is the reference in the test suite.
"""

from libc.stdlib cimport free, malloc, realloc


cdef inline bint _leq(const double* a, const double* b, Py_ssize_t n) noexcept:
    cdef Py_ssize_t k
    for k in range(n):
        if a[k] > b[k]:
            return False
    return True


cdef inline bint _eq(const double* a, const double* b, Py_ssize_t n) noexcept:
    cdef Py_ssize_t k
    for k in range(n):
        if a[k] != b[k]:
            return False
    return True


cdef class _Arena:
    """Append-only store of fixed-width double vectors addressed by index."""

    cdef double* data
    cdef Py_ssize_t width
    cdef Py_ssize_t count
    cdef Py_ssize_t cap

    def __cinit__(self, Py_ssize_t width):
        self.width = width
        self.count = 0
        self.cap = 64
        self.data = <double*> malloc(self.cap * width * sizeof(double))
        if self.data == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self.data != NULL:
            free(self.data)

    cdef inline double* at(self, Py_ssize_t i) noexcept:
        return self.data + i * self.width

    cdef Py_ssize_t _reserve(self) except -1:
        # grow first so source pointers derived afterwards stay valid
        cdef double* grown
        if self.count == self.cap:
            self.cap *= 2
            grown = <double*> realloc(
                self.data, self.cap * self.width * sizeof(double)
            )
            if grown == NULL:
                raise MemoryError()
            self.data = grown
        self.count += 1
        return self.count - 1

    cdef Py_ssize_t push_row(self, row) except -1:
        cdef Py_ssize_t idx = self._reserve()
        cdef double* dst = self.at(idx)
        cdef Py_ssize_t k
        for k in range(self.width):
            dst[k] = row[k]
        return idx

    cdef Py_ssize_t push_ones(self) except -1:
        cdef Py_ssize_t idx = self._reserve()
        cdef double* dst = self.at(idx)
        cdef Py_ssize_t k
        for k in range(self.width):
            dst[k] = 1.0
        return idx

    cdef Py_ssize_t push_meet(self, Py_ssize_t i, Py_ssize_t j) except -1:
        cdef Py_ssize_t idx = self._reserve()
        cdef double* dst = self.at(idx)
        cdef double* a = self.at(i)
        cdef double* b = self.at(j)
        cdef Py_ssize_t k
        for k in range(self.width):
            dst[k] = a[k] if a[k] <= b[k] else b[k]
        return idx


cdef class _Lattice:
    cdef _Arena arena
    cdef list slot         # concept id -> arena index of its intent
    cdef list extents      # concept id -> set of object indices
    cdef list parents      # concept id -> set of upper-cover concept ids
    cdef Py_ssize_t width

    def __init__(self, Py_ssize_t width):
        self.width = width
        self.arena = _Arena(width)
        self.slot = [self.arena.push_ones()]  # concept 0: minimum
        self.extents = [set()]
        self.parents = [set()]

    cdef Py_ssize_t maximal_concept(self, Py_ssize_t intent_slot, Py_ssize_t c):
        # climb while some upper cover still dominates the target intent
        cdef bint climbing = True
        cdef Py_ssize_t p
        cdef double* intent = self.arena.at(intent_slot)
        while climbing:
            climbing = False
            for p in sorted(<set> self.parents[c]):
                if _leq(intent, self.arena.at(<Py_ssize_t> self.slot[p]), self.width):
                    c = p
                    climbing = True
                    break
        return c

    cdef Py_ssize_t add_intent(self, Py_ssize_t intent_slot, Py_ssize_t generator):
        cdef Py_ssize_t n = self.width
        cdef Py_ssize_t gen = self.maximal_concept(intent_slot, generator)
        if _eq(
            self.arena.at(<Py_ssize_t> self.slot[gen]),
            self.arena.at(intent_slot),
            n,
        ):
            return gen
        cdef list new_parents = []
        cdef Py_ssize_t cand, p
        cdef bint keep
        for cand in sorted(<set> self.parents[gen]):  # snapshot: recursion relinks
            if not _leq(
                self.arena.at(<Py_ssize_t> self.slot[cand]),
                self.arena.at(intent_slot),
                n,
            ):
                cand = self.add_intent(
                    self.arena.push_meet(<Py_ssize_t> self.slot[cand], intent_slot),
                    cand,
                )
            keep = True
            for p in list(new_parents):
                if _leq(
                    self.arena.at(<Py_ssize_t> self.slot[cand]),
                    self.arena.at(<Py_ssize_t> self.slot[p]),
                    n,
                ):
                    keep = False  # an existing parent is at least as close
                    break
                if _leq(
                    self.arena.at(<Py_ssize_t> self.slot[p]),
                    self.arena.at(<Py_ssize_t> self.slot[cand]),
                    n,
                ):
                    new_parents.remove(p)
            if keep:
                new_parents.append(cand)
        cdef Py_ssize_t new = len(self.slot)
        self.slot.append(intent_slot)  # adopt the slot; slots are never reused
        self.extents.append(set(<set> self.extents[gen]))
        self.parents.append(set())
        for p in new_parents:
            (<set> self.parents[gen]).discard(p)
            (<set> self.parents[new]).add(p)
        (<set> self.parents[gen]).add(new)
        return new


def enumerate_closed(rows):
    """All closed (extent, intent) pairs of the row table.

    Mirrors ``aliasmine._lattice_py.enumerate_closed`` exactly; see there.
    """
    table = [tuple(float(v) for v in row) for row in rows]
    if not table:
        return []
    cdef Py_ssize_t width = len(table[0])
    for row in table:
        if len(row) != width:
            raise ValueError("rows must share one length")

    cdef _Lattice lat = _Lattice(width)
    cdef Py_ssize_t g, c, v, p
    cdef set seen
    cdef list stack
    for g in range(len(table)):
        c = lat.add_intent(lat.arena.push_row(table[g]), 0)
        # the new object belongs to this concept and everything above it
        stack = [c]
        seen = {c}
        while stack:
            v = stack.pop()
            (<set> lat.extents[v]).add(g)
            for p in <set> lat.parents[v]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)

    cdef list out = []
    cdef Py_ssize_t i, k
    cdef double* d
    for i in range(len(lat.slot)):
        d = lat.arena.at(<Py_ssize_t> lat.slot[i])
        out.append(
            (frozenset(<set> lat.extents[i]), tuple(d[k] for k in range(width)))
        )
    return out
