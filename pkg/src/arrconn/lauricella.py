"""The braid arrangement and its distinguished connection family.

Builders for the essential braid arrangement and the (reduced)
Jordan-Pochhammer residue matrices, the flat/partition correspondence,
and recovery of the defining parameters from an arbitrary flat
torsion-free connection on the arrangement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .arrangement import (
    Arrangement,
    Flat,
    braid_hyperplanes,
    flat_from_indices,
    pair_of_id,
)
from .connection import (
    StandardConnection,
    check_flat,
    check_torsion_free,
    weights,
)
from .errors import InputError, PreconditionError
from .numkernel import ExactMatrix, GaussianRational, GR_ZERO


@dataclass(frozen=True)
class ParameterVector:
    """Exact parameters a_1..a_{n+1}; the weight at infinity is derived."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple(GaussianRational.coerce(e) for e in self.entries)
        )
        if len(self.entries) < 2:
            raise InputError("parameter vector needs length n+1 >= 2")

    @property
    def n(self) -> int:
        return len(self.entries) - 1

    @property
    def a_infinity(self) -> GaussianRational:
        total = GR_ZERO
        for e in self.entries:
            total = total + e
        return GaussianRational(2) - total

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def build_An(n: int) -> Arrangement:
    """Essential braid arrangement in C^n: z_i = z_j and z_i = 0."""
    return Arrangement(n, braid_hyperplanes(n))


def _coerce_params(a) -> ParameterVector:
    if isinstance(a, ParameterVector):
        return a
    return ParameterVector(tuple(a))


def reduced_residues(a, arrangement: Optional[Arrangement] = None) -> StandardConnection:
    """The reduced Jordan-Pochhammer connection on the braid arrangement.

    Residue at H_{i,j} with j <= n: a_j and a_i on the diagonal at (i,i)
    and (j,j), -a_j and -a_i off it.  Residue at H_{i,n+1}: column i filled
    with a_i except the diagonal entry a_i + a_{n+1}.
    """
    params = _coerce_params(a)
    n = params.n
    arr = arrangement if arrangement is not None else build_An(n)
    residues = {}
    for h in arr.hyperplanes:
        i, j = pair_of_id(h.id)
        grid = [[GR_ZERO] * n for _ in range(n)]
        if j <= n:
            grid[i - 1][i - 1] = params[j - 1]
            grid[i - 1][j - 1] = -params[j - 1]
            grid[j - 1][i - 1] = -params[i - 1]
            grid[j - 1][j - 1] = params[i - 1]
        else:
            for k in range(n):
                grid[k][i - 1] = params[i - 1]
            grid[i - 1][i - 1] = params[i - 1] + params[n]
        residues[h.id] = ExactMatrix(grid)
    return StandardConnection(arr, residues)


def full_residues(a) -> dict:
    """Unreduced (n+1)x(n+1) Jordan-Pochhammer matrices, keyed by (i, j)."""
    params = _coerce_params(a)
    m = params.n + 1
    out = {}
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            grid = [[GR_ZERO] * m for _ in range(m)]
            grid[i - 1][i - 1] = params[j - 1]
            grid[i - 1][j - 1] = -params[j - 1]
            grid[j - 1][i - 1] = -params[i - 1]
            grid[j - 1][j - 1] = params[i - 1]
            out[(i, j)] = ExactMatrix(grid)
    return out


# -- flats <-> partitions -------------------------------------------------------

Partition = tuple  # tuple of tuples, blocks sorted by least element


def _canonical_partition(blocks) -> Partition:
    blocks = [tuple(sorted(b)) for b in blocks]
    blocks.sort(key=lambda b: b[0])
    return tuple(blocks)


def _check_braid(arr: Arrangement) -> int:
    expected = build_An(arr.dimension)
    if [h.id for h in arr.hyperplanes] != [h.id for h in expected.hyperplanes] or [
        h.form for h in arr.hyperplanes
    ] != [h.form for h in expected.hyperplanes]:
        raise PreconditionError("arrangement is not the braid arrangement builder output")
    return arr.dimension


def flat_to_partition(arr: Arrangement, flat: Flat) -> Partition:
    """Partition of {1..n+1} generated by i ~ j when the flat lies in H_{i,j}."""
    n = _check_braid(arr)
    parent = list(range(n + 2))  # 1-based union-find

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for idx in flat.containing:
        i, j = pair_of_id(arr.hyperplanes[idx].id)
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups = {}
    for x in range(1, n + 2):
        groups.setdefault(find(x), []).append(x)
    return _canonical_partition(groups.values())


def partition_to_flat(arr: Arrangement, partition) -> Flat:
    """Inverse correspondence: intersect all H_{i,j} with i, j in one block."""
    n = _check_braid(arr)
    blocks = _canonical_partition(partition)
    seen = sorted(x for b in blocks for x in b)
    if seen != list(range(1, n + 2)):
        raise InputError("blocks must partition {1..n+1}")
    wanted = set()
    for block in blocks:
        for i in block:
            for j in block:
                if i < j:
                    wanted.add(f"H_{i}_{j}")
    indices = [k for k, h in enumerate(arr.hyperplanes) if h.id in wanted]
    return flat_from_indices(arr, indices)


def partition_is_irreducible(partition) -> bool:
    """At most one block of size two or more."""
    return sum(1 for b in partition if len(b) >= 2) <= 1


# -- parameter recovery ----------------------------------------------------------

@dataclass(frozen=True)
class RecoveryResult:
    ok: bool
    parameters: Optional[ParameterVector]
    failure: Optional[str]
    ambiguous: bool
    traces: dict  # (i, j) -> GaussianRational


def recover_parameters(conn: StandardConnection, verify_input: bool = True) -> RecoveryResult:
    """Recover the unique parameter vector from a flat torsion-free
    connection with nonzero weights on the braid arrangement.

    Traces b_{i,j} determine candidate parameters via
    a_i = (b_{i,j} + b_{i,k} - b_{j,k}) / 2 with j, k the two smallest other
    indices; the remaining trace equations and then full matrix equality
    are verified exactly.  For n = 1 the split of the single trace is not
    determined and the result is flagged ambiguous.
    """
    arr = conn.arrangement
    n = _check_braid(arr)
    traces = {}
    for h in arr.hyperplanes:
        traces[pair_of_id(h.id)] = conn.residue(h.id).trace()

    if n == 1:
        return RecoveryResult(False, None, "n = 1: only a_1 + a_2 is determined", True, traces)

    if verify_input:
        if not check_torsion_free(conn).ok:
            return RecoveryResult(False, None, "input is not torsion free", False, traces)
        if not check_flat(conn).ok:
            return RecoveryResult(False, None, "input is not flat", False, traces)
        if not weights(conn).ok:
            return RecoveryResult(False, None, "input has zero weights", False, traces)

    def b(i, j):
        return traces[(i, j)] if i < j else traces[(j, i)]

    if n >= 3:
        from itertools import combinations

        for i, j, k, l in combinations(range(1, n + 2), 4):
            first = b(i, j) + b(k, l)
            if first != b(i, k) + b(j, l) or first != b(i, l) + b(j, k):
                return RecoveryResult(
                    False,
                    None,
                    "traces not of Lauricella form "
                    f"(compatibility fails on {{{i},{j},{k},{l}}})",
                    False,
                    traces,
                )
    half = GaussianRational(Fraction(1, 2))
    params = []
    for i in range(1, n + 2):
        j, k = [x for x in range(1, n + 2) if x != i][:2]
        params.append(half * (b(i, j) + b(i, k) - b(j, k)))
    vector = ParameterVector(tuple(params))
    for (i, j), t in traces.items():
        if vector[i - 1] + vector[j - 1] != t:
            return RecoveryResult(
                False, None, f"traces not of Lauricella form (pair ({i},{j}))", False, traces
            )
    expected = reduced_residues(vector, arrangement=arr)
    for h in arr.hyperplanes:
        if conn.residue(h.id) != expected.residue(h.id):
            return RecoveryResult(
                False, None, f"non-Lauricella residues at {h.id}", False, traces
            )
    return RecoveryResult(True, vector, None, False, traces)
