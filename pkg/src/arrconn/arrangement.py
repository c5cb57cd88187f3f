"""Central hyperplane arrangements over Q(i).

Intersection lattice, localization and restriction, irreducibility via
linear-matroid connectivity, deletion-restriction triples, and the JSON
file format (including the built-in braid arrangement generator).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import InputError, LatticeCapError, PreconditionError
from .numkernel import (
    ExactVector,
    GaussianRational,
    GR_ONE,
    GR_ZERO,
    coordinates_in_basis,
    rank_kernel,
    span_rank,
    vec,
    vec_dot,
    vec_is_zero,
)

DEFAULT_LATTICE_CAP = 20


@dataclass(frozen=True)
class Hyperplane:
    id: str
    form: ExactVector

    def __post_init__(self):
        if vec_is_zero(self.form):
            raise InputError(f"hyperplane {self.id} has a zero form")


def _normalized_form(form: ExactVector) -> ExactVector:
    """Scale so the first nonzero coefficient is 1 (proportionality key)."""
    for c in form:
        if c:
            inv = GR_ONE / c
            return tuple(inv * e for e in form)
    raise InputError("zero form")


class Arrangement:
    """A finite list of linear hyperplanes through the origin of C^n."""

    def __init__(self, dimension: int, hyperplanes):
        if dimension < 1:
            raise InputError("dimension must be >= 1")
        self.dimension = dimension
        self.hyperplanes = tuple(hyperplanes)
        ids = [h.id for h in self.hyperplanes]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate hyperplane ids")
        seen = {}
        for h in self.hyperplanes:
            if len(h.form) != dimension:
                raise InputError(f"form of {h.id} has wrong length")
            key = _normalized_form(h.form)
            if key in seen:
                raise InputError(f"hyperplanes {seen[key]} and {h.id} are proportional")
            seen[key] = h.id
        self._index = {h.id: i for i, h in enumerate(self.hyperplanes)}
        self._lattice: Optional[Lattice] = None
        self._irreducible_keys = None

    def __len__(self):
        return len(self.hyperplanes)

    def index_of(self, hyperplane_id: str) -> int:
        try:
            return self._index[hyperplane_id]
        except KeyError:
            raise InputError(f"unknown hyperplane id {hyperplane_id!r}") from None

    def form(self, i: int) -> ExactVector:
        return self.hyperplanes[i].form

    def ids(self):
        return [h.id for h in self.hyperplanes]

    def lattice(self, cap: Optional[int] = None) -> "Lattice":
        if self._lattice is None:
            self._lattice = build_lattice(self, cap=cap)
        return self._lattice


@dataclass(frozen=True)
class Flat:
    """An intersection-lattice element.

    ``containing`` is the closed, sorted set of indices of hyperplanes that
    contain the subspace; it is the canonical key.  ``kernel_basis`` spans
    the subspace.
    """

    containing: tuple
    kernel_basis: tuple
    codim: int

    def __eq__(self, other):
        return isinstance(other, Flat) and self.containing == other.containing

    def __hash__(self):
        return hash(self.containing)

    @property
    def dim(self) -> int:
        return len(self.kernel_basis)


def ambient_flat(arr: Arrangement) -> Flat:
    basis = tuple(
        tuple(GR_ONE if i == j else GR_ZERO for j in range(arr.dimension))
        for i in range(arr.dimension)
    )
    return Flat(containing=(), kernel_basis=basis, codim=0)


def flat_from_basis(arr: Arrangement, basis) -> Flat:
    """Canonical flat with the given (possibly empty) kernel basis."""
    basis = tuple(tuple(b) for b in basis)
    containing = tuple(
        i
        for i, h in enumerate(arr.hyperplanes)
        if all(not vec_dot(h.form, b) for b in basis)
    )
    return Flat(containing=containing, kernel_basis=basis, codim=arr.dimension - len(basis))


def flat_from_indices(arr: Arrangement, indices) -> Flat:
    """Flat spanned by intersecting the given hyperplanes (closure taken)."""
    indices = sorted(set(indices))
    if not indices:
        return ambient_flat(arr)
    rows = [arr.form(i) for i in indices]
    _, basis = rank_kernel(rows)
    return flat_from_basis(arr, basis)


class Lattice:
    """All intersections of members of an arrangement, canonicalized."""

    def __init__(self, arr: Arrangement, flats):
        self.arrangement = arr
        self.flats = sorted(flats, key=lambda f: (f.codim, f.containing))
        self.by_key = {f.containing: f for f in self.flats}

    def __len__(self):
        return len(self.flats)

    def __contains__(self, flat: Flat) -> bool:
        return flat.containing in self.by_key

    def of_codim(self, c: int):
        return [f for f in self.flats if f.codim == c]

    def leq(self, l: Flat, m: Flat) -> bool:
        """Reverse-inclusion order: L <= M iff L contains M as a subspace."""
        return set(l.containing) <= set(m.containing)


def build_lattice(arr: Arrangement, cap: Optional[int] = None) -> Lattice:
    """BFS over intersections; every flat appears once, keyed by closure."""
    cap = DEFAULT_LATTICE_CAP if cap is None else cap
    if len(arr) > cap:
        raise LatticeCapError(len(arr), cap)
    flats = {}
    start = ambient_flat(arr)
    flats[start.containing] = start
    frontier = [start]
    while frontier:
        new = []
        for flat in frontier:
            if flat.dim == 0:
                continue
            for i, h in enumerate(arr.hyperplanes):
                if i in flat.containing:
                    continue
                row = tuple(vec_dot(h.form, b) for b in flat.kernel_basis)
                _, coeffs = rank_kernel([row])
                basis = tuple(
                    tuple(
                        sum(
                            (c * b[k] for c, b in zip(coeff, flat.kernel_basis)),
                            GR_ZERO,
                        )
                        for k in range(arr.dimension)
                    )
                    for coeff in coeffs
                )
                cand = flat_from_basis(arr, basis)
                if cand.containing not in flats:
                    flats[cand.containing] = cand
                    new.append(cand)
        frontier = new
    return Lattice(arr, flats.values())


def localization(arr: Arrangement, flat: Flat) -> Arrangement:
    """Sub-arrangement of the hyperplanes containing the flat (same ambient)."""
    _require_flat(arr, flat)
    return Arrangement(arr.dimension, [arr.hyperplanes[i] for i in flat.containing])


@dataclass(frozen=True)
class Trace:
    """A hyperplane of a restricted arrangement with its source fibre."""

    id: str
    form: ExactVector
    sources: tuple


def _traces_on(arr: Arrangement, flat: Flat, members=None):
    """Distinct traces of the given hyperplanes on the flat, merged when
    proportional; coordinates are taken in the flat's kernel_basis frame."""
    members = range(len(arr)) if members is None else members
    merged = {}
    order = []
    for i in members:
        if i in flat.containing:
            continue
        h = arr.hyperplanes[i]
        trace_form = tuple(vec_dot(h.form, b) for b in flat.kernel_basis)
        key = _normalized_form(trace_form)
        if key not in merged:
            merged[key] = Trace(id=h.id, form=trace_form, sources=(h.id,))
            order.append(key)
        else:
            old = merged[key]
            merged[key] = Trace(id=old.id, form=old.form, sources=old.sources + (h.id,))
    return [merged[k] for k in order]


def restriction(arr: Arrangement, flat: Flat) -> Arrangement:
    """Induced arrangement on a flat, in its kernel_basis coordinates."""
    _require_flat(arr, flat)
    if flat.dim == 0:
        raise PreconditionError("restriction to a point undefined")
    traces = _traces_on(arr, flat)
    return Arrangement(flat.dim, [Hyperplane(t.id, t.form) for t in traces])


def center_rank_essential(arr: Arrangement):
    """Center flat, rank (codim of the center) and essentiality."""
    if not len(arr):
        center = ambient_flat(arr)
        return center, 0, arr.dimension == 0
    _, basis = rank_kernel([h.form for h in arr.hyperplanes])
    center = flat_from_basis(arr, basis)
    rank = center.codim
    return center, rank, rank == arr.dimension


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _matroid_components(forms):
    """Connected components of the linear matroid of the given forms.

    Greedy basis plus fundamental circuits: every non-basis form is written
    in the basis; its circuit joins one connectivity class.
    """
    m = len(forms)
    uf = _UnionFind(m)
    basis_idx = []
    for i, f in enumerate(forms):
        if not basis_idx:
            basis_idx.append(i)
            continue
        coords = coordinates_in_basis([forms[j] for j in basis_idx], f)
        if coords is None:
            basis_idx.append(i)
        else:
            for j, c in zip(basis_idx, coords):
                if c:
                    uf.union(i, j)
    groups = {}
    for i in range(m):
        groups.setdefault(uf.find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def irreducible_decomposition(arr: Arrangement):
    """The unique finest u-plus decomposition, as hyperplane-index blocks.

    The output is certified: rank additivity across the blocks is checked
    exactly and every block is re-tested for connectivity; a failed check
    is an internal error, not a report.
    """
    if not len(arr):
        raise PreconditionError("irreducible decomposition of an empty arrangement")
    forms = [h.form for h in arr.hyperplanes]
    blocks = _matroid_components(forms)
    total = span_rank(forms)
    block_ranks = sum(span_rank([forms[i] for i in block]) for block in blocks)
    if block_ranks != total:
        raise AssertionError("matroid decomposition failed rank additivity")
    for block in blocks:
        if len(_matroid_components([forms[i] for i in block])) != 1:
            raise AssertionError("matroid decomposition produced a reducible block")
    return blocks


def irreducible_components(arr: Arrangement, flat: Flat):
    """Centers of the irreducible blocks of the localization at the flat.

    Components are ordered by their smallest hyperplane index.
    """
    _require_flat(arr, flat)
    if not flat.containing:
        return []
    forms = [arr.form(i) for i in flat.containing]
    blocks = _matroid_components(forms)
    components = []
    for block in blocks:
        components.append(flat_from_indices(arr, [flat.containing[i] for i in block]))
    return components


def is_irreducible_flat(arr: Arrangement, flat: Flat) -> bool:
    """A flat is irreducible when its localization is; the ambient flat
    (empty localization) is excluded by convention."""
    if not flat.containing:
        return False
    forms = [arr.form(i) for i in flat.containing]
    return len(_matroid_components(forms)) == 1


def irreducible_flats(arr: Arrangement, cap: Optional[int] = None):
    if arr._irreducible_keys is None:
        lattice = arr.lattice(cap=cap)
        arr._irreducible_keys = {
            f.containing for f in lattice.flats if is_irreducible_flat(arr, f)
        }
    lattice = arr.lattice(cap=cap)
    return [f for f in lattice.flats if f.containing in arr._irreducible_keys]


@dataclass(frozen=True)
class DeletionRestriction:
    deleted: Arrangement
    restricted: Arrangement
    projection: dict
    separator: bool


def deletion_restriction(arr: Arrangement, h0: str) -> DeletionRestriction:
    """Deletion-restriction triple at the hyperplane with id h0.

    ``projection`` maps each surviving hyperplane id to the id of its trace
    on h0 (merged traces share one id).  h0 is a separator when the center
    of the deleted arrangement is not inside h0.
    """
    i0 = arr.index_of(h0)
    h0_plane = arr.hyperplanes[i0]
    keep = [h for i, h in enumerate(arr.hyperplanes) if i != i0]
    deleted = Arrangement(arr.dimension, keep)
    h0_flat = flat_from_indices(arr, [i0])
    traces = _traces_on(arr, h0_flat, members=[i for i in range(len(arr)) if i != i0])
    restricted = Arrangement(h0_flat.dim, [Hyperplane(t.id, t.form) for t in traces]) \
        if traces else Arrangement(h0_flat.dim, [])
    projection = {}
    for t in traces:
        for src in t.sources:
            projection[src] = t.id
    if keep:
        _, basis = rank_kernel([h.form for h in keep])
        separator = any(vec_dot(h0_plane.form, b) for b in basis)
    else:
        separator = True
    return DeletionRestriction(deleted, restricted, projection, separator)


def _require_flat(arr: Arrangement, flat: Flat):
    for i in flat.containing:
        for b in flat.kernel_basis:
            if vec_dot(arr.form(i), b):
                raise PreconditionError("flat does not belong to this arrangement")
    check = flat_from_basis(arr, flat.kernel_basis)
    if check.containing != flat.containing:
        raise PreconditionError("flat containing set is not closed for this arrangement")


# -- braid arrangement forms (used by the file format and by lauricella) ------

def braid_hyperplanes(n: int):
    """Hyperplanes of the essential braid arrangement in C^n.

    Pairs (i, j) with 1 <= i < j <= n+1 in lexicographic order; the form is
    z_i - z_j for j <= n and z_i for j = n+1.  Ids are "H_i_j".
    """
    if n < 1:
        raise InputError("braid arrangement needs n >= 1")
    planes = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 2):
            form = [GR_ZERO] * n
            form[i - 1] = GR_ONE
            if j <= n:
                form[j - 1] = -GR_ONE
            planes.append(Hyperplane(f"H_{i}_{j}", tuple(form)))
    return planes


def pair_of_id(hyperplane_id: str):
    """Inverse of the "H_i_j" naming used by the braid builder."""
    parts = hyperplane_id.split("_")
    if len(parts) != 3 or parts[0] != "H":
        raise InputError(f"not a braid hyperplane id: {hyperplane_id!r}")
    return int(parts[1]), int(parts[2])


# -- JSON file format ---------------------------------------------------------

def _parse_entry(entry) -> GaussianRational:
    if isinstance(entry, str):
        return GaussianRational.parse(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        re = GaussianRational.parse(str(entry[0]))
        im = GaussianRational.parse(str(entry[1]))
        return GaussianRational(re.re, im.re)
    if isinstance(entry, int):
        return GaussianRational(entry)
    raise InputError(f"cannot parse coefficient {entry!r}")


def _entry_to_json(value: GaussianRational):
    return [str(value.re), str(value.im)]


def arrangement_from_json(obj) -> Arrangement:
    if not isinstance(obj, dict):
        raise InputError("arrangement JSON must be an object")
    if "builtin" in obj:
        if obj["builtin"] != "A_n":
            raise InputError(f"unknown builtin {obj['builtin']!r}")
        try:
            n = int(obj["n"])
        except (KeyError, TypeError, ValueError):
            raise InputError("builtin A_n needs an integer field 'n'") from None
        return Arrangement(n, braid_hyperplanes(n))
    try:
        dimension = int(obj["dimension"])
        raw = obj["hyperplanes"]
    except KeyError as exc:
        raise InputError(f"missing field {exc}") from None
    planes = []
    for item in raw:
        try:
            form = vec(_parse_entry(e) for e in item["form"])
            planes.append(Hyperplane(str(item["id"]), form))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad hyperplane entry: {exc}") from None
    return Arrangement(dimension, planes)


def arrangement_to_json(arr: Arrangement) -> dict:
    return {
        "dimension": arr.dimension,
        "hyperplanes": [
            {"id": h.id, "form": [_entry_to_json(c) for c in h.form]}
            for h in arr.hyperplanes
        ],
    }


def load_arrangement(path) -> Arrangement:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(str(exc)) from None
    return arrangement_from_json(obj)
