"""Standard logarithmic connections given by one residue matrix per hyperplane.

Exact-mode criteria (torsion freeness, flatness, weights, normal frames,
direct-sum decompositions, Euler fields) and the derived constructions:
localization, quotient and induced connections, and the linear weight
constraints they impose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arrangement import (
    Arrangement,
    Flat,
    ambient_flat,
    arrangement_from_json,
    arrangement_to_json,
    _entry_to_json,
    _parse_entry,
    deletion_restriction,
    flat_from_indices,
    irreducible_decomposition,
    irreducible_flats,
    localization,
)
from .errors import (
    InputError,
    NormalDataError,
    PreconditionError,
    WeightZeroError,
)
from .numkernel import (
    ExactMatrix,
    ExactVector,
    GaussianRational,
    GR_ONE,
    GR_ZERO,
    commutator,
    coordinates_in_basis,
    independent_subset,
    kernel_of_form,
    rank_kernel,
    same_span,
    solve_exact,
    span_rank,
    vec_dot,
)

EXACT = "exact"
FLOAT = "float"


class StandardConnection:
    """Arrangement plus one square residue matrix per hyperplane."""

    def __init__(self, arrangement: Arrangement, residues: dict, mode: str = EXACT):
        self.arrangement = arrangement
        self.mode = mode
        n = arrangement.dimension
        missing = [h.id for h in arrangement.hyperplanes if h.id not in residues]
        if missing:
            raise InputError(f"missing residues for {missing}")
        extra = set(residues) - {h.id for h in arrangement.hyperplanes}
        if extra:
            raise InputError(f"residues for unknown hyperplanes {sorted(extra)}")
        if mode == EXACT:
            for hid, m in residues.items():
                if not isinstance(m, ExactMatrix) or m.rows != n or m.cols != n:
                    raise InputError(f"residue at {hid} must be an exact {n}x{n} matrix")
            self.residues = dict(residues)
        elif mode == FLOAT:
            coerced = {}
            for hid, m in residues.items():
                a = np.asarray(m, dtype=complex)
                if a.shape != (n, n) or not np.all(np.isfinite(a)):
                    raise InputError(f"residue at {hid} must be a finite {n}x{n} matrix")
                coerced[hid] = a
            self.residues = coerced
        else:
            raise InputError(f"unknown mode {mode!r}")

    @property
    def dimension(self) -> int:
        return self.arrangement.dimension

    def residue(self, hyperplane_id: str):
        return self.residues[hyperplane_id]

    def to_float(self) -> "StandardConnection":
        if self.mode == FLOAT:
            return self
        floats = {hid: m.to_complex() for hid, m in self.residues.items()}
        return StandardConnection(self.arrangement, floats, mode=FLOAT)

    def _require_exact(self, what: str):
        if self.mode != EXACT:
            raise PreconditionError(f"{what} is an exact criterion; convert the input, not the check")


# -- basic criteria -----------------------------------------------------------

@dataclass(frozen=True)
class TorsionFreeReport:
    ok: bool
    violators: tuple


def check_torsion_free(conn: StandardConnection) -> TorsionFreeReport:
    """H inside ker A_H for every hyperplane, decided exactly."""
    conn._require_exact("torsion freeness")
    violators = []
    for h in conn.arrangement.hyperplanes:
        a = conn.residue(h.id)
        for b in kernel_of_form(h.form):
            if any(a.apply(b)):
                violators.append(h.id)
                break
    return TorsionFreeReport(not violators, tuple(violators))


@dataclass(frozen=True)
class FlatnessReport:
    ok: bool
    violations: tuple  # pairs (Flat, hyperplane id)


def residue_at_flat(conn: StandardConnection, flat: Flat) -> ExactMatrix:
    """Sum of the residues over the hyperplanes containing the flat."""
    n = conn.dimension
    total = ExactMatrix.zeros(n, n)
    for i in flat.containing:
        total = total + conn.residue(conn.arrangement.hyperplanes[i].id)
    return total


def check_flat(conn: StandardConnection, cap: Optional[int] = None) -> FlatnessReport:
    """[A_L, A_H] = 0 for every codimension-two flat L and every H above it."""
    conn._require_exact("flatness")
    arr = conn.arrangement
    lattice = arr.lattice(cap=cap)
    violations = []
    for flat in lattice.of_codim(2):
        a_l = residue_at_flat(conn, flat)
        for i in flat.containing:
            hid = arr.hyperplanes[i].id
            if not commutator(a_l, conn.residue(hid)).is_zero():
                violations.append((flat, hid))
    return FlatnessReport(not violations, tuple(violations))


# -- weights ------------------------------------------------------------------

@dataclass(frozen=True)
class WeightReport:
    table: dict  # Flat -> GaussianRational
    ok: bool
    zero_flats: tuple


def weights(conn: StandardConnection, cap: Optional[int] = None) -> WeightReport:
    """Weight of every irreducible flat; the verdict lists zero weights."""
    conn._require_exact("weights")
    table = {}
    zero = []
    for flat in irreducible_flats(conn.arrangement, cap=cap):
        w = residue_at_flat(conn, flat).trace() / GaussianRational(flat.codim)
        table[flat] = w
        if not w:
            zero.append(flat)
    return WeightReport(table, not zero, tuple(zero))


def hyperplane_weights(conn: StandardConnection) -> dict:
    return {h.id: conn.residue(h.id).trace() for h in conn.arrangement.hyperplanes}


# -- normal frames ------------------------------------------------------------

@dataclass(frozen=True)
class NormalFrame:
    normals: dict  # hyperplane id -> ExactVector
    perp_basis: dict  # irreducible Flat -> tuple of ExactVector


def hyperplane_normal(conn: StandardConnection, hyperplane_id: str) -> ExactVector:
    """The vector n_H with A_H = (column n_H) x (row dh); errors if A_H is
    not a semi-simple rank-one matrix killing H."""
    conn._require_exact("normal data")
    i = conn.arrangement.index_of(hyperplane_id)
    h = conn.arrangement.hyperplanes[i]
    a = conn.residue(hyperplane_id)
    j0 = next((j for j, c in enumerate(h.form) if c), None)
    normal = tuple(e / h.form[j0] for e in a.column(j0))
    if not any(normal):
        raise NormalDataError(hyperplane_id, "residue is zero")
    for j, c in enumerate(h.form):
        if a.column(j) != tuple(c * x for x in normal):
            raise NormalDataError(hyperplane_id, "residue is not dh (x) n_H (rank != 1 or kernel != H)")
    if not vec_dot(h.form, normal):
        raise NormalDataError(hyperplane_id, "nilpotent residue: n_H lies inside H")
    return normal


def normal_data(conn: StandardConnection, cap: Optional[int] = None) -> NormalFrame:
    """Normal vectors of all hyperplanes and the spans L-perp of every
    irreducible flat (greedy independent normals, hyperplane order)."""
    normals = {h.id: hyperplane_normal(conn, h.id) for h in conn.arrangement.hyperplanes}
    perp = {}
    for flat in irreducible_flats(conn.arrangement, cap=cap):
        vectors = [normals[conn.arrangement.hyperplanes[i].id] for i in flat.containing]
        chosen = independent_subset(vectors)
        perp[flat] = tuple(vectors[k] for k in chosen)
    return NormalFrame(normals, perp)


def flat_perp_basis(conn: StandardConnection, flat: Flat) -> tuple:
    """Greedy basis of span{n_H : H contains the flat} (any flat, not only
    irreducible ones)."""
    arr = conn.arrangement
    vectors = [hyperplane_normal(conn, arr.hyperplanes[i].id) for i in flat.containing]
    chosen = independent_subset(vectors)
    return tuple(vectors[k] for k in chosen)


# -- direct sum decomposition at a flat ----------------------------------------

@dataclass(frozen=True)
class DecompositionReport:
    flat: Flat
    components: tuple
    items: dict  # check name -> bool
    ok: bool


def decomposition_at_flat(conn: StandardConnection, flat: Flat) -> DecompositionReport:
    """Exact verification of the direct-sum structure at a flat:
    V = L + L-perp, ker A_L = L, L-perp splits into component perps on which
    A_L acts by the component weights, and each component is L plus the
    other perps.
    """
    conn._require_exact("decomposition checks")
    arr = conn.arrangement
    n = arr.dimension
    from .arrangement import irreducible_components

    components = tuple(irreducible_components(arr, flat))
    perp_parts = [flat_perp_basis(conn, comp) for comp in components]
    perp_all = [v for part in perp_parts for v in part]
    a_l = residue_at_flat(conn, flat)

    items = {}
    stacked = list(flat.kernel_basis) + perp_all
    items["direct_sum"] = len(stacked) == n and span_rank(stacked) == n
    _, ker = rank_kernel(a_l) if flat.containing else (0, list(flat.kernel_basis))
    items["kernel"] = (
        same_span(ker, flat.kernel_basis) if (ker or flat.kernel_basis) else True
    )
    items["perp_splits"] = span_rank(perp_all) == len(perp_all) if perp_all else True
    scalar_ok = True
    for comp, part in zip(components, perp_parts):
        a_comp = residue_at_flat(conn, comp).trace() / GaussianRational(comp.codim)
        for v in part:
            if a_l.apply(v) != tuple(a_comp * x for x in v):
                scalar_ok = False
    items["scalar_action"] = scalar_ok
    comp_ok = True
    for i, comp in enumerate(components):
        others = [v for j, part in enumerate(perp_parts) if j != i for v in part]
        if not same_span(list(flat.kernel_basis) + others, comp.kernel_basis):
            comp_ok = False
    items["component_splits"] = comp_ok
    return DecompositionReport(flat, components, items, all(items.values()))


# -- Euler field ---------------------------------------------------------------

@dataclass(frozen=True)
class EulerFactor:
    flat: Flat  # center of an irreducible block
    hyperplane_ids: tuple
    weight: GaussianRational  # a_i
    angle: GaussianRational  # 1 - a_i
    perp_basis: tuple
    verified: bool  # sum of block residues acts as a_i on the perp


@dataclass(frozen=True)
class EulerField:
    matrix: ExactMatrix  # e(x) = matrix @ x
    factors: tuple
    center_basis: tuple
    verified: bool


def euler_field(conn: StandardConnection) -> EulerField:
    """The linear vector field with covariant derivative equal to the
    identity, in the basis adapted to the irreducible decomposition."""
    conn._require_exact("Euler field")
    arr = conn.arrangement
    n = arr.dimension
    if not len(arr):
        return EulerField(ExactMatrix.identity(n), (), ambient_flat(arr).kernel_basis, True)
    blocks = irreducible_decomposition(arr)
    center = flat_from_indices(arr, range(len(arr)))
    factors = []
    columns = list(center.kernel_basis)
    diag = [GR_ONE] * len(columns)
    for block in blocks:
        t_i = flat_from_indices(arr, block)
        a_i = residue_at_flat(conn, t_i).trace() / GaussianRational(t_i.codim)
        alpha_i = GR_ONE - a_i
        if not alpha_i:
            raise WeightZeroError(
                f"Euler field undefined: angle 1 - a = 0 at the component of "
                f"{[arr.hyperplanes[i].id for i in block]}"
            )
        perp = flat_perp_basis(conn, t_i)
        block_sum = residue_at_flat(conn, t_i)
        verified = all(
            block_sum.apply(v) == tuple(a_i * x for x in v) for v in perp
        )
        factors.append(
            EulerFactor(
                t_i,
                tuple(arr.hyperplanes[i].id for i in block),
                a_i,
                alpha_i,
                perp,
                verified,
            )
        )
        columns.extend(perp)
        diag.extend([GR_ONE / alpha_i] * len(perp))
    if len(columns) != n or span_rank(columns) != n:
        raise WeightZeroError("adapted basis is degenerate; nonzero weights fail")
    basis = ExactMatrix.from_columns(columns)
    inv_cols = []
    for j in range(n):
        e_j = tuple(GR_ONE if k == j else GR_ZERO for k in range(n))
        inv_cols.append(solve_exact(basis, e_j))
    inverse = ExactMatrix.from_columns(inv_cols)
    scaled = ExactMatrix.from_columns(
        [tuple(diag[j] * x for x in col) for j, col in enumerate(columns)]
    )
    matrix = scaled @ inverse
    return EulerField(matrix, tuple(factors), center.kernel_basis, all(f.verified for f in factors))


# -- localization / quotient / induced ----------------------------------------

def localization_connection(conn: StandardConnection, flat: Flat) -> StandardConnection:
    """Same residues, arrangement replaced by the hyperplanes containing
    the flat."""
    sub = localization(conn.arrangement, flat)
    residues = {h.id: conn.residue(h.id) for h in sub.hyperplanes}
    return StandardConnection(sub, residues, mode=conn.mode)


@dataclass(frozen=True)
class QuotientConnection:
    connection: StandardConnection
    flat: Flat
    basis: tuple  # basis of L-perp used, as ambient vectors


def quotient_connection(
    conn: StandardConnection, flat: Flat, basis=None
) -> QuotientConnection:
    """Connection induced on V/L, realized on L-perp in an explicit basis.

    The residues are the restrictions of the A_H (H containing L) to
    L-perp, written in the chosen basis; traces are preserved.
    """
    conn._require_exact("quotient connection")
    arr = conn.arrangement
    default = flat_perp_basis(conn, flat)
    if basis is None:
        basis = default
    else:
        basis = tuple(tuple(v) for v in basis)
        if len(basis) != len(default) or not same_span(basis, default):
            raise PreconditionError("supplied basis does not span L-perp")
    if len(basis) != flat.codim:
        raise WeightZeroError(
            "L-perp has wrong dimension; nonzero-weight assumptions fail at this flat"
        )
    stacked = list(flat.kernel_basis) + list(basis)
    if span_rank(stacked) != arr.dimension:
        raise WeightZeroError("V = L + L-perp fails; nonzero-weight assumptions are violated")
    planes = []
    residues = {}
    from .arrangement import Hyperplane

    for i in flat.containing:
        h = arr.hyperplanes[i]
        qform = tuple(vec_dot(h.form, b) for b in basis)
        planes.append(Hyperplane(h.id, qform))
        cols = []
        a = conn.residue(h.id)
        for b in basis:
            image = a.apply(b)
            coords = coordinates_in_basis(basis, image)
            if coords is None:
                raise PreconditionError(
                    f"residue at {h.id} does not preserve L-perp; check flatness first"
                )
            cols.append(coords)
        residues[h.id] = ExactMatrix.from_columns(cols)
    quotient = StandardConnection(Arrangement(flat.codim, planes), residues)
    return QuotientConnection(quotient, flat, tuple(basis))


@dataclass(frozen=True)
class InducedConnection:
    connection: StandardConnection
    hyperplane_id: str
    basis: tuple  # kernel basis of H0 used as the coordinate frame
    trace_map: dict  # source hyperplane id -> trace id


def induced_connection(conn: StandardConnection, h0: str) -> InducedConnection:
    """Connection induced on a hyperplane H0 of the arrangement.

    The residue at a trace H'' is the restriction to H0 of the full residue
    of the codimension-two flat H'' (sum over all hyperplanes through it),
    written in the kernel-basis coordinates of H0.
    """
    conn._require_exact("induced connection")
    arr = conn.arrangement
    i0 = arr.index_of(h0)
    if conn.residue(h0).is_zero():
        raise PreconditionError(
            f"residue at {h0} is zero: the tangent bundle of H0 is not parallel"
        )
    h0_flat = flat_from_indices(arr, [i0])
    dr = deletion_restriction(arr, h0)
    residues = {}
    for trace in dr.restricted.hyperplanes:
        source = trace.id  # ids of traces are their first source hyperplane
        flat2 = flat_from_indices(arr, [i0, arr.index_of(source)])
        a_full = residue_at_flat(conn, flat2)
        cols = []
        for b in h0_flat.kernel_basis:
            image = a_full.apply(b)
            coords = coordinates_in_basis(h0_flat.kernel_basis, image)
            if coords is None:
                raise PreconditionError(
                    f"residue of the flat {trace.id} does not preserve {h0}; "
                    "the input connection is not flat"
                )
            cols.append(coords)
        residues[trace.id] = ExactMatrix.from_columns(cols)
    induced = StandardConnection(dr.restricted, residues)
    return InducedConnection(induced, h0, h0_flat.kernel_basis, dict(dr.projection))


# -- linear weight constraints -------------------------------------------------

@dataclass(frozen=True)
class WeightConstraintRow:
    h0: str
    lhs: GaussianRational
    rhs: GaussianRational
    residual: GaussianRational
    restriction_essential_irreducible: bool


@dataclass(frozen=True)
class WeightConstraintReport:
    rows: tuple
    any_valid: bool
    all_zero: bool


def check_weight_constraints(conn: StandardConnection, cap: Optional[int] = None) -> WeightConstraintReport:
    """Evaluate the deletion-restriction trace identity for every H0 whose
    induced arrangement is essential and irreducible; the residual must be
    exactly zero for flat torsion-free input."""
    conn._require_exact("weight constraints")
    arr = conn.arrangement
    n = arr.dimension
    if n < 2:
        raise PreconditionError("weight constraints need dimension >= 2")
    from .arrangement import center_rank_essential

    _, rank, essential = center_rank_essential(arr)
    if not essential or len(irreducible_decomposition(arr)) != 1:
        raise PreconditionError("weight constraints assume an essential irreducible arrangement")
    lattice = arr.lattice(cap=cap)
    lhs = GR_ZERO
    for h in arr.hyperplanes:
        lhs = lhs + conn.residue(h.id).trace()
    lhs = lhs / GaussianRational(n)
    rows = []
    for i0, h0 in enumerate(arr.hyperplanes):
        dr = deletion_restriction(arr, h0.id)
        _, r_rank, r_ess = center_rank_essential(dr.restricted)
        valid = (
            len(dr.restricted) > 0
            and r_ess
            and len(irreducible_decomposition(dr.restricted)) == 1
        )
        if not valid:
            rows.append(WeightConstraintRow(h0.id, lhs, GR_ZERO, GR_ZERO, False))
            continue
        transversal = GR_ZERO
        deep = GR_ZERO
        for flat in lattice.of_codim(2):
            if i0 not in flat.containing:
                continue
            if len(flat.containing) == 2:
                other = next(i for i in flat.containing if i != i0)
                transversal = transversal + conn.residue(arr.hyperplanes[other].id).trace()
            else:
                deep = deep + residue_at_flat(conn, flat).trace() / GaussianRational(2)
        rhs = (transversal + deep) / GaussianRational(n - 1)
        rows.append(WeightConstraintRow(h0.id, lhs, rhs, lhs - rhs, True))
    valid_rows = [r for r in rows if r.restriction_essential_irreducible]
    return WeightConstraintReport(
        tuple(rows),
        bool(valid_rows),
        all(not r.residual for r in valid_rows) if valid_rows else False,
    )


# -- non-resonance --------------------------------------------------------------

def non_resonant(matrix, tol: float = 1e-9) -> bool:
    """No two eigenvalues differ by a nonzero integer (numerical check)."""
    m = matrix.to_complex() if isinstance(matrix, ExactMatrix) else np.asarray(matrix, dtype=complex)
    eigs = np.linalg.eigvals(m)
    for i in range(len(eigs)):
        for j in range(len(eigs)):
            if i == j:
                continue
            d = eigs[i] - eigs[j]
            k = round(d.real)
            if k != 0 and abs(d.imag) < tol and abs(d.real - k) < tol:
                return False
    return True


def non_resonance_report(conn: StandardConnection, tol: float = 1e-9) -> dict:
    fconn = conn.to_float()
    return {h.id: non_resonant(fconn.residue(h.id), tol) for h in conn.arrangement.hyperplanes}


# -- JSON ------------------------------------------------------------------------

def connection_from_json(obj) -> StandardConnection:
    if not isinstance(obj, dict) or "residues" not in obj:
        raise InputError("connection JSON must be an object with a 'residues' field")
    arr_obj = {k: v for k, v in obj.items() if k != "residues"}
    arr = arrangement_from_json(arr_obj)
    n = arr.dimension
    residues = {}
    for hid, grid in obj["residues"].items():
        try:
            rows = [[_parse_entry(e) for e in row] for row in grid]
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad residue for {hid}: {exc}") from None
        m = ExactMatrix(rows)
        if m.rows != n or m.cols != n:
            raise InputError(f"residue for {hid} is {m.rows}x{m.cols}, expected {n}x{n}")
        residues[str(hid)] = m
    return StandardConnection(arr, residues)


def connection_to_json(conn: StandardConnection) -> dict:
    if conn.mode != EXACT:
        raise InputError("only exact connections are serialized")
    obj = arrangement_to_json(conn.arrangement)
    obj["residues"] = {
        h.id: [[_entry_to_json(e) for e in row] for row in conn.residue(h.id).entries]
        for h in conn.arrangement.hyperplanes
    }
    return obj


def load_connection(path) -> StandardConnection:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    except OSError as exc:
        raise InputError(str(exc)) from None
    return connection_from_json(obj)
