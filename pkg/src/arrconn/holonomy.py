"""Numerical parallel transport on the arrangement complement.

Meridian and central loops with precomputed clearance, adaptive transport
of fundamental solutions, residue-limit diagnostics, invariant Hermitian
forms of the generated group, and the Burnside irreducibility test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .arrangement import Arrangement, Flat, flat_from_basis
from .connection import (
    StandardConnection,
    localization_connection,
    flat_perp_basis,
    residue_at_flat,
)
from .errors import ArrConnError, PreconditionError
from .numkernel import (
    HermForm,
    PoleProximityError,
    Signature,
    coordinates_in_basis,
    hermitian_signature,
    matrix_exp,
    ode_transport,
    vec_complex,
)

CLOSURE_TOL = 1e-12
POLE_TOL = 1e-14


@dataclass(frozen=True)
class Segment:
    start: np.ndarray
    end: np.ndarray

    def point(self, s: float) -> np.ndarray:
        return self.start + s * (self.end - self.start)

    def velocity(self, s: float) -> np.ndarray:
        return self.end - self.start

    @property
    def first(self):
        return self.start

    @property
    def last(self):
        return self.end


@dataclass(frozen=True)
class Arc:
    """z(s) = center + exp(i * sweep * s) * offset for s in [0, 1]."""

    center: np.ndarray
    offset: np.ndarray
    sweep: float

    def point(self, s: float) -> np.ndarray:
        return self.center + np.exp(1j * self.sweep * s) * self.offset

    def velocity(self, s: float) -> np.ndarray:
        return 1j * self.sweep * np.exp(1j * self.sweep * s) * self.offset

    @property
    def first(self):
        return self.center + self.offset

    @property
    def last(self):
        return self.center + np.exp(1j * self.sweep) * self.offset


@dataclass(frozen=True)
class LoopPath:
    pieces: tuple
    basepoint: np.ndarray
    clearance: float

    def __post_init__(self):
        prev = self.basepoint
        for piece in self.pieces:
            if np.linalg.norm(piece.first - prev) > CLOSURE_TOL:
                raise ArrConnError("loop pieces are not contiguous")
            prev = piece.last
        if np.linalg.norm(prev - self.basepoint) > CLOSURE_TOL:
            raise ArrConnError("loop is not closed")


def _forms_matrix(arr: Arrangement) -> np.ndarray:
    return np.array([vec_complex(h.form) for h in arr.hyperplanes], dtype=complex)


def _point_clearance(forms: np.ndarray, norms: np.ndarray, z: np.ndarray) -> float:
    if forms.size == 0:
        return np.inf
    return float(np.min(np.abs(forms @ z) / norms))


def loop_clearance(arr: Arrangement, pieces, samples: int = 64) -> float:
    """Minimum sampled distance from the loop to any hyperplane."""
    forms = _forms_matrix(arr)
    norms = np.linalg.norm(forms, axis=1) if forms.size else np.array([])
    best = np.inf
    for piece in pieces:
        for k in range(samples + 1):
            z = piece.point(k / samples)
            best = min(best, _point_clearance(forms, norms, z))
    return best


def make_loop(arr: Arrangement, basepoint: np.ndarray, pieces) -> LoopPath:
    return LoopPath(tuple(pieces), np.asarray(basepoint, dtype=complex),
                    loop_clearance(arr, pieces))


# -- connection form -----------------------------------------------------------

def connection_form(conn: StandardConnection, z, v) -> np.ndarray:
    """Sum of A_H h(v)/h(z); raises near a pole, naming the hyperplane."""
    fconn = conn.to_float()
    arr = fconn.arrangement
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    forms = _forms_matrix(arr)
    n = arr.dimension
    total = np.zeros((n, n), dtype=complex)
    if forms.size == 0:
        return total
    hz = forms @ z
    hv = forms @ v
    for k, h in enumerate(arr.hyperplanes):
        if abs(hz[k]) < POLE_TOL:
            raise PoleProximityError(f"evaluation point lies on hyperplane {h.id}")
        total += (hv[k] / hz[k]) * fconn.residue(h.id)
    return total


# -- loop construction -----------------------------------------------------------

@dataclass(frozen=True)
class MeridianData:
    hyperplane_id: str
    loop: LoopPath
    direction: np.ndarray  # line direction w with h(w) = 1
    t_star: complex  # parameter of the crossing with H
    safe_distance: float  # distance in the t-plane to other crossings


@dataclass(frozen=True)
class GeneratorSet:
    basepoint: np.ndarray
    basepoint_exact: tuple
    meridians: tuple  # MeridianData, one per hyperplane in order
    central: LoopPath  # scaling loop around the origin


def _draw_basepoint(arr: Arrangement, seed: int):
    rng = random.Random(seed)
    forms = _forms_matrix(arr)
    norms = np.linalg.norm(forms, axis=1) if forms.size else np.array([])
    for _ in range(1000):
        exact = tuple(Fraction(rng.randint(-999, 999), 1000) for _ in range(arr.dimension))
        z = np.array([float(x) for x in exact], dtype=complex)
        r = np.linalg.norm(z)
        if r == 0:
            continue
        if _point_clearance(forms, norms, z) > 0.05 * r:
            return exact, z
    raise ArrConnError("no generic basepoint found in 1000 draws")


def _line_singularities(arr: Arrangement, p: np.ndarray, w: np.ndarray, skip: int):
    """Crossing parameters of the line p + t w with the other hyperplanes."""
    out = []
    for k, h in enumerate(arr.hyperplanes):
        if k == skip:
            continue
        hc = vec_complex(h.form)
        hw = hc @ w
        if abs(hw) < POLE_TOL * np.linalg.norm(hc):
            continue  # line parallel to this hyperplane
        out.append(-(hc @ p) / hw)
    return out


def meridian(arr: Arrangement, basepoint: np.ndarray, hyperplane_id: str) -> MeridianData:
    """Approach arc toward the hyperplane, a full anticlockwise circle
    around the crossing, and the reversed approach back.

    The approach is a half circle in the line parameter over the chord from
    the basepoint to the approach point: with a real basepoint every other
    crossing sits on the real parameter axis, so a straight chord would hit
    them.  The circle radius is one third of the clear distance around the
    crossing.
    """
    k = arr.index_of(hyperplane_id)
    h = vec_complex(arr.hyperplanes[k].form)
    w = h.conjugate() / (np.abs(h) ** 2).sum()  # h(w) = 1
    p = np.asarray(basepoint, dtype=complex)
    t_star = -(h @ p)
    if abs(t_star) < POLE_TOL:
        raise PreconditionError("basepoint lies on the hyperplane")
    others = _line_singularities(arr, p, w, k)
    d_min = min((abs(t - t_star) for t in others), default=np.inf)
    safe = min(abs(t_star), d_min)
    radius = safe / 3.0
    t_approach = t_star * (1.0 - radius / abs(t_star))
    half = t_approach / 2.0
    z_star = p + t_star * w
    z_approach = p + t_approach * w
    z_half = p + half * w
    pieces = (
        Arc(z_half, -half * w, -np.pi),
        Arc(z_star, z_approach - z_star, 2.0 * np.pi),
        Arc(z_half, half * w, np.pi),
    )
    return MeridianData(hyperplane_id, make_loop(arr, p, pieces), w, complex(t_star), float(safe))


def generator_loops(arr: Arrangement, seed: int = 0) -> GeneratorSet:
    """One meridian per hyperplane plus the central scaling loop, from a
    deterministic generic rational basepoint.

    Seeds whose loops come out with degenerate clearance are skipped
    deterministically.
    """
    if not len(arr):
        raise PreconditionError("generator loops need a nonempty arrangement")
    last = None
    for attempt in range(50):
        exact, p = _draw_basepoint(arr, seed + 7919 * attempt)
        meridians = tuple(meridian(arr, p, h.id) for h in arr.hyperplanes)
        central = make_loop(
            arr, p, (Arc(np.zeros(arr.dimension, dtype=complex), p, 2.0 * np.pi),)
        )
        candidate = GeneratorSet(p, exact, meridians, central)
        worst = min(
            [m.loop.clearance for m in meridians] + [central.clearance]
        )
        if worst > 1e-6 * np.linalg.norm(p):
            return candidate
        last = candidate
    return last


# -- transport -------------------------------------------------------------------

def holonomy(conn: StandardConnection, loop: LoopPath, tol: float = 1e-8):
    """Fundamental-solution transport around the loop; returns (T, err).

    The stepper tolerance is tightened in proportion to the loop clearance
    so that close approaches to the polar locus get smaller steps.
    """
    fconn = conn.to_float()
    arr = fconn.arrangement
    n = arr.dimension
    forms = _forms_matrix(arr)
    residues = np.stack([fconn.residue(h.id) for h in arr.hyperplanes]) if len(arr) else None
    eff_tol = tol * min(1.0, loop.clearance) if len(arr) else tol
    ids = [h.id for h in arr.hyperplanes]

    def rhs_for(piece):
        def rhs(t):
            z = piece.point(t)
            v = piece.velocity(t)
            hz = forms @ z
            small = np.abs(hz) < POLE_TOL
            if small.any():
                raise PoleProximityError(
                    f"path touches hyperplane {ids[int(np.argmax(small))]}"
                )
            return np.tensordot((forms @ v) / hz, residues, axes=1)

        return rhs

    x = np.eye(n, dtype=complex)
    err = 0.0
    if residues is None:
        return x, 0.0
    for piece in loop.pieces:
        x, piece_err = ode_transport(rhs_for(piece), x, tol=eff_tol)
        err += piece_err
    return x, err


# -- spectrum checks ---------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    ok: bool
    predicted: tuple
    computed: tuple
    max_mismatch: float
    transport_err: float


def _match_multisets(predicted, computed):
    predicted = list(predicted)
    computed = list(computed)
    worst = 0.0
    for target in predicted:
        best_i = min(range(len(computed)), key=lambda i: abs(computed[i] - target))
        worst = max(worst, abs(computed[best_i] - target))
        computed.pop(best_i)
    return worst


def _standard_complement(flat: Flat, n: int):
    """Standard basis vectors completing the flat to the whole space; used
    only when every localized residue vanishes and no normal frame exists."""
    from .numkernel import GR_ONE, GR_ZERO, span_rank

    chosen = []
    base = list(flat.kernel_basis)
    for i in range(n):
        e = tuple(GR_ONE if j == i else GR_ZERO for j in range(n))
        trial = base + chosen + [e]
        if span_rank(trial) == len(trial):
            chosen.append(e)
    return tuple(chosen)


def central_loop_spectrum_check(
    conn: StandardConnection, flat: Flat, tol: float = 1e-6, seed: int = 0
) -> SpectrumReport:
    """Transport around the loop that rotates the normal component of the
    basepoint at the flat; the spectrum must match exp(2 pi i a_j) with the
    normal multiplicities and 1 on the flat directions."""
    loc = localization_connection(conn, flat)
    arr = loc.arrangement
    flat_loc = flat_from_basis(arr, flat.kernel_basis)
    exact, p = _draw_basepoint(arr, seed)
    if all(loc.residue(h.id).is_zero() for h in arr.hyperplanes):
        # trivial connection: no normal frame; any exact complement works
        perp = _standard_complement(flat_loc, arr.dimension)
    else:
        perp = flat_perp_basis(loc, flat_loc)
    basis = list(flat_loc.kernel_basis) + list(perp)
    coords = coordinates_in_basis(basis, exact)
    if coords is None:
        raise PreconditionError("basepoint decomposition failed; weights degenerate")
    d = len(flat_loc.kernel_basis)
    p_flat = np.zeros(arr.dimension, dtype=complex)
    for c, b in zip(coords[:d], flat_loc.kernel_basis):
        p_flat += complex(c) * vec_complex(b)
    p_perp = p - p_flat
    loop = make_loop(arr, p, (Arc(p_flat, p_perp, 2.0 * np.pi),))
    t, err = holonomy(loc, loop, tol=min(1e-9, tol * 1e-2))
    computed = sorted(np.linalg.eigvals(t), key=lambda z: (z.real, z.imag))
    from .arrangement import irreducible_components

    predicted = [1.0 + 0.0j] * d
    for comp in irreducible_components(arr, flat_loc):
        a_i = residue_at_flat(loc, comp).trace() / comp.codim
        mult = comp.codim
        predicted.extend([np.exp(2j * np.pi * complex(a_i))] * mult)
    predicted = sorted(predicted, key=lambda z: (z.real, z.imag))
    worst = _match_multisets(predicted, computed)
    return SpectrumReport(
        worst <= tol,
        tuple(predicted),
        tuple(computed),
        float(worst),
        err,
    )


@dataclass(frozen=True)
class ResidueLimitReport:
    hyperplane_id: str
    radii: tuple
    errors: tuple
    strictly_decreasing: bool


def residue_limit_check(
    conn: StandardConnection, hyperplane_id: str, radii, tol: float = 1e-9, seed: int = 0
) -> ResidueLimitReport:
    """Compare circle holonomy at shrinking radii against the exponential
    of the residue; radii are fractions (< 1) of the safe distance around
    the crossing."""
    arr = conn.arrangement
    _, p = _draw_basepoint(arr, seed)
    data = meridian(arr, p, hyperplane_id)
    w = data.direction
    t_star = data.t_star
    z_star = p + t_star * w
    fconn = conn.to_float()
    limit = matrix_exp(2j * np.pi * fconn.residue(hyperplane_id))
    errors = []
    for r in radii:
        if not 0 < r < 1:
            raise PreconditionError("radii must be fractions of the safe distance in (0, 1)")
        offset = (r * data.safe_distance) * w * (t_star / abs(t_star))
        loop = make_loop(arr, z_star + offset, (Arc(z_star, offset, 2.0 * np.pi),))
        t_mat, _ = holonomy(conn, loop, tol=tol)
        errors.append(float(np.linalg.norm(t_mat - limit)))
    decreasing = all(a > b for a, b in zip(errors, errors[1:]))
    return ResidueLimitReport(hyperplane_id, tuple(radii), tuple(errors), decreasing)


# -- invariant forms ---------------------------------------------------------------

def _hermitian_basis(n: int):
    basis = []
    for i in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[i, i] = 1.0
        basis.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = 1.0
            m[j, i] = 1.0
            basis.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = 1.0j
            m[j, i] = -1.0j
            basis.append(m)
    return basis


def invariant_forms(generators, tol: float = 1e-8):
    """Real basis of the space of Hermitian X with T* X T = X for all
    generators, via the nullspace of the stacked real linear system.

    Each generator's constraint block is scaled by 1/max(1, |T|^2) so that
    large transport matrices do not drown the tolerance."""
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise PreconditionError("need at least one generator")
    n = gens[0].shape[0]
    basis = _hermitian_basis(n)
    _, s, vt = np.linalg.svd(_constraint_matrix(gens, basis))
    smax = s[0] if s.size else 0.0
    null_dim = int(np.sum(s <= tol * max(smax, 1.0)))
    if s.size < len(basis):
        null_dim += len(basis) - s.size
    forms = []
    for k in range(null_dim):
        coeffs = vt[-(k + 1)]
        mat = sum(c * b for c, b in zip(coeffs, basis))
        mat = (mat + mat.conj().T) / 2.0
        mat /= np.linalg.norm(mat)
        diag = np.real(np.diag(mat))
        lead = diag[np.argmax(np.abs(diag))] if np.abs(diag).max() > 1e-12 else 1.0
        if lead < 0:
            mat = -mat
        forms.append(HermForm(mat))
    return forms


def _constraint_matrix(gens, basis):
    rows = []
    for t in gens:
        th = t.conj().T
        scale = 1.0 / max(1.0, np.linalg.norm(t, 2) ** 2)
        block = []
        for b in basis:
            image = scale * (th @ b @ t - b)
            block.append(np.concatenate([image.real.ravel(), image.imag.ravel()]))
        rows.append(np.array(block).T)
    return np.vstack(rows)


# -- irreducibility -----------------------------------------------------------------

@dataclass(frozen=True)
class IrreducibilityVerdict:
    irreducible: Optional[bool]  # None means numerically ambiguous
    span_dim: int
    full_dim: int
    invariant_subspace: Optional[np.ndarray]  # columns span it, when reducible
    words_used: int


def _orbit_span(vector, gens_and_inverses, tol):
    n = vector.shape[0]
    basis = [vector / np.linalg.norm(vector)]
    frontier = [basis[0]]
    while frontier:
        new = []
        for v in frontier:
            for g in gens_and_inverses:
                w = g @ v
                for b in basis:
                    w = w - (b.conj() @ w) * b
                norm = np.linalg.norm(w)
                if norm > tol:
                    w = w / norm
                    basis.append(w)
                    new.append(w)
                    if len(basis) == n:
                        return np.array(basis).T
        frontier = new
    return np.array(basis).T


def irreducibility(generators, word_cap: Optional[int] = None, tol: float = 1e-8) -> IrreducibilityVerdict:
    """Burnside test: the words of bounded length span the full matrix
    algebra exactly when the representation is irreducible.

    The span is grown breadth-first, keeping only words that enlarge it.
    On a reducible verdict, eigenvector orbits provide an invariant
    subspace as a witness.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise PreconditionError("need at least one generator")
    n = gens[0].shape[0]
    for g in gens:
        if abs(np.linalg.det(g)) < 1e-12:
            raise PreconditionError("generators must be invertible")
    gens_inv = gens + [np.linalg.inv(g) for g in gens]
    cap = word_cap if word_cap is not None else 2 * n
    full = n * n

    def grow(max_len):
        ortho = []
        kept = []

        def try_add(mat):
            v = mat.ravel() / max(np.linalg.norm(mat), 1e-300)
            w = v.copy()
            for b in ortho:
                w = w - (b.conj() @ w) * b
            res = np.linalg.norm(w)
            if res > tol:
                ortho.append(w / res)
                kept.append(v)
                return True
            return False

        try_add(np.eye(n, dtype=complex))
        frontier = [np.eye(n, dtype=complex)]
        words = 1
        length = 0
        while frontier and length < max_len and len(ortho) < full:
            new_frontier = []
            for mat in frontier:
                for g in gens_inv:
                    words += 1
                    prod = g @ mat
                    if try_add(prod):
                        new_frontier.append(prod / np.linalg.norm(prod))
            frontier = new_frontier
            length += 1
        return kept, words

    kept, words = grow(cap)
    if len(kept) < full:
        kept, words2 = grow(2 * cap)
        words += words2
    # the verdict comes from the singular values of the kept, normalized
    # words; a rank decision inside the factor-10 band is ambiguous
    sv = np.linalg.svd(np.array(kept), compute_uv=False)
    smax = sv[0]
    strict = int(np.sum(sv > 10.0 * tol * smax))
    loose = int(np.sum(sv > 0.1 * tol * smax))
    dim = int(np.sum(sv > tol * smax))
    if strict >= full:
        return IrreducibilityVerdict(True, dim, full, None, words)
    if loose >= full > strict:
        return IrreducibilityVerdict(None, dim, full, None, words)
    witness = None
    best = n
    for g in gens:
        _, vectors = np.linalg.eig(g)
        for k in range(vectors.shape[1]):
            span = _orbit_span(vectors[:, k], gens_inv, tol)
            if span.shape[1] < best:
                best = span.shape[1]
                witness = span
    return IrreducibilityVerdict(False, dim, full, witness, words)


# -- report assembly ----------------------------------------------------------------

@dataclass(frozen=True)
class HolonomyReport:
    basepoint: np.ndarray
    generator_ids: tuple
    matrices: tuple
    errors: tuple
    determinants: tuple
    central_matrix: Optional[np.ndarray]
    central_error: Optional[float]
    invariant_form_basis: tuple  # HermForm elements
    signature: Optional[Signature]  # only when the form space is 1-dim
    irreducibility: IrreducibilityVerdict
    max_err: float


def holonomy_report(
    conn: StandardConnection,
    tol: float = 1e-8,
    loops: str = "all",
    seed: int = 0,
    signature_tol: float = 1e-6,
) -> HolonomyReport:
    """Transport all requested loops and assemble the invariant-form and
    irreducibility analysis in the basepoint frame."""
    if loops not in ("meridians", "central", "all"):
        raise PreconditionError(f"unknown loops selection {loops!r}")
    gen = generator_loops(conn.arrangement, seed=seed)
    matrices = []
    errors = []
    ids = []
    if loops in ("meridians", "all"):
        for data in gen.meridians:
            t, err = holonomy(conn, data.loop, tol=tol)
            ids.append(data.hyperplane_id)
            matrices.append(t)
            errors.append(err)
    central_matrix = None
    central_error = None
    if loops in ("central", "all"):
        central_matrix, central_error = holonomy(conn, gen.central, tol=tol)
    analysis = matrices if matrices else [central_matrix]
    forms = invariant_forms(analysis, tol=tol * 10)
    signature = (
        hermitian_signature(forms[0], tol=signature_tol) if len(forms) == 1 else None
    )
    verdict = irreducibility(analysis, tol=tol * 10)
    max_err = max(errors + ([central_error] if central_error is not None else []), default=0.0)
    return HolonomyReport(
        gen.basepoint,
        tuple(ids),
        tuple(matrices),
        tuple(errors),
        tuple(complex(np.linalg.det(m)) for m in matrices),
        central_matrix,
        central_error,
        tuple(forms),
        signature,
        verdict,
        float(max_err),
    )
