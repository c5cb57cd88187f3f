"""Shared linear-algebra kernels.

Exact side: Gaussian rationals (the field Q(i)), exact vectors and matrices
with Gaussian elimination, rank and kernel computations.  Every algebraic
criterion in the package is decided over Q(i), so equality tests never
involve tolerances.

Floating side: complex double matrices, Hermitian signature, matrix
exponential and the adaptive Runge-Kutta transport used for holonomy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

_FRAC_ZERO = Fraction(0)


class GaussianRational:
    """An element of Q(i), stored as two exact rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def parse(text: str) -> "GaussianRational":
        """Parse a rational string like "3/4", "-2" or "0.25"."""
        return GaussianRational(Fraction(text.strip()))

    @staticmethod
    def coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        if isinstance(value, str):
            return GaussianRational.parse(value)
        raise TypeError(f"cannot coerce {value!r} to a Gaussian rational")

    @staticmethod
    def _make(re: Fraction, im: Fraction) -> "GaussianRational":
        # internal constructor; caller guarantees Fraction components
        obj = GaussianRational.__new__(GaussianRational)
        obj.re = re
        obj.im = im
        return obj

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        if not (other.re or other.im):
            return self
        if not (self.re or self.im):
            return other
        return GaussianRational._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        if not (other.re or other.im):
            return self
        return GaussianRational._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.im and not other.im:
            if not (self.re and other.re):
                return GR_ZERO
            return GaussianRational._make(self.re * other.re, _FRAC_ZERO)
        return GaussianRational._make(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.re and not other.im:
            raise ZeroDivisionError("division by zero in Q(i)")
        if not self.im and not other.im:
            return GaussianRational(self.re / other.re)
        norm = other.re * other.re + other.im * other.im
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    # -- predicates and conversions -----------------------------------------

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def is_integer(self) -> bool:
        return not self.im and self.re.denominator == 1

    def __eq__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _as_gauss(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    return NotImplemented


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)

ExactVector = tuple  # tuple of GaussianRational


# -- exact vectors -----------------------------------------------------------

def vec(values) -> ExactVector:
    return tuple(GaussianRational.coerce(v) for v in values)


def vec_add(u: ExactVector, v: ExactVector) -> ExactVector:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: ExactVector, v: ExactVector) -> ExactVector:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u: ExactVector) -> ExactVector:
    c = GaussianRational.coerce(c)
    return tuple(c * a for a in u)


def vec_dot(u: ExactVector, v: ExactVector) -> GaussianRational:
    """Bilinear pairing (no conjugation); used to apply linear forms."""
    total = None
    for a, b in zip(u, v):
        if (a.re or a.im) and (b.re or b.im):
            prod = a * b
            total = prod if total is None else total + prod
    return GR_ZERO if total is None else total


def vec_is_zero(u: ExactVector) -> bool:
    return not any(u)


def vec_complex(u: ExactVector) -> np.ndarray:
    return np.array([complex(a) for a in u], dtype=complex)


class ExactMatrix:
    """Dense matrix over Q(i); small sizes, exact arithmetic throughout."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        grid = tuple(tuple(GaussianRational.coerce(e) for e in row) for row in entries)
        self.entries = grid
        self.rows = len(grid)
        self.cols = len(grid[0]) if grid else 0
        if any(len(row) != self.cols for row in grid):
            raise ValueError("ragged matrix")

    @staticmethod
    def _raw(grid) -> "ExactMatrix":
        # internal constructor; caller guarantees GaussianRational entries
        obj = ExactMatrix.__new__(ExactMatrix)
        obj.entries = tuple(tuple(row) for row in grid)
        obj.rows = len(obj.entries)
        obj.cols = len(obj.entries[0]) if obj.entries else 0
        return obj

    @staticmethod
    def zeros(rows: int, cols: int) -> "ExactMatrix":
        return ExactMatrix([[GR_ZERO] * cols for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        return ExactMatrix(
            [[GR_ONE if i == j else GR_ZERO for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def from_columns(columns) -> "ExactMatrix":
        cols = [tuple(c) for c in columns]
        n = len(cols[0])
        return ExactMatrix([[cols[j][i] for j in range(len(cols))] for i in range(n)])

    def column(self, j: int) -> ExactVector:
        return tuple(row[j] for row in self.entries)

    def apply(self, v: ExactVector) -> ExactVector:
        return tuple(vec_dot(row, v) for row in self.entries)

    def __add__(self, other):
        return ExactMatrix._raw(
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other):
        return ExactMatrix._raw(
            [
                [a - b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)
            ]
        )

    def scale(self, c) -> "ExactMatrix":
        c = GaussianRational.coerce(c)
        return ExactMatrix._raw([[c * a for a in row] for row in self.entries])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        grid = []
        for row in self.entries:
            support = [(k, a) for k, a in enumerate(row) if a.re or a.im]
            out_row = []
            for j in range(other.cols):
                total = None
                for k, a in support:
                    b = other.entries[k][j]
                    if b.re or b.im:
                        prod = a * b
                        total = prod if total is None else total + prod
                out_row.append(GR_ZERO if total is None else total)
            grid.append(out_row)
        return ExactMatrix._raw(grid)

    def trace(self) -> GaussianRational:
        total = GR_ZERO
        for i in range(min(self.rows, self.cols)):
            total = total + self.entries[i][i]
        return total

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(list(zip(*self.entries)))

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash(self.entries)

    def to_complex(self) -> np.ndarray:
        return np.array(
            [[complex(e) for e in row] for row in self.entries], dtype=complex
        )

    def __repr__(self):
        body = "; ".join(" ".join(repr(e) for e in row) for row in self.entries)
        return f"ExactMatrix[{body}]"


def commutator(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return (a @ b) - (b @ a)


# -- exact elimination -------------------------------------------------------

def row_echelon(rows):
    """Reduced row echelon form over Q(i).

    Returns (rref_rows, pivot_columns); input is not modified.
    """
    work = [list(row) for row in rows]
    n_rows = len(work)
    n_cols = len(work[0]) if work else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot_row = None
        for i in range(r, n_rows):
            if work[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = GR_ONE / work[r][c]
        work[r] = [inv * e for e in work[r]]
        for i in range(n_rows):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return [tuple(row) for row in work], pivots


def rank_kernel(matrix):
    """Rank and an exact kernel basis of a matrix over Q(i).

    Accepts an ExactMatrix or a sequence of row vectors.  The returned
    basis vectors are annihilated exactly; rank + len(basis) = cols.
    """
    rows = matrix.entries if isinstance(matrix, ExactMatrix) else [tuple(r) for r in matrix]
    if not rows:
        raise ValueError("rank_kernel of a matrix with no rows; use the identity basis")
    n_cols = len(rows[0])
    rref, pivots = row_echelon(rows)
    rank = len(pivots)
    pivot_set = set(pivots)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    for fc in free_cols:
        v = [GR_ZERO] * n_cols
        v[fc] = GR_ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(tuple(v))
    return rank, basis


def kernel_of_form(form: ExactVector):
    """Kernel basis of a single nonzero linear form."""
    _, basis = rank_kernel([form])
    return basis


def span_rank(vectors) -> int:
    vectors = list(vectors)
    if not vectors:
        return 0
    _, pivots = row_echelon(vectors)
    return len(pivots)


def independent_subset(vectors):
    """Indices of a greedy maximal independent subset."""
    chosen = []
    rows = []
    rank = 0
    for idx, v in enumerate(vectors):
        trial = rows + [v]
        _, pivots = row_echelon(trial)
        if len(pivots) > rank:
            rank = len(pivots)
            rows = trial
            chosen.append(idx)
    return chosen


def solve_exact(matrix: ExactMatrix, rhs: ExactVector):
    """One exact solution of matrix @ x = rhs, or None if inconsistent."""
    aug = [list(row) + [b] for row, b in zip(matrix.entries, rhs)]
    rref, pivots = row_echelon(aug)
    n = matrix.cols
    for row in rref:
        if not any(row[:n]) and row[n]:
            return None
    x = [GR_ZERO] * n
    for r, pc in enumerate(pivots):
        if pc == n:
            return None
        x[pc] = rref[r][n]
    return tuple(x)


def coordinates_in_basis(basis, v: ExactVector):
    """Coordinates of v in the span of basis vectors, or None if outside."""
    return solve_exact(ExactMatrix.from_columns(basis), v)


def same_span(basis_a, basis_b) -> bool:
    basis_a, basis_b = list(basis_a), list(basis_b)
    ra = span_rank(basis_a)
    rb = span_rank(basis_b)
    return ra == rb == span_rank(basis_a + basis_b)


# -- floating kernels --------------------------------------------------------

HERMITIAN_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class HermForm:
    """A conjugate-symmetric complex matrix (checked at construction)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hermitian form must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite entries in Hermitian form")
        dev = np.linalg.norm(m - m.conj().T)
        scale = max(np.linalg.norm(m), 1.0)
        if dev > HERMITIAN_CHECK_TOL * scale:
            raise ValueError(f"matrix is not conjugate-symmetric (deviation {dev:.2e})")
        object.__setattr__(self, "matrix", (m + m.conj().T) / 2.0)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Signature:
    p: int
    q: int
    kernel_dim: int
    ambiguous: tuple = ()

    def as_tuple(self):
        return (self.p, self.q, self.kernel_dim)


def hermitian_signature(form, tol: float = 1e-8) -> Signature:
    """Inertia (p, q, kernel) of a Hermitian form by eigenvalue counts.

    Eigenvalues with |lambda| inside the band (tol/10, 10*tol) are reported
    in the ``ambiguous`` field; counting still uses the hard threshold tol.
    """
    matrix = form.matrix if isinstance(form, HermForm) else HermForm(form).matrix
    eigs = np.linalg.eigvalsh(matrix)
    p = int(np.sum(eigs > tol))
    q = int(np.sum(eigs < -tol))
    kernel = len(eigs) - p - q
    ambiguous = tuple(
        float(ev) for ev in eigs if tol / 10.0 < abs(ev) < tol * 10.0
    )
    return Signature(p, q, kernel, ambiguous)


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring, via scipy)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    return scipy.linalg.expm(a)


class PoleProximityError(RuntimeError):
    """Raised when the adaptive step size underflows near a singularity."""


# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

MIN_STEP = 1e-13


def ode_transport(rhs, x0: np.ndarray, tol: float = 1e-10):
    """Integrate dX/dt = rhs(t) @ X over t in [0, 1].

    rhs(t) returns a finite complex matrix (the caller guarantees pole
    avoidance).  Returns (X(1), err_est) where err_est accumulates the
    local error estimates of the accepted steps.  Aborts with
    PoleProximityError if the step size falls below MIN_STEP.
    """
    x = np.array(x0, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("initial value must be a square matrix")
    t = 0.0
    h = 0.05
    err_total = 0.0
    k = [None] * 7
    while t < 1.0:
        h = min(h, 1.0 - t)
        if h < MIN_STEP:
            raise PoleProximityError("path too close to singular locus")
        k[0] = rhs(t) @ x
        for stage in range(1, 6):
            y = x.copy()
            for j, a in enumerate(_DP_A[stage]):
                if a:
                    y = y + (h * a) * k[j]
            k[stage] = rhs(t + _DP_C[stage] * h) @ y
        x5 = x.copy()
        for j, b in enumerate(_DP_B5):
            if b:
                x5 = x5 + (h * b) * k[j]
        k[6] = rhs(t + h) @ x5
        x4 = x.copy()
        for j, b in enumerate(_DP_B4):
            if b:
                x4 = x4 + (h * b) * k[j]
        err = np.linalg.norm(x5 - x4)
        if not np.isfinite(err):
            h *= 0.1
            continue
        scale = max(np.linalg.norm(x), np.linalg.norm(x5), 1.0)
        rel = err / scale
        if rel <= tol:
            t += h
            x = x5
            err_total += err
            factor = 5.0 if rel == 0.0 else min(5.0, max(0.2, 0.9 * (tol / rel) ** 0.2))
            h *= factor
        else:
            h *= max(0.1, 0.9 * (tol / rel) ** 0.2)
    return x, err_total
