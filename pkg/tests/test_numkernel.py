from fractions import Fraction

import numpy as np
import pytest

from arrconn.numkernel import (
    ExactMatrix,
    GaussianRational,
    HermForm,
    PoleProximityError,
    commutator,
    hermitian_signature,
    matrix_exp,
    ode_transport,
    rank_kernel,
    row_echelon,
    solve_exact,
    vec,
)

from conftest import random_rational


G = GaussianRational


class TestGaussianRational:
    def test_arithmetic(self):
        a = G(Fraction(1, 2), Fraction(1, 3))
        b = G(Fraction(2), Fraction(-1))
        assert a + b == G(Fraction(5, 2), Fraction(-2, 3))
        assert a * b == G(Fraction(4, 3), Fraction(1, 6))
        assert (a / b) * b == a
        assert -a + a == G(0)

    def test_parse_and_repr(self):
        assert G.parse("3/4") == G(Fraction(3, 4))
        assert G.parse("-2") == G(-2)
        assert G.parse("0.25") == G(Fraction(1, 4))

    def test_conjugate_and_predicates(self):
        a = G(1, 2)
        assert a.conjugate() == G(1, -2)
        assert not a.is_real()
        assert G(3).is_integer()
        assert not G(Fraction(1, 2)).is_integer()
        assert complex(a) == 1 + 2j

    def test_hash_consistency(self):
        assert hash(G(Fraction(2, 4))) == hash(G(Fraction(1, 2)))
        assert len({G(1), G(1, 0), G(Fraction(2, 2))}) == 1

    def test_zero_division(self):
        with pytest.raises(ZeroDivisionError):
            G(1) / G(0)


class TestExactLinearAlgebra:
    def test_rank_kernel_identity(self):
        rank, basis = rank_kernel(ExactMatrix.identity(2))
        assert rank == 2 and basis == []

    def test_rank_kernel_difference_form(self):
        rank, basis = rank_kernel([vec([1, -1])])
        assert rank == 1
        assert basis == [vec([1, 1])]

    def test_rank_kernel_braid_residue(self):
        # residue with parameters (1, 2): ((2, -2), (-1, 1))
        m = ExactMatrix([[2, -2], [-1, 1]])
        rank, basis = rank_kernel(m)
        assert rank == 1
        assert basis == [vec([1, 1])]

    def test_kernel_annihilated_exactly(self, rng):
        for _ in range(25):
            rows = rng.randint(1, 4)
            cols = rng.randint(1, 4)
            m = ExactMatrix(
                [[random_rational(rng) for _ in range(cols)] for _ in range(rows)]
            )
            rank, basis = rank_kernel(m)
            assert rank + len(basis) == cols
            for v in basis:
                assert all(not e for e in m.apply(v))

    def test_solve_round_trip(self, rng):
        for _ in range(20):
            n = rng.randint(1, 4)
            m = ExactMatrix([[random_rational(rng) for _ in range(n)] for _ in range(n)])
            x = vec([random_rational(rng) for _ in range(n)])
            b = m.apply(x)
            sol = solve_exact(m, b)
            assert sol is not None
            assert m.apply(sol) == b

    def test_row_echelon_pivots(self):
        rref, pivots = row_echelon([vec([0, 1]), vec([0, 2])])
        assert pivots == [1]

    def test_commutator_zero_for_commuting(self):
        a = ExactMatrix([[1, 0], [0, 2]])
        b = ExactMatrix([[3, 0], [0, 4]])
        assert commutator(a, b).is_zero()


class TestHermitianSignature:
    def test_definite(self):
        sig = hermitian_signature(np.diag([1.0, 1.0]))
        assert sig.as_tuple() == (2, 0, 0)

    def test_mixed_with_kernel(self):
        sig = hermitian_signature(np.diag([1.0, -1.0, 0.0]), tol=1e-9)
        assert sig.as_tuple() == (1, 1, 1)

    def test_congruence_invariance(self, rng):
        np_rng = np.random.default_rng(7)
        for _ in range(10):
            n = rng.randint(2, 5)
            d = np_rng.standard_normal(n)
            h = np.diag(d).astype(complex)
            q, _ = np.linalg.qr(
                np_rng.standard_normal((n, n)) + 1j * np_rng.standard_normal((n, n))
            )
            before = hermitian_signature(h, tol=1e-8)
            after = hermitian_signature(q.conj().T @ h @ q, tol=1e-8)
            assert before.as_tuple() == after.as_tuple()

    def test_ambiguous_band_flagged(self):
        sig = hermitian_signature(np.diag([1.0, 5e-8]), tol=1e-8)
        assert sig.ambiguous

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            HermForm(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestMatrixExp:
    def test_zero(self):
        assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))

    def test_scalar_quarter_turn(self):
        out = matrix_exp(np.diag([2j * np.pi * 0.25]))
        assert abs(out[0, 0] - 1j) < 1e-14

    def test_nilpotent(self):
        out = matrix_exp(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert np.allclose(out, [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)

    def test_inverse_product(self, rng):
        np_rng = np.random.default_rng(11)
        for _ in range(10):
            n = rng.randint(1, 5)
            a = np_rng.standard_normal((n, n)) + 1j * np_rng.standard_normal((n, n))
            a *= 10.0 / max(np.linalg.norm(a), 1.0)
            prod = matrix_exp(a) @ matrix_exp(-a)
            assert np.linalg.norm(prod - np.eye(n)) < 1e-10


class TestOdeTransport:
    def test_zero_rhs(self):
        x0 = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
        x1, err = ode_transport(lambda t: np.zeros((2, 2), dtype=complex), x0, tol=1e-10)
        assert np.array_equal(x1, x0)
        assert err == 0.0

    def test_scalar_circle(self):
        # pullback of (1/4) dz/z along the unit circle is constant pi i / 2
        rhs = lambda t: np.array([[0.5j * np.pi]])
        x1, err = ode_transport(rhs, np.eye(1, dtype=complex), tol=1e-10)
        assert abs(x1[0, 0] - 1j) < 1e-8

    def test_transport_then_reverse(self):
        def make(sign):
            def rhs(t):
                z = 2.0 + np.exp(2j * np.pi * (sign * t))
                v = sign * 2j * np.pi * np.exp(2j * np.pi * (sign * t))
                return np.array([[0.3 * v / z, 0.1], [0.0, -0.2 * v / z]])

            return rhs

        x1, e1 = ode_transport(make(1.0), np.eye(2, dtype=complex), tol=1e-10)
        back = lambda t: -make(1.0)(1.0 - t)
        x2, e2 = ode_transport(back, x1, tol=1e-10)
        assert np.linalg.norm(x2 - np.eye(2)) < 1e-8

    def test_pole_abort(self):
        # essential singularity mid-interval: the solution blows up and the
        # step size underflows
        def rhs(t):
            return np.array([[1.0 / (t - 0.5) ** 2]], dtype=complex)

        with pytest.raises(PoleProximityError):
            ode_transport(rhs, np.eye(1, dtype=complex), tol=1e-10)

    def test_error_estimate_scales(self):
        rhs = lambda t: np.array([[2j * np.pi]])
        _, loose = ode_transport(rhs, np.eye(1, dtype=complex), tol=1e-6)
        _, tight = ode_transport(rhs, np.eye(1, dtype=complex), tol=1e-12)
        assert tight <= loose + 1e-12
