import numpy as np
import pytest
from fractions import Fraction

from arrconn.arrangement import Arrangement, Hyperplane, flat_from_indices
from arrconn.connection import StandardConnection
from arrconn.errors import PreconditionError
from arrconn.holonomy import (
    Arc,
    Segment,
    central_loop_spectrum_check,
    connection_form,
    generator_loops,
    holonomy,
    invariant_forms,
    irreducibility,
    holonomy_report,
    make_loop,
    residue_limit_check,
)
from arrconn.lauricella import reduced_residues
from arrconn.numkernel import ExactMatrix, PoleProximityError, hermitian_signature, vec

F = Fraction


def one_dim(a):
    arr = Arrangement(1, [Hyperplane("H", vec([1]))])
    return StandardConnection(arr, {"H": ExactMatrix([[a]])})


def reverse_loop(loop):
    pieces = []
    for piece in reversed(loop.pieces):
        if isinstance(piece, Segment):
            pieces.append(Segment(piece.end, piece.start))
        else:
            pieces.append(
                Arc(piece.center, piece.offset * np.exp(1j * piece.sweep), -piece.sweep)
            )
    return make_loop_from(loop, pieces)


def make_loop_from(loop, pieces):
    from arrconn.holonomy import LoopPath

    return LoopPath(tuple(pieces), pieces[0].first, loop.clearance)


class TestConnectionForm:
    def test_zero_direction(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        out = connection_form(conn, [1.0, 2.0], [0.0, 0.0])
        assert np.allclose(out, 0)

    def test_one_dim_value(self):
        conn = one_dim(F(1, 4))
        out = connection_form(conn, [2.0], [1.0])
        assert abs(out[0, 0] - 0.125) < 1e-15

    def test_braid_plane_entry(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        out = connection_form(conn, [1.0, 2.0], [1.0, 0.0])
        # (1,1) entry: 0.4/1 from z1, 0 from z2, 0.2/(1-2) * 1 from z1-z2
        assert abs(out[0, 0] - 0.2) < 1e-14

    def test_pole_named(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        with pytest.raises(PoleProximityError, match="H_1_2"):
            connection_form(conn, [1.0, 1.0], [1.0, 0.0])


class TestGeneratorLoops:
    def test_single_hyperplane(self):
        arr = Arrangement(1, [Hyperplane("H", vec([1]))])
        gen = generator_loops(arr, seed=0)
        assert len(gen.meridians) == 1
        assert gen.meridians[0].loop.clearance > 0

    def test_braid_plane(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        gen = generator_loops(conn.arrangement, seed=0)
        assert len(gen.meridians) == 3
        assert gen.central.clearance > 0

    def test_deterministic(self):
        arr = reduced_residues([F(1), F(2), F(3)]).arrangement
        g1 = generator_loops(arr, seed=5)
        g2 = generator_loops(arr, seed=5)
        assert np.array_equal(g1.basepoint, g2.basepoint)

    def test_loops_are_closed(self):
        arr = reduced_residues([F(1), F(2), F(3)]).arrangement
        gen = generator_loops(arr, seed=1)
        for m in gen.meridians:
            prev = m.loop.basepoint
            for piece in m.loop.pieces:
                assert np.linalg.norm(piece.first - prev) < 1e-12
                prev = piece.last
            assert np.linalg.norm(prev - m.loop.basepoint) < 1e-12


class TestHolonomy:
    def test_quarter_weight_circle(self):
        conn = one_dim(F(1, 4))
        loop = make_loop(
            conn.arrangement,
            np.array([1.0 + 0j]),
            (Arc(np.array([0j]), np.array([1.0 + 0j]), 2 * np.pi),),
        )
        t, err = holonomy(conn, loop, tol=1e-10)
        assert abs(t[0, 0] - 1j) < 1e-8

    def test_null_homotopic_loop(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        gen = generator_loops(conn.arrangement, seed=0)
        loop = gen.meridians[0].loop
        back = reverse_loop(loop)
        t1, _ = holonomy(conn, loop, tol=1e-10)
        t2, _ = holonomy(conn, back, tol=1e-10)
        assert np.linalg.norm(t2 @ t1 - np.eye(2)) < 1e-8

    def test_meridian_radii_conjugate(self):
        # meridians with different circle radii are homotopic; spectra agree
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        arr = conn.arrangement
        gen = generator_loops(arr, seed=0)
        m = gen.meridians[0]
        t1, e1 = holonomy(conn, m.loop, tol=1e-10)
        # rebuild the same meridian with a smaller circle
        w, t_star = m.direction, m.t_star
        p = gen.basepoint
        radius = m.safe_distance / 7.0
        t_approach = t_star * (1.0 - radius / abs(t_star))
        half = t_approach / 2.0
        z_star = p + t_star * w
        z_half = p + half * w
        pieces = (
            Arc(z_half, -half * w, -np.pi),
            Arc(z_star, (p + t_approach * w) - z_star, 2 * np.pi),
            Arc(z_half, half * w, np.pi),
        )
        small = make_loop(arr, p, pieces)
        t2, e2 = holonomy(conn, small, tol=1e-10)
        s1 = np.sort_complex(np.linalg.eigvals(t1))
        s2 = np.sort_complex(np.linalg.eigvals(t2))
        assert np.linalg.norm(s1 - s2) < 1e-6
        # and the transports agree to the accumulated error bound
        assert np.linalg.norm(t1 - t2) < max(10 * (e1 + e2), 1e-8)

    def test_meridian_determinants(self):
        a = [F(1, 10), F(2, 10), F(3, 10)]
        conn = reduced_residues(a)
        gen = generator_loops(conn.arrangement, seed=0)
        for m, w in zip(gen.meridians, (F(3, 10), F(2, 5), F(1, 2))):
            t, _ = holonomy(conn, m.loop, tol=1e-9)
            assert abs(np.linalg.det(t) - np.exp(2j * np.pi * float(w))) < 1e-6


class TestCentralLoops:
    def test_braid_origin_scalar(self):
        a = [F(1, 10), F(2, 10), F(3, 10)]
        conn = reduced_residues(a)
        origin = flat_from_indices(conn.arrangement, [0, 1, 2])
        report = central_loop_spectrum_check(conn, origin, tol=1e-6)
        assert report.ok, report
        expect = np.exp(2j * np.pi * 0.6)
        assert np.allclose(sorted(report.predicted, key=abs), [expect, expect])

    def test_single_hyperplane_flat(self):
        a = [F(1, 10), F(2, 10), F(3, 10)]
        conn = reduced_residues(a)
        flat = flat_from_indices(conn.arrangement, [0])
        report = central_loop_spectrum_check(conn, flat, tol=1e-6)
        assert report.ok
        assert any(abs(ev - 1) < 1e-12 for ev in report.predicted)

    def test_zero_residues_all_ones(self):
        arr = Arrangement(2, [Hyperplane("h", vec([1, 0]))])
        conn = StandardConnection(arr, {"h": ExactMatrix.zeros(2, 2)})
        flat = flat_from_indices(arr, [0])
        report = central_loop_spectrum_check(conn, flat, tol=1e-8)
        assert report.ok
        assert np.allclose(report.predicted, 1.0)


class TestResidueLimit:
    def test_one_dim_exact_at_all_radii(self):
        conn = one_dim(F(1, 4))
        report = residue_limit_check(conn, "H", [0.5, 0.25, 0.125])
        assert all(e < 1e-7 for e in report.errors)

    def test_boolean_product_exact(self):
        arr = Arrangement(
            2, [Hyperplane("z1", vec([1, 0])), Hyperplane("z2", vec([0, 1]))]
        )
        conn = StandardConnection(
            arr,
            {
                "z1": ExactMatrix([[F(1, 3), 0], [0, 0]]),
                "z2": ExactMatrix([[0, 0], [0, F(1, 5)]]),
            },
        )
        report = residue_limit_check(conn, "z1", [0.4, 0.2])
        assert all(e < 1e-7 for e in report.errors)

    def test_braid_plane_decreasing(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        report = residue_limit_check(conn, "H_1_2", [0.2, 0.1, 0.05])
        assert report.strictly_decreasing, report.errors


class TestInvariantForms:
    def test_identity_generator_full_space(self):
        forms = invariant_forms([np.eye(2)])
        assert len(forms) == 4

    def test_distinct_unitary_diagonal(self):
        t = np.diag([np.exp(0.3j), np.exp(1.1j)])
        forms = invariant_forms([t])
        assert len(forms) == 2
        for f in forms:
            off = abs(f.matrix[0, 1])
            assert off < 1e-9

    def test_braid_plane_form_is_definite(self):
        conn = reduced_residues([F(1, 10), F(1, 10), F(1, 10)])
        rep = holonomy_report(conn, tol=1e-8)
        assert len(rep.invariant_form_basis) == 1
        sig = hermitian_signature(rep.invariant_form_basis[0], tol=1e-6)
        assert sig.as_tuple() in ((0, 2, 0), (2, 0, 0))

    def test_unitarity_transfer(self):
        conn = reduced_residues([F(1, 10), F(1, 10), F(1, 10)])
        rep = holonomy_report(conn, tol=1e-8)
        form = rep.invariant_form_basis[0].matrix
        for t in rep.matrices:
            dev = np.linalg.norm(t.conj().T @ form @ t - form)
            assert dev / np.linalg.norm(form) < 1e-7


class TestIrreducibility:
    def test_scalar_generators_reducible(self):
        verdict = irreducibility([np.eye(2) * 2.0])
        assert verdict.irreducible is False
        assert verdict.invariant_subspace.shape[1] == 1

    def test_degenerate_parameter_invariant_line(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(0)])
        rep = holonomy_report(conn, tol=1e-8)
        verdict = rep.irreducibility
        assert verdict.irreducible is False
        line = verdict.invariant_subspace
        assert line.shape[1] == 1
        direction = line[:, 0] / line[0, 0]
        assert np.allclose(direction, [1.0, 1.0], atol=1e-6)

    def test_generic_braid_plane_irreducible(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        rep = holonomy_report(conn, tol=1e-8)
        assert rep.irreducibility.irreducible is True

    def test_non_invertible_rejected(self):
        with pytest.raises(PreconditionError):
            irreducibility([np.zeros((2, 2))])


class TestReportAssembly:
    def test_loops_selection(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        rep = holonomy_report(conn, tol=1e-8, loops="central")
        assert not rep.matrices and rep.central_matrix is not None
        rep2 = holonomy_report(conn, tol=1e-8, loops="meridians")
        assert len(rep2.matrices) == 3 and rep2.central_matrix is None

    def test_signature_only_for_one_dim_space(self):
        conn = reduced_residues([F(1, 10), F(2, 10), F(3, 10)])
        rep = holonomy_report(conn, tol=1e-8)
        assert rep.signature is not None
        trivial = one_dim(F(0))
        rep0 = holonomy_report(trivial, tol=1e-8)
        assert rep0.signature is not None  # 1-dim space for the 1-dim identity rep
