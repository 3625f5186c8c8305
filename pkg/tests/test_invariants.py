import numpy as np
import pytest

from acbott import errors
from acbott.invariants import (
    bott_index,
    bott_index_unitaries,
    bott_matrix,
    compressed_index,
    default_circle_functions,
    pf_bott_index,
    pf_bott_unitaries,
    torus_to_sphere,
)
from acbott.matkernel import operator_norm
from acbott.models import (
    LatticeSpec,
    gap_levels,
    harper_projection,
    selfdual_double,
    torus_positions,
    voiculescu,
)
from acbott.relations import sphere_residual
from acbott.symmetry import SymmetryClass, sharp_sharp, tau_residual
from conftest import (
    commuting_selfdual_triple,
    commuting_sphere_triple,
    random_selfdual_hermitian,
    random_symplectic_unitary,
    random_unitary,
    selfdual_direct_sum,
)

PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, 1j], [-1j, 0.0]]),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


class TestCircleFunctions:
    def test_anchor_points(self):
        fns = default_circle_functions()
        assert (fns.f(0.0), fns.g(0.0), fns.h(0.0)) == (1.0, 0.0, 0.0)
        vals = (fns.f(np.pi / 2), fns.g(np.pi / 2), fns.h(np.pi / 2))
        assert vals == pytest.approx((0.0, 0.0, 1.0), abs=1e-15)

    def test_pointwise_invariants_on_grid(self):
        default_circle_functions().validate(grid_points=8192, tol=1e-12)

    def test_g_and_h_nonnegative(self):
        fns = default_circle_functions()
        theta = np.linspace(0, 2 * np.pi, 1000)
        assert np.all(fns.g(theta) >= 0)
        assert np.all(fns.h(theta) >= 0)


class TestBottMatrix:
    def test_third_axis(self):
        I, Z = np.eye(3), np.zeros((3, 3))
        B = bott_matrix(Z, Z, I)
        assert np.allclose(B, np.diag([1, 1, 1, -1, -1, -1]))

    def test_first_axis(self):
        I, Z = np.eye(3), np.zeros((3, 3))
        B = bott_matrix(I, Z, Z)
        assert np.allclose(B, np.block([[Z, I], [I, Z]]))

    def test_equals_pauli_tensor_sum(self, rng):
        Hs = commuting_sphere_triple(rng, 4)
        B = bott_matrix(*Hs)
        ref = sum(np.kron(sigma, H) for H, sigma in zip(Hs, PAULI))
        assert operator_norm(B - ref) <= 1e-13

    def test_selfdual_triple_antifixed_by_coupled_dual(self, rng):
        Hs = [random_selfdual_hermitian(rng, 3) for _ in range(3)]
        B = bott_matrix(*Hs)
        assert operator_norm(sharp_sharp(B) + B) <= 1e-12 * operator_norm(B)

    def test_hermitian_output(self, rng):
        Hs = commuting_sphere_triple(rng, 5)
        B = bott_matrix(*Hs)
        assert operator_norm(B - B.conj().T) <= 1e-13


class TestBottIndex:
    def test_commuting_triple_is_trivial(self, rng):
        H1, H2, H3 = commuting_sphere_triple(rng, 8)
        rep = bott_index(H1, H2, H3)
        assert rep.value == 0
        assert rep.gap > 0
        assert rep.input_residual <= 1e-12

    def test_voiculescu_lift_direct(self):
        # n large enough that the lifted triple passes the 1/4 gate
        A, B = voiculescu(32)
        rep = bott_index(*torus_to_sphere(A, B))
        assert rep.value == 1

    def test_transpose_pair_flips_sign(self):
        A, B = voiculescu(32)
        rep = bott_index(*torus_to_sphere(A.T, B.T))
        assert rep.value == -1

    def test_residual_gate(self):
        Z = np.zeros((4, 4))
        with pytest.raises(errors.ResidualTooLarge):
            bott_index(Z, Z, Z)

    def test_unitary_conjugation_invariance(self, rng):
        A, B = voiculescu(16)
        H = torus_to_sphere(A, B)
        base = bott_index_unitaries(A, B).value
        for _ in range(3):
            U = random_unitary(rng, 16)
            rep = bott_index_unitaries(U @ A @ U.conj().T, U @ B @ U.conj().T)
            assert rep.value == base

    def test_orientation_reversal_flips_index(self):
        A, B = voiculescu(32)
        H1, H2, H3 = torus_to_sphere(A, B)
        assert bott_index(H1, H2, H3).value == -bott_index(H1, -H2, H3).value


class TestPfBottIndex:
    def test_commuting_selfdual_triple(self, rng):
        Hs = commuting_selfdual_triple(rng, 4)
        rep = pf_bott_index(*Hs)
        assert rep.value == 1
        assert rep.symmetry is SymmetryClass.SELF_DUAL

    def test_third_axis_trivial(self):
        n = 6
        Z = np.zeros((n, n))
        rep = pf_bott_index(Z, Z, np.eye(n))
        assert rep.value == 1
        assert rep.gap == pytest.approx(1.0)

    def test_doubled_voiculescu_lift_direct(self):
        V1, V2 = selfdual_double(*voiculescu(32))
        Hs = torus_to_sphere(V1, V2)
        rep = pf_bott_index(*Hs)
        assert rep.value == -1

    def test_not_selfdual_rejected(self, rng):
        H1, H2, H3 = commuting_sphere_triple(rng, 6)
        with pytest.raises(errors.NotSelfDual):
            pf_bott_index(H1, H2, H3)

    def test_symplectic_conjugation_invariance(self, rng):
        Hs = commuting_selfdual_triple(rng, 3)
        base = pf_bott_index(*Hs).value
        for _ in range(3):
            V = random_symplectic_unitary(rng, 3)
            rep = pf_bott_index(*(V @ H @ V.conj().T for H in Hs))
            assert rep.value == base


class TestTorusToSphere:
    def test_identity_second_unitary(self, rng):
        n = 5
        U1 = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, n)))
        H1, H2, H3 = torus_to_sphere(U1, np.eye(n))
        assert operator_norm(H1 - np.eye(n)) <= 1e-12
        assert operator_norm(H2) <= 1e-12
        assert operator_norm(H3) <= 1e-12

    def test_sphere_residual_decreases(self):
        deltas = [
            sphere_residual(*torus_to_sphere(*voiculescu(n))).delta
            for n in (8, 16, 32, 64)
        ]
        assert all(a > b for a, b in zip(deltas, deltas[1:]))

    def test_hermitian_outputs(self):
        A, B = voiculescu(12)
        for H in torus_to_sphere(A, B):
            assert operator_norm(H - H.conj().T) <= 1e-10

    def test_symmetric_inputs_give_symmetric_outputs(self, rng):
        # complex symmetric unitaries: U = exp(i S) with S real symmetric
        n = 6
        S1 = rng.standard_normal((n, n))
        S1 = (S1 + S1.T) / 2
        S2 = rng.standard_normal((n, n))
        S2 = (S2 + S2.T) / 2
        w1, V1 = np.linalg.eigh(S1)
        w2, V2 = np.linalg.eigh(S2)
        U1 = (V1 * np.exp(1j * w1)) @ V1.T
        U2 = (V2 * np.exp(1j * w2)) @ V2.T
        for H in torus_to_sphere(U1, U2):
            assert tau_residual(H, SymmetryClass.SYMMETRIC) <= 1e-10

    def test_selfdual_inputs_give_selfdual_outputs(self):
        V1, V2 = selfdual_double(*voiculescu(8))
        for H in torus_to_sphere(V1, V2):
            assert tau_residual(H, SymmetryClass.SELF_DUAL) <= 1e-10

    def test_non_unitary_rejected(self, rng):
        with pytest.raises(errors.NotUnitary):
            torus_to_sphere(np.eye(4), 2 * np.eye(4))


class TestUnitaryIndices:
    def test_voiculescu_bott_one(self):
        for n in (4, 16, 64):
            A, B = voiculescu(n)
            assert bott_index_unitaries(A, B).value == 1

    def test_commuting_unitaries_trivial(self, rng):
        n = 8
        U1 = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, n)))
        U2 = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, n)))
        assert bott_index_unitaries(U1, U2).value == 0

    def test_doubled_pair(self):
        V1, V2 = selfdual_double(*voiculescu(16))
        assert pf_bott_unitaries(V1, V2).value == -1
        assert bott_index_unitaries(V1, V2).value == 0

    def test_near_unitary_polar_correction(self, rng):
        A, B = voiculescu(16)
        A = A * 1.05  # 5 percent off unitary, within the admissible band
        assert bott_index_unitaries(A, B).value == 1

    def test_far_from_unitary_rejected(self):
        A, B = voiculescu(8)
        with pytest.raises(errors.NotUnitary):
            bott_index_unitaries(1.5 * A, B)

    def test_bott_additive_under_direct_sum(self):
        A1, B1 = voiculescu(16)
        A2, B2 = voiculescu(24)

        def dsum(X, Y):
            n, m = X.shape[0], Y.shape[0]
            out = np.zeros((n + m, n + m), dtype=complex)
            out[:n, :n] = X
            out[n:, n:] = Y
            return out

        combined = bott_index_unitaries(dsum(A1, A2), dsum(B1, B2))
        assert combined.value == 2  # 1 + 1

    def test_pf_bott_multiplicative_under_direct_sum(self, rng):
        V1, V2 = selfdual_double(*voiculescu(8))  # class -1
        T1, T2 = (np.eye(8, dtype=complex), np.eye(8, dtype=complex))  # class +1
        W1 = selfdual_direct_sum(V1, T1)
        W2 = selfdual_direct_sum(V2, T2)
        assert tau_residual(W1, SymmetryClass.SELF_DUAL) <= 1e-12
        rep = pf_bott_unitaries(W1, W2)
        assert rep.value == -1  # (-1) * (+1)
        both = pf_bott_unitaries(selfdual_direct_sum(V1, V1), selfdual_direct_sum(V2, V2))
        assert both.value == 1  # (-1) * (-1)


class TestCompressedIndex:
    def test_full_projection_matches_uncompressed(self, rng):
        spec = LatticeSpec(L=4)
        Xs = torus_positions(spec)
        n = Xs[0].shape[0]
        rep = compressed_index(np.eye(n), Xs, seed=3)
        U1 = Xs[0] + 1j * Xs[1]
        U2 = Xs[2] + 1j * Xs[3]
        direct = bott_index_unitaries(U1, U2)
        assert rep.value == direct.value == 0

    def test_seed_independence(self):
        fermi = gap_levels(12, 1 / 3, [1 / 3])[0]
        spec = LatticeSpec(L=12, flux=1 / 3, fermi_level=fermi)
        P, _ = harper_projection(spec)
        Xs = torus_positions(spec)
        reports = [compressed_index(P, Xs, comm_tol=0.5, seed=s) for s in (1, 2, 5)]
        assert len({rep.value for rep in reports}) == 1
        for rep in reports:
            # the compressed tuple is a soft-torus representation at 2 delta
            assert rep.input_residual <= 2 * rep.details["delta_commutator"] + 1e-9

    def test_projection_perturbation_stability(self):
        fermi = gap_levels(12, 1 / 3, [1 / 3])[0]
        spec = LatticeSpec(L=12, flux=1 / 3, fermi_level=fermi)
        P, _ = harper_projection(spec)
        Xs = torus_positions(spec)
        base = compressed_index(P, Xs, comm_tol=0.5).value
        rng = np.random.default_rng(4)
        noise = rng.standard_normal(P.shape) + 1j * rng.standard_normal(P.shape)
        noise = (noise + noise.conj().T) / 2
        noise *= 1e-3 / operator_norm(noise)
        w, V = np.linalg.eigh(P + noise)
        occ = V[:, w > 0.5]
        P2 = occ @ occ.conj().T  # reprojected
        assert compressed_index(P2, Xs, comm_tol=0.5).value == base

    def test_commutator_gate(self):
        fermi = gap_levels(12, 1 / 3, [1 / 3])[0]
        spec = LatticeSpec(L=12, flux=1 / 3, fermi_level=fermi)
        P, _ = harper_projection(spec)
        Xs = torus_positions(spec)
        with pytest.raises(errors.CommutatorTooLarge):
            compressed_index(P, Xs)  # default 1/8 gate; this lattice sits at ~0.32

    def test_not_projection_rejected(self, rng):
        spec = LatticeSpec(L=3)
        Xs = torus_positions(spec)
        bad = np.eye(9) * 0.5
        with pytest.raises(errors.NotProjection):
            compressed_index(bad, Xs)
