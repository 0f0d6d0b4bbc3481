"""Tests for the Fock-space / composite operator algebra."""

import numpy as np
import pytest

from snappa import hilbert
from snappa.hilbert import (
    CompositeState,
    HilbertDims,
    annihilation,
    apply,
    cavity_density,
    creation,
    displacement,
    expectation,
    identity,
    number_op,
    parity_op,
    tensor_embed,
)

DIMS = HilbertDims(cavity_levels=12)


class TestDims:
    def test_qubit_levels_fixed(self):
        with pytest.raises(ValueError):
            HilbertDims(qubit_levels=3, cavity_levels=12)

    def test_fock_headroom(self):
        DIMS.check_fock_headroom(5)
        with pytest.raises(ValueError):
            HilbertDims(cavity_levels=6).check_fock_headroom(5)

    def test_index_layout(self):
        # qubit (x) cavity ordering: |n>|e> sits cavity_levels after |n>|g>
        assert DIMS.index(0, 3) == 3
        assert DIMS.index(1, 3) == 12 + 3
        with pytest.raises(ValueError):
            DIMS.index(0, 12)


class TestLadderOperators:
    def test_lowering_action(self):
        a = annihilation(DIMS, "cavity")
        one_g = CompositeState.fock(DIMS, 1)
        lowered = a.matrix @ one_g.data
        vac = CompositeState.fock(DIMS, 0)
        assert np.allclose(lowered, vac.data)

    def test_vacuum_annihilates(self):
        a = annihilation(DIMS, "cavity")
        vac = CompositeState.fock(DIMS, 0)
        assert np.allclose(a.matrix @ vac.data, 0)

    def test_ladder_matrix_element(self):
        # <2|a|3> = sqrt(3)
        a = annihilation(DIMS, "cavity")
        el = a.matrix[DIMS.index(0, 2), DIMS.index(0, 3)]
        assert abs(el - np.sqrt(3)) < 1e-12

    def test_adjoint_exact(self):
        for mode in ("cavity", "qubit"):
            a = annihilation(DIMS, mode)
            assert np.array_equal(a.dag().matrix, creation(DIMS, mode).matrix)

    def test_commutator_below_truncation(self):
        a = annihilation(DIMS, "cavity")
        comm = a.matrix @ a.dag().matrix - a.dag().matrix @ a.matrix
        # rows below the top Fock level obey [a, a^dag] = 1 exactly
        for s in range(2):
            for n in range(DIMS.cavity_levels - 1):
                i = DIMS.index(s, n)
                row = comm[i].copy()
                assert abs(row[i] - 1.0) < 1e-12
                row[i] = 0.0
                assert np.max(np.abs(row)) < 1e-12

    def test_number_equals_adag_a(self):
        a = annihilation(DIMS, "cavity")
        n = number_op(DIMS, "cavity")
        # machine-exact up to sqrt(n)**2 roundoff
        assert np.max(np.abs((a.dag() @ a).matrix - n.matrix)) < 1e-12

    def test_number_diagonal(self):
        n = number_op(DIMS, "cavity")
        for k in range(DIMS.cavity_levels):
            assert n.matrix[DIMS.index(0, k), DIMS.index(0, k)] == k
            assert n.matrix[DIMS.index(1, k), DIMS.index(1, k)] == k


class TestParity:
    def test_eigenvalues(self):
        pi = parity_op(DIMS)
        even = CompositeState.fock(DIMS, 2)
        odd = CompositeState.fock(DIMS, 3, qubit=1)
        assert np.allclose(pi.matrix @ even.data, even.data)
        assert np.allclose(pi.matrix @ odd.data, -odd.data)

    def test_squares_to_identity(self):
        pi = parity_op(DIMS)
        assert np.allclose((pi @ pi).matrix, np.eye(DIMS.total))

    def test_commutes_with_number(self):
        pi, n = parity_op(DIMS), number_op(DIMS)
        assert np.array_equal((pi @ n).matrix, (n @ pi).matrix)


class TestDisplacement:
    def test_zero_is_identity(self):
        d = displacement(DIMS, 0.0)
        assert np.allclose(d.matrix, np.eye(DIMS.total))

    def test_vacuum_overlap_closed_form(self):
        # |<0|D(alpha)|0>|^2 = exp(-|alpha|^2)
        alpha = 0.5
        d = displacement(DIMS, alpha)
        amp = d.matrix[DIMS.index(0, 0), DIMS.index(0, 0)]
        assert abs(abs(amp) ** 2 - np.exp(-abs(alpha) ** 2)) < 1e-10

    def test_inverse_property(self):
        dims = HilbertDims(cavity_levels=20)
        for alpha in (0.7, 1.3 - 0.4j, 2.0j):
            d = displacement(dims, alpha)
            dinv = displacement(dims, -alpha)
            assert np.max(np.abs((d @ dinv).matrix - np.eye(dims.total))) < 1e-8

    def test_unitary_within_safe_region(self):
        dims = HilbertDims(cavity_levels=16)
        d = displacement(dims, 1.9)  # |alpha|^2 < N_c/4
        assert d.unitarity_defect() < 1e-8

    def test_truncation_warning(self):
        with pytest.warns(UserWarning, match="truncation"):
            displacement(DIMS, 2.5)


class TestStateContracts:
    def test_pure_norm_enforced(self):
        vec = np.zeros(DIMS.total, dtype=complex)
        vec[0] = 1.1
        with pytest.raises(ValueError, match="norm"):
            CompositeState(vec, DIMS)

    def test_density_contracts(self):
        rho = np.zeros((DIMS.total, DIMS.total), dtype=complex)
        rho[0, 0] = 0.6
        rho[1, 1] = 0.4
        CompositeState(rho, DIMS, kind="density")
        rho_bad = rho.copy()
        rho_bad[0, 1] = 0.9  # wildly non-positive
        with pytest.raises(ValueError):
            CompositeState(rho_bad, DIMS, kind="density")

    def test_from_cavity_normalizes(self):
        st = CompositeState.from_cavity(DIMS, [0, 1, 0, 1])
        n = number_op(DIMS)
        assert abs(expectation(n, st) - 2.0) < 1e-12


class TestGenericOps:
    def test_parity_expectation_vacuum(self):
        st = CompositeState.fock(DIMS, 0)
        assert abs(expectation(parity_op(DIMS), st) - 1.0) < 1e-12

    def test_apply_identity(self):
        st = CompositeState.from_cavity(DIMS, [0, 1, 0, 1j])
        out = apply(identity(DIMS), st)
        assert np.allclose(out.data, st.data)

    def test_expectation_hand_value(self):
        # <N> of (|1> + |3>)/sqrt(2) (x) |g> is 2
        st = CompositeState.from_cavity(DIMS, [0, 1, 0, 1])
        val = expectation(number_op(DIMS), st)
        assert abs(val - 2.0) < 1e-12
        assert abs(val.imag) < 1e-10

    def test_hermitian_expectation_real(self):
        rng = np.random.default_rng(7)
        h = rng.normal(size=(DIMS.total,) * 2) + 1j * rng.normal(size=(DIMS.total,) * 2)
        h = hilbert.Operator(h + h.conj().T, DIMS)
        vec = rng.normal(size=DIMS.total) + 1j * rng.normal(size=DIMS.total)
        st = CompositeState(vec / np.linalg.norm(vec), DIMS)
        assert abs(expectation(h, st).imag) < 1e-10

    def test_dimension_mismatch(self):
        other = HilbertDims(cavity_levels=8)
        with pytest.raises(ValueError, match="mismatch"):
            apply(identity(other), CompositeState.fock(DIMS, 0))

    def test_tensor_embed_shape_guard(self):
        with pytest.raises(ValueError, match="mismatch"):
            tensor_embed(np.eye(5), DIMS, "cavity")


class TestReducedStates:
    def test_cavity_density_of_product(self):
        st = CompositeState.from_cavity(DIMS, [0, 1, 0, 1], qubit=1)
        rho_c = cavity_density(st)
        assert abs(np.trace(rho_c) - 1) < 1e-12
        assert abs(rho_c[1, 1] - 0.5) < 1e-12
        assert abs(rho_c[3, 1] - 0.5) < 1e-12

    def test_qubit_density_of_entangled(self):
        vec = np.zeros(DIMS.total, dtype=complex)
        vec[DIMS.index(0, 1)] = 1 / np.sqrt(2)
        vec[DIMS.index(1, 2)] = 1 / np.sqrt(2)
        st = CompositeState(vec, DIMS)
        rho_q = hilbert.qubit_density(st)
        assert np.allclose(rho_q, np.diag([0.5, 0.5]))
