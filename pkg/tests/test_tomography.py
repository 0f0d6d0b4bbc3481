"""Tests for Wigner sampling, parity readout and reconstruction."""

import math

import numpy as np
import pytest

from snappa.hilbert import CompositeState, HilbertDims, displacement_matrix
from snappa.tomography import (
    TWO_OVER_PI,
    GridConditionError,
    ReconstructionResult,
    WignerGrid,
    fidelity,
    qubit_population,
    ramsey_parity_readout,
    read_wigner_csv,
    reconstruct,
    trace_distance,
    wigner_grid,
    wigner_point,
    write_wigner_csv,
)

from oracles import wigner_fock_element, wigner_series

DIMS = HilbertDims(cavity_levels=12)


def pure_rho(amps, dim=12):
    psi = np.zeros(dim, dtype=complex)
    amps = np.asarray(amps, dtype=complex)
    psi[:amps.size] = amps
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_pure(rng, support, dim=12):
    amps = rng.normal(size=support) + 1j * rng.normal(size=support)
    return pure_rho(amps, dim)


class TestWignerPoint:
    def test_vacuum_origin(self):
        assert wigner_point(pure_rho([1]), 0) == pytest.approx(TWO_OVER_PI)

    def test_fock1_origin(self):
        assert wigner_point(pure_rho([0, 1]), 0) == pytest.approx(-TWO_OVER_PI)

    def test_even_pair_against_series_oracle(self):
        # the point used for drive-phase calibration of the (1,3) pair
        rho = pure_rho([0, 0, 1, 0, 1])
        alpha = 0.44 + 0.0j
        assert abs(wigner_point(rho, alpha) - wigner_series(rho, alpha)) < 1e-8

    def test_oracle_agreement_random_states(self, rng):
        for _ in range(10):
            rho = random_pure(rng, 7)
            alpha = complex(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5))
            assert abs(wigner_point(rho, alpha) - wigner_series(rho, alpha)) \
                < 1e-8

    def test_displacement_rows_match_direct_matrix(self, rng):
        # the rotated-radial evaluation equals a direct matrix exponential
        from snappa.tomography import _displacement_rows
        alpha = 0.9 - 0.4j
        nwork = 48
        rows = _displacement_rows(12, alpha, nwork)
        direct = displacement_matrix(nwork, alpha)[:12]
        assert np.max(np.abs(rows - direct)) < 1e-10

    def test_linearity_in_rho(self, rng):
        r1 = random_pure(rng, 6)
        r2 = random_pure(rng, 6)
        alpha = 0.7 + 0.2j
        for lam in (0.0, 0.3, 0.8, 1.0):
            mix = lam * r1 + (1 - lam) * r2
            want = lam * wigner_point(r1, alpha) \
                + (1 - lam) * wigner_point(r2, alpha)
            assert abs(wigner_point(mix, alpha) - want) < 1e-10


class TestWignerGrid:
    def test_vacuum_shape(self):
        grid = wigner_grid(pure_rho([1]), extent=2.0, spacing=0.2)
        assert grid.values.max() == pytest.approx(TWO_OVER_PI, abs=1e-9)
        center = np.argmin(np.abs(grid.alphas))
        assert grid.values[center] == pytest.approx(TWO_OVER_PI, abs=1e-12)
        # radial symmetry: values depend on |alpha| only
        radii = np.round(np.abs(grid.alphas), 10)
        for r in np.unique(radii)[:10]:
            sel = grid.values[radii == r]
            assert np.ptp(sel) < 1e-10

    def test_integral_near_trace(self, rng):
        for rho in (pure_rho([0, 1, 0, 1]), random_pure(rng, 5)):
            grid = wigner_grid(rho, extent=3.2, spacing=0.16)
            assert abs(grid.integral() - 1.0) < 0.02

    def test_odd_pair_origin(self):
        grid = wigner_grid(pure_rho([0, 1, 0, 1]), extent=1.0, spacing=0.5)
        center = np.argmin(np.abs(grid.alphas))
        assert grid.values[center] == pytest.approx(-TWO_OVER_PI, abs=1e-10)

    def test_bound_holds(self, rng):
        grid = wigner_grid(random_pure(rng, 8), extent=3.2, spacing=0.32)
        grid.check_bound()
        assert np.max(np.abs(grid.values)) <= TWO_OVER_PI + 1e-6


class TestRamseyReadout:
    def test_vacuum_even(self, params):
        st = CompositeState.fock(DIMS, 0)
        assert ramsey_parity_readout(st, 0.0, params) == pytest.approx(1.0)

    def test_fock1_odd(self, params):
        st = CompositeState.fock(DIMS, 1)
        assert ramsey_parity_readout(st, 0.0, params) == pytest.approx(-1.0)

    def test_matches_wigner_for_ground_inputs(self, params, rng):
        for _ in range(20):
            amps = rng.normal(size=6) + 1j * rng.normal(size=6)
            st = CompositeState.from_cavity(DIMS, amps)
            alpha = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            rho_c = pure_rho(amps / np.linalg.norm(amps))
            want = wigner_point(rho_c, alpha) * math.pi / 2
            got = ramsey_parity_readout(st, alpha, params)
            assert abs(got - want) < 1e-3

    def test_excited_input_inverts(self, params):
        st = CompositeState.fock(DIMS, 0, qubit=1)
        assert ramsey_parity_readout(st, 0.0, params) == pytest.approx(-1.0)


class TestMetrics:
    def test_fidelity_pure_identity(self, rng):
        rho = random_pure(rng, 5)
        vec = np.linalg.eigh(rho)[1][:, -1]
        assert fidelity(rho, vec) == pytest.approx(1.0)

    def test_fidelity_maximally_mixed(self):
        d = 8
        rho = np.eye(d) / d
        psi = np.zeros(d)
        psi[3] = 1.0
        assert fidelity(rho, psi) == pytest.approx(1 / d)

    def test_qubit_population(self):
        assert qubit_population(CompositeState.fock(DIMS, 4)) == 0
        assert qubit_population(CompositeState.fock(DIMS, 4, qubit=1)) == 1

    def test_trace_distance_basics(self):
        r1 = pure_rho([1])
        r2 = pure_rho([0, 1])
        assert trace_distance(r1, r1) == pytest.approx(0.0)
        assert trace_distance(r1, r2) == pytest.approx(1.0)


class TestReconstruction:
    def test_vacuum_round_trip(self):
        grid = wigner_grid(pure_rho([1], dim=7), extent=3.2, spacing=0.16)
        result = reconstruct(grid, fock_cut=7)
        psi = np.zeros(7)
        psi[0] = 1
        assert fidelity(result.rho, psi) >= 0.999
        assert result.residual < 1e-8

    def test_noiseless_round_trip_random(self, rng):
        for _ in range(5):
            rho = random_pure(rng, 6, dim=6)
            grid = wigner_grid(rho, extent=3.2, spacing=0.16)
            result = reconstruct(grid, fock_cut=6)
            assert trace_distance(result.rho, rho) < 1e-4

    def test_noisy_pure_state(self, rng):
        psi = np.zeros(7, dtype=complex)
        psi[2] = 1 / math.sqrt(2)
        psi[4] = 1j / math.sqrt(2)  # relative phase pi/2
        rho = np.outer(psi, psi.conj())
        grid = wigner_grid(rho, extent=3.2, spacing=0.16)
        noisy = WignerGrid(grid.alphas,
                           grid.values + rng.normal(0, 0.01, grid.values.size),
                           grid.meta)
        result = reconstruct(noisy, fock_cut=7)
        assert fidelity(result.rho, psi) >= 0.99

    def test_noisy_rank2_mixed(self, rng):
        r1 = random_pure(rng, 6, dim=6)
        r2 = random_pure(rng, 6, dim=6)
        rho = 0.65 * r1 + 0.35 * r2
        grid = wigner_grid(rho, extent=3.2, spacing=0.16)
        noisy = WignerGrid(grid.alphas,
                           grid.values + rng.normal(0, 0.01, grid.values.size),
                           grid.meta)
        result = reconstruct(noisy, fock_cut=6)
        assert trace_distance(result.rho, rho) <= 0.02

    def test_conditioning_guards(self):
        rho = pure_rho([1], dim=7)
        small = wigner_grid(rho, extent=1.0, spacing=0.2)
        with pytest.raises(GridConditionError, match="width"):
            reconstruct(small, fock_cut=7)
        sparse = wigner_grid(rho, extent=3.2, spacing=1.3)
        with pytest.raises(GridConditionError, match="points"):
            reconstruct(sparse, fock_cut=7)

    def test_gradient_matches_numeric(self, rng):
        # analytic gradient of the Cholesky-parametrized cost
        from snappa.tomography import _grid_operators
        rho = random_pure(rng, 4, dim=4)
        grid = wigner_grid(rho, extent=3.2, spacing=0.4)
        # reproduce the internal cost at a random parameter point
        import snappa.tomography as tomo
        fock_cut = 4
        ops = _grid_operators(grid.alphas, fock_cut)
        tril = np.tril_indices(fock_cut)

        def unpack(x):
            half = x.size // 2
            t = np.zeros((fock_cut, fock_cut), dtype=complex)
            t[tril] = x[:half] + 1j * x[half:]
            return t.conj().T

        def cost(x):
            t = unpack(x)
            gram = t.conj().T @ t
            r = gram / np.real(np.trace(gram))
            model = tomo.TWO_OVER_PI * np.real(
                np.einsum("pnm,mn->p", ops, r))
            resid = model - grid.values
            return float(resid @ resid)

        npar = 2 * (fock_cut * (fock_cut + 1) // 2)
        x0 = rng.normal(size=npar)

        t = unpack(x0)
        gram = t.conj().T @ t
        tau = float(np.real(np.trace(gram)))
        rho_x = gram / tau
        model = tomo.TWO_OVER_PI * np.real(np.einsum("pnm,mn->p", ops, rho_x))
        resid = model - grid.values
        m = tomo.TWO_OVER_PI * np.einsum("p,pmn->mn", 2.0 * resid, ops)
        m = 0.5 * (m + m.conj().T)
        b = m - np.real(np.trace(m @ rho_x)) * np.eye(fock_cut)
        tb = (t @ b) * (2.0 / tau)
        lower = tb.conj().T[tril]
        grad = np.concatenate([lower.real, lower.imag])

        eps = 1e-6
        for k in rng.choice(npar, size=6, replace=False):
            dx = np.zeros(npar)
            dx[k] = eps
            numeric = (cost(x0 + dx) - cost(x0 - dx)) / (2 * eps)
            assert abs(numeric - grad[k]) < 1e-6 * max(1.0, abs(numeric))


class TestCsvInterchange:
    def test_round_trip(self, tmp_path, rng):
        rho = random_pure(rng, 5)
        grid = wigner_grid(rho, extent=2.0, spacing=0.25)
        path = tmp_path / "grid.csv"
        write_wigner_csv(path, grid)
        back = read_wigner_csv(path)
        assert np.array_equal(back.alphas, grid.alphas)
        assert np.array_equal(back.values, grid.values)
        assert back.meta["spacing"] == 0.25

    def test_reconstruct_from_file(self, tmp_path):
        rho = pure_rho([0, 0, 1, 0, 1], dim=7)
        grid = wigner_grid(rho, extent=3.2, spacing=0.16)
        path = tmp_path / "grid.csv"
        write_wigner_csv(path, grid)
        result = reconstruct(read_wigner_csv(path), fock_cut=7)
        psi = np.zeros(7)
        psi[2] = psi[4] = 1 / math.sqrt(2)
        assert fidelity(result.rho, psi) >= 0.999
