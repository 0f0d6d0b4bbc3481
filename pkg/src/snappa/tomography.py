"""Wigner tomography, simulated parity readout and state reconstruction.

The Wigner function is sampled in its displaced-parity form
W(alpha) = (2/pi) Tr[D^dag(alpha) rho D(alpha) Pi]. Displacement matrices are
evaluated in an enlarged working space so that the sampled values are exact
for the truncated input state even at grid-edge amplitudes; only the
Fock-corner of the displaced-parity operator enters the trace.

Reconstruction inverts the linear Wigner map by least squares over a
Cholesky-factor parametrization rho = T^dag T / Tr[T^dag T], which keeps the
iterate physical (Hermitian, unit trace, positive) at every step.
"""

from __future__ import annotations

import hashlib
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .hamiltonian import SystemParams
from .hilbert import (
    CompositeState,
    HilbertDims,
    cavity_density,
    qubit_density,
    tensor_embed,
)

TWO_OVER_PI = 2.0 / math.pi


class GridConditionError(ValueError):
    """Grid too small or too sparse to condition the reconstruction."""


@dataclass
class WignerGrid:
    """Sampled Wigner values over a set of complex displacement amplitudes.

    ``values`` are in parity-form units (bounded by 2/pi); ``meta`` records
    grid spacing/extent and the sampled state dimension where known.
    """

    alphas: np.ndarray
    values: np.ndarray
    meta: dict

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=complex).ravel()
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.alphas.shape != self.values.shape:
            raise ValueError("alphas and values must align")

    def check_bound(self, tol: float = 1e-6):
        peak = float(np.max(np.abs(self.values)))
        if peak > TWO_OVER_PI + tol:
            raise ValueError(f"|W| = {peak} exceeds the 2/pi bound")

    def integral(self) -> float:
        """Discretized integral of W d^2alpha (= trace for a wide fine grid)."""
        spacing = self.meta.get("spacing")
        if spacing is None:
            raise ValueError("grid spacing unknown; cannot integrate")
        return float(np.sum(self.values) * spacing ** 2)


# ---------------------------------------------------------------------------
# displaced-parity operators


_LADDER_EIG_CACHE: dict = {}
_GRID_OPS_CACHE: dict = {}


def _ladder_eig(nwork: int):
    """Eigendecomposition of i(a^dag - a); D(r) = V e^{-i r lam} V^dag."""
    if nwork not in _LADDER_EIG_CACHE:
        a = np.diag(np.sqrt(np.arange(1, nwork, dtype=float)), k=1)
        herm = 1j * (a.conj().T - a)
        _LADDER_EIG_CACHE[nwork] = np.linalg.eigh(herm)
    return _LADDER_EIG_CACHE[nwork]


def _working_dim(dim: int, amax: float) -> int:
    """Fock truncation large enough for exact corner elements of D(alpha)."""
    need = int(math.ceil((amax + math.sqrt(dim) + 4.0) ** 2))
    need = max(2 * dim, need)
    return ((need + 15) // 16) * 16  # quantize to keep the eig cache small


def _displacement_rows(dim: int, alpha: complex, nwork: int) -> np.ndarray:
    """First ``dim`` rows of D(alpha) at working truncation ``nwork``.

    Uses D(alpha) = R(phi) D(|alpha|) R(phi)^dag with R = e^{i phi n}, so one
    cached eigendecomposition serves every amplitude.
    """
    lam, v = _ladder_eig(nwork)
    r = abs(alpha)
    phi = np.angle(alpha) if r > 0 else 0.0
    rows = (v[:dim] * np.exp(-1j * r * lam)) @ v.conj().T
    phase = np.exp(1j * phi * np.arange(nwork))
    return phase[:dim, None] * rows * phase[None, :].conj()


def displaced_parity_corner(dim: int, alpha: complex) -> np.ndarray:
    """The operator D(alpha) Pi D^dag(alpha) restricted to the Fock corner.

    Exact for states supported on the corner: W = (2/pi) Tr[rho . corner].
    """
    nwork = _working_dim(dim, abs(alpha))
    if nwork > 4096:
        warnings.warn(
            f"displacement amplitude |alpha|^2 = {abs(alpha)**2:.1f} exceeds "
            f"the supported working truncation (|alpha|^2 > N_c/4 regime); "
            "values may be truncated", stacklevel=2)
    rows = _displacement_rows(dim, alpha, nwork)
    parity = (-1.0) ** np.arange(nwork)
    return (rows * parity) @ rows.conj().T


def _grid_operators(alphas: np.ndarray, dim: int) -> np.ndarray:
    """Stacked displaced-parity corners for a set of amplitudes, cached."""
    key = (hashlib.sha1(np.round(alphas, 12).tobytes()).hexdigest(), dim)
    if key not in _GRID_OPS_CACHE:
        ops = np.stack([displaced_parity_corner(dim, a) for a in alphas])
        _GRID_OPS_CACHE[key] = ops
    return _GRID_OPS_CACHE[key]


# ---------------------------------------------------------------------------
# Wigner sampling


def wigner_point(rho_cavity: np.ndarray, alpha: complex) -> float:
    """W(alpha) = (2/pi) Tr[D^dag(alpha) rho D(alpha) Pi] for a cavity state."""
    rho = np.asarray(rho_cavity, dtype=complex)
    corner = displaced_parity_corner(rho.shape[0], alpha)
    return TWO_OVER_PI * float(np.real(np.trace(rho @ corner)))


def wigner_grid(rho_cavity: np.ndarray, extent: float = 3.2,
                spacing: float = 0.16) -> WignerGrid:
    """Sample W on a square grid alpha = x + i y, |x|,|y| <= extent."""
    rho = np.asarray(rho_cavity, dtype=complex)
    n_side = int(round(2 * extent / spacing)) + 1
    axis = -extent + spacing * np.arange(n_side)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    alphas = (xs + 1j * ys).ravel()
    ops = _grid_operators(alphas, rho.shape[0])
    values = TWO_OVER_PI * np.real(np.einsum("pnm,mn->p", ops, rho))
    grid = WignerGrid(alphas, values, meta={
        "extent": extent, "spacing": spacing, "n_side": n_side,
        "dim": rho.shape[0]})
    grid.check_bound()
    return grid


# ---------------------------------------------------------------------------
# simulated Ramsey parity readout


def ramsey_parity_readout(state: CompositeState, alpha: complex,
                          params: SystemParams) -> float:
    """Displaced-parity measurement through the qubit.

    Sequence: cavity displacement by -alpha, ideal pi/2 qubit rotation, free
    evolution for 1/(2 chi) under the dispersive interaction (the |e> branch
    acquires e^{i pi n}), second pi/2 rotation, then <sigma_z> with
    sigma_z = |e><e| - |g><g|. Equals (pi/2) W(alpha) for an unentangled |g>
    input under these ideal settings.
    """
    dims = state.dims
    nc = dims.cavity_levels
    # pad the cavity so the displacement stays exact for the truncated input
    nw = _working_dim(nc, abs(alpha)) if alpha != 0 else nc
    rho_small = state.density_matrix().reshape(2, nc, 2, nc)
    rho = np.zeros((2, nw, 2, nw), dtype=complex)
    rho[:, :nc, :, :nc] = rho_small
    rho = rho.reshape(2 * nw, 2 * nw)

    n = np.arange(nw)
    lam, v = _ladder_eig(nw)
    r = abs(alpha)
    phi = np.angle(-alpha) if r > 0 else 0.0
    d_radial = (v * np.exp(-1j * r * lam)) @ v.conj().T
    phase = np.exp(1j * phi * n)
    disp = phase[:, None] * d_radial * phase[None, :].conj()  # D(-alpha)
    d_full = np.kron(np.eye(2), disp)
    rho = d_full @ rho @ d_full.conj().T

    ry = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2)  # e^{-i pi/4 sig_y}
    r_full = np.kron(ry, np.eye(nw))
    # dispersive interaction -chi n |e><e| for T = pi/chi: e branch gets (-1)^n
    delay = np.kron(np.diag([1.0, 0.0]), np.eye(nw)) \
        + np.kron(np.diag([0.0, 1.0]), np.diag(np.exp(1j * np.pi * n)))
    u = r_full @ delay @ r_full
    rho = u @ rho @ u.conj().T
    rho4 = rho.reshape(2, nw, 2, nw)
    rq = np.einsum("sntn->st", rho4)
    rq /= np.real(np.trace(rq))
    return float(np.real(rq[1, 1] - rq[0, 0]))


def qubit_population(state: CompositeState) -> float:
    """Excited-state population Tr[(|e><e| (x) I) rho]."""
    return float(np.real(qubit_density(state)[1, 1]))


# ---------------------------------------------------------------------------
# metrics


def fidelity(rho, target_pure) -> float:
    """<psi|rho|psi> against a pure target (the fixed fidelity convention).

    ``rho`` may be a density matrix or a pure state vector; the target is
    zero-padded to the state dimension.
    """
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(target_pure, dtype=complex)
    dim = rho.shape[0]
    if psi.size > dim:
        if np.max(np.abs(psi[dim:])) > 1e-12:
            raise ValueError("target extends beyond the state dimension")
        psi = psi[:dim]
    elif psi.size < dim:
        psi = np.pad(psi, (0, dim - psi.size))
    psi = psi / np.linalg.norm(psi)
    if rho.ndim == 1:
        return float(abs(np.vdot(psi, rho)) ** 2)
    return float(np.real(psi.conj() @ rho @ psi))


def trace_distance(rho1, rho2) -> float:
    """0.5 * ||rho1 - rho2||_1 for Hermitian inputs."""
    eigs = np.linalg.eigvalsh(np.asarray(rho1) - np.asarray(rho2))
    return 0.5 * float(np.sum(np.abs(eigs)))


# ---------------------------------------------------------------------------
# reconstruction


@dataclass
class ReconstructionResult:
    rho: np.ndarray
    residual: float
    iterations: int


def _hermitian_lstsq(ops: np.ndarray, values: np.ndarray,
                     dim: int) -> np.ndarray:
    """Unconstrained Hermitian least-squares seed for the physical fit."""
    npts = ops.shape[0]
    cols = []
    for k in range(dim):
        cols.append(np.real(ops[:, k, k]))
    iu, ju = np.triu_indices(dim, k=1)
    for m, n in zip(iu, ju):
        cols.append(2.0 * np.real(ops[:, n, m]))
    for m, n in zip(iu, ju):
        cols.append(-2.0 * np.imag(ops[:, n, m]))
    a = np.column_stack(cols) * TWO_OVER_PI
    x, *_ = np.linalg.lstsq(a, values, rcond=None)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[np.arange(dim), np.arange(dim)] = x[:dim]
    off = dim + iu.size
    rho[iu, ju] = x[dim:off] + 1j * x[off:]
    rho[ju, iu] = np.conj(rho[iu, ju])
    return rho


def reconstruct(grid: WignerGrid, fock_cut: int,
                max_iterations: int = 500) -> ReconstructionResult:
    """Fit a physical density matrix to sampled Wigner values.

    Least squares through the linear Wigner map with the iterate parametrized
    as rho = T^dag T / Tr[T^dag T] (T lower triangular), so Hermiticity, unit
    trace and positivity hold by construction. Seeded from the unconstrained
    Hermitian solve projected onto the physical cone.
    """
    alphas, values = grid.alphas, grid.values
    width = max(np.ptp(alphas.real), np.ptp(alphas.imag))
    if width < 2.0 + math.sqrt(fock_cut):
        raise GridConditionError(
            f"grid width {width:.2f} below the conditioning bound "
            f"{2 + math.sqrt(fock_cut):.2f} for fock_cut={fock_cut}")
    if alphas.size < fock_cut ** 2:
        raise GridConditionError(
            f"{alphas.size} points cannot condition fock_cut={fock_cut}")

    ops = _grid_operators(alphas, fock_cut)
    seed = _hermitian_lstsq(ops, values, fock_cut)
    vals, vecs = np.linalg.eigh(0.5 * (seed + seed.conj().T))
    vals = np.clip(vals, 1e-10, None)
    seed_psd = (vecs * vals) @ vecs.conj().T
    seed_psd /= np.real(np.trace(seed_psd))
    t0 = np.linalg.cholesky(seed_psd + 1e-10 * np.eye(fock_cut)).conj().T

    tril = np.tril_indices(fock_cut)

    def pack(tmat):
        lower = tmat.conj().T[tril]
        return np.concatenate([lower.real, lower.imag])

    def unpack(x):
        half = x.size // 2
        t = np.zeros((fock_cut, fock_cut), dtype=complex)
        t[tril] = x[:half] + 1j * x[half:]
        return t.conj().T

    def cost_grad(x):
        t = unpack(x)
        gram = t.conj().T @ t
        tau = float(np.real(np.trace(gram)))
        rho = gram / tau
        model = TWO_OVER_PI * np.real(np.einsum("pnm,mn->p", ops, rho))
        resid = model - values
        cost = float(resid @ resid)
        m = TWO_OVER_PI * np.einsum("p,pmn->mn", 2.0 * resid, ops)
        m = 0.5 * (m + m.conj().T)
        b = m - np.real(np.trace(m @ rho)) * np.eye(fock_cut)
        tb = (t @ b) * (2.0 / tau)
        lower = tb.conj().T[tril]  # gradient wrt the packed lower-tri entries
        grad = np.concatenate([lower.real, lower.imag])
        return cost, grad

    res = minimize(cost_grad, pack(t0), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iterations, "ftol": 1e-18,
                            "gtol": 1e-14})
    t = unpack(res.x)
    gram = t.conj().T @ t
    rho = gram / np.real(np.trace(gram))
    model = TWO_OVER_PI * np.real(np.einsum("pnm,mn->p", ops, rho))
    residual = float(np.sqrt(np.mean((model - values) ** 2)))
    return ReconstructionResult(rho=rho, residual=residual,
                                iterations=int(res.nit))


# ---------------------------------------------------------------------------
# CSV interchange


def write_wigner_csv(path, grid: WignerGrid):
    """Serialize a grid with a self-describing metadata header."""
    buf = io.StringIO()
    buf.write("# wigner grid, parity-form normalization (2/pi bound)\n")
    for key in ("extent", "spacing", "n_side", "dim"):
        if key in grid.meta:
            buf.write(f"# {key} = {grid.meta[key]!r}\n")
    buf.write("re_alpha,im_alpha,value\n")
    for a, v in zip(grid.alphas, grid.values):
        buf.write(f"{float(a.real)!r},{float(a.imag)!r},{float(v)!r}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_wigner_csv(path) -> WignerGrid:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, _, val = line.lstrip("# ").partition("=")
                    val = val.strip()
                    try:
                        meta[key.strip()] = int(val)
                    except ValueError:
                        try:
                            meta[key.strip()] = float(val)
                        except ValueError:
                            meta[key.strip()] = val
                continue
            if line.startswith("re_alpha"):
                continue
            re_a, im_a, val = line.split(",")
            rows.append((float(re_a), float(im_a), float(val)))
    data = np.asarray(rows)
    return WignerGrid(data[:, 0] + 1j * data[:, 1], data[:, 2], meta)
