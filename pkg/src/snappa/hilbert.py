"""Finite-dimensional Fock-space and composite-system operator algebra.

The composite space is qubit (x) cavity, in that tensor order everywhere.
A composite basis ket is indexed ``s * cavity_levels + n`` where ``s`` is the
qubit level (0 = g, 1 = e) and ``n`` the cavity Fock index. All operators are
dense complex matrices; at the working dimensions (<= ~40) dense linear
algebra is both exact-to-tolerance and fast.

Matrix exponentials of (anti-)Hermitian generators are computed by Hermitian
diagonalization rather than scaling-and-squaring, which keeps unitarity at
machine precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

PURE_NORM_TOL = 1e-9
TRACE_TOL = 1e-7
HERMITICITY_TOL = 1e-9
EIGENVALUE_TOL = 1e-8


@dataclass(frozen=True)
class HilbertDims:
    """Dimensions of the qubit (x) cavity space.

    ``qubit_levels`` is fixed at 2: the qubit anharmonicity far exceeds the
    drive bandwidth, so higher transmon levels never participate.
    ``cavity_levels`` is the Fock truncation N_c.
    """

    qubit_levels: int = 2
    cavity_levels: int = 12

    def __post_init__(self):
        if self.qubit_levels != 2:
            raise ValueError("qubit_levels is fixed at 2")
        if self.cavity_levels < 2:
            raise ValueError("cavity_levels must be at least 2")

    @property
    def total(self) -> int:
        return self.qubit_levels * self.cavity_levels

    def index(self, qubit: int, fock: int) -> int:
        """Flat index of |fock>|qubit> with qubit in {0, 1}."""
        if not 0 <= qubit < self.qubit_levels:
            raise ValueError(f"qubit level {qubit} out of range")
        if not 0 <= fock < self.cavity_levels:
            raise ValueError(f"Fock index {fock} out of truncation "
                             f"(cavity_levels={self.cavity_levels})")
        return qubit * self.cavity_levels + fock

    def check_fock_headroom(self, n_max: int):
        """Require cavity_levels >= n_max + 3 for the largest addressed Fock index."""
        if self.cavity_levels < n_max + 3:
            raise ValueError(
                f"cavity_levels={self.cavity_levels} too small for n_max={n_max}; "
                f"need at least {n_max + 3}")


@dataclass(frozen=True)
class Operator:
    """A dense operator on the composite space, tagged with its dimensions."""

    matrix: np.ndarray
    dims: HilbertDims

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        if mat.shape != (self.dims.total, self.dims.total):
            raise ValueError(
                f"matrix shape {mat.shape} inconsistent with dims {self.dims}")

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return Operator(self.matrix @ other.matrix, self.dims)

    def __add__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return Operator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return Operator(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return np.max(np.abs(self.matrix - self.matrix.conj().T)) < tol

    def unitarity_defect(self) -> float:
        d = self.matrix.conj().T @ self.matrix - np.eye(self.dims.total)
        return float(np.max(np.abs(d)))


@dataclass
class CompositeState:
    """Pure state or density matrix on the qubit (x) cavity space.

    Invariants enforced at construction: unit norm for pure states; unit
    trace, Hermiticity and positivity (up to numerical floor) for density
    matrices. ``revalidate()`` re-checks them at any time.
    """

    data: np.ndarray
    dims: HilbertDims
    kind: str = field(default="pure")  # "pure" | "density"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.kind == "pure":
            if self.data.shape != (self.dims.total,):
                raise ValueError("pure state vector has wrong shape")
        elif self.kind == "density":
            if self.data.shape != (self.dims.total, self.dims.total):
                raise ValueError("density matrix has wrong shape")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        self.revalidate()

    def revalidate(self):
        if self.kind == "pure":
            norm = np.linalg.norm(self.data)
            if abs(norm - 1.0) > PURE_NORM_TOL:
                raise ValueError(f"pure state norm {norm} deviates from 1")
        else:
            tr = np.trace(self.data)
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"density matrix trace {tr} deviates from 1")
            herm = np.max(np.abs(self.data - self.data.conj().T))
            if herm > HERMITICITY_TOL:
                raise ValueError(f"density matrix not Hermitian (defect {herm})")
            lo = float(np.min(np.linalg.eigvalsh(
                0.5 * (self.data + self.data.conj().T))))
            if lo < -EIGENVALUE_TOL:
                raise ValueError(f"density matrix not positive (min eig {lo})")

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    @classmethod
    def fock(cls, dims: HilbertDims, n: int, qubit: int = 0) -> "CompositeState":
        """|n> (x) |g or e>."""
        vec = np.zeros(dims.total, dtype=complex)
        vec[dims.index(qubit, n)] = 1.0
        return cls(vec, dims)

    @classmethod
    def from_cavity(cls, dims: HilbertDims, cavity_amplitudes,
                    qubit: int = 0) -> "CompositeState":
        """Product state (cavity superposition) (x) qubit basis state.

        ``cavity_amplitudes`` may be shorter than the truncation; it is
        zero-padded and normalized.
        """
        amps = np.asarray(cavity_amplitudes, dtype=complex)
        if amps.size > dims.cavity_levels:
            raise ValueError("cavity amplitudes exceed truncation")
        cav = np.zeros(dims.cavity_levels, dtype=complex)
        cav[:amps.size] = amps
        cav = cav / np.linalg.norm(cav)
        vec = np.zeros(dims.total, dtype=complex)
        vec[qubit * dims.cavity_levels:(qubit + 1) * dims.cavity_levels] = cav
        return cls(vec, dims)


# ---------------------------------------------------------------------------
# mode operators


def _cavity_destroy(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def tensor_embed(op_on_one_mode: np.ndarray, dims: HilbertDims,
                 mode: str) -> Operator:
    """Embed a single-mode matrix into the composite space (qubit (x) cavity)."""
    op = np.asarray(op_on_one_mode, dtype=complex)
    if mode == "cavity":
        if op.shape != (dims.cavity_levels,) * 2:
            raise ValueError("dimension mismatch for cavity operator")
        full = np.kron(np.eye(dims.qubit_levels), op)
    elif mode == "qubit":
        if op.shape != (dims.qubit_levels,) * 2:
            raise ValueError("dimension mismatch for qubit operator")
        full = np.kron(op, np.eye(dims.cavity_levels))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return Operator(full, dims)


def annihilation(dims: HilbertDims, mode: str = "cavity") -> Operator:
    """Lowering operator of the chosen mode: a|n> = sqrt(n)|n-1>."""
    if mode == "cavity":
        return tensor_embed(_cavity_destroy(dims.cavity_levels), dims, "cavity")
    if mode == "qubit":
        return tensor_embed(_cavity_destroy(dims.qubit_levels), dims, "qubit")
    raise ValueError(f"unknown mode {mode!r}")


def creation(dims: HilbertDims, mode: str = "cavity") -> Operator:
    return annihilation(dims, mode).dag()


def number_op(dims: HilbertDims, mode: str = "cavity") -> Operator:
    """Diagonal number operator with entries 0..levels-1 on the chosen mode."""
    levels = dims.cavity_levels if mode == "cavity" else dims.qubit_levels
    return tensor_embed(np.diag(np.arange(levels, dtype=complex)), dims, mode)


def parity_op(dims: HilbertDims) -> Operator:
    """Photon parity (-1)^n on the cavity, identity on the qubit."""
    par = np.diag((-1.0 + 0j) ** np.arange(dims.cavity_levels))
    return tensor_embed(par, dims, "cavity")


def identity(dims: HilbertDims) -> Operator:
    return Operator(np.eye(dims.total, dtype=complex), dims)


def expm_hermitian(h: np.ndarray, prefactor: complex = 1.0) -> np.ndarray:
    """exp(prefactor * h) for Hermitian h, via diagonalization."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(prefactor * vals)) @ vecs.conj().T


def displacement_matrix(levels: int, alpha: complex) -> np.ndarray:
    """Single-mode D(alpha) = exp(alpha a^dag - conj(alpha) a) at truncation."""
    a = _cavity_destroy(levels)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    # i*gen is Hermitian; D = exp(gen) = exp(-i * (i gen))
    return expm_hermitian(1j * gen, prefactor=-1j)


def displacement(dims: HilbertDims, alpha: complex) -> Operator:
    """Cavity displacement embedded in the composite space.

    Warns when |alpha|^2 exceeds a quarter of the truncation (the displaced
    state then presses against the Fock cutoff) and when the resulting matrix
    is no longer unitary to 1e-6.
    """
    if abs(alpha) ** 2 > dims.cavity_levels / 4:
        warnings.warn(
            f"displacement amplitude |alpha|^2={abs(alpha)**2:.2f} exceeds "
            f"cavity_levels/4={dims.cavity_levels / 4:.2f}; truncation error likely",
            stacklevel=2)
    op = tensor_embed(displacement_matrix(dims.cavity_levels, alpha), dims,
                      "cavity")
    defect = op.unitarity_defect()
    if defect > 1e-6:
        warnings.warn(
            f"displacement unitarity defect {defect:.2e} exceeds 1e-6 at "
            f"cavity_levels={dims.cavity_levels}", stacklevel=2)
    return op


# ---------------------------------------------------------------------------
# generic linear-algebra contracts


def dagger(op: Operator) -> Operator:
    return op.dag()


def apply(op: Operator, state: CompositeState) -> CompositeState:
    """Apply an operator to a state (unitary conjugation for density matrices)."""
    if op.dims != state.dims:
        raise ValueError("dimension mismatch")
    if state.is_pure:
        return CompositeState(op.matrix @ state.data, state.dims)
    rho = op.matrix @ state.data @ op.matrix.conj().T
    return CompositeState(rho, state.dims, kind="density")


def expectation(op: Operator, state: CompositeState) -> complex:
    """<op> in the given state; real within 1e-10 for Hermitian op."""
    if op.dims != state.dims:
        raise ValueError("dimension mismatch")
    if state.is_pure:
        return complex(state.data.conj() @ op.matrix @ state.data)
    return complex(np.trace(op.matrix @ state.data))


def overlap(a: CompositeState, b: CompositeState) -> float:
    """|<a|b>|^2 for pure states, <a|rho_b|a> style overlap otherwise."""
    if a.dims != b.dims:
        raise ValueError("dimension mismatch")
    if a.is_pure and b.is_pure:
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    if a.is_pure:
        return float(np.real(a.data.conj() @ b.data @ a.data))
    if b.is_pure:
        return float(np.real(b.data.conj() @ a.data @ b.data))
    raise ValueError("overlap of two mixed states is not defined here")


def cavity_density(state: CompositeState) -> np.ndarray:
    """Reduced cavity density matrix (partial trace over the qubit)."""
    rho = state.density_matrix()
    nc = state.dims.cavity_levels
    nq = state.dims.qubit_levels
    rho4 = rho.reshape(nq, nc, nq, nc)
    return np.einsum("snsm->nm", rho4)


def qubit_density(state: CompositeState) -> np.ndarray:
    """Reduced qubit density matrix (partial trace over the cavity)."""
    rho = state.density_matrix()
    nc = state.dims.cavity_levels
    nq = state.dims.qubit_levels
    rho4 = rho.reshape(nq, nc, nq, nc)
    return np.einsum("sntn->st", rho4)


def fix_global_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate a state vector so its first significantly nonzero amplitude is
    real and positive."""
    idx = np.argmax(np.abs(vec) > 1e-10)
    ph = vec[idx]
    if abs(ph) == 0:
        return vec.copy()
    return vec * (abs(ph) / ph)
