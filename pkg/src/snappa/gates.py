"""Ideal gate operators and displacement/number-phase state preparation.

The photon-adding gate swaps the selected pairs |n>|g> <-> |n+1>|e| with a
controllable phase per pair and acts as the identity on every other basis
state; extending the listed blocks by the identity is what makes the operator
unitary (undriven states simply idle). The photon-subtracting counterpart
swaps |n+1>|g> <-> |n>|e> instead.

State preparation follows the displacement / number-phase recipe: a product
D(a3) S(phi2) D(a2) S(phi1) D(a1) applied to vacuum, with the parameters
found by multi-start local optimization of the target overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .hilbert import (
    CompositeState,
    HilbertDims,
    Operator,
    cavity_density,
    displacement_matrix,
    tensor_embed,
)


class PrepSolveError(RuntimeError):
    """State-preparation search missed the required overlap."""

    def __init__(self, message: str, best_overlap: float):
        super().__init__(message)
        self.best_overlap = best_overlap


@dataclass(frozen=True)
class SnappaSpec:
    """A set of selected transitions {(n_i, theta_i)} and the gate direction.

    ``addition`` drives |n>|g> -> e^{i theta} |n+1>|e>; ``subtraction``
    drives |n+1>|g> -> e^{i theta} |n>|e>.
    """

    transitions: tuple
    direction: str = "addition"
    parity_recovery: bool = False

    def __post_init__(self):
        trans = tuple((int(n), float(th)) for n, th in self.transitions)
        object.__setattr__(self, "transitions", trans)
        if self.direction not in ("addition", "subtraction"):
            raise ValueError(f"unknown direction {self.direction!r}")
        ns = [n for n, _ in trans]
        if len(set(ns)) != len(ns):
            raise ValueError("Fock indices must be distinct")
        if any(n < 0 for n in ns):
            raise ValueError("Fock indices must be >= 0")
        if self.parity_recovery and any(n % 2 == 0 for n in ns):
            raise ValueError("parity recovery drives odd Fock indices only")

    @property
    def targets(self) -> tuple:
        return tuple(n for n, _ in self.transitions)


def snappa_ideal(spec: SnappaSpec, dims: HilbertDims) -> Operator:
    """Ideal photon-adding gate: e^{i theta}|n+1,e><n,g| + h.c. on the listed
    blocks, identity elsewhere."""
    if spec.direction != "addition":
        raise ValueError("spec direction must be 'addition'")
    u = np.eye(dims.total, dtype=complex)
    for n, theta in spec.transitions:
        if n + 1 >= dims.cavity_levels:
            raise ValueError(f"transition {n}->{n + 1} out of truncation")
        lo = dims.index(0, n)
        hi = dims.index(1, n + 1)
        u[lo, lo] = u[hi, hi] = 0.0
        u[hi, lo] = np.exp(1j * theta)
        u[lo, hi] = np.exp(-1j * theta)
    return Operator(u, dims)


def snapps_ideal(spec: SnappaSpec, dims: HilbertDims) -> Operator:
    """Ideal photon-subtracting gate: e^{i theta}|n,e><n+1,g| + h.c. on the
    listed blocks, identity elsewhere."""
    if spec.direction != "subtraction":
        raise ValueError("spec direction must be 'subtraction'")
    u = np.eye(dims.total, dtype=complex)
    for n, theta in spec.transitions:
        if n + 1 >= dims.cavity_levels:
            raise ValueError(f"transition {n + 1}->{n} out of truncation")
        lo = dims.index(0, n + 1)
        hi = dims.index(1, n)
        u[lo, lo] = u[hi, hi] = 0.0
        u[hi, lo] = np.exp(1j * theta)
        u[lo, hi] = np.exp(-1j * theta)
    return Operator(u, dims)


def snap_ideal(phases, dims: HilbertDims) -> Operator:
    """Number-dependent phase gate: diag(e^{i phi_n}) on the cavity, applied
    identically on both qubit branches (preparation starts and ends in |g>)."""
    phases = np.asarray(phases, dtype=float)
    if phases.size > dims.cavity_levels:
        raise ValueError("phase list exceeds truncation")
    full = np.zeros(dims.cavity_levels)
    full[:phases.size] = phases
    diag = np.exp(1j * full)
    return tensor_embed(np.diag(diag), dims, "cavity")


def kerr_rotation_compensation(state: CompositeState,
                               angle: float) -> CompositeState:
    """Rotate the cavity frame: apply e^{i angle * a^dag a}."""
    dims = state.dims
    rot = np.diag(np.exp(1j * angle * np.arange(dims.cavity_levels)))
    op = tensor_embed(rot, dims, "cavity")
    from .hilbert import apply
    return apply(op, state)


def fit_rotation_angle(state: CompositeState, target_cavity,
                       resolution: int = 720) -> float:
    """Deterministic frame-rotation angle maximizing the cavity fidelity to a
    pure target: coarse scan over 2*pi plus a parabolic refinement."""
    rho = cavity_density(state)
    psi = np.zeros(rho.shape[0], dtype=complex)
    tgt = np.asarray(target_cavity, dtype=complex)
    psi[:tgt.size] = tgt
    psi = psi / np.linalg.norm(psi)
    nvec = np.arange(rho.shape[0])

    def fid(theta):
        rotated = psi * np.exp(-1j * theta * nvec)
        return float(np.real(rotated.conj() @ rho @ rotated))

    grid = np.linspace(-np.pi, np.pi, resolution, endpoint=False)
    vals = np.array([fid(th) for th in grid])
    # sparse states alias the rotation (e.g. a two-component state repeats
    # every pi); among equivalent maxima take the smallest rotation
    near_best = np.nonzero(vals >= vals.max() - 1e-9)[0]
    k = int(near_best[np.argmin(np.abs(grid[near_best]))])
    # three-point parabolic refinement around the best sample
    th0, dth = grid[k], grid[1] - grid[0]
    f0, fp, fm = vals[k], vals[(k + 1) % resolution], vals[(k - 1) % resolution]
    denom = fp - 2 * f0 + fm
    shift = 0.0 if denom == 0 else 0.5 * (fm - fp) / denom
    return float(th0 + np.clip(shift, -1, 1) * dth)


# ---------------------------------------------------------------------------
# state preparation


@dataclass(frozen=True)
class PrepProgram:
    """Alternating displacement / number-phase sequence D-S-D-S-D."""

    displacements: tuple          # 3 complex amplitudes
    snap_phases: tuple            # 2 phase lists

    def __post_init__(self):
        disp = tuple(complex(a) for a in self.displacements)
        phases = tuple(tuple(float(p) for p in ph) for ph in self.snap_phases)
        object.__setattr__(self, "displacements", disp)
        object.__setattr__(self, "snap_phases", phases)
        if len(disp) != 3 or len(phases) != 2:
            raise ValueError("program shape must be D-SNAP-D-SNAP-D")


def _prep_cavity_vector(program: PrepProgram, nc: int) -> np.ndarray:
    """D-S-D-S-D product applied to the cavity vacuum (cavity factor only;
    the qubit idles in |g> throughout preparation)."""
    vec = np.zeros(nc, dtype=complex)
    vec[0] = 1.0
    a1, a2, a3 = program.displacements
    phases = []
    for plist in program.snap_phases:
        full = np.zeros(nc)
        full[:min(len(plist), nc)] = plist[:nc]
        phases.append(np.exp(1j * full))
    vec = displacement_matrix(nc, a1) @ vec
    vec = phases[0] * vec
    vec = displacement_matrix(nc, a2) @ vec
    vec = phases[1] * vec
    vec = displacement_matrix(nc, a3) @ vec
    return vec / np.linalg.norm(vec)


def prepare_state(program: PrepProgram, dims: HilbertDims) -> CompositeState:
    """Apply the D-S-D-S-D product to vacuum (x) |g>."""
    cav = _prep_cavity_vector(program, dims.cavity_levels)
    return CompositeState(np.kron([1.0, 0.0], cav), dims)


_PREP_CACHE: dict = {}


def solve_prep(target_cavity, dims: HilbertDims, min_overlap: float = 0.999,
               n_phases: int = 8, n_starts: int = 6,
               seed: int = 7) -> PrepProgram:
    """Search for a D-S-D-S-D program preparing a cavity target from vacuum.

    Multi-start local optimization with a fixed seed; raises
    :class:`PrepSolveError` (carrying the best overlap found) when the
    required overlap is not reached. Targets must live within Fock <= 6.
    """
    tgt = np.asarray(target_cavity, dtype=complex)
    key = (tuple(np.round(tgt, 12)), dims.cavity_levels, n_phases, min_overlap)
    if key in _PREP_CACHE:
        return _PREP_CACHE[key]
    nc = dims.cavity_levels
    psi_t = np.zeros(nc, dtype=complex)
    psi_t[:tgt.size] = tgt
    psi_t /= np.linalg.norm(psi_t)
    if np.max(np.abs(psi_t[7:])) > 1e-12:
        raise ValueError("target must be supported on Fock <= 6")

    def unpack(x):
        a = x[0] + 1j * x[1], x[2] + 1j * x[3], x[4] + 1j * x[5]
        p1 = x[6:6 + n_phases]
        p2 = x[6 + n_phases:6 + 2 * n_phases]
        return a, p1, p2

    def cost(x):
        (a1, a2, a3), p1, p2 = unpack(x)
        prog = PrepProgram((a1, a2, a3), (tuple(p1), tuple(p2)))
        vec = _prep_cavity_vector(prog, nc)
        return 1.0 - abs(np.vdot(psi_t, vec)) ** 2

    rng = np.random.default_rng(seed)
    nbar = float(np.sum(np.abs(psi_t) ** 2 * np.arange(dims.cavity_levels)))
    best_x, best_cost = None, np.inf
    for trial in range(n_starts):
        x0 = np.zeros(6 + 2 * n_phases)
        if trial == 0:
            # spread roughly the right energy, no phases
            x0[0] = x0[4] = 0.5 * np.sqrt(max(nbar, 0.3))
            x0[2] = -0.3
        else:
            x0[:6] = rng.normal(scale=0.9, size=6)
            x0[6:] = rng.uniform(-np.pi, np.pi, size=2 * n_phases)
        res = minimize(cost, x0, method="L-BFGS-B",
                       options={"maxiter": 600, "ftol": 1e-14, "gtol": 1e-10})
        if res.fun < best_cost:
            best_cost, best_x = res.fun, res.x
        if best_cost < 1.0 - min_overlap:
            break
    overlap = 1.0 - best_cost
    if overlap < min_overlap:
        raise PrepSolveError(
            f"preparation search reached overlap {overlap:.6f} "
            f"< required {min_overlap}", best_overlap=overlap)
    (a1, a2, a3), p1, p2 = unpack(best_x)
    program = PrepProgram((a1, a2, a3), (tuple(p1), tuple(p2)))
    _PREP_CACHE[key] = program
    return program
