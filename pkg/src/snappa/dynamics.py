"""Time evolution under the driven rotating-frame Hamiltonian.

Closed-system propagation is piecewise-constant: U_k = exp(-i H(t_k) dt) with
the Hamiltonian sampled at step midpoints (second-order accurate for the slow
envelope / tone-phase time dependence). The sideband interaction conserves
C = N_cavity - N_qubit, so H(t) is block diagonal over the charge sectors
{|m>|g>, |m+1>|e>}; each step propagator is evaluated exactly on those 2x2
blocks, which is what makes calibration-scale parameter sweeps cheap.

Open-system propagation uses a Strang splitting: exact 2x2 unitary steps
interleaved with the exact exponential of the (time-independent) dissipator
superoperator. Both factors are completely positive and trace preserving, so
trace and positivity hold by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm as _expm

from .hamiltonian import (
    EnvelopeSpec,
    StarkFit,
    SystemParams,
    stark_shifts,
    validate_tone_set,
)
from .hilbert import CompositeState, HilbertDims, tensor_embed

TWO_PI = 2.0 * math.pi


class StepSizeError(ValueError):
    """Integration step too coarse for the fastest retained frequency."""


@dataclass(frozen=True)
class CollapseOperator:
    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("collapse rate must be >= 0")


@dataclass
class EvolutionRequest:
    """One evolution problem: initial state, drive tones, duration, step.

    ``collapse_ops=None`` derives the standard set (qubit relaxation, qubit
    pure dephasing, cavity relaxation) from the coherence times in ``params``.
    """

    initial: CompositeState
    tones: list
    duration: float
    params: SystemParams
    stark_fit: StarkFit
    step: float = 1e-9
    open_system: bool = False
    collapse_ops: list | None = None

    def __post_init__(self):
        if self.duration <= 0 or self.step <= 0:
            raise ValueError("duration and step must be positive")
        check_step(self.params, self.tones, self.stark_fit, self.step)


def envelope_value(env: EnvelopeSpec, t):
    """Envelope value in [0, 1] at time t (sin^2 ramps, flat plateau)."""
    return env.value(t)


def check_step(params: SystemParams, tones, fit: StarkFit, step: float):
    """Enforce step <= 1 / (50 * max relevant frequency scale).

    The scale (in cycles/s) is the largest of: the farthest sideband phase
    rate (n_max+1) chi, the combined plateau Stark shift, and the fastest
    two-photon coupling |xi_eff| sqrt(n_max+1).
    """
    if not tones:
        return
    qubit_tone, cavity_tones = validate_tone_set(tones)
    n_max = max(t.n_target for t in cavity_tones)
    dq, dc = stark_shifts(qubit_tone.amplitude,
                          [t.amplitude for t in cavity_tones], params, fit)
    xi_eff_max = max(params.chi * qubit_tone.amplitude * t.amplitude
                     for t in cavity_tones)
    scale = max((n_max + 1) * params.chi, abs(dq + dc),
                xi_eff_max * math.sqrt(n_max + 1)) / TWO_PI
    limit = 1.0 / (50.0 * scale)
    if step > limit * (1 + 1e-9):
        raise StepSizeError(
            f"step {step:.3g} s exceeds 1/(50 * {scale:.3g} Hz) = {limit:.3g} s")


def collapse_operators(params: SystemParams, dims: HilbertDims) -> list:
    """Standard collapse set from the measured coherence times.

    Pure dephasing rate 1/T_phi = 1/T2q - 1/(2 T1q); cavity dephasing and
    thermal populations are not reported for this system and are set to zero.
    """
    q_low = np.array([[0, 1], [0, 0]], dtype=complex)
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)
    a = np.diag(np.sqrt(np.arange(1, dims.cavity_levels, dtype=float)), k=1)
    gamma_phi = 1.0 / params.t2_qubit - 0.5 / params.t1_qubit
    ops = [
        CollapseOperator(tensor_embed(q_low, dims, "qubit").matrix,
                         1.0 / params.t1_qubit),
        CollapseOperator(tensor_embed(a.astype(complex), dims, "cavity").matrix,
                         1.0 / params.t1_cavity),
    ]
    if gamma_phi > 0:
        # L = sqrt(gamma_phi / 2) sigma_z gives coherence decay exp(-gamma_phi t)
        ops.append(CollapseOperator(tensor_embed(sz, dims, "qubit").matrix,
                                    gamma_phi / 2.0))
    return ops


# ---------------------------------------------------------------------------
# compiled drive coefficients


@dataclass
class _Compiled:
    """Per-step quantities on the midpoint grid."""

    dt: float
    tmid: np.ndarray          # (T,)
    diag_g: np.ndarray        # (T, Nc) energies of |n>|g>
    diag_e: np.ndarray        # (T, Nc) energies of |n>|e>
    f: np.ndarray             # (T,) or (B, T) sideband coefficient of q^dag a^dag
    dims: HilbertDims


def _compile(params: SystemParams, fit: StarkFit, tones, duration: float,
             step: float, dims: HilbertDims,
             probe_index: int | None = None,
             probe_detunings=None) -> _Compiled:
    """Sample envelopes, Stark shifts and sideband phases on the step grid.

    With ``probe_detunings`` given, the cavity tone at ``probe_index`` gets an
    extra frequency offset per batch entry; ``f`` then has shape (B, T).
    """
    nsteps = max(1, round(duration / step))
    dt = duration / nsteps
    tmid = (np.arange(nsteps) + 0.5) * dt
    n = np.arange(dims.cavity_levels, dtype=float)
    kerr = -0.5 * params.kerr_c * n * (n - 1)
    static_g = kerr
    static_e = kerr - params.chi * n - 0.5 * params.chi_prime * n * (n - 1)

    if not tones:
        diag_g = np.broadcast_to(static_g, (nsteps, dims.cavity_levels))
        diag_e = np.broadcast_to(static_e, (nsteps, dims.cavity_levels))
        f = np.zeros(nsteps, dtype=complex)
        return _Compiled(dt, tmid, diag_g, diag_e, f, dims)

    qubit_tone, cavity_tones = validate_tone_set(tones)
    for tone in cavity_tones:
        if tone.n_target + 1 >= dims.cavity_levels:
            raise ValueError(f"tone n_target={tone.n_target} reaches the "
                             "truncation edge")
    env_q = qubit_tone.envelope.value(tmid)
    xi1 = qubit_tone.amplitude * env_q
    xi2 = np.stack([t.amplitude * t.envelope.value(tmid)
                    for t in cavity_tones])       # (n_tones, T)

    dq, dc = stark_shifts_sampled(xi1, xi2, params, fit)
    diag_g = static_g[None, :] + dc[:, None] * n[None, :]
    diag_e = static_e[None, :] + dc[:, None] * n[None, :] + dq[:, None]

    terms = np.zeros((len(cavity_tones), nsteps), dtype=complex)
    for i, tone in enumerate(cavity_tones):
        omega = (tone.n_target + 1) * params.chi - tone.stark_correction
        terms[i] = (-params.chi * xi1 * xi2[i]
                    * np.exp(1j * (omega * tmid + tone.phase)))
    if probe_detunings is None:
        f = terms.sum(axis=0)
    else:
        dets = np.asarray(probe_detunings, dtype=float)
        base = terms.sum(axis=0) - terms[probe_index]
        # an extra correction dw shifts the sideband phase rate by -dw
        shifted = terms[probe_index][None, :] \
            * np.exp(-1j * dets[:, None] * tmid[None, :])
        f = base[None, :] + shifted
    return _Compiled(dt, tmid, diag_g, diag_e, f, dims)


def stark_shifts_sampled(xi1: np.ndarray, xi2: np.ndarray,
                         params: SystemParams, fit: StarkFit):
    """Vectorized Stark shifts over time samples; xi2 has shape (n_tones, T)."""
    sum_sq = np.sum(np.abs(xi2) ** 2, axis=0)
    sum_mag = np.sum(np.abs(xi2), axis=0)
    cross = fit.eta12 * params.chi * np.abs(xi1) * sum_mag
    dq = -2.0 * fit.eta1 * params.alpha_q * np.abs(xi1) ** 2 \
        - fit.eta2 * params.chi * sum_sq + cross
    dc = -2.0 * fit.eta2 * params.kerr_c * sum_sq \
        - fit.eta1 * params.chi * np.abs(xi1) ** 2 + cross
    return dq, dc


def _pair_step_coefficients(comp: _Compiled):
    """2x2 step propagators on the charge sectors, vectorized over steps.

    Sector m couples |m>|g> to |m+1>|e>. Returns (Ugg, Uge, Ueg, Uee) of
    shape (T, M) (or (B, T, M) when f is batched) plus the two single-level
    phases, everything already exponentiated.
    """
    dt = comp.dt
    nc = comp.dims.cavity_levels
    sqrt_np1 = np.sqrt(np.arange(1, nc, dtype=float))      # (M,)
    eg = comp.diag_g[:, :-1]                               # (T, M)
    ee = comp.diag_e[:, 1:]
    c = comp.f[:, None] * sqrt_np1                         # (T, M)
    d0 = 0.5 * (eg + ee)
    dz = 0.5 * (eg - ee)
    r = np.sqrt(dz ** 2 + np.abs(c) ** 2)
    theta = r * dt
    cos_t = np.cos(theta)
    # sin(theta)/r, finite as r -> 0
    sinc = dt * np.sinc(theta / np.pi)
    phase = np.exp(-1j * d0 * dt)
    ugg = phase * (cos_t - 1j * sinc * dz)
    uge = phase * (-1j * sinc * np.conj(c))
    ueg = phase * (-1j * sinc * c)
    uee = phase * (cos_t + 1j * sinc * dz)
    ph_e0 = np.exp(-1j * comp.diag_e[:, 0] * dt)           # |0>|e> singlet
    ph_gtop = np.exp(-1j * comp.diag_g[:, -1] * dt)        # |Nc-1>|g> singlet
    return ugg, uge, ueg, uee, ph_e0, ph_gtop


def _propagate_vector(psi: np.ndarray, comp: _Compiled) -> np.ndarray:
    """Propagate a pure state (shape (2, Nc)) through all steps."""
    ugg, uge, ueg, uee, ph_e0, ph_gtop = _pair_step_coefficients(comp)
    g = psi[0, :-1].copy()
    e = psi[1, 1:].copy()
    e0 = psi[1, 0]
    gtop = psi[0, -1]
    for k in range(ugg.shape[-2]):
        g, e = ugg[k] * g + uge[k] * e, ueg[k] * g + uee[k] * e
        e0 *= ph_e0[k]
        gtop *= ph_gtop[k]
    out = np.zeros_like(psi)
    out[0, :-1] = g
    out[1, 1:] = e
    out[1, 0] = e0
    out[0, -1] = gtop
    return out


def evolve_unitary(req: EvolutionRequest) -> CompositeState:
    """Closed-system evolution of a pure state; norm preserved to 1e-7."""
    if req.open_system:
        raise ValueError("open_system request routed to evolve_unitary")
    if not req.initial.is_pure:
        raise ValueError("evolve_unitary needs a pure initial state")
    dims = req.initial.dims
    comp = _compile(req.params, req.stark_fit, req.tones, req.duration,
                    req.step, dims)
    psi = req.initial.data.reshape(2, dims.cavity_levels)
    out = _propagate_vector(psi, comp)
    return CompositeState(out.ravel(), dims)


def dense_step_propagators(params: SystemParams, fit: StarkFit, tones,
                           duration: float, step: float,
                           dims: HilbertDims) -> np.ndarray:
    """All per-step propagators as dense matrices, shape (T, d, d)."""
    comp = _compile(params, fit, tones, duration, step, dims)
    ugg, uge, ueg, uee, ph_e0, ph_gtop = _pair_step_coefficients(comp)
    nc = dims.cavity_levels
    nsteps = ugg.shape[0]
    gi = np.arange(nc - 1)             # |m>|g>
    ei = nc + np.arange(1, nc)         # |m+1>|e>
    u = np.zeros((nsteps, dims.total, dims.total), dtype=complex)
    u[:, gi, gi] = ugg
    u[:, gi, ei] = uge
    u[:, ei, gi] = ueg
    u[:, ei, ei] = uee
    u[:, nc, nc] = ph_e0
    u[:, nc - 1, nc - 1] = ph_gtop
    return u


def total_propagator(params: SystemParams, fit: StarkFit, tones,
                     duration: float, step: float,
                     dims: HilbertDims) -> np.ndarray:
    """Composite propagator U(duration) (product of all step propagators)."""
    steps = dense_step_propagators(params, fit, tones, duration, step, dims)
    u = np.eye(dims.total, dtype=complex)
    for k in range(steps.shape[0]):
        u = steps[k] @ u
    return u


# ---------------------------------------------------------------------------
# open system

_DISSIPATOR_CACHE: dict = {}


def _dissipator_superop(collapses, dim: int) -> np.ndarray:
    """Lindblad dissipator as a superoperator on row-major vec(rho)."""
    sup = np.zeros((dim * dim, dim * dim), dtype=complex)
    eye = np.eye(dim)
    for c in collapses:
        ld = c.operator
        ldl = ld.conj().T @ ld
        sup += c.rate * (np.kron(ld, ld.conj())
                         - 0.5 * np.kron(ldl, eye)
                         - 0.5 * np.kron(eye, ldl.T))
    return sup


def _dissipative_steps(collapses, dim: int, dt: float):
    """(half-step, full-step) dissipator exponentials, cached."""
    key = (dim, dt, tuple((id(c.operator), c.rate) for c in collapses))
    if key not in _DISSIPATOR_CACHE:
        sup = _dissipator_superop(collapses, dim)
        half = _expm(sup * (dt / 2.0))
        _DISSIPATOR_CACHE[key] = (half, half @ half)
    return _DISSIPATOR_CACHE[key]


def evolve_lindblad(req: EvolutionRequest) -> CompositeState:
    """Open-system evolution; trace preserved to 1e-6, positivity to -1e-7.

    Strang splitting of the unitary part (exact 2x2 block steps) and the
    constant dissipator (exact superoperator exponential): the result is a
    composition of CPTP maps, second-order accurate in the step.
    """
    if not req.open_system:
        raise ValueError("closed-system request routed to evolve_lindblad")
    dims = req.initial.dims
    collapses = req.collapse_ops
    if collapses is None:
        collapses = collapse_operators(req.params, dims)
    rho = req.initial.density_matrix().copy()
    steps = dense_step_propagators(req.params, req.stark_fit, req.tones,
                                   req.duration, req.step, dims)
    nsteps = steps.shape[0]
    if not collapses or all(c.rate == 0 for c in collapses):
        for k in range(nsteps):
            rho = steps[k] @ rho @ steps[k].conj().T
        return CompositeState(rho, dims, kind="density")
    dt = req.duration / nsteps
    half, full = _dissipative_steps(collapses, dims.total, dt)
    d = dims.total
    v = half @ rho.reshape(-1)
    for k in range(nsteps):
        rho = v.reshape(d, d)
        rho = steps[k] @ rho @ steps[k].conj().T
        v = rho.reshape(-1)
        if k < nsteps - 1:
            v = full @ v
    v = half @ v
    rho = v.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return CompositeState(rho, dims, kind="density")


def evolve(req: EvolutionRequest) -> CompositeState:
    return evolve_lindblad(req) if req.open_system else evolve_unitary(req)


# ---------------------------------------------------------------------------
# expectation-value traces


def evolve_trace(req: EvolutionRequest, observables: dict,
                 samples: int = 200):
    """Closed-system evolution recording expectation values along the way.

    Returns (final_state, times, {name: values}). ``observables`` maps names
    to Operators (or matrices).
    """
    if req.open_system:
        raise ValueError("traces are recorded for closed-system runs")
    dims = req.initial.dims
    comp = _compile(req.params, req.stark_fit, req.tones, req.duration,
                    req.step, dims)
    ugg, uge, ueg, uee, ph_e0, ph_gtop = _pair_step_coefficients(comp)
    nsteps = ugg.shape[0]
    stride = max(1, nsteps // samples)
    mats = {name: getattr(op, "matrix", op) for name, op in observables.items()}

    psi = req.initial.data.reshape(2, dims.cavity_levels)
    g = psi[0, :-1].copy()
    e = psi[1, 1:].copy()
    e0, gtop = psi[1, 0], psi[0, -1]
    times, series = [], {name: [] for name in mats}

    def record(t, gv, ev, e0v, gtopv):
        cur = np.zeros_like(psi)
        cur[0, :-1] = gv
        cur[1, 1:] = ev
        cur[1, 0] = e0v
        cur[0, -1] = gtopv
        flat = cur.ravel()
        times.append(t)
        for name, m in mats.items():
            series[name].append(float(np.real(flat.conj() @ m @ flat)))
        return cur

    record(0.0, g, e, e0, gtop)
    last = None
    for k in range(nsteps):
        g, e = ugg[k] * g + uge[k] * e, ueg[k] * g + uee[k] * e
        e0 *= ph_e0[k]
        gtop *= ph_gtop[k]
        if (k + 1) % stride == 0 or k == nsteps - 1:
            last = record((k + 1) * comp.dt, g, e, e0, gtop)
    state = CompositeState(last.ravel(), dims)
    return state, np.asarray(times), {k: np.asarray(v) for k, v in series.items()}


def export_trace_csv(path, times, series: dict):
    """Write an expectation-value trace as CSV with a named header."""
    names = list(series)
    cols = [np.asarray(times)] + [np.asarray(series[n]) for n in names]
    header = ",".join(["time_s"] + names)
    data = np.column_stack(cols)
    np.savetxt(path, data, delimiter=",", header=header, comments="")


def two_level_transfer(gap, coupling, dt: float) -> np.ndarray:
    """Final excited population of batched two-level problems.

    ``gap`` (B, T) is the instantaneous upper-minus-lower level splitting,
    ``coupling`` (B, T) the complex off-diagonal element; each row is
    propagated through its piecewise-constant steps starting from the lower
    level. Used by calibration scans where amplitudes vary across the batch;
    equivalent to the full propagation restricted to one charge sector.
    """
    gap = np.atleast_2d(np.asarray(gap, dtype=float))
    coupling = np.atleast_2d(np.asarray(coupling, dtype=complex))
    gap, coupling = np.broadcast_arrays(gap, coupling)
    dz = -0.5 * gap
    r = np.sqrt(dz ** 2 + np.abs(coupling) ** 2)
    theta = r * dt
    cos_t = np.cos(theta)
    sinc = dt * np.sinc(theta / np.pi)
    g = np.ones(gap.shape[0], dtype=complex)
    e = np.zeros(gap.shape[0], dtype=complex)
    for k in range(gap.shape[1]):
        ugg = cos_t[:, k] - 1j * sinc[:, k] * dz[:, k]
        uge = -1j * sinc[:, k] * np.conj(coupling[:, k])
        ueg = -1j * sinc[:, k] * coupling[:, k]
        uee = cos_t[:, k] + 1j * sinc[:, k] * dz[:, k]
        g, e = ugg * g + uge * e, ueg * g + uee * e
    return np.abs(e) ** 2


# ---------------------------------------------------------------------------
# sector-level sweep engine (calibration workhorse)


def sector_transfer_map(params: SystemParams, fit: StarkFit, tones,
                        n_start: int, probe_index: int, detunings,
                        durations, step: float, dims: HilbertDims):
    """Excited-state transfer out of |n_start>|g> on a detuning x duration grid.

    For each pulse duration (with its own ramped envelope) the cavity tone at
    ``probe_index`` is offset by each detuning; returns the final population
    of |n_start+1>|e> with shape (len(durations), len(detunings)).

    This is mathematically the same propagation as :func:`evolve_unitary`
    restricted to the conserved-charge sector of |n_start>|g>; the restriction
    is exact because every other sector starts unpopulated.
    """
    if n_start + 1 >= dims.cavity_levels:
        raise ValueError("n_start reaches the truncation edge")
    dets = np.asarray(detunings, dtype=float)
    out = np.empty((len(durations), len(dets)))
    root = math.sqrt(n_start + 1)
    _, cavity_tones = validate_tone_set(tones)
    for j, duration in enumerate(durations):
        scaled = []
        for tone in tones:
            env = EnvelopeSpec(total_duration=duration,
                               ramp_duration=tone.envelope.ramp_duration,
                               ramp_shape=tone.envelope.ramp_shape)
            scaled.append(tone.with_(envelope=env))
        comp = _compile(params, fit, scaled, duration, step, dims,
                        probe_index=probe_index, probe_detunings=dets)
        eg = comp.diag_g[:, n_start]                  # (T,)
        ee = comp.diag_e[:, n_start + 1]
        c = comp.f[:, :] * root                       # (B, T)
        dz = 0.5 * (eg - ee)  # common phase (eg+ee)/2 drops out of populations
        r = np.sqrt(dz[None, :] ** 2 + np.abs(c) ** 2)
        theta = r * comp.dt
        cos_t = np.cos(theta)
        sinc = comp.dt * np.sinc(theta / np.pi)
        ugg = cos_t - 1j * sinc * dz[None, :]
        uge = -1j * sinc * np.conj(c)
        ueg = -1j * sinc * c
        uee = cos_t + 1j * sinc * dz[None, :]
        g = np.ones(len(dets), dtype=complex)
        e = np.zeros(len(dets), dtype=complex)
        for k in range(theta.shape[1]):
            g, e = ugg[:, k] * g + uge[:, k] * e, ueg[:, k] * g + uee[:, k] * e
        out[j] = np.abs(e) ** 2
    return out
