"""Static dispersive Hamiltonian, drive-tone model and drive-induced shifts.

Everything is expressed in the frame co-rotating with the bare qubit and
cavity frequencies, so the GHz carriers never appear and the largest retained
frequency scale is a few times the dispersive shift. The static part is
diagonal in the Fock (x) qubit basis:

    H0 = -(K_c/2) n(n-1)  -  chi * n * s  -  (chi'/2) n(n-1) * s

for cavity Fock index n and qubit excitation s in {0, 1} (the qubit
anharmonicity term vanishes identically on two levels).

An off-resonant qubit tone (amplitude xi_1) together with an off-resonant
cavity tone (amplitude xi_2, targeting Fock index n) produces a two-photon
sideband term

    -chi xi_1 xi_2 * exp(i[(n+1) chi - dw_n] t + i phi) q^dag a^dag + h.c.

which simultaneously excites the qubit and adds a photon, selectively on
|n>|g> -> |n+1>|e>. ``dw_n`` is the tone's frequency correction: it shifts
the drive off its nominal frequency to track the drive-induced (Stark)
frequency shifts of the qubit and cavity. Those shifts are modeled with
three dimensionless fit multipliers (eta1, eta2, eta12); the eta12 cross term
does not follow from the quartic-nonlinearity derivation but is needed to
match the measured single-tone resonance data.

Amplitudes are displaced-frame quantities xi = epsilon / Delta (drive
strength over detuning); ``xi_from_drive`` exposes the conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import HilbertDims, Operator

TWO_PI = 2.0 * math.pi


class SelectivityError(ValueError):
    """A tone set violates the number-selectivity bound |xi_eff| < chi."""


@dataclass(frozen=True)
class SystemParams:
    """Device constants. All frequencies angular (rad/s), times in seconds."""

    omega_q: float
    omega_c: float
    chi: float
    chi_prime: float
    kerr_c: float
    alpha_q: float
    t1_qubit: float
    t2_qubit: float
    t1_cavity: float
    delta: float

    def __post_init__(self):
        for name in ("omega_q", "omega_c", "chi", "alpha_q", "delta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("chi_prime", "kerr_c"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0 (sign convention: the "
                                 "terms enter with explicit minus signs)")
        for name in ("t1_qubit", "t2_qubit", "t1_cavity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha_q <= self.delta:
            raise ValueError("drive detuning delta must stay below the qubit "
                             "anharmonicity alpha_q")
        if self.t2_qubit > 2 * self.t1_qubit + 1e-12:
            raise ValueError("t2_qubit cannot exceed 2 * t1_qubit")

    def replace(self, **kw) -> "SystemParams":
        from dataclasses import replace
        return replace(self, **kw)


@dataclass(frozen=True)
class StarkFit:
    """Dimensionless multipliers for the drive-induced frequency shifts."""

    eta1: float = 3.75
    eta2: float = 3.35
    eta12: float = 60.25

    def __post_init__(self):
        for name in ("eta1", "eta2", "eta12"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative")


BARE_STARK_FIT = StarkFit(eta1=1.0, eta2=1.0, eta12=0.0)


@dataclass(frozen=True)
class EnvelopeSpec:
    """sin^2-ramped flat-top pulse envelope."""

    total_duration: float
    ramp_duration: float = 100e-9
    ramp_shape: str = "sin2"

    def __post_init__(self):
        if self.ramp_shape != "sin2":
            raise ValueError("only sin2 ramps are supported")
        if self.ramp_duration < 0 or self.total_duration <= 0:
            raise ValueError("durations must be positive")
        if 2 * self.ramp_duration > self.total_duration:
            raise ValueError("2 * ramp_duration must not exceed total_duration")

    def value(self, t):
        """Envelope in [0, 1]: sin^2 rise, flat plateau, sin^2 fall.

        Vectorized over ``t``; zero outside [0, total_duration].
        """
        t = np.asarray(t, dtype=float)
        tau, tr = self.total_duration, self.ramp_duration
        out = np.ones_like(t)
        if tr > 0:
            rising = t < tr
            falling = t > tau - tr
            out = np.where(rising, np.sin(0.5 * np.pi * t / tr) ** 2, out)
            out = np.where(falling,
                           np.sin(0.5 * np.pi * (tau - t) / tr) ** 2, out)
        out = np.where((t < 0) | (t > tau), 0.0, out)
        return out if out.ndim else float(out)

    def squared_area(self) -> float:
        """integral of envelope(t)^2 dt; the effective drive time of terms
        quadratic in the amplitudes (= tau - 1.25 * ramp for sin^2 ramps)."""
        return self.total_duration - 1.25 * self.ramp_duration


@dataclass(frozen=True)
class DriveTone:
    """One off-resonant drive in displaced-frame units.

    ``amplitude`` is the dimensionless plateau amplitude xi; ``phase`` the
    drive phase in radians; ``stark_correction`` the frequency correction
    dw added to the tone's nominal frequency (rad/s). Cavity tones carry the
    Fock index ``n_target`` of the |n>|g> -> |n+1>|e> transition they drive.
    """

    target: str
    amplitude: float
    envelope: EnvelopeSpec
    phase: float = 0.0
    n_target: int | None = None
    stark_correction: float = 0.0

    def __post_init__(self):
        if self.target not in ("qubit", "cavity"):
            raise ValueError(f"unknown drive target {self.target!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative (phase carries sign)")
        if self.target == "cavity":
            if self.n_target is None or self.n_target < 0:
                raise ValueError("cavity tones need n_target >= 0")
        elif self.n_target is not None:
            raise ValueError("qubit tones carry no n_target")

    def with_(self, **kw) -> "DriveTone":
        from dataclasses import replace
        return replace(self, **kw)


def validate_tone_set(tones) -> tuple[DriveTone, list[DriveTone]]:
    """Split a tone list into (qubit tone, cavity tones) and enforce the
    selectivity bound |xi_1 * xi_2| < 1 for every co-driven pair."""
    qubit_tones = [t for t in tones if t.target == "qubit"]
    cavity_tones = [t for t in tones if t.target == "cavity"]
    if len(qubit_tones) != 1:
        raise ValueError(f"need exactly one qubit tone, got {len(qubit_tones)}")
    if not cavity_tones:
        raise ValueError("need at least one cavity tone")
    targets = [t.n_target for t in cavity_tones]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate n_target in tone set: {sorted(targets)}")
    xi1 = qubit_tones[0].amplitude
    for tone in cavity_tones:
        if xi1 * tone.amplitude >= 1.0:
            raise SelectivityError(
                f"|xi_1 xi_2| = {xi1 * tone.amplitude:.3f} >= 1 for tone "
                f"n={tone.n_target}: effective coupling would reach the "
                "dispersive shift and break number selectivity")
    return qubit_tones[0], sorted(cavity_tones, key=lambda t: t.n_target)


def xi_from_drive(epsilon: float, detuning: float) -> float:
    """Displaced-frame amplitude xi = epsilon / Delta of a lab-frame drive."""
    if detuning == 0:
        raise ValueError("drive must be off-resonant (detuning != 0)")
    return epsilon / detuning


# ---------------------------------------------------------------------------
# Hamiltonian construction


def _diagonal_energies(params: SystemParams, dims: HilbertDims) -> np.ndarray:
    """Static diagonal, shape (2, cavity_levels): [qubit level, Fock]."""
    n = np.arange(dims.cavity_levels, dtype=float)
    kerr = -0.5 * params.kerr_c * n * (n - 1)
    e_g = kerr
    e_e = kerr - params.chi * n - 0.5 * params.chi_prime * n * (n - 1)
    return np.stack([e_g, e_e])


def static_hamiltonian(params: SystemParams, dims: HilbertDims) -> Operator:
    """Dispersive Hamiltonian in the doubly rotating frame (diagonal)."""
    return Operator(np.diag(_diagonal_energies(params, dims).ravel()), dims)


def stark_shifts(xi_q: float, xi_c_list, params: SystemParams,
                 fit: StarkFit) -> tuple[float, float]:
    """Drive-induced frequency shifts (delta_q, delta_c) in rad/s.

        delta_q = -2 eta1 alpha_q |xi_1|^2 - eta2 chi sum|xi_2|^2
                  + eta12 chi |xi_1| sum|xi_2|
        delta_c = -2 eta2 K_c sum|xi_2|^2 - eta1 chi |xi_1|^2
                  + eta12 chi |xi_1| sum|xi_2|

    Multiple cavity tones enter the quadratic terms summed in quadrature and
    the cross term through the sum of magnitudes (composition rule for the
    multi-tone case; the single-tone limit is the fitted form).
    """
    xi_c = np.atleast_1d(np.asarray(xi_c_list, dtype=float))
    a1 = float(np.abs(xi_q))
    sum_sq = float(np.sum(np.abs(xi_c) ** 2))
    sum_mag = float(np.sum(np.abs(xi_c)))
    cross = fit.eta12 * params.chi * a1 * sum_mag
    delta_q = -2.0 * fit.eta1 * params.alpha_q * a1 ** 2 \
        - fit.eta2 * params.chi * sum_sq + cross
    delta_c = -2.0 * fit.eta2 * params.kerr_c * sum_sq \
        - fit.eta1 * params.chi * a1 ** 2 + cross
    return delta_q, delta_c


def plateau_stark_shifts(params: SystemParams, tones,
                         fit: StarkFit) -> tuple[float, float]:
    """Stark shifts at full envelope (plateau) amplitudes of a tone set."""
    qubit_tone, cavity_tones = validate_tone_set(tones)
    return stark_shifts(qubit_tone.amplitude,
                        [t.amplitude for t in cavity_tones], params, fit)


def resonance_frequency(params: SystemParams, n: int,
                        stark: tuple[float, float] = (0.0, 0.0)) -> float:
    """Lab-frame two-photon resonance for |n>|g> -> |n+1>|e> (rad/s).

    The drive frequencies must add up to
    (omega_q + delta_q) + (omega_c + delta_c - (n+1) chi). Deliberately uses
    only chi: the Kerr and chi' residuals are absorbed by calibration rather
    than by the drive-frequency formula.
    """
    delta_q, delta_c = stark
    return (params.omega_q + delta_q) \
        + (params.omega_c + delta_c - (n + 1) * params.chi)


def analytic_stark_correction(params: SystemParams, tones,
                              fit: StarkFit) -> float:
    """Frequency correction dw that centers the tones on resonance, from the
    fitted shift formulas at plateau amplitude: dw = delta_q + delta_c."""
    delta_q, delta_c = plateau_stark_shifts(params, tones, fit)
    return delta_q + delta_c


def sideband_coefficient(params: SystemParams, xi_q: float, tone: DriveTone,
                         t: float, envelope_q: float,
                         envelope_c: float) -> complex:
    """Coefficient of q^dag a^dag contributed by one cavity tone at time t."""
    xi_eff = -params.chi * xi_q * envelope_q * tone.amplitude * envelope_c
    omega = (tone.n_target + 1) * params.chi - tone.stark_correction
    return xi_eff * np.exp(1j * (omega * t + tone.phase))


def effective_hamiltonian(params: SystemParams, tones, fit: StarkFit,
                          t: float, dims: HilbertDims) -> Operator:
    """Full rotating-frame Hamiltonian H'(t) of the driven system.

    Static Kerr / dispersive terms + instantaneous Stark shifts + the
    two-photon sideband terms of all cavity tones (each scaled by its
    envelope and carrying its drive phase). Hermitian at every t.
    """
    qubit_tone, cavity_tones = validate_tone_set(tones)
    for tone in cavity_tones:
        if tone.n_target + 1 >= dims.cavity_levels:
            raise ValueError(f"tone n_target={tone.n_target} reaches the "
                             "truncation edge")
    env_q = qubit_tone.envelope.value(t)
    diag = _diagonal_energies(params, dims)
    nvec = np.arange(dims.cavity_levels, dtype=float)
    xi_c_now = [tone.amplitude * tone.envelope.value(t) for tone in cavity_tones]
    delta_q, delta_c = stark_shifts(qubit_tone.amplitude * env_q, xi_c_now,
                                    params, fit)
    h = np.diag((diag + np.stack([delta_c * nvec,
                                  delta_c * nvec + delta_q])).ravel()).astype(complex)
    # q^dag a^dag matrix element <n+1, e| . |n, g> = sqrt(n+1)
    coeff = sum(
        sideband_coefficient(params, qubit_tone.amplitude, tone, t,
                             env_q, tone.envelope.value(t))
        for tone in cavity_tones)
    for n in range(dims.cavity_levels - 1):
        lo = dims.index(0, n)
        hi = dims.index(1, n + 1)
        h[hi, lo] = coeff * math.sqrt(n + 1)
        h[lo, hi] = np.conj(h[hi, lo])
    return Operator(h, dims)


def conserved_charge(dims: HilbertDims) -> Operator:
    """C = N_cavity - N_qubit, conserved by the sideband interaction."""
    from .hilbert import number_op
    return number_op(dims, "cavity") - number_op(dims, "qubit")
