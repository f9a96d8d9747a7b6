"""Finite-dimensional quantum states, coherent pulses and channels.

States are density matrices over an explicit ordered basis of atomic
levels.  Coherent drives are rotating-frame two-level rotations; the
qubit-type conversion applies two-tone pulses that rotate two disjoint
two-level subspaces at once.  Incoherent processes enter as Kraus
channels.  All operations are pure functions returning new states.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .atom import (
    D52_PATH_0,
    D52_PATH_1,
    F_QUBIT_0,
    F_QUBIT_1,
    LevelId,
    PATHS_3432,
    PATHS_411,
    S_QUBIT_0,
    S_QUBIT_1,
)

# Numerical tolerance ladder for <=16-dimensional double precision states.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
KRAUS_TOL = 1e-10

S_QUBIT_BASIS = (S_QUBIT_0, S_QUBIT_1)
F_QUBIT_BASIS = (F_QUBIT_0, F_QUBIT_1)
# Working basis for the type conversion: both qubits plus the two D5/2 legs.
CONVERSION_BASIS = (S_QUBIT_0, S_QUBIT_1, D52_PATH_0, D52_PATH_1, F_QUBIT_0, F_QUBIT_1)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix over a level basis."""

    data: np.ndarray
    basis: tuple[LevelId, ...]

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("density matrix must be square")
        if arr.shape[0] != len(self.basis):
            raise ValueError("matrix dimension does not match basis length")
        if len(set(self.basis)) != len(self.basis):
            raise ValueError("basis contains duplicate levels")
        if np.max(np.abs(arr - arr.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(arr).real - 1.0) > TRACE_TOL:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(arr).min() < -POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def pure(cls, amplitudes: np.ndarray, basis: tuple[LevelId, ...]) -> "DensityMatrix":
        """Density matrix of a pure state given by its amplitude vector."""
        v = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero state vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), tuple(basis))

    def index(self, level: LevelId) -> int:
        try:
            return self.basis.index(level)
        except ValueError:
            raise ValueError(f"level {level} not in basis") from None

    def population(self, level: LevelId) -> float:
        return float(self.data[self.index(level), self.index(level)].real)

    def subspace_population(self, levels) -> float:
        return float(sum(self.population(lv) for lv in levels))


@dataclass(frozen=True)
class PulseSpec:
    """One coherent drive on a (pair of) two-level transition(s).

    `tones` lists (detuning offset, phase) for each sideband tone; a
    plain single-tone pulse has one entry.  Two-tone conversion pulses
    carry one tone per transfer path.
    """

    transition: tuple[LevelId, LevelId]
    rabi: float
    duration: float
    detuning: float = 0.0
    phase: float = 0.0
    tones: tuple[tuple[float, float], ...] = ((0.0, 0.0),)

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        if self.rabi < 0:
            raise ValueError("rabi must be >= 0")
        if len(self.tones) == 0:
            raise ValueError("tones must be non-empty")

    @property
    def area(self) -> float:
        return self.rabi * self.duration

    def is_pi(self, rel_tol: float = 1e-9) -> bool:
        return abs(self.area - np.pi) <= rel_tol * np.pi


def pi_pulse_411(duration: float = 0.54e-6, tone_phases: tuple[float, float] = (0.0, 0.0)) -> PulseSpec:
    """Resonant two-tone pi pulse on the 411 nm S1/2 <-> D5/2 legs."""
    return PulseSpec(
        transition=PATHS_411[0],
        rabi=np.pi / duration,
        duration=duration,
        tones=((0.0, tone_phases[0]), (0.0, tone_phases[1])),
    )


def pi_pulse_3432(duration: float = 0.39e-6, tone_phases: tuple[float, float] = (0.0, 0.0)) -> PulseSpec:
    """Resonant two-tone pi pulse on the 3432 nm D5/2 <-> F7/2 legs."""
    return PulseSpec(
        transition=PATHS_3432[0],
        rabi=np.pi / duration,
        duration=duration,
        tones=((0.0, tone_phases[0]), (0.0, tone_phases[1])),
    )


def rotation_matrix(rabi: float, detuning: float, phase: float, duration: float) -> np.ndarray:
    """Unitary for H = (detuning/2) sz + (rabi/2)(cos(phase) sx + sin(phase) sy).

    Basis order is (lower, upper); a resonant area-pi pulse moves all
    lower-state population to the upper state.
    """
    w = np.hypot(rabi, detuning)
    theta = w * duration / 2.0
    c = np.cos(theta)
    s = np.sin(theta)
    if w == 0.0:
        return np.eye(2, dtype=np.complex128)
    sz = detuning / w
    sx = rabi / w
    return np.array(
        [
            [c - 1j * s * sz, -1j * s * sx * np.exp(-1j * phase)],
            [-1j * s * sx * np.exp(1j * phase), c + 1j * s * sz],
        ],
        dtype=np.complex128,
    )


def batched_rotation(rabi, detuning, phase, duration) -> np.ndarray:
    """Vectorized `rotation_matrix`: arrays in, (n, 2, 2) unitaries out."""
    rabi, detuning, phase = np.broadcast_arrays(
        np.asarray(rabi, dtype=float), np.asarray(detuning, dtype=float), np.asarray(phase, dtype=float)
    )
    w = np.hypot(rabi, detuning)
    theta = w * duration / 2.0
    c = np.cos(theta)
    s = np.sin(theta)
    safe = np.where(w == 0.0, 1.0, w)
    sz = np.where(w == 0.0, 0.0, detuning / safe)
    sx = np.where(w == 0.0, 0.0, rabi / safe)
    u = np.empty(w.shape + (2, 2), dtype=np.complex128)
    u[..., 0, 0] = c - 1j * s * sz
    u[..., 0, 1] = -1j * s * sx * np.exp(-1j * phase)
    u[..., 1, 0] = -1j * s * sx * np.exp(1j * phase)
    u[..., 1, 1] = c + 1j * s * sz
    return u


def apply_two_level(states: np.ndarray, u: np.ndarray, i: int, j: int) -> None:
    """Apply per-shot 2x2 unitaries to components (i, j) of batched kets, in place.

    `states` has shape (nshots, dim), `u` shape (nshots, 2, 2).
    """
    a = states[:, i].copy()
    b = states[:, j]
    states[:, i] = u[:, 0, 0] * a + u[:, 0, 1] * b
    states[:, j] = u[:, 1, 0] * a + u[:, 1, 1] * b


def _embed_two_level(u2: np.ndarray, dim: int, i: int, j: int) -> np.ndarray:
    u = np.eye(dim, dtype=np.complex128)
    u[i, i] = u2[0, 0]
    u[i, j] = u2[0, 1]
    u[j, i] = u2[1, 0]
    u[j, j] = u2[1, 1]
    return u


def apply_rabi(state: DensityMatrix, pulse: PulseSpec) -> DensityMatrix:
    """Coherent rotation on one two-level transition, identity elsewhere.

    The pulse must carry a single tone; two-tone conversion pulses go
    through `convert_s_to_f` / `convert_f_to_s`.
    """
    if len(pulse.tones) != 1:
        raise ValueError("apply_rabi drives one transition; use the conversion ops for two-tone pulses")
    lower, upper = pulse.transition
    i = state.index(lower)
    j = state.index(upper)
    off, tphase = pulse.tones[0]
    u2 = rotation_matrix(pulse.rabi, pulse.detuning + off, pulse.phase + tphase, pulse.duration)
    u = _embed_two_level(u2, state.dim, i, j)
    return DensityMatrix(u @ state.data @ u.conj().T, state.basis)


class Channel:
    """Completely positive trace-preserving map given by Kraus operators."""

    def __init__(self, kraus, kind: str = "custom"):
        ops = tuple(np.array(k, dtype=np.complex128) for k in kraus)
        if not ops:
            raise ValueError("empty Kraus set")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError("Kraus operators must be square and same-dimensional")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(dim))) > KRAUS_TOL:
            raise ValueError("Kraus set is not trace preserving")
        for k in ops:
            k.setflags(write=False)
        self.kraus = ops
        self.kind = kind
        self.dim = dim

    @classmethod
    def identity(cls, dim: int = 2) -> "Channel":
        return cls((np.eye(dim),), kind="identity")

    @classmethod
    def dephasing(cls, p: float) -> "Channel":
        """Phase flip with probability p: rho -> (1-p) rho + p Z rho Z."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        z = np.diag([1.0, -1.0])
        return cls((np.sqrt(1.0 - p) * np.eye(2), np.sqrt(p) * z), kind="dephasing")

    @classmethod
    def depolarizing(cls, p: float) -> "Channel":
        """rho -> (1-p) rho + p I/2 on a qubit."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
        z = np.diag([1.0, -1.0])
        return cls(
            (
                np.sqrt(1.0 - 0.75 * p) * np.eye(2),
                np.sqrt(p / 4.0) * x,
                np.sqrt(p / 4.0) * y,
                np.sqrt(p / 4.0) * z,
            ),
            kind="depolarizing",
        )

    @classmethod
    def population_transfer(cls, dim: int, src: int, dst: int, p: float) -> "Channel":
        """Incoherent transfer of population from index src to dst with probability p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if src == dst:
            raise ValueError("src and dst must differ")
        k0 = np.eye(dim, dtype=np.complex128)
        k0[src, src] = np.sqrt(1.0 - p)
        k1 = np.zeros((dim, dim), dtype=np.complex128)
        k1[dst, src] = np.sqrt(p)
        return cls((k0, k1), kind="population_transfer")


def apply_channel(state: DensityMatrix, channel: Channel) -> DensityMatrix:
    """rho -> sum_k K rho K^dagger."""
    if channel.dim != state.dim:
        raise ValueError("channel dimension does not match state")
    out = np.zeros_like(state.data)
    for k in channel.kraus:
        out = out + k @ state.data @ k.conj().T
    return DensityMatrix(out, state.basis)


def fidelity(state: DensityMatrix, target: np.ndarray) -> float:
    """<psi| rho |psi> for a normalized pure target, real in [0, 1]."""
    v = np.asarray(target, dtype=np.complex128).ravel()
    if v.size != state.dim:
        raise ValueError("target dimension does not match state")
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError("target state is not normalized")
    val = v.conj() @ state.data @ v
    if abs(val.imag) > 1e-12:
        raise ValueError("fidelity came out non-real; state is corrupt")
    return float(min(max(val.real, 0.0), 1.0))


@dataclass(frozen=True)
class ConversionResult:
    """Output state of a type conversion plus miscalibration flags."""

    state: DensityMatrix
    flagged: tuple[str, ...] = field(default_factory=tuple)


def dual_tone_unitary(
    pulse: PulseSpec,
    paths,
    basis: tuple[LevelId, ...],
    detuning_shift: float = 0.0,
    phase_shift: float = 0.0,
    amplitude_scale: float = 1.0,
) -> np.ndarray:
    """Unitary of a two-tone pulse: one rotation per spectrally resolved path.

    `detuning_shift` and `phase_shift` are common to both tones (laser
    frequency/phase error); `amplitude_scale` rescales the Rabi rate.
    """
    if len(pulse.tones) != len(paths):
        raise ValueError("pulse must carry one tone per transfer path")
    dim = len(basis)
    u = np.eye(dim, dtype=np.complex128)
    for (lower, upper), (off, tphase) in zip(paths, pulse.tones):
        i = basis.index(lower)
        j = basis.index(upper)
        u2 = rotation_matrix(
            pulse.rabi * amplitude_scale,
            pulse.detuning + off + detuning_shift,
            pulse.phase + tphase + phase_shift,
            pulse.duration,
        )
        u = _embed_two_level(u2, dim, i, j) @ u
    return u


def _convert(
    state: DensityMatrix,
    first: tuple[PulseSpec, tuple, str],
    second: tuple[PulseSpec, tuple, str],
    source_levels,
    noise=None,
    rng=None,
    support_tol: float = 1e-9,
) -> ConversionResult:
    outside = 1.0 - state.subspace_population(source_levels)
    if outside > support_tol:
        raise ValueError(f"population {outside:.3e} outside the source qubit subspace exceeds {support_tol:.1e}")
    u = np.eye(state.dim, dtype=np.complex128)
    flagged = []
    for pulse, paths, laser in (first, second):
        if noise is not None:
            det, ph, amp = noise.sample(laser, pulse.duration, rng)
        else:
            det, ph, amp = 0.0, 0.0, 1.0
        u = dual_tone_unitary(pulse, paths, state.basis, det, ph, amp) @ u
        if not pulse.is_pi(rel_tol=1e-6):
            flagged.append(laser)
    out = DensityMatrix(u @ state.data @ u.conj().T, state.basis)
    return ConversionResult(out, tuple(flagged))


def convert_s_to_f(
    state: DensityMatrix,
    pulse_411: PulseSpec,
    pulse_3432: PulseSpec,
    noise=None,
    rng=None,
    support_tol: float = 1e-9,
) -> ConversionResult:
    """Coherent S-qubit -> F-qubit conversion (411 nm then 3432 nm pi pulse).

    A superposition a|0> + b|1> maps to a|0'> + b|1'> up to a global
    phase.  `noise`, when given, must expose sample(laser, duration, rng)
    returning one quasi-static (detuning, phase, amplitude factor) draw
    per pulse.  Non-pi pulse areas are allowed and flagged in the result.
    """
    return _convert(
        state,
        (pulse_411, PATHS_411, "411"),
        (pulse_3432, PATHS_3432, "3432"),
        S_QUBIT_BASIS,
        noise,
        rng,
        support_tol,
    )


def convert_f_to_s(
    state: DensityMatrix,
    pulse_3432: PulseSpec,
    pulse_411: PulseSpec,
    noise=None,
    rng=None,
    support_tol: float = 1e-9,
) -> ConversionResult:
    """Coherent F-qubit -> S-qubit conversion (pulse order reversed)."""
    return _convert(
        state,
        (pulse_3432, PATHS_3432, "3432"),
        (pulse_411, PATHS_411, "411"),
        F_QUBIT_BASIS,
        noise,
        rng,
        support_tol,
    )
