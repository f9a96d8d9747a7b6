"""Experiment sequences on the dual-type qubit pair.

Each runner reproduces one measurement protocol: repeated S-F-S type
conversion over the six mutually unbiased basis states, crosstalk of
S-qubit operations (Raman drive, pump/detect cycles, Doppler cooling) on
a spectator F-qubit, sympathetic versus direct cooling with carrier-Rabi
thermometry readout, randomized benchmarking of single-qubit gates, and
a plain thermometry trace.

Runners are deterministic given (plan.seed, settings): randomness comes
from per-(experiment, sweep index) Philox streams with shot-indexed
draws, so reruns are bit-identical regardless of batching.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import motion
from .estimators import fit_thermal_rabi
from .motion import ModeSet, ThermalState
from .noise import CrosstalkRates, NoiseConfig, crosstalk_channel
from .quantum import (
    Channel,
    PulseSpec,
    apply_two_level,
    batched_rotation,
)
from .rng import EXPERIMENT_IDS, stream

MUB_LABELS = ("0", "1", "plus", "minus", "left", "right")

# Index pairs of the conversion working basis (|0>, |1>, D0, D1, |0'>, |1'>)
# addressed by the two tones of each laser.
_PAIRS_411 = ((0, 2), (1, 3))
_PAIRS_3432 = ((2, 4), (3, 5))
_ETA_RATIO_3432 = 411.0 / 3432.0  # Lamb-Dicke factors scale with the optical wavevector


def mub_states() -> list[np.ndarray]:
    """The six mutually unbiased qubit states |0>, |1>, |+>, |->, |L>, |R>."""
    s = 1.0 / math.sqrt(2.0)
    return [
        np.array([1.0, 0.0], dtype=np.complex128),
        np.array([0.0, 1.0], dtype=np.complex128),
        np.array([s, s], dtype=np.complex128),
        np.array([s, -s], dtype=np.complex128),
        np.array([s, 1j * s], dtype=np.complex128),
        np.array([s, -1j * s], dtype=np.complex128),
    ]


@dataclass(frozen=True)
class ExperimentPlan:
    """What to sweep, how many shots per point, and the master seed."""

    kind: str
    sweep: tuple[float, ...]
    shots: int = 10_000
    seed: int = 2024

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        sweep = tuple(float(v) for v in self.sweep)
        if len(sweep) == 0:
            raise ValueError("sweep must be non-empty")
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ValueError("sweep values must be strictly increasing")
        object.__setattr__(self, "sweep", sweep)

    @property
    def experiment_id(self) -> int:
        return EXPERIMENT_IDS[self.kind]


@dataclass(frozen=True)
class CurveRecord:
    """One measured sweep point, optionally with the per-MUB breakdown."""

    sweep_value: float
    mean: float
    stderr: float
    per_mub: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError("mean must lie in [0, 1]")
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")
        if self.per_mub is not None and len(self.per_mub) != 6:
            raise ValueError("per_mub must hold 6 entries")


@dataclass(frozen=True)
class SpamModel:
    """State-preparation depolarization plus asymmetric readout flips."""

    prep_depol: float = 0.0
    flip_bright_to_dark: float = 0.0
    flip_dark_to_bright: float = 0.0

    def __post_init__(self) -> None:
        for name in ("prep_depol", "flip_bright_to_dark", "flip_dark_to_bright"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")

    def report_probability(self, p_bright):
        """Probability the detector reports 'bright' given the true probability."""
        return p_bright * (1.0 - self.flip_bright_to_dark) + (1.0 - p_bright) * self.flip_dark_to_bright


@dataclass(frozen=True)
class ExperimentResult:
    kind: str
    curve: list[CurveRecord]
    traces: dict[str, list[CurveRecord]] = field(default_factory=dict)
    info: dict[str, float] = field(default_factory=dict)


def _binomial_stderr(p_hat: float, n: int) -> float:
    return max(math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n), 0.5 / n)


def _mub_record(sweep_value: float, per_mub: list[float], per_err: list[float]) -> CurveRecord:
    mean = float(np.mean(per_mub))
    stderr = float(np.sqrt(np.sum(np.square(per_err))) / len(per_mub))
    return CurveRecord(sweep_value, mean, stderr, tuple(per_mub))


# ----------------------------------------------------------------------
# N-round S-F-S conversion cycling (MUB-averaged fidelity versus N)


@dataclass(frozen=True)
class ConversionSettings:
    """Physics of one conversion round plus the SPAM model of the sequence."""

    pulse_411: PulseSpec
    pulse_3432: PulseSpec
    noise: NoiseConfig
    thermal: ThermalState
    modes: ModeSet
    spam: SpamModel
    eta_ratio_3432: float = _ETA_RATIO_3432
    verify_each_round: bool = False


def conversion_area_error_per_round(settings: ConversionSettings) -> float:
    """Expected round-trip error from pulse-area noise (amplitude jitter
    plus the thermal spread of the carrier Rabi frequency)."""
    jitter2 = settings.noise.amplitude_jitter_rms**2
    var_411 = motion.thermal_scale_variance(settings.thermal, settings.modes)
    var_3432 = motion.thermal_scale_variance(settings.thermal, settings.modes, settings.eta_ratio_3432)
    per_pulse = (math.pi / 2.0) ** 2
    return per_pulse * (2.0 * (jitter2 + var_411) + 2.0 * (jitter2 + var_3432))


def _apply_conversion_pulse(states, pulse, pairs, laser, scales, noise, rng, reverse=False):
    det, ph, amp = noise.sample_many(laser, pulse.duration, states.shape[0], rng)
    u = batched_rotation(pulse.rabi * amp * scales, det, ph, pulse.duration)
    for i, j in pairs:
        apply_two_level(states, u, i, j)
    return states


def run_conversion_cycle(plan: ExperimentPlan, settings: ConversionSettings) -> ExperimentResult:
    """Monte Carlo of N rounds of S-F-S conversion over the MUB states.

    Per shot: prepare (with preparation depolarization), run N round
    trips with fresh quasi-static pulse noise per pulse and one thermal
    Fock draw per shot, map back and read out through the measurement
    flips.  With `verify_each_round`, leakage found after each S->F
    transfer discards the shot (conditioning), and the discard fraction
    is reported.
    """
    if plan.kind != "conversion_cycle":
        raise ValueError("plan kind must be conversion_cycle")
    mubs = mub_states()
    records = []
    discarded = 0
    total = 0
    for sweep_idx, value in enumerate(plan.sweep):
        n_rounds = int(round(value))
        if n_rounds < 0:
            raise ValueError("round counts must be >= 0")
        per_mub, per_err = [], []
        for mub_idx, psi in enumerate(mubs):
            rng = stream(plan.seed, plan.experiment_id, sweep_idx, mub_idx)
            shots = plan.shots
            states = np.zeros((shots, 6), dtype=np.complex128)
            states[:, 0] = psi[0]
            states[:, 1] = psi[1]
            if settings.spam.prep_depol > 0:
                depol = rng.random(shots) < settings.spam.prep_depol
                pole = rng.random(shots) < 0.5
                states[depol, 0] = np.where(pole[depol], 1.0, 0.0)
                states[depol, 1] = np.where(pole[depol], 0.0, 1.0)
            fock = motion.sample_fock_numbers(settings.thermal, settings.modes, shots, rng)
            scale_411 = motion.first_order_scales(fock, settings.modes)
            scale_3432 = motion.first_order_scales(fock, settings.modes, settings.eta_ratio_3432)
            alive = np.ones(shots, dtype=bool)
            for _ in range(n_rounds):
                _apply_conversion_pulse(states, settings.pulse_411, _PAIRS_411, "411", scale_411, settings.noise, rng)
                _apply_conversion_pulse(states, settings.pulse_3432, _PAIRS_3432, "3432", scale_3432, settings.noise, rng)
                if settings.verify_each_round:
                    p_f = np.abs(states[:, 4]) ** 2 + np.abs(states[:, 5]) ** 2
                    found = rng.random(shots) < np.clip(1.0 - p_f, 0.0, 1.0)
                    alive &= ~found
                    # Survivors are conditioned on "no leak": project onto the F-qubit pair.
                    states[:, :4] = 0.0
                    norm = np.sqrt(np.clip(p_f, 1e-300, None))
                    states[:, 4] /= norm
                    states[:, 5] /= norm
                _apply_conversion_pulse(states, settings.pulse_3432, _PAIRS_3432, "3432", scale_3432, settings.noise, rng)
                _apply_conversion_pulse(states, settings.pulse_411, _PAIRS_411, "411", scale_411, settings.noise, rng)
            overlap = np.conj(psi[0]) * states[:, 0] + np.conj(psi[1]) * states[:, 1]
            p_bright = np.abs(overlap) ** 2
            p_report = settings.spam.report_probability(p_bright)
            outcome = rng.random(shots) < p_report
            n_alive = int(alive.sum())
            discarded += shots - n_alive
            total += shots
            if n_alive == 0:
                raise RuntimeError("all shots discarded by the verification step")
            p_hat = float(outcome[alive].mean())
            per_mub.append(p_hat)
            per_err.append(_binomial_stderr(p_hat, n_alive))
        records.append(_mub_record(value, per_mub, per_err))
    info = {"discard_fraction": discarded / total if total else 0.0}
    return ExperimentResult(plan.kind, records, info=info)


# ----------------------------------------------------------------------
# crosstalk of S-qubit operations on a spectator F-qubit


def _spectator_curve(plan, channel, spam, prep_discard):
    """Shared engine: evolve each MUB density matrix through per-cycle
    channels (cumulatively along the sweep) and sample shot outcomes."""
    mubs = mub_states()
    eye = np.eye(2, dtype=np.complex128) / 2.0
    rhos = []
    for psi in mubs:
        rho = np.outer(psi, psi.conj())
        rhos.append((1.0 - spam.prep_depol) * rho + spam.prep_depol * eye)
    records = []
    kept_total = 0
    total = 0
    prev = 0.0
    for sweep_idx, value in enumerate(plan.sweep):
        rng = stream(plan.seed, plan.experiment_id, sweep_idx)
        gap = value - prev
        for k, rho in enumerate(rhos):
            rhos[k] = _apply_channel_matrix(rho, channel, gap)
        prev = value
        kept = plan.shots - int(rng.binomial(plan.shots, prep_discard)) if prep_discard > 0 else plan.shots
        kept = max(kept, 1)
        kept_total += kept
        total += plan.shots
        per_mub, per_err = [], []
        for psi, rho in zip(mubs, rhos):
            fid = float(np.real(psi.conj() @ rho @ psi))
            p_report = spam.report_probability(fid)
            hits = int(rng.binomial(kept, min(max(p_report, 0.0), 1.0)))
            p_hat = hits / kept
            per_mub.append(p_hat)
            per_err.append(_binomial_stderr(p_hat, kept))
        records.append(_mub_record(value, per_mub, per_err))
    info = {"discard_fraction": 1.0 - kept_total / total if total else 0.0}
    return records, info


def _apply_channel_matrix(rho: np.ndarray, channel: Channel, repeats: float) -> np.ndarray:
    n = int(round(repeats))
    for _ in range(n):
        out = np.zeros_like(rho)
        for k in channel.kraus:
            out += k @ rho @ k.conj().T
        rho = out
    return rho


@dataclass(frozen=True)
class RamanSettings:
    """Resonant Raman drive on the S-qubit next to the spectator F-qubit."""

    rabi: float = 2.0 * math.pi * 62.5e3
    decay_time: float = 150e-6
    trace_points: int = 120
    trace_span: float = 80e-6


def run_raman_crosstalk(
    plan: ExperimentPlan,
    rates: CrosstalkRates,
    spam: SpamModel,
    raman: RamanSettings = RamanSettings(),
    prep_discard: float = 0.0,
) -> ExperimentResult:
    """Spectator F-qubit fidelity versus number of pi/2 Raman pulses.

    Also emits the decaying Rabi oscillation of the driven S-qubit
    (contrast decays with the Raman-laser coherence time).
    """
    if plan.kind != "raman_crosstalk":
        raise ValueError("plan kind must be raman_crosstalk")
    channel = crosstalk_channel("raman_pi2", rates)
    records, info = _spectator_curve(plan, channel, spam, prep_discard)
    rng = stream(plan.seed, plan.experiment_id, len(plan.sweep), 1)
    ts = np.linspace(0.0, raman.trace_span, raman.trace_points)
    p1 = 0.5 * (1.0 - np.exp(-ts / raman.decay_time) * np.cos(raman.rabi * ts))
    trace = []
    for t, p in zip(ts, p1):
        hits = int(rng.binomial(plan.shots, p))
        p_hat = hits / plan.shots
        trace.append(CurveRecord(float(t), p_hat, _binomial_stderr(p_hat, plan.shots)))
    return ExperimentResult(plan.kind, records, traces={"s_rabi": trace}, info=info)


def run_pump_detect_crosstalk(
    plan: ExperimentPlan,
    rates: CrosstalkRates,
    spam: SpamModel,
    with_pi_pulse: bool,
    s_outcome_deviation: float = 0.01,
    prep_discard: float = 0.0,
) -> ExperimentResult:
    """Spectator F-qubit fidelity versus pump/detect cycles on the S-qubit.

    `with_pi_pulse` inserts a microwave pi pulse after pumping so the
    S-qubit is detected in |1> (per-cycle crosstalk eps_1 instead of
    eps_0).  The S-qubit bright-probability trace deviates from its
    ideal value by the configured SPAM deviation.
    """
    expected_kind = "pump_detect_crosstalk_1" if with_pi_pulse else "pump_detect_crosstalk_0"
    if plan.kind != expected_kind:
        raise ValueError(f"plan kind must be {expected_kind}")
    channel = crosstalk_channel("pump_detect_1" if with_pi_pulse else "pump_detect_0", rates)
    records, info = _spectator_curve(plan, channel, spam, prep_discard)
    rng = stream(plan.seed, plan.experiment_id, len(plan.sweep), 1)
    p_ideal = 1.0 - s_outcome_deviation if with_pi_pulse else s_outcome_deviation
    trace = []
    for value in plan.sweep:
        hits = int(rng.binomial(plan.shots, p_ideal))
        p_hat = hits / plan.shots
        trace.append(CurveRecord(float(value), p_hat, _binomial_stderr(p_hat, plan.shots)))
    return ExperimentResult(plan.kind, records, traces={"s_outcome": trace}, info=info)


# ----------------------------------------------------------------------
# sympathetic / direct Doppler cooling with thermometry readout


@dataclass(frozen=True)
class CoolingSettings:
    """Heating-then-cooling schedule and relaxation model parameters."""

    base_temperature: float = 1.0e-3
    hot_temperature: float = 30.0e-3
    steady_temperature: float = 1.0e-3
    rate: float = 5.0e3
    sympathetic_participation: float = 0.5
    heat_time: float = 5.0e-3
    coherence_sweep: tuple[float, ...] = (0.0, 0.03, 0.06, 0.1, 0.15, 0.2, 0.25)


@dataclass(frozen=True)
class ThermometrySettings:
    """Carrier-Rabi thermometry trace: probe Rabi frequency and sampling."""

    omega0: float = 2.0 * math.pi * 859.4e3
    periods: float = 50.0
    points: int = 700
    shots: int = 2000


def thermometry_trace(thermal: ThermalState, modes: ModeSet, thermo: ThermometrySettings, rng):
    """Sampled carrier Rabi trace (t, survival, stderr) at fixed occupations."""
    span = thermo.periods * 2.0 * math.pi / thermo.omega0
    ts = np.linspace(0.0, span, thermo.points)
    p = np.asarray(motion.thermal_carrier_signal(ts, thermo.omega0, thermal, modes))
    hits = rng.binomial(thermo.shots, np.clip(p, 0.0, 1.0))
    p_hat = hits / thermo.shots
    err = np.maximum(np.sqrt(np.clip(p_hat * (1.0 - p_hat), 0.0, None) / thermo.shots), 0.5 / thermo.shots)
    return ts, p_hat, err


def run_sympathetic_cooling(
    plan: ExperimentPlan,
    settings: CoolingSettings,
    modes: ModeSet,
    rates: CrosstalkRates,
    spam: SpamModel,
    thermo: ThermometrySettings = ThermometrySettings(),
) -> ExperimentResult:
    """Cooling curve: heat the crystal, cool for each sweep time, read the
    temperature back through a carrier-Rabi thermometry fit.

    Sympathetic runs (kind sympathetic_cooling) cool through the S-ion
    only (participation < 1) and also record the spectator F-qubit
    fidelity over the coherence sweep; direct runs (global_cooling) cool
    both ions with participation 1 and keep no F-qubit.
    """
    if plan.kind not in ("sympathetic_cooling", "global_cooling"):
        raise ValueError("plan kind must be sympathetic_cooling or global_cooling")
    sympathetic = plan.kind == "sympathetic_cooling"
    participation = settings.sympathetic_participation if sympathetic else 1.0
    base = ThermalState(temperature=settings.base_temperature)
    nbar_base = base.nbars(modes)
    nbar_hot = ThermalState(temperature=settings.hot_temperature).nbars(modes)
    heat_rates = (nbar_hot - nbar_base) / settings.heat_time
    hot = motion.heating_step(base, settings.heat_time, heat_rates, modes)
    nbar_ss = ThermalState(temperature=settings.steady_temperature).nbars(modes)

    records = []
    fit_failures = 0
    for sweep_idx, t_cool in enumerate(plan.sweep):
        rng = stream(plan.seed, plan.experiment_id, sweep_idx)
        state = motion.cooling_step(hot, t_cool, settings.rate, nbar_ss, participation)
        ts, p_hat, err = thermometry_trace(state, modes, thermo, rng)
        fit = fit_thermal_rabi(ts, p_hat, err, modes=modes)
        if not fit.converged:
            fit_failures += 1
        records.append(CurveRecord(float(t_cool), fit.params["T"], fit.stderrs["T"]))

    traces = {}
    if sympathetic:
        coh = []
        mubs = mub_states()
        for sweep_idx, t in enumerate(settings.coherence_sweep):
            rng = stream(plan.seed, plan.experiment_id, len(plan.sweep) + sweep_idx, 7)
            channel = crosstalk_channel("cooling", rates, dt=t) if t > 0 else None
            per_mub, per_err = [], []
            for psi in mubs:
                rho = np.outer(psi, psi.conj())
                rho = (1.0 - spam.prep_depol) * rho + spam.prep_depol * np.eye(2) / 2.0
                if channel is not None:
                    rho = _apply_channel_matrix(rho, channel, 1)
                fid = float(np.real(psi.conj() @ rho @ psi))
                hits = int(rng.binomial(plan.shots, min(max(spam.report_probability(fid), 0.0), 1.0)))
                p_hat = hits / plan.shots
                per_mub.append(p_hat)
                per_err.append(_binomial_stderr(p_hat, plan.shots))
            coh.append(_mub_record(float(t), per_mub, per_err))
        traces["f_coherence"] = coh
    info = {
        "participation": participation,
        "thermometry_fit_failures": float(fit_failures),
        "steady_nbar_mean": float(np.mean(nbar_ss)),
    }
    return ExperimentResult(plan.kind, records, traces=traces, info=info)


# ----------------------------------------------------------------------
# randomized benchmarking of microwave single-qubit gates


def _canonical_key(u: np.ndarray) -> bytes:
    # Phase-normalize on the first non-negligible entry; Clifford entries
    # have magnitude 0, 1/2, 1/sqrt(2) or 1, so thresholds are safe.
    flat = u.ravel()
    k = int(np.flatnonzero(np.abs(flat) > 1e-6)[0])
    phase = flat[k] / abs(flat[k])
    canon = np.round(flat / phase, 6) + 0.0
    return canon.tobytes()


def _build_clifford_group():
    h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
    s = np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=np.complex128)
    found = {_canonical_key(np.eye(2, dtype=np.complex128)): np.eye(2, dtype=np.complex128)}
    frontier = list(found.values())
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = g @ u
                key = _canonical_key(v)
                if key not in found:
                    found[key] = v
                    nxt.append(v)
        frontier = nxt
    elements = [found[k] for k in sorted(found)]
    if len(elements) != 24:
        raise RuntimeError(f"Clifford closure produced {len(elements)} elements, expected 24")
    keys = {_canonical_key(u): i for i, u in enumerate(elements)}
    n = len(elements)
    mult = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            mult[a, b] = keys[_canonical_key(elements[a] @ elements[b])]
    inv = np.zeros(n, dtype=np.int64)
    ident = keys[_canonical_key(np.eye(2, dtype=np.complex128))]
    for a in range(n):
        inv[a] = int(np.where(mult[a] == ident)[0][0])
    return np.array(elements), mult, inv


_CLIFFORD_CACHE = None


def clifford_group():
    """(unitaries, multiplication table, inverse table) of the 24 single-qubit Cliffords."""
    global _CLIFFORD_CACHE
    if _CLIFFORD_CACHE is None:
        _CLIFFORD_CACHE = _build_clifford_group()
    return _CLIFFORD_CACHE


def _apply_channel_batch(rhos: np.ndarray, channel: Channel) -> np.ndarray:
    out = np.zeros_like(rhos)
    for k in channel.kraus:
        out += k @ rhos @ k.conj().T
    return out


def run_rb(
    plan: ExperimentPlan,
    gate_error_channel: Channel,
    spam: SpamModel = SpamModel(),
    sequences_per_point: int = 16,
) -> ExperimentResult:
    """Randomized benchmarking: random Clifford sequences with a final
    inverting Clifford; the per-gate error channel follows every gate."""
    if plan.kind not in ("rb_s_qubit", "rb_f_qubit"):
        raise ValueError("plan kind must be rb_s_qubit or rb_f_qubit")
    if sequences_per_point < 1:
        raise ValueError("sequences_per_point must be >= 1")
    unitaries, mult, inv = clifford_group()
    records = []
    for sweep_idx, value in enumerate(plan.sweep):
        m = int(round(value))
        if m < 1:
            raise ValueError("sequence lengths must be >= 1")
        rng = stream(plan.seed, plan.experiment_id, sweep_idx)
        nseq = sequences_per_point
        idx = rng.integers(0, len(unitaries), size=(nseq, m))
        rho0 = np.diag([1.0, 0.0]).astype(np.complex128)
        rhos = np.broadcast_to(rho0, (nseq, 2, 2)).copy()
        rhos = (1.0 - spam.prep_depol) * rhos + spam.prep_depol * np.eye(2) / 2.0
        net = idx[:, 0].copy()
        for j in range(m):
            if j > 0:
                net = mult[idx[:, j], net]
            gates = unitaries[idx[:, j]]
            rhos = gates @ rhos @ gates.conj().swapaxes(-1, -2)
            rhos = _apply_channel_batch(rhos, gate_error_channel)
        closing = unitaries[inv[net]]
        rhos = closing @ rhos @ closing.conj().swapaxes(-1, -2)
        rhos = _apply_channel_batch(rhos, gate_error_channel)
        survival = np.clip(rhos[:, 0, 0].real, 0.0, 1.0)
        p_report = np.clip(spam.report_probability(survival), 0.0, 1.0)
        shots_per_seq = max(plan.shots // nseq, 1)
        hits = rng.binomial(shots_per_seq, p_report)
        total_hits = int(hits.sum())
        total_shots = shots_per_seq * nseq
        p_hat = total_hits / total_shots
        records.append(CurveRecord(float(m), p_hat, _binomial_stderr(p_hat, total_shots)))
    return ExperimentResult(plan.kind, records)


# ----------------------------------------------------------------------
# plain thermometry trace


def run_thermometry(plan: ExperimentPlan, thermal: ThermalState, modes: ModeSet, omega0: float, trace_shots=None) -> ExperimentResult:
    """Carrier Rabi oscillation trace at fixed mode occupations.

    plan.sweep is the probe-time grid in seconds; each point is sampled
    with plan.shots (or trace_shots) binomial draws.
    """
    if plan.kind != "thermometry":
        raise ValueError("plan kind must be thermometry")
    shots = plan.shots if trace_shots is None else trace_shots
    records = []
    rng = stream(plan.seed, plan.experiment_id, 0)
    ts = np.asarray(plan.sweep)
    p = np.asarray(motion.thermal_carrier_signal(ts, omega0, thermal, modes))
    hits = rng.binomial(shots, np.clip(p, 0.0, 1.0))
    for t, h in zip(ts, hits):
        p_hat = h / shots
        records.append(CurveRecord(float(t), p_hat, _binomial_stderr(p_hat, shots)))
    return ExperimentResult(plan.kind, records)
