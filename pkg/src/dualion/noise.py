"""Incoherent processes: laser noise, photon-counting detection, crosstalk.

Laser noise is quasi-static: one (detuning, phase, amplitude) draw per
pulse, with the detuning drawn from the laser line shape (Lorentzian or
Gaussian) of spectral width 1/(pi * coherence time).  State detection is
Poisson photon counting against a threshold, with optional mid-window
leakage flips.  Crosstalk of S-qubit operations on a spectator F-qubit
enters as pure dephasing channels whose MUB-averaged infidelity matches
the configured per-operation error rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom import F_QUBIT_0, S_QUBIT_1
from .quantum import Channel, DensityMatrix, apply_channel

DEPHASING_MAX_INFIDELITY = 2.0 / 3.0


# ----------------------------------------------------------------------
# per-pulse laser noise


@dataclass(frozen=True)
class NoiseConfig:
    """Quasi-static laser noise for the two conversion lasers.

    Spectral widths follow from the measured coherence times;
    `detuning_scale` rescales both widths (used to dial a target
    conversion error).
    """

    coherence_time_411: float = 230e-6
    coherence_time_3432: float = 20e-6
    amplitude_jitter_rms: float = 0.0
    per_shot_model: str = "lorentzian_detuning"
    detuning_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.coherence_time_411 <= 0 or self.coherence_time_3432 <= 0:
            raise ValueError("coherence times must be positive")
        if self.amplitude_jitter_rms < 0:
            raise ValueError("amplitude jitter must be >= 0")
        if self.per_shot_model not in ("lorentzian_detuning", "gaussian_detuning"):
            raise ValueError(f"unknown per-shot model {self.per_shot_model!r}")
        if self.detuning_scale < 0:
            raise ValueError("detuning scale must be >= 0")

    def coherence_time(self, laser: str) -> float:
        if laser == "411":
            return self.coherence_time_411
        if laser == "3432":
            return self.coherence_time_3432
        raise ValueError(f"unknown laser {laser!r}")

    def detuning_width(self, laser: str) -> float:
        """Angular detuning scale: Cauchy HWHM or Gaussian sigma.

        Both correspond to a spectral width (FWHM or sigma) of
        1/(pi * coherence_time) in ordinary frequency.
        """
        tc = self.coherence_time(laser)
        if math.isinf(tc):
            return 0.0
        if self.per_shot_model == "lorentzian_detuning":
            return self.detuning_scale / tc
        return self.detuning_scale * 2.0 / tc

    def sample(self, laser: str, duration: float, rng: np.random.Generator):
        """One (detuning, phase, amplitude factor) draw for a pulse."""
        det, ph, amp = self.sample_many(laser, duration, 1, rng)
        return float(det[0]), float(ph[0]), float(amp[0])

    def sample_many(self, laser: str, duration: float, size: int, rng: np.random.Generator):
        """Vectorized per-pulse draws; index = shot number."""
        if duration <= 0:
            raise ValueError("duration must be positive")
        width = self.detuning_width(laser)
        if width == 0.0:
            det = np.zeros(size)
            ph = np.zeros(size)
        else:
            if self.per_shot_model == "lorentzian_detuning":
                det = width * np.tan(np.pi * (rng.random(size) - 0.5))
            else:
                det = rng.normal(0.0, width, size)
            ph = rng.uniform(0.0, 2.0 * np.pi, size)
        if self.amplitude_jitter_rms > 0:
            amp = np.clip(1.0 + rng.normal(0.0, self.amplitude_jitter_rms, size), 0.0, None)
        else:
            amp = np.ones(size)
        return det, ph, amp


def sample_pulse_noise(noise: NoiseConfig, laser: str, duration: float, rng: np.random.Generator):
    """One quasi-static (detuning, phase, amplitude factor) draw for a pulse."""
    return noise.sample(laser, duration, rng)


def mean_pi_pulse_error(width: float, model: str, rabi: float, duration: float, npoints: int = 20001) -> float:
    """Expected transfer error of a resonant-area pi pulse under detuning noise.

    Averages 1 - (rabi^2/W^2) sin^2(W * duration / 2), W = sqrt(rabi^2 + d^2),
    over the detuning distribution (midpoint quadrature; deterministic).
    """
    if width == 0.0:
        w = rabi * duration / 2.0
        return float(1.0 - math.sin(w) ** 2)
    if model == "lorentzian_detuning":
        # d = width * tan(theta), theta uniform on (-pi/2, pi/2).
        h = np.pi / npoints
        theta = -np.pi / 2.0 + (np.arange(npoints) + 0.5) * h
        d = width * np.tan(theta)
        weights = np.full(npoints, 1.0 / npoints)
    elif model == "gaussian_detuning":
        lim = 10.0
        h = 2.0 * lim / npoints
        z = -lim + (np.arange(npoints) + 0.5) * h
        d = width * z
        weights = np.exp(-z * z / 2.0) / math.sqrt(2.0 * math.pi) * h
    else:
        raise ValueError(f"unknown model {model!r}")
    w = np.hypot(rabi, d)
    p = (rabi / w) ** 2 * np.sin(w * duration / 2.0) ** 2
    return float(np.sum(weights * (1.0 - p)))


def conversion_round_trip_error(noise: NoiseConfig, pulse_411, pulse_3432, extra_per_round: float = 0.0) -> float:
    """Expected round-trip (S-F-S) transfer error of the two-pulse conversion.

    Sums the quadrature per-pulse errors of the four pulses in a round
    trip plus `extra_per_round` for non-detuning contributions (pulse
    area jitter, thermal Rabi spread).
    """
    err = 0.0
    for pulse, laser in ((pulse_411, "411"), (pulse_3432, "3432")):
        err += 2.0 * mean_pi_pulse_error(
            noise.detuning_width(laser), noise.per_shot_model, pulse.rabi, pulse.duration
        )
    return err + extra_per_round


def calibrate_detuning_scale(
    noise: NoiseConfig, pulse_411, pulse_3432, target_round_trip_error: float, extra_per_round: float = 0.0
) -> float:
    """Detuning scale at which the expected round-trip error hits the target.

    Deterministic bisection on the quadrature estimate; raises if the
    target is below the noise-free floor.
    """
    if target_round_trip_error <= extra_per_round:
        raise ValueError("target round-trip error is below the non-detuning error floor")

    def err(scale: float) -> float:
        cfg = NoiseConfig(
            noise.coherence_time_411,
            noise.coherence_time_3432,
            noise.amplitude_jitter_rms,
            noise.per_shot_model,
            scale,
        )
        return conversion_round_trip_error(cfg, pulse_411, pulse_3432, extra_per_round)

    lo, hi = 0.0, 1.0
    while err(hi) < target_round_trip_error:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("target round-trip error unreachable")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if err(mid) < target_round_trip_error:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# photon-counting detection


@dataclass(frozen=True)
class DetectionConfig:
    """Threshold photon counting: Poisson rates, window, optional leakage flips."""

    bright_rate: float
    dark_rate: float
    duration: float
    threshold: int
    leak_bright_to_dark: float = 0.0
    leak_dark_to_bright: float = 0.0

    def __post_init__(self) -> None:
        if self.bright_rate < 0 or self.dark_rate < 0:
            raise ValueError("count rates must be >= 0")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.leak_bright_to_dark < 0 or self.leak_dark_to_bright < 0:
            raise ValueError("leakage rates must be >= 0")


def detect_many(bright: np.ndarray, config: DetectionConfig, rng: np.random.Generator):
    """Vectorized threshold detection; returns (outcomes, photon counts).

    At most one leakage flip per window: the ion flips at an exponential
    time and collects each rate for its share of the window.
    """
    bright = np.asarray(bright, dtype=bool)
    rate_now = np.where(bright, config.bright_rate, config.dark_rate)
    rate_after = np.where(bright, config.dark_rate, config.bright_rate)
    leak = np.where(bright, config.leak_bright_to_dark, config.leak_dark_to_bright)
    t_flip = np.full(bright.shape, np.inf)
    leaking = leak > 0
    if np.any(leaking):
        draws = rng.exponential(1.0, size=bright.shape)
        t_flip = np.where(leaking, draws / np.where(leaking, leak, 1.0), np.inf)
    seg1 = np.minimum(t_flip, config.duration)
    mu = rate_now * seg1 + rate_after * (config.duration - seg1)
    counts = rng.poisson(mu)
    return counts >= config.threshold, counts


def detect_bright_dark(is_bright: bool, config: DetectionConfig, rng: np.random.Generator):
    """Single-shot threshold detection; outcome True means 'bright'."""
    outcome, count = detect_many(np.array([is_bright]), config, rng)
    return bool(outcome[0]), int(count[0])


def poisson_cdf(k: int, mu: float) -> float:
    """P(N <= k) for N ~ Poisson(mu), stable for small k."""
    if k < 0:
        return 0.0
    if mu == 0.0:
        return 1.0
    logmu = math.log(mu)
    total = 0.0
    for i in range(k + 1):
        total += math.exp(i * logmu - mu - math.lgamma(i + 1))
    return min(total, 1.0)


def poisson_tail(k: int, mu: float) -> float:
    """P(N >= k) for N ~ Poisson(mu)."""
    return max(0.0, 1.0 - poisson_cdf(k - 1, mu))


def expected_detection_errors(config: DetectionConfig) -> tuple[float, float]:
    """(bright misread as dark, dark misread as bright), leakage-free analytic."""
    mu_b = config.bright_rate * config.duration
    mu_d = config.dark_rate * config.duration
    return poisson_cdf(config.threshold - 1, mu_b), poisson_tail(config.threshold, mu_d)


# ----------------------------------------------------------------------
# shelving detection of the two qubit types


def shelve_detect_f_many(p_zero_prime, size: int, pump_success: float, config: DetectionConfig, rng):
    """Electron-shelving readout of F-qubits: |0'> is pumped bright, |1'> stays dark.

    Returns boolean outcomes (True = bright = read as |0'>).
    """
    if not 0.0 <= pump_success <= 1.0:
        raise ValueError("pump_success must be in [0, 1]")
    in_zero = rng.random(size) < p_zero_prime
    pumped = in_zero & (rng.random(size) < pump_success)
    outcomes, _ = detect_many(pumped, config, rng)
    return outcomes


def shelve_detect_f(state: DensityMatrix, pump_success: float, config: DetectionConfig, rng) -> bool:
    """Single-shot F-qubit shelving readout; True means read as |0'>."""
    p0 = state.population(F_QUBIT_0)
    return bool(shelve_detect_f_many(p0, 1, pump_success, config, rng)[0])


def shelve_detect_s_many(p_one, size: int, transfer_chain_success, config: DetectionConfig, rng):
    """Shelving readout of S-qubits: |0> is moved to F7/2 by a transfer chain.

    Chain stages act on the population the previous stages missed;
    unshelved |0> remainder is repumped during the long window and reads
    bright.  Returns boolean outcomes (True = bright = read as |1>).
    """
    residual = 1.0
    for p_stage in transfer_chain_success:
        if not 0.0 <= p_stage <= 1.0:
            raise ValueError("transfer probabilities must be in [0, 1]")
        residual *= 1.0 - p_stage
    in_one = rng.random(size) < p_one
    unshelved = ~in_one & (rng.random(size) < residual)
    outcomes, _ = detect_many(in_one | unshelved, config, rng)
    return outcomes


def shelve_detect_s(state: DensityMatrix, transfer_chain_success, config: DetectionConfig, rng) -> bool:
    """Single-shot S-qubit shelving readout; True means read as |1>."""
    p1 = state.population(S_QUBIT_1)
    return bool(shelve_detect_s_many(p1, 1, transfer_chain_success, config, rng)[0])


def expected_f_shelving_fidelity(pump_success: float, config: DetectionConfig) -> float:
    """Analytic mean F-qubit shelving fidelity over the two basis states."""
    err_b, err_d = expected_detection_errors(config)
    err_zero = pump_success * err_b + (1.0 - pump_success) * (1.0 - err_d)
    err_one = err_d
    return 1.0 - 0.5 * (err_zero + err_one)


def expected_s_shelving_fidelity(transfer_chain_success, config: DetectionConfig) -> float:
    """Analytic mean S-qubit shelving fidelity over the two basis states."""
    err_b, err_d = expected_detection_errors(config)
    residual = 1.0
    for p_stage in transfer_chain_success:
        residual *= 1.0 - p_stage
    err_zero = residual * (1.0 - err_b) + (1.0 - residual) * err_d
    err_one = err_b
    return 1.0 - 0.5 * (err_zero + err_one)


# ----------------------------------------------------------------------
# optical pumping


def optical_pump_to_0(state: DensityMatrix, cycles: int, residual_per_cycle: float = 0.05) -> DensityMatrix:
    """Pump S-manifold population into |0>; residual error decays geometrically.

    After `cycles` pumping cycles the population left in |1> is the
    initial amount times residual_per_cycle**cycles.
    """
    if cycles < 0:
        raise ValueError("cycles must be >= 0")
    if not 0.0 <= residual_per_cycle <= 1.0:
        raise ValueError("residual_per_cycle must be in [0, 1]")
    p = 1.0 - residual_per_cycle**cycles if cycles > 0 else 0.0
    channel = Channel.population_transfer(state.dim, src=1, dst=0, p=p)
    return apply_channel(state, channel)


# ----------------------------------------------------------------------
# crosstalk of S-qubit operations on the spectator F-qubit


@dataclass(frozen=True)
class CrosstalkRates:
    """Measured per-operation crosstalk errors on a spectator F-qubit."""

    eps_r: float = 1.0e-5   # per pi/2 Raman pulse
    eps_0: float = 9.0e-5   # per |0> pump-detect cycle
    eps_1: float = 1.3e-4   # per |1> pump-detect cycle
    t_c: float = 2.9        # coherence time under cooling light, s

    def __post_init__(self) -> None:
        for name in ("eps_r", "eps_0", "eps_1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.t_c <= 0:
            raise ValueError("t_c must be positive")


def dephasing_for_infidelity(eps: float) -> Channel:
    """Dephasing channel whose MUB-averaged infidelity is eps (p = 3 eps / 2)."""
    if eps < 0:
        raise ValueError("infidelity must be >= 0")
    if eps > DEPHASING_MAX_INFIDELITY:
        raise ValueError(f"infidelity {eps:.3g} exceeds the pure-dephasing maximum {DEPHASING_MAX_INFIDELITY:.3g}")
    return Channel.dephasing(1.5 * eps)


def crosstalk_channel(op_kind: str, rates: CrosstalkRates, dt: float | None = None) -> Channel:
    """Dephasing channel for one S-qubit operation on the spectator F-qubit.

    op_kind: raman_pi2 | pump_detect_0 | pump_detect_1 | cooling (needs dt).
    """
    if op_kind == "raman_pi2":
        return dephasing_for_infidelity(rates.eps_r)
    if op_kind == "pump_detect_0":
        return dephasing_for_infidelity(rates.eps_0)
    if op_kind == "pump_detect_1":
        return dephasing_for_infidelity(rates.eps_1)
    if op_kind == "cooling":
        if dt is None or dt < 0:
            raise ValueError("cooling crosstalk needs a duration dt >= 0")
        return dephasing_for_infidelity(-math.expm1(-dt / rates.t_c))
    raise ValueError(f"unknown crosstalk op kind {op_kind!r}")


def spatial_crosstalk_ratio(waist_radius: float, separation: float) -> float:
    """Relative Gaussian-beam intensity at the neighbor ion, exp(-2 (d/w)^2)."""
    if waist_radius <= 0:
        raise ValueError("waist radius must be positive")
    if separation < 0:
        raise ValueError("separation must be >= 0")
    return math.exp(-2.0 * (separation / waist_radius) ** 2)
