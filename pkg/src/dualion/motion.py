"""Motional-mode physics for a two-ion crystal probed on the carrier.

Covers Bose-Einstein thermal occupation, Fock-number statistics, the
phonon-number dependence of the carrier Rabi frequency in the Lamb-Dicke
regime, the closed-form thermal dephasing of carrier Rabi oscillations,
and simple exponential cooling / linear heating maps for the mode
occupations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom import HBAR, KB

LAMB_DICKE_MAX = 0.3
LAGUERRE_N_MAX = 10_000

# Default trap settings for the conversion experiments: raised transverse
# trap frequencies, axial 120 kHz, probe at 45 degrees to both transverse
# axes so all four transverse modes couple with the same Lamb-Dicke factor.
TRAP_OMEGA_X = 2 * math.pi * 3.63e6
TRAP_OMEGA_Y = 2 * math.pi * 3.48e6
TRAP_OMEGA_Z = 2 * math.pi * 120e3
DEFAULT_ETA = 0.024


@dataclass(frozen=True)
class ModeSet:
    """Motional modes as (angular frequency, Lamb-Dicke factor) pairs."""

    omegas: tuple[float, ...]
    etas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.omegas) != len(self.etas):
            raise ValueError("omegas and etas must have the same length")
        if len(self.omegas) == 0:
            raise ValueError("at least one mode required")
        if any(w <= 0 for w in self.omegas):
            raise ValueError("mode frequencies must be positive")
        if any(not 0.0 <= e < LAMB_DICKE_MAX for e in self.etas):
            raise ValueError(f"Lamb-Dicke factors must lie in [0, {LAMB_DICKE_MAX})")
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "etas", tuple(float(e) for e in self.etas))

    def __len__(self) -> int:
        return len(self.omegas)

    def scaled_etas(self, factor: float) -> "ModeSet":
        return ModeSet(self.omegas, tuple(e * factor for e in self.etas))


def default_transverse_modes(
    omega_x: float = TRAP_OMEGA_X,
    omega_y: float = TRAP_OMEGA_Y,
    omega_z: float = TRAP_OMEGA_Z,
    eta: float = DEFAULT_ETA,
) -> ModeSet:
    """Four transverse modes of a two-ion chain: common and stretch per axis.

    The transverse stretch (rocking) mode of a two-ion crystal sits at
    sqrt(omega_t^2 - omega_z^2).  A single Lamb-Dicke factor is used for
    all four modes.
    """
    stretch_x = math.sqrt(omega_x**2 - omega_z**2)
    stretch_y = math.sqrt(omega_y**2 - omega_z**2)
    return ModeSet((omega_x, stretch_x, omega_y, stretch_y), (eta,) * 4)


def mean_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation 1 / (exp(hbar w / kB T) - 1)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    return 1.0 / math.expm1(HBAR * omega / (KB * temperature))


def temperature_for_occupation(nbar: float, omega: float) -> float:
    """Temperature at which a mode of frequency omega holds nbar quanta."""
    if nbar <= 0:
        raise ValueError("nbar must be positive")
    if omega <= 0:
        raise ValueError("omega must be positive")
    return HBAR * omega / (KB * math.log1p(1.0 / nbar))


@dataclass(frozen=True)
class ThermalState:
    """Mode occupations, either as one shared temperature or explicit nbars."""

    temperature: float | None = None
    nbar: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if (self.temperature is None) == (self.nbar is None):
            raise ValueError("give exactly one of temperature or nbar")
        if self.temperature is not None and self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.nbar is not None:
            nb = tuple(float(n) for n in self.nbar)
            if any(n < 0 for n in nb):
                raise ValueError("nbar must be >= 0")
            object.__setattr__(self, "nbar", nb)

    def nbars(self, modes: ModeSet) -> np.ndarray:
        if self.temperature is not None:
            return np.array([mean_occupation(w, self.temperature) for w in modes.omegas])
        if len(self.nbar) != len(modes):
            raise ValueError("nbar length does not match mode count")
        return np.array(self.nbar)


@dataclass(frozen=True)
class FockSample:
    """One set of phonon numbers, one entry per mode."""

    n: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(int(k) != k or k < 0 for k in self.n):
            raise ValueError("phonon numbers must be non-negative integers")
        object.__setattr__(self, "n", tuple(int(k) for k in self.n))


def fock_probability(sample: FockSample, thermal: ThermalState, modes: ModeSet) -> float:
    """Thermal probability prod_i nbar_i^n_i / (nbar_i + 1)^(n_i + 1)."""
    if len(sample.n) != len(modes):
        raise ValueError("sample length does not match mode count")
    nb = thermal.nbars(modes)
    # Log-space product avoids underflow for large n.
    logp = 0.0
    for n_i, nb_i in zip(sample.n, nb):
        if nb_i == 0.0:
            if n_i > 0:
                return 0.0
            continue
        logp += n_i * math.log(nb_i) - (n_i + 1) * math.log(nb_i + 1.0)
    return math.exp(logp)


def fock_cutoff(nbar: float, tail: float = 1e-9) -> int:
    """Smallest N such that P(n <= N) >= 1 - tail for a thermal mode."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if not 0 < tail < 1:
        raise ValueError("tail must be in (0, 1)")
    if nbar == 0.0:
        return 0
    # Geometric tail: P(n > N) = (nbar / (nbar + 1))^(N + 1).
    r = nbar / (nbar + 1.0)
    n = math.ceil(math.log(tail) / math.log(r)) - 1
    return max(0, int(n))


def laguerre(n: int, x: float) -> float:
    """Laguerre polynomial L_n(x) by the stable three-term recurrence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > LAGUERRE_N_MAX:
        raise ValueError(f"n={n} beyond supported Laguerre range {LAGUERRE_N_MAX}")
    if n == 0:
        return 1.0
    lm1, l = 1.0, 1.0 - x
    for k in range(1, n):
        lm1, l = l, ((2 * k + 1 - x) * l - k * lm1) / (k + 1)
    return l


def carrier_rabi(sample: FockSample, omega0: float, modes: ModeSet, mode: str = "exact") -> float:
    """Carrier Rabi frequency at fixed phonon numbers.

    exact:        Omega0 * prod_i exp(-eta_i^2/2) L_{n_i}(eta_i^2)
    first_order:  Omega0 * (1 - sum_i (n_i + 1/2) eta_i^2)
    """
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    if len(sample.n) != len(modes):
        raise ValueError("sample length does not match mode count")
    if mode == "exact":
        scale = 1.0
        for n_i, eta in zip(sample.n, modes.etas):
            scale *= math.exp(-eta * eta / 2.0) * laguerre(n_i, eta * eta)
        return omega0 * scale
    if mode == "first_order":
        corr = sum((n_i + 0.5) * eta * eta for n_i, eta in zip(sample.n, modes.etas))
        return omega0 * (1.0 - corr)
    raise ValueError(f"unknown mode {mode!r}")


def thermal_carrier_signal(t, omega0: float, thermal: ThermalState, modes: ModeSet):
    """Probability to remain in the initial state during thermal carrier driving.

    P(t) = (1 + Re f(t)) / 2 with
    f(t) = exp(i Omega0 t (1 - sum_i eta_i^2/2))
           * prod_i 1 / (nbar_i + 1 - nbar_i exp(-i eta_i^2 Omega0 t)),
    the closed form of the Fock-averaged first-order carrier signal.
    """
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    tarr = np.asarray(t, dtype=float)
    if np.any(tarr < 0):
        raise ValueError("t must be >= 0")
    nb = thermal.nbars(modes)
    eta2 = np.array(modes.etas) ** 2
    f = np.exp(1j * omega0 * tarr * (1.0 - eta2.sum() / 2.0))
    for nb_i, e2 in zip(nb, eta2):
        f = f / (nb_i + 1.0 - nb_i * np.exp(-1j * e2 * omega0 * tarr))
    p = (1.0 + f.real) / 2.0
    return p if np.ndim(t) else float(p)


def cooling_step(
    thermal: ThermalState,
    dt: float,
    rate: float,
    steady_nbar,
    participation=1.0,
    modes: ModeSet | None = None,
) -> ThermalState:
    """Exponential relaxation of every mode toward its steady-state occupation.

    nbar -> nbar_ss + (nbar - nbar_ss) exp(-participation * rate * dt),
    with per-mode participation factors (sympathetic cooling of shared
    modes uses 0.5, direct cooling 1.0).
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if rate < 0:
        raise ValueError("rate must be >= 0")
    nb = _resolve_nbars(thermal, modes)
    ss = np.broadcast_to(np.asarray(steady_nbar, dtype=float), nb.shape)
    part = np.broadcast_to(np.asarray(participation, dtype=float), nb.shape)
    out = ss + (nb - ss) * np.exp(-part * rate * dt)
    return ThermalState(nbar=tuple(out))


def heating_step(thermal: ThermalState, dt: float, heating_rate, modes: ModeSet | None = None) -> ThermalState:
    """Linear heating: nbar -> nbar + heating_rate * dt per mode."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    nb = _resolve_nbars(thermal, modes)
    rate = np.broadcast_to(np.asarray(heating_rate, dtype=float), nb.shape)
    if np.any(rate < 0):
        raise ValueError("heating rate must be >= 0")
    return ThermalState(nbar=tuple(nb + rate * dt))


def _resolve_nbars(thermal: ThermalState, modes: ModeSet | None) -> np.ndarray:
    if thermal.nbar is not None:
        return np.array(thermal.nbar)
    if modes is None:
        raise ValueError("modes required to resolve a temperature-typed ThermalState")
    return thermal.nbars(modes)


def sample_fock_numbers(thermal: ThermalState, modes: ModeSet, size: int, rng: np.random.Generator) -> np.ndarray:
    """Thermal Fock-number draws, shape (nmodes, size); one joint sample per shot."""
    nb = thermal.nbars(modes)
    out = np.zeros((len(modes), size), dtype=np.int64)
    for i, nb_i in enumerate(nb):
        if nb_i > 0:
            # geometric draw on {1, 2, ...} shifted down gives P(n) = nbar^n/(nbar+1)^(n+1)
            out[i] = rng.geometric(1.0 / (nb_i + 1.0), size=size) - 1
    return out


def first_order_scales(fock: np.ndarray, modes: ModeSet, eta_scale: float = 1.0) -> np.ndarray:
    """Per-shot carrier Rabi scale 1 - sum_i (n_i + 1/2) eta_i^2 for given Fock draws."""
    eta2 = (np.array(modes.etas) * eta_scale) ** 2
    corr = 0.5 * eta2.sum() + eta2 @ fock
    return np.clip(1.0 - corr, 0.0, None)


def thermal_scale_variance(thermal: ThermalState, modes: ModeSet, eta_scale: float = 1.0) -> float:
    """Variance of the first-order carrier scale over the thermal distribution."""
    nb = thermal.nbars(modes)
    eta2 = (np.array(modes.etas) * eta_scale) ** 2
    return float(np.sum(eta2**2 * nb * (nb + 1.0)))
