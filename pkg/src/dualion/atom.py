"""Level structure and drive frequencies for dual-type qubits in 171Yb+.

The S-qubit lives in the two S1/2 clock states, the F-qubit in two clock
states of the metastable F7/2 manifold.  Conversion between the two types
runs through D5/2, driven by a 411 nm and a 3432 nm laser, each carrying
two sideband tones so that both basis states are transferred at once.

Only level splittings are modeled; absolute optical frequencies and
isotope shifts are out of scope.  All frequencies are plain Hz.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

# CODATA 2018
HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23       # J/K


class Manifold(enum.Enum):
    S12 = "S1/2"
    P12 = "P1/2"
    D32 = "D3/2"
    D52 = "D5/2"
    F72 = "F7/2"
    BRACKET32 = "[3/2]3/2"


# Hyperfine quantum numbers modeled per manifold.  D3/2 and [3/2]3/2 are
# single effective levels (F=None); D5/2 keeps the two F legs the transfer
# paths need but no further Zeeman structure.
_ALLOWED_F = {
    Manifold.S12: (0, 1),
    Manifold.P12: (0, 1),
    Manifold.D52: (2, 3),
    Manifold.F72: (3, 4),
    Manifold.D32: (None,),
    Manifold.BRACKET32: (None,),
}


@dataclass(frozen=True)
class LevelId:
    """One atomic level: manifold, hyperfine F, magnetic mF.

    mF is 0 except for the F7/2 F=4 Zeeman sublevels used by the
    sequential shelving transfers.
    """

    manifold: Manifold
    F: int | None = None
    mF: int = 0

    def __post_init__(self) -> None:
        allowed = _ALLOWED_F[self.manifold]
        if self.F not in allowed:
            raise ValueError(f"F={self.F} not modeled for {self.manifold.value}")
        if self.mF != 0 and not (self.manifold is Manifold.F72 and self.F == 4 and self.mF in (-1, 1)):
            raise ValueError(f"mF={self.mF} not modeled for {self.manifold.value} F={self.F}")

    def __repr__(self) -> str:
        f = "-" if self.F is None else self.F
        return f"|{self.manifold.value},F={f},mF={self.mF}>"


# Qubit state constants.
S_QUBIT_0 = LevelId(Manifold.S12, 0)       # |0>
S_QUBIT_1 = LevelId(Manifold.S12, 1)       # |1>
F_QUBIT_0 = LevelId(Manifold.F72, 3)       # |0'>
F_QUBIT_1 = LevelId(Manifold.F72, 4)       # |1'>
D52_PATH_0 = LevelId(Manifold.D52, 2)      # intermediate leg for |0> <-> |0'>
D52_PATH_1 = LevelId(Manifold.D52, 3)      # intermediate leg for |1> <-> |1'>
P12_F0 = LevelId(Manifold.P12, 0)
P12_F1 = LevelId(Manifold.P12, 1)
D32_LEVEL = LevelId(Manifold.D32)
BRACKET32_LEVEL = LevelId(Manifold.BRACKET32)

# Hyperfine splittings, exact Hz.  The D5/2 value is the effective gap
# between the two transfer legs, chosen to reproduce both measured
# dual-tone sideband frequencies (6.42 GHz on 411 nm, 1.91 GHz on 3432 nm).
_SPLITTING_HZ = {
    Manifold.S12: 12_642_800_000,
    Manifold.F72: 3_620_500_000,
    Manifold.P12: 2_100_000_000,
    Manifold.D52: 197_500_000,
}

# Offsets of each modeled level above the lowest modeled level of its
# manifold.  The D5/2 hyperfine ordering is inverted (F=2 above F=3).
_LEVEL_OFFSET_HZ = {
    S_QUBIT_0: 0.0,
    S_QUBIT_1: float(_SPLITTING_HZ[Manifold.S12]),
    P12_F0: 0.0,
    P12_F1: float(_SPLITTING_HZ[Manifold.P12]),
    D52_PATH_1: 0.0,
    D52_PATH_0: float(_SPLITTING_HZ[Manifold.D52]),
    F_QUBIT_0: 0.0,
    F_QUBIT_1: float(_SPLITTING_HZ[Manifold.F72]),
    LevelId(Manifold.F72, 4, -1): float(_SPLITTING_HZ[Manifold.F72]),
    LevelId(Manifold.F72, 4, 1): float(_SPLITTING_HZ[Manifold.F72]),
    D32_LEVEL: 0.0,
    BRACKET32_LEVEL: 0.0,
}


def hyperfine_splitting(manifold: Manifold) -> float:
    """Hyperfine splitting of a manifold in Hz.

    Known for S1/2 (12.6428 GHz, S-qubit microwave), F7/2 (3.6205 GHz,
    F-qubit microwave) and P1/2 (2.1 GHz, optical-pumping sideband).
    """
    try:
        return float(_SPLITTING_HZ[manifold])
    except KeyError:
        raise ValueError(f"no hyperfine splitting modeled for {manifold.value}") from None


def level_offset_hz(level: LevelId) -> float:
    """Energy offset (Hz) of a level above the lowest modeled level of its manifold."""
    return _LEVEL_OFFSET_HZ[LevelId(level.manifold, level.F, level.mF)]


class TransitionKind(enum.Enum):
    DIPOLE = "dipole"
    QUADRUPOLE = "quadrupole"
    OCTUPOLE_BRIDGE = "octupole-bridge"
    MICROWAVE = "microwave"


@dataclass(frozen=True)
class Transition:
    lower: LevelId
    upper: LevelId
    wavelength_nm: float
    kind: TransitionKind


_C_NM_HZ = 2.99792458e17  # speed of light in nm*Hz

TRANSITIONS: tuple[Transition, ...] = (
    # Detection / cooling / pumping line.
    Transition(S_QUBIT_1, P12_F0, 370.0, TransitionKind.DIPOLE),
    # D3/2 repump (upper manifold collapsed into the bracket level).
    Transition(D32_LEVEL, BRACKET32_LEVEL, 935.0, TransitionKind.DIPOLE),
    # Quadrupole leg of the type conversion.
    Transition(S_QUBIT_0, D52_PATH_0, 411.0, TransitionKind.QUADRUPOLE),
    # D5/2 <-> F7/2 bridge completing the conversion.
    Transition(D52_PATH_0, F_QUBIT_0, 3432.0, TransitionKind.OCTUPOLE_BRIDGE),
    # D5/2 depump used by the F-qubit shelving detection.
    Transition(D52_PATH_0, BRACKET32_LEVEL, 976.0, TransitionKind.DIPOLE),
    # Microwave qubit drives.
    Transition(S_QUBIT_0, S_QUBIT_1, _C_NM_HZ / 12.6428e9, TransitionKind.MICROWAVE),
    Transition(F_QUBIT_0, F_QUBIT_1, _C_NM_HZ / 3.6205e9, TransitionKind.MICROWAVE),
)

# The two simultaneously driven legs of each conversion laser,
# as (lower, upper) pairs.
PATHS_411: tuple[tuple[LevelId, LevelId], tuple[LevelId, LevelId]] = (
    (S_QUBIT_0, D52_PATH_0),
    (S_QUBIT_1, D52_PATH_1),
)
PATHS_3432: tuple[tuple[LevelId, LevelId], tuple[LevelId, LevelId]] = (
    (D52_PATH_0, F_QUBIT_0),
    (D52_PATH_1, F_QUBIT_1),
)


def _path_gap_hz(path: tuple[LevelId, LevelId]) -> float:
    lower, upper = path
    return level_offset_hz(upper) - level_offset_hz(lower)


def dual_tone_sideband(path_a: tuple[LevelId, LevelId], path_b: tuple[LevelId, LevelId]) -> float:
    """Sideband drive frequency (Hz) for a two-tone transfer pulse.

    Equals half the frequency difference between the two transfer paths;
    the laser carrier sits midway and the modulator supplies +/- this
    frequency.  Both paths must belong to the same laser (411 or 3432 nm).
    """
    for paths in (PATHS_411, PATHS_3432):
        if path_a in paths and path_b in paths:
            return abs(_path_gap_hz(path_a) - _path_gap_hz(path_b)) / 2.0
    raise ValueError("paths do not belong to the same conversion laser")
