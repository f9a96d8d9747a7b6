import pytest

from dualion import atom
from dualion.atom import (
    D52_PATH_0,
    D52_PATH_1,
    F_QUBIT_0,
    F_QUBIT_1,
    LevelId,
    Manifold,
    PATHS_3432,
    PATHS_411,
    S_QUBIT_0,
    S_QUBIT_1,
    TRANSITIONS,
    dual_tone_sideband,
    hyperfine_splitting,
)


def test_qubit_state_constants():
    assert S_QUBIT_0 == LevelId(Manifold.S12, 0, 0)
    assert S_QUBIT_1 == LevelId(Manifold.S12, 1, 0)
    assert F_QUBIT_0 == LevelId(Manifold.F72, 3, 0)
    assert F_QUBIT_1 == LevelId(Manifold.F72, 4, 0)


@pytest.mark.parametrize(
    "manifold,expected",
    [
        (Manifold.S12, 12.6428e9),
        (Manifold.F72, 3.6205e9),
        (Manifold.P12, 2.1e9),
    ],
)
def test_hyperfine_splittings(manifold, expected):
    assert hyperfine_splitting(manifold) == pytest.approx(expected, rel=0, abs=1e-3)


def test_hyperfine_splitting_rejects_unknown_manifold():
    with pytest.raises(ValueError):
        hyperfine_splitting(Manifold.D32)


def test_level_id_rejects_unmodeled_quantum_numbers():
    with pytest.raises(ValueError):
        LevelId(Manifold.S12, 2)
    with pytest.raises(ValueError):
        LevelId(Manifold.D52, 0)
    with pytest.raises(ValueError):
        LevelId(Manifold.S12, 0, 1)
    # Zeeman sublevels exist only where the shelving chain needs them.
    LevelId(Manifold.F72, 4, 1)
    LevelId(Manifold.F72, 4, -1)
    with pytest.raises(ValueError):
        LevelId(Manifold.F72, 3, 1)


def test_dual_tone_sidebands_match_measured_values():
    assert dual_tone_sideband(*PATHS_411) == pytest.approx(6.42e9, abs=5e6)
    assert dual_tone_sideband(*PATHS_3432) == pytest.approx(1.91e9, abs=5e6)


def test_dual_tone_sideband_symmetric_and_zero_for_identical_path():
    a, b = PATHS_411
    assert dual_tone_sideband(a, b) == dual_tone_sideband(b, a)
    assert dual_tone_sideband(a, a) == 0.0
    c, d = PATHS_3432
    assert dual_tone_sideband(c, d) == dual_tone_sideband(d, c)


def test_dual_tone_sideband_rejects_mixed_lasers():
    with pytest.raises(ValueError):
        dual_tone_sideband(PATHS_411[0], PATHS_3432[0])
    with pytest.raises(ValueError):
        dual_tone_sideband((S_QUBIT_0, S_QUBIT_1), (S_QUBIT_0, S_QUBIT_1))


def test_transition_table_contents():
    by_wavelength = {round(t.wavelength_nm): t for t in TRANSITIONS if t.kind is not atom.TransitionKind.MICROWAVE}
    assert set(by_wavelength) == {370, 935, 411, 3432, 976}
    assert by_wavelength[411].kind is atom.TransitionKind.QUADRUPOLE
    assert by_wavelength[3432].kind is atom.TransitionKind.OCTUPOLE_BRIDGE
    assert by_wavelength[370].kind is atom.TransitionKind.DIPOLE
    microwaves = [t for t in TRANSITIONS if t.kind is atom.TransitionKind.MICROWAVE]
    assert len(microwaves) == 2
    gaps = sorted(atom.level_offset_hz(t.upper) - atom.level_offset_hz(t.lower) for t in microwaves)
    assert gaps == pytest.approx([3.6205e9, 12.6428e9])


def test_every_transition_connects_modeled_levels():
    for t in TRANSITIONS:
        # Constructing LevelId revalidates the quantum numbers.
        LevelId(t.lower.manifold, t.lower.F, t.lower.mF)
        LevelId(t.upper.manifold, t.upper.F, t.upper.mF)
        assert t.lower != t.upper


def test_cooling_sideband_consistency():
    # The Doppler-cooling repump sideband is the sum of the S and P splittings.
    total = hyperfine_splitting(Manifold.S12) + hyperfine_splitting(Manifold.P12)
    assert total == pytest.approx(14.7e9, abs=0.05e9)


def test_conversion_paths_share_the_d52_legs():
    assert PATHS_411[0][1] == PATHS_3432[0][0] == D52_PATH_0
    assert PATHS_411[1][1] == PATHS_3432[1][0] == D52_PATH_1
    assert PATHS_411[0][0] == S_QUBIT_0 and PATHS_411[1][0] == S_QUBIT_1
    assert PATHS_3432[0][1] == F_QUBIT_0 and PATHS_3432[1][1] == F_QUBIT_1


def test_constants_are_codata():
    assert atom.HBAR == pytest.approx(1.054571817e-34, rel=1e-9)
    assert atom.KB == pytest.approx(1.380649e-23, rel=1e-12)
