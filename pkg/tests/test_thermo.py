import numpy as np
import pytest

from topobatt.model import BathParams, EmitterConfig, ModelConfig
from topobatt.dynamics import evolve_finite
from topobatt.resolvent import BoundState, find_coherent_bse, long_time_amplitude
from topobatt.thermo import (
    asymptotic_max_ergotropy,
    asymptotic_max_stored,
    charging_power,
    envelope_details,
    ergotropy,
    ergotropy_from_population,
    indicator_series,
    passive_state,
    stored_energy,
)


def pole(energy, residue, mult=1):
    return BoundState(energy=complex(energy), residue=complex(residue),
                      multiplicity=mult)


def test_stored_energy_values():
    assert stored_energy(1.0) == pytest.approx(1.0)
    assert stored_energy(0.0) == 0.0
    assert stored_energy(np.sqrt(0.3), omega_e=2.0) == pytest.approx(0.6)


def test_passive_state_orders_populations():
    rho = np.diag([0.75, 0.25]).astype(complex)
    assert np.allclose(passive_state(rho), np.diag([0.25, 0.75]))
    mixed = np.diag([0.5, 0.5]).astype(complex)
    assert np.allclose(passive_state(mixed), mixed)
    plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    assert np.allclose(passive_state(plus), np.diag([0.0, 1.0]), atol=1e-12)


def test_ergotropy_values():
    assert ergotropy(np.diag([0.75, 0.25]).astype(complex)) == pytest.approx(0.5)
    assert ergotropy(np.diag([0.25, 0.75]).astype(complex)) == pytest.approx(0.0)
    plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    assert ergotropy(plus) == pytest.approx(0.5)


def test_ergotropy_zero_iff_passive():
    for p in (0.0, 0.2, 0.5, 0.7, 1.0):
        rho = np.diag([p, 1 - p]).astype(complex)
        w = ergotropy(rho)
        if p <= 0.5:
            assert w == pytest.approx(0.0, abs=1e-12)
        else:
            assert w > 0


def test_charging_power():
    t = np.array([0.0, 1.0, 2.0])
    e = np.array([1.0, 1.0, 0.5])
    p = charging_power(t, e)
    assert np.isnan(p[0])
    assert p[1] == pytest.approx(1.0)
    assert p[2] == pytest.approx(0.25)


def test_rabi_max_power_against_grid_oracle():
    # E = sin^2(t): dense-grid oracle for max_t E/t
    t = np.linspace(1e-6, 10.0, 2_000_001)
    oracle = np.max(np.sin(t) ** 2 / t)
    cfg = ModelConfig(BathParams(delta=0.5), EmitterConfig(Omega=1.0, g=0.0))
    grid = np.linspace(1e-3, 10.0, 10001)
    trace = evolve_finite(cfg, grid)
    p = charging_power(grid, stored_energy(trace.c_B))
    assert np.nanmax(p) == pytest.approx(oracle, abs=1e-5)


def test_indicator_bounds_on_trace():
    cfg = ModelConfig(
        BathParams(delta=0.5),
        EmitterConfig(g=1.0, x1=-1, alpha="B", x2=0, beta="A"),
    )
    trace = evolve_finite(cfg, np.linspace(0.0, 20.0, 201))
    ind = indicator_series(trace)
    assert np.all(ind.ergotropy >= -1e-12)
    assert np.all(ind.ergotropy <= ind.energy + 1e-12)
    assert np.all(ind.energy <= 1.0 + 1e-9)


def test_asymptotic_max_single_pole():
    assert asymptotic_max_stored([pole(2.0, -0.5)]) == pytest.approx(0.25)


def test_asymptotic_max_rabi():
    poles = [pole(1.0, 0.5), pole(-1.0, -0.5)]
    assert asymptotic_max_stored(poles) == pytest.approx(1.0)
    assert asymptotic_max_ergotropy(poles) == pytest.approx(1.0)


def test_asymptotic_max_threshold():
    poles = [pole(1.3, 0.5)]
    assert asymptotic_max_ergotropy(poles) == pytest.approx(0.0)
    assert asymptotic_max_ergotropy([pole(1.3, 0.8)]) == pytest.approx(2 * 0.64 - 1)


def test_empty_and_decaying_poles():
    assert asymptotic_max_stored([]) == 0.0
    decaying = [BoundState(energy=-0.5j, residue=0.9 + 0j, kind="dissipative")]
    assert asymptotic_max_stored(decaying) == 0.0


def test_envelope_incommensurate_sum_matches_scan_oracle():
    poles = [pole(1.0, 0.3), pole(np.sqrt(2.0), 0.2)]
    value, method = envelope_details(poles)
    assert method == "sum"
    assert value == pytest.approx(0.5)
    t = np.linspace(0.0, 2e4, 2_000_001)
    oracle = np.max(np.abs(long_time_amplitude(t, poles)))
    assert abs(value - oracle) <= 1e-3


def test_envelope_commensurate_falls_back_to_scan():
    # equal-magnitude counter-rotating pair with a zero-energy survivor:
    # naive summation would overcount the orthogonal phases
    poles = [pole(0.0, 0.4), pole(1.0, 0.25), pole(-1.0, -0.25)]
    value, method = envelope_details(poles)
    assert method == "scan"
    t = np.linspace(0.0, 200.0, 400001)
    oracle = np.max(np.abs(long_time_amplitude(t, poles)))
    assert value == pytest.approx(oracle, abs=1e-6)
    assert value < 0.9 - 1e-6  # strictly below the naive residue sum


def test_envelope_invariant_under_global_residue_phase():
    poles = [pole(0.7, 0.3), pole(np.e, 0.15)]
    rotated = [BoundState(p.energy, p.residue * np.exp(0.7j), p.multiplicity)
               for p in poles]
    assert asymptotic_max_stored(rotated) == pytest.approx(
        asymptotic_max_stored(poles), abs=1e-12
    )


def test_envelope_aligned_single_frequency_with_zero_pole():
    poles = [pole(0.0, 0.32), pole(2.0, -0.5)]
    value, method = envelope_details(poles)
    assert method == "aligned"
    assert value == pytest.approx(0.82)


def test_real_pipeline_residue_sum():
    cfg = ModelConfig(
        BathParams(delta=-0.26),
        EmitterConfig(g=0.1, x1=-1, alpha="B", x2=0, beta="A"),
    )
    poles = find_coherent_bse(cfg)
    mse = asymptotic_max_stored(poles)
    assert mse >= 0.9
    assert mse <= 1.0 + 1e-9


def test_ergotropy_population_shortcut_matches_matrix_route():
    for p in (0.0, 0.3, 0.5, 0.62, 0.97):
        rho = np.diag([p, 1 - p]).astype(complex)
        assert ergotropy_from_population(p) == pytest.approx(ergotropy(rho), abs=1e-12)
