import numpy as np
import pytest

from topobatt.errors import ConfigError, LightConeError, SolverError
from topobatt.model import BathParams, EmitterConfig, ModelConfig
from topobatt.dynamics import (
    AmplitudeTrace,
    evolve_finite,
    loss_probability,
    minimal_lattice_size,
    reduced_battery_state,
    stroboscopic_samples,
)
from topobatt.resolvent import find_coherent_bse, long_time_amplitude

RABI = ModelConfig(BathParams(delta=0.5), EmitterConfig(Delta=0.0, Omega=1.0, g=0.0))
FIG2B = ModelConfig(
    BathParams(delta=0.5),
    EmitterConfig(g=1.0, x1=-1, alpha="B", x2=0, beta="A"),
)


def test_rabi_limit():
    t = np.linspace(0.0, 20.0, 401)
    trace = evolve_finite(RABI, t)
    assert np.max(np.abs(np.abs(trace.c_B) - np.abs(np.sin(t)))) <= 1e-9
    assert trace.c_B[0] == 0.0
    assert trace.c_C[0] == 1.0


def test_lossless_norm_conserved():
    t = np.linspace(0.0, 30.0, 61)
    trace = evolve_finite(FIG2B, t)
    assert np.max(np.abs(trace.norm - 1.0)) <= 1e-9


def test_pole_sum_matches_evolution_at_late_times():
    t = np.array([0.0, 30.0, 40.0, 50.0])
    trace = evolve_finite(FIG2B, t)
    amp = long_time_amplitude(t, find_coherent_bse(FIG2B))
    for i in (1, 2, 3):
        assert abs(abs(trace.c_B[i]) - abs(amp[i])) <= 1e-2


def test_loss_probability():
    t = np.linspace(0.0, 10.0, 101)
    lossless = evolve_finite(FIG2B, t)
    p = loss_probability(lossless)
    assert abs(p[0]) <= 1e-12
    assert np.max(np.abs(p)) <= 1e-9

    lossy_cfg = ModelConfig(BathParams(delta=0.5, kappa_a=1.0), FIG2B.emitters)
    lossy = evolve_finite(lossy_cfg, t)
    p = loss_probability(lossy)
    assert p[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(p) >= -1e-10)
    assert p[-1] > 0.01


def test_norm_monotone_decay_for_lossy_bath():
    cfg = ModelConfig(BathParams(delta=0.3, kappa_a=0.5, kappa_b=0.2), FIG2B.emitters)
    trace = evolve_finite(cfg, np.linspace(0.0, 12.0, 121))
    assert np.all(np.diff(trace.norm) <= 1e-10)


def test_reduced_battery_state():
    assert np.allclose(reduced_battery_state(0.0), np.diag([0.0, 1.0]))
    assert np.allclose(reduced_battery_state(1.0), np.diag([1.0, 0.0]))
    assert np.allclose(reduced_battery_state(0.6j), np.diag([0.36, 0.64]))
    with pytest.raises(SolverError):
        reduced_battery_state(1.001)


def test_stroboscopic_samples():
    t = np.linspace(0.0, 10.0, 101)
    trace = evolve_finite(RABI, t)
    only_zero = stroboscopic_samples(trace, period=11.0)
    assert list(only_zero.times) == [0.0]
    full = stroboscopic_samples(trace, period=0.1)
    assert len(full.times) == len(t)
    every_other = stroboscopic_samples(trace, period=0.2)
    assert np.allclose(every_other.times, t[::2])
    with pytest.raises(ConfigError):
        stroboscopic_samples(trace, period=0.0)


def test_light_cone_error_carries_minimal_n():
    with pytest.raises(LightConeError) as err:
        evolve_finite(FIG2B, np.linspace(0.0, 50.0, 11), N=20)
    assert err.value.minimal_n == minimal_lattice_size(FIG2B, 50.0)
    assert "N >= 205" in str(err.value)


def test_doubling_n_invariance():
    t = np.linspace(0.0, 10.0, 21)
    n0 = minimal_lattice_size(FIG2B, 10.0)
    a = evolve_finite(FIG2B, t, N=n0)
    b = evolve_finite(FIG2B, t, N=2 * n0)
    assert np.max(np.abs(a.c_B - b.c_B)) <= 1e-8


def test_boundary_independence():
    t = np.linspace(0.0, 10.0, 21)
    n0 = minimal_lattice_size(FIG2B, 10.0)
    a = evolve_finite(FIG2B, t, N=n0, boundary="periodic")
    b = evolve_finite(FIG2B, t, N=n0, boundary="open")
    assert np.max(np.abs(a.c_B - b.c_B)) <= 1e-8


@pytest.mark.parametrize("kappa", [0.0, 1.0, 5.0])
def test_dark_component_protected(kappa):
    cfg = ModelConfig(
        BathParams(delta=0.9, kappa_a=kappa),
        EmitterConfig(Delta=1.0, Omega=-1.0, g=1.0, alpha="A", beta="A"),
    )
    t = np.linspace(0.0, 8.0, 17)
    trace, states = evolve_finite(cfg, t, return_states=True)
    overlap = (states[0] - states[1]) / np.sqrt(2.0)
    assert np.max(np.abs(np.abs(overlap) ** 2 - 0.5)) <= 1e-9


def test_trace_grid_validation():
    with pytest.raises(ConfigError):
        evolve_finite(RABI, np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ConfigError):
        evolve_finite(RABI, np.array([-1.0, 1.0]))


def test_p_loss_property_matches():
    t = np.linspace(0.0, 5.0, 11)
    trace = evolve_finite(RABI, t)
    assert isinstance(trace, AmplitudeTrace)
    assert np.allclose(trace.p_loss, 1.0 - trace.norm)
