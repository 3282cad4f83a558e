import numpy as np
import pytest

from topobatt.errors import ConfigError
from topobatt.model import (
    BathParams,
    EmitterConfig,
    ModelConfig,
    band_edges,
    effective_direct_coupling,
    validate,
)


def test_validate_populates_derived_couplings():
    cfg = validate({"J": 1.0, "delta": 0.5, "kappa_a": 0.0, "kappa_b": 0.0})
    assert cfg.bath.j_plus == pytest.approx(1.5)
    assert cfg.bath.j_minus == pytest.approx(0.5)


def test_validate_rejects_delta_out_of_range():
    with pytest.raises(ConfigError, match="delta out of"):
        validate({"delta": 1.2})


def test_validate_rejects_negative_kappa():
    with pytest.raises(ConfigError, match="kappa_a negative"):
        validate({"kappa_a": -0.1})


def test_validate_rejects_unknown_keys_and_bad_types():
    with pytest.raises(ConfigError, match="unknown config key"):
        validate({"J": 1.0, "jay": 2.0})
    with pytest.raises(ConfigError, match="'g' is not a number"):
        validate({"g": "strong"})


def test_validate_idempotent():
    raw = {"J": 2.0, "delta": -0.3, "g": 0.7, "x1": -1, "alpha": "B", "Omega": 0.2}
    once = validate(raw)
    assert validate(once) == once


def test_kappa_pm_convention():
    bath = BathParams(kappa_a=0.4, kappa_b=0.0)
    assert bath.kappa_plus == pytest.approx(0.1)
    assert bath.kappa_minus == pytest.approx(0.1)


@pytest.mark.parametrize(
    "om, x1, a, x2, b, expected",
    [
        (1.0, 0, "A", 0, "A", 1.0),
        (1.0, 0, "A", -1, "A", 0.0),
        (1.0, 0, "A", 0, "B", 0.0),
    ],
)
def test_effective_direct_coupling(om, x1, a, x2, b, expected):
    cfg = ModelConfig(BathParams(), EmitterConfig(Omega=om, x1=x1, alpha=a, x2=x2, beta=b))
    assert effective_direct_coupling(cfg) == expected


def test_effective_coupling_zero_whenever_cells_differ():
    for d in (-3, -2, -1, 1, 2, 5):
        cfg = ModelConfig(BathParams(), EmitterConfig(Omega=2.0, x1=d, x2=0))
        assert effective_direct_coupling(cfg) == 0.0


def test_band_edges_generic():
    neg, pos = band_edges(BathParams(J=1.0, delta=0.5))
    assert neg == pytest.approx((-2.0, -1.0))
    assert pos == pytest.approx((1.0, 2.0))


def test_band_edges_gap_closed_at_delta_zero():
    neg, pos = band_edges(BathParams(delta=0.0))
    assert neg == pytest.approx((-2.0, 0.0))
    assert pos == pytest.approx((0.0, 2.0))


@pytest.mark.parametrize("delta", [1.0, -1.0])
def test_band_edges_dimerized_limit_matches_fk_scan(delta):
    # Independent oracle: brute-force scan of |f_k| over the Brillouin zone.
    bath = BathParams(J=1.0, delta=delta)
    k = np.linspace(-np.pi, np.pi, 20001)
    absf = np.abs(bath.j_plus + bath.j_minus * np.exp(-1j * k))
    lo, hi = absf.min(), absf.max()
    assert lo == pytest.approx(2.0, abs=1e-12)
    assert hi == pytest.approx(2.0, abs=1e-12)
    neg, pos = band_edges(bath)
    assert pos == pytest.approx((lo, hi), abs=1e-12)
    assert neg == pytest.approx((-hi, -lo), abs=1e-12)
    assert bath.decoupled_limit


@pytest.mark.parametrize("delta", [-0.7, -0.2, 0.2, 0.7])
def test_band_edges_depend_on_abs_delta_and_are_symmetric(delta):
    neg, pos = band_edges(BathParams(delta=delta))
    neg2, pos2 = band_edges(BathParams(delta=-delta))
    assert neg == neg2 and pos == pos2
    assert neg[0] == -pos[1] and neg[1] == -pos[0]


def test_invalid_sublattice_rejected():
    with pytest.raises(ConfigError, match="alpha"):
        EmitterConfig(alpha="C")
