"""Thermodynamic performance indicators of the battery.

Stored energy E(t) = omega_e |c_B|^2, ergotropy W(t) (mean energy minus
the passive-state energy), charging power P(t) = E(t)/t, and the
long-time maxima evaluated from bound-state data: the almost-periodic
residue sum attains sup |c_B| = Sigma |Res| when the surviving
frequencies are rationally independent, with a dense time-scan fallback
for commensurate or otherwise structured spectra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError
from .resolvent import BoundState, TOL_IM, long_time_amplitude

# fallback scan horizon (units 1/J) and the rational-approximation depth
SCAN_T_MAX = 1e4
COMMENSURATE_TOL = 1e-9
MAX_DENOMINATOR = 1000


@dataclass(frozen=True)
class IndicatorSeries:
    times: np.ndarray
    energy: np.ndarray
    ergotropy: np.ndarray
    power: np.ndarray


def stored_energy(c_b, omega_e: float = 1.0):
    """E = omega_e |c_B|^2."""
    return omega_e * np.abs(c_b) ** 2


def passive_state(rho: np.ndarray) -> np.ndarray:
    """Same spectrum, populations sorted to put the larger weight on |g>.

    Basis order is (e, g); the battery Hamiltonian is diag(omega_e, 0).
    """
    rho = np.asarray(rho, dtype=complex)
    evals = np.linalg.eigvalsh(rho)
    lo, hi = float(evals[0]), float(evals[-1])
    return np.array([[lo, 0.0], [0.0, hi]], dtype=complex)


def ergotropy(rho: np.ndarray, omega_e: float = 1.0) -> float:
    """Maximum unitarily extractable work Tr[rho H_B] - Tr[passive H_B]."""
    rho = np.asarray(rho, dtype=complex)
    passive = passive_state(rho)
    return float(omega_e * (rho[0, 0].real - passive[0, 0].real))


def ergotropy_from_population(p_excited, omega_e: float = 1.0):
    """Diagonal shortcut omega_e * max(0, 2 p - 1); vectorized."""
    p = np.asarray(p_excited, dtype=float)
    return omega_e * np.maximum(0.0, 2.0 * p - 1.0)


def charging_power(times, energy):
    """P(t) = E(t)/t; undefined (nan) at t = 0."""
    times = np.asarray(times, dtype=float)
    energy = np.asarray(energy, dtype=float)
    power = np.full_like(energy, np.nan)
    mask = times > 0
    power[mask] = energy[mask] / times[mask]
    return power


def indicator_series(trace, omega_e: float = 1.0) -> IndicatorSeries:
    """Stored energy, ergotropy and power along an amplitude trace."""
    energy = stored_energy(trace.c_B, omega_e)
    w = ergotropy_from_population(np.abs(trace.c_B) ** 2, omega_e)
    power = charging_power(trace.times, energy)
    return IndicatorSeries(times=trace.times, energy=energy, ergotropy=w, power=power)


def _commensurate(a: float, b: float) -> bool:
    if a == 0.0 or b == 0.0:
        return True
    r = abs(a / b)
    approx = Fraction(r).limit_denominator(MAX_DENOMINATOR)
    return abs(r - float(approx)) <= COMMENSURATE_TOL * max(1.0, r)


def _envelope_max(poles: list[BoundState]) -> tuple[float, str]:
    """sup_t |sum Res_b e^{-i E_b t}| over the coherent subset.

    Returns (value, method). The plain residue sum is exact for a single
    rotating frequency and for pairwise irrational frequency ratios
    (after reducing +-E pairs, which attain the bound on their own);
    otherwise a dense scan of the cheap pole sum decides.
    """
    coherent = [p for p in poles if p.kind == "coherent"]
    if not coherent:
        return 0.0, "empty"
    zero_res = sum(p.residue for p in coherent if abs(p.energy) <= COMMENSURATE_TOL)
    rotating = [p for p in coherent if abs(p.energy) > COMMENSURATE_TOL]
    total = float(sum(abs(p.residue) for p in coherent))

    if not rotating:
        return float(abs(zero_res)), "static"
    if len(rotating) == 1:
        return float(abs(zero_res)) + float(abs(rotating[0].residue)), "aligned"

    freqs = sorted({abs(float(p.energy.real)) for p in rotating})
    multiple_survives = any(p.multiplicity > 1 and abs(p.residue) > 1e-8 for p in coherent)
    pairs = len(freqs) < len(rotating)
    zero_weight = abs(zero_res) > 1e-6
    commensurate = any(
        _commensurate(freqs[i], freqs[k])
        for i in range(len(freqs)) for k in range(i + 1, len(freqs))
    )
    if not (commensurate or multiple_survives or (zero_weight and pairs)):
        return total, "sum"

    # dense scan with local refinement; the pole sum is cheap to evaluate
    w_max = max(freqs)
    dt = np.pi / (20.0 * w_max)
    t = np.arange(0.0, SCAN_T_MAX, dt)
    amp = np.abs(long_time_amplitude(t, coherent))
    i0 = int(np.argmax(amp))
    lo = max(t[i0] - dt, 0.0)
    best = amp[i0]
    for _ in range(3):
        tt = np.linspace(lo, lo + 2 * dt, 201)
        aa = np.abs(long_time_amplitude(tt, coherent))
        k = int(np.argmax(aa))
        best = max(best, float(aa[k]))
        lo = max(tt[k] - (tt[1] - tt[0]), 0.0)
        dt = tt[1] - tt[0]
    return float(best), "scan"


def asymptotic_max_stored(poles: list[BoundState], omega_e: float = 1.0) -> float:
    """max_t of the long-time stored energy, omega_e * sup|c_B(inf, t)|^2."""
    sup, _ = _envelope_max(poles)
    return omega_e * sup * sup


def asymptotic_max_ergotropy(poles: list[BoundState], omega_e: float = 1.0) -> float:
    """max_t of the long-time ergotropy, omega_e * max(0, 2 sup^2 - 1)."""
    sup, _ = _envelope_max(poles)
    return omega_e * max(0.0, 2.0 * sup * sup - 1.0)


def envelope_details(poles: list[BoundState]) -> tuple[float, str]:
    """(sup |c_B|, method flag) for reporting in sweeps."""
    return _envelope_max(poles)
