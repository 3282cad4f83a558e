"""Phase boundaries, phase-diagram sweeps, and singularity detection.

The maximum stored energy over the (dimerization, coupling) plane jumps
in bound-state count across two analytic curves; their closed forms and
the closed-form maximum ergotropy of the same-cavity configuration are
evaluated here, alongside the numerical sweeps that reproduce them.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, PreconditionError
from .model import BathParams, EmitterConfig, ModelConfig
from .bath import coupling_fk
from .resolvent import BoundState, find_coherent_bse, residue_at, _dark_pole
from .thermo import asymptotic_max_ergotropy, asymptotic_max_stored, envelope_details

ERGOTROPY_THRESHOLD_COEF = 2.0 ** 0.75  # |g| threshold prefactor, times sqrt(|delta|) J


@dataclass(frozen=True)
class BoundaryPoint:
    """Values of the two transition curves at one (delta, d); None = absent."""

    l1: float | None
    l2: float | None
    l1_flag: str = ""
    l2_flag: str = ""


@dataclass(frozen=True)
class PhaseGrid:
    delta_axis: np.ndarray
    g_axis: np.ndarray
    values: np.ndarray      # shape (n_delta, n_g), units of omega_e
    n_bound: np.ndarray     # coherent-pole count (multiplicity-weighted)
    flags: np.ndarray       # per-point method / error strings
    overlays: dict          # curve name -> (delta array, g array)


def _curve_value(num: float, den: float) -> tuple[float | None, str]:
    if abs(den) < 1e-15:
        return None, "divergent"
    r = num / den
    if r < 0.0:
        return None, ""
    val = 2.0 * float(np.sqrt(r))
    return val, ("degenerate" if val == 0.0 else "")


def phase_boundaries(delta: float, d: int) -> BoundaryPoint:
    """Couplings |g| of the two bound-state-count transitions at this delta.

    l1: 2 sqrt(delta (1 - delta^2) / (delta - 1 - 2|d| delta));
    l2: 2 sqrt((1 - delta^2) / (delta - 1 + 2|d|)). A negative radicand
    means the curve is absent at this delta; a vanishing one is the
    degenerate g = 0 endpoint.
    """
    if abs(delta) > 1:
        raise ConfigError(f"delta out of [-1,1]: {delta}")
    d = int(d)
    if d == 0:
        raise ConfigError("phase boundaries require a nonzero cell distance d")
    ad = abs(d)
    l1, f1 = _curve_value(delta * (1.0 - delta * delta), delta - 1.0 - 2.0 * ad * delta)
    l2, f2 = _curve_value(1.0 - delta * delta, delta - 1.0 + 2.0 * ad)
    return BoundaryPoint(l1=l1, l2=l2, l1_flag=f1, l2_flag=f2)


def boundary_curves(delta_axis, d: int, g_axis=None) -> dict:
    """Sampled overlay curves: l0 (delta = 0), l1, l2 over the delta axis."""
    delta_axis = np.asarray(delta_axis, dtype=float)
    l1_d, l1_g, l2_d, l2_g = [], [], [], []
    for delta in delta_axis:
        bp = phase_boundaries(float(delta), d)
        if bp.l1 is not None:
            l1_d.append(float(delta))
            l1_g.append(bp.l1)
        if bp.l2 is not None:
            l2_d.append(float(delta))
            l2_g.append(bp.l2)
    if g_axis is None:
        g_axis = np.linspace(0.0, 2.0, 51)
    g_axis = np.asarray(g_axis, dtype=float)
    return {
        "l0": (np.zeros_like(g_axis), g_axis),
        "l1": (np.asarray(l1_d), np.asarray(l1_g)),
        "l2": (np.asarray(l2_d), np.asarray(l2_g)),
    }


def ergotropy_zero_curve(delta_axis) -> dict:
    """Overlay (g/J)^2 = 2 sqrt(2) |delta| where the max ergotropy vanishes."""
    delta_axis = np.asarray(delta_axis, dtype=float)
    g = np.sqrt(2.0 * np.sqrt(2.0) * np.abs(delta_axis))
    return {"w0": (delta_axis, g)}


def max_ergotropy_formula(delta: float, g: float, J: float = 1.0,
                          omega_e: float = 1.0) -> float:
    """Closed-form long-time maximum ergotropy of the same-cavity pair.

    (omega_e/2) (8 J^4 delta^2 - g^4) / (2 J^2 |delta| + g^2)^2 inside the
    threshold |g| < 2^(3/4) J sqrt(|delta|), zero at and beyond it.
    """
    if abs(g) >= ERGOTROPY_THRESHOLD_COEF * J * np.sqrt(abs(delta)):
        return 0.0
    num = 8.0 * J**4 * delta * delta - g**4
    den = (2.0 * J * J * abs(delta) + g * g) ** 2
    return 0.5 * omega_e * num / den


def _robust_pole_set(config: ModelConfig) -> list[BoundState]:
    """Dissipation-robust coherent poles of a same-cavity pair: dark + zero mode.

    These are the only poles that stay on the real axis for every kappa;
    the remaining pair decays for any loss and is excluded from the
    long-time maximum. Residues are evaluated at the configured kappa
    (they are kappa-independent, which the tests assert).
    """
    e = config.emitters
    poles = [_dark_pole(config)]
    if e.g == 0.0:
        poles.append(BoundState(energy=complex(e.Delta + e.Omega), residue=0.5 + 0.0j))
    elif abs(e.Delta + e.Omega) < 1e-12 and abs(config.bath.delta) > 1e-6:
        # the zero mode needs an open gap; its residue scales like
        # J^2 |delta| / g^2, so dropping it below the floor is the
        # continuous limit well under every stated tolerance
        poles.append(BoundState(energy=0.0 + 0.0j,
                                residue=residue_at(0.0, 1, config)))
    return poles


def _mse_point(args) -> tuple[float, int, str]:
    delta, g, bath, emitters = args
    cfg = ModelConfig(replace(bath, delta=delta), replace(emitters, g=g))
    try:
        poles = find_coherent_bse(cfg)
    except Exception as exc:  # recorded per point, sweep continues
        return np.nan, -1, f"error:{type(exc).__name__}"
    sup, method = envelope_details(poles)
    value = sup * sup * emitters.omega_e
    return value, sum(p.multiplicity for p in poles), method


def _ergotropy_point(args) -> tuple[float, int, str]:
    delta, g, bath, emitters = args
    cfg = ModelConfig(replace(bath, delta=delta), replace(emitters, g=g))
    try:
        poles = _robust_pole_set(cfg)
        value = asymptotic_max_ergotropy(poles, emitters.omega_e)
    except Exception as exc:
        return np.nan, -1, f"error:{type(exc).__name__}"
    return value, sum(p.multiplicity for p in poles), "robust"


def default_jobs() -> int:
    env = os.environ.get("TOPOBATT_JOBS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_grid(point_fun, delta_axis, g_axis, config: ModelConfig, jobs: int):
    delta_axis = np.asarray(delta_axis, dtype=float)
    g_axis = np.asarray(g_axis, dtype=float)
    tasks = [(float(d), float(g), config.bath, config.emitters)
             for d in delta_axis for g in g_axis]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(point_fun, tasks, chunksize=8))
    else:
        results = [point_fun(t) for t in tasks]
    shape = (len(delta_axis), len(g_axis))
    values = np.array([r[0] for r in results], dtype=float).reshape(shape)
    n_bound = np.array([r[1] for r in results], dtype=int).reshape(shape)
    flags = np.array([r[2] for r in results], dtype=object).reshape(shape)
    return values, n_bound, flags


def mse_sweep(delta_axis, g_axis, config: ModelConfig, jobs: int | None = None) -> PhaseGrid:
    """Maximum stored energy over a (delta, g) grid with boundary overlays.

    Per point: locate the coherent bound states, take the almost-periodic
    envelope maximum of the residue sum. Lossless bath required.
    """
    if config.bath.dissipative:
        raise PreconditionError("mse_sweep requires a lossless bath (kappa = 0)")
    jobs = default_jobs() if jobs is None else jobs
    values, n_bound, flags = _run_grid(_mse_point, delta_axis, g_axis, config, jobs)
    overlays = boundary_curves(np.asarray(delta_axis, dtype=float),
                               config.emitters.d or -1, g_axis=g_axis)
    return PhaseGrid(np.asarray(delta_axis, float), np.asarray(g_axis, float),
                     values, n_bound, flags, overlays)


def max_ergotropy_sweep(delta_axis, g_axis, config: ModelConfig,
                        jobs: int | None = None) -> PhaseGrid:
    """Long-time maximum ergotropy of the same-cavity pair over (delta, g).

    Uses the dissipation-robust pole subset, so the result is independent
    of the configured kappa (including kappa = 0).
    """
    e = config.emitters
    if not e.same_cavity:
        raise PreconditionError("max_ergotropy_sweep requires a same-cavity pair")
    if not (e.Delta == -e.Omega and e.Delta != 0.0):
        raise PreconditionError("max_ergotropy_sweep requires Delta = -Omega != 0")
    jobs = default_jobs() if jobs is None else jobs
    values, n_bound, flags = _run_grid(_ergotropy_point, delta_axis, g_axis, config, jobs)
    overlays = ergotropy_zero_curve(np.asarray(delta_axis, dtype=float))
    return PhaseGrid(np.asarray(delta_axis, float), np.asarray(g_axis, float),
                     values, n_bound, flags, overlays)


def detect_derivative_discontinuity(values, coords=None) -> np.ndarray:
    """Kink locations of a uniform 1D scan.

    Flags centered second differences exceeding 10x their median absolute
    value (with a machine-noise floor so exactly linear scans stay
    empty), merging flags within two grid steps.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 5:
        raise ConfigError("scan must be 1D with at least 5 points")
    coords = np.arange(len(values), dtype=float) if coords is None \
        else np.asarray(coords, dtype=float)
    if coords.shape != values.shape:
        raise ConfigError("coords must match values in length")
    d2 = np.abs(values[2:] - 2.0 * values[1:-1] + values[:-2])
    floor = 1e3 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(values))))
    threshold = max(10.0 * float(np.median(d2)), floor)
    hot = np.nonzero(d2 > threshold)[0]
    if len(hot) == 0:
        return np.array([], dtype=float)
    clusters: list[list[int]] = [[int(hot[0])]]
    for i in hot[1:]:
        if i - clusters[-1][-1] <= 2:
            clusters[-1].append(int(i))
        else:
            clusters.append([int(i)])
    locations = []
    for cluster in clusters:
        peak = max(cluster, key=lambda i: d2[i])
        locations.append(coords[peak + 1])
    return np.asarray(locations, dtype=float)


def winding_number(delta: float, J: float = 1.0) -> int:
    """Topological invariant of the lattice: 1 for delta < 0, 0 for delta > 0.

    Cross-checked by the numerical winding integral of f_k around the
    origin; with the e^{-ik} convention the raw integral carries a minus
    sign, so its magnitude is compared.
    """
    if abs(delta) > 1:
        raise ConfigError(f"delta out of [-1,1]: {delta}")
    if delta == 0.0:
        raise PreconditionError("gap closed at delta = 0: winding undefined")
    expected = 1 if delta < 0 else 0
    bath = BathParams(J=J, delta=delta)
    k = np.linspace(-np.pi, np.pi, 8193)
    phases = np.unwrap(np.angle(coupling_fk(k, bath)))
    integral = (phases[-1] - phases[0]) / (2.0 * np.pi)
    if round(abs(integral)) != expected:
        raise ConfigError(
            f"winding integral {integral:.6f} disagrees with the sign rule at delta={delta}"
        )
    return expected
