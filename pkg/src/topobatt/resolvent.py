"""Self-energies, the pole function, bound-state location and residues.

The battery amplitude is a contour integral of (Sigma_12 + Omega_12)/D(z);
off the bath spectrum the poles of 1/D are the bound states and the
long-time amplitude is the residue sum over them.

At kappa = 0 the two same-site self-energies coincide, so the pole
function factorizes exactly,

    D(z) = F_+(z) * F_-(z),   F_pm = z - Delta - Sigma_d  -/+ (Omega_12 + Sigma_12),

and the coherent search brackets sign changes of the factors. This finds
exact double roots (the degenerate zero-energy pair of the trivial phase)
that produce no sign change in D itself. For a same-cavity pair the "-"
factor is exactly linear: the dark state at z = Delta - Omega with residue
-1/2, inserted analytically.

Green's functions here use the exact unit-circle closed form: residues are
finite differences of D with steps down to 1e-6*J, which requires G to be
smooth in z at that scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bath import greens_closed
from .errors import (
    ConfigError,
    ContinuationError,
    ModelInconsistencyError,
    PreconditionError,
    StructureError,
)
from .model import ModelConfig, band_edges

# Classification threshold between coherent and dissipative poles (units of J).
TOL_IM = 1e-10
# Stand-off from band edges for scan grids.
TOL_SPEC = 1e-6
# Uniform scan step of the bracketing grid (units of J).
GRID_STEP = 1e-3
# Roots closer than this are merged into one multiple pole.
MERGE_TOL = 1e-6
# |D(root)| acceptance threshold (units of J^2).
RESIDUAL_TOL = 1e-10
# Finite-difference step for D' (units of J).
FD_STEP = 1e-6
# Secular (t-multiplying) coefficient of a double pole must vanish below this.
SECULAR_TOL = 1e-8
# Dissipation continuation step bound (units of J).
KAPPA_STEP = 0.05


@dataclass(frozen=True)
class BoundState:
    """One pole of the resolvent."""

    energy: complex
    residue: complex
    multiplicity: int = 1
    kind: str = "coherent"


@dataclass
class PoleSearchReport:
    brackets_scanned: int = 0
    roots_found: int = 0
    refinement_iterations: int = 0
    residuals: tuple = ()

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


def _site(config: ModelConfig, which: int) -> tuple[int, str]:
    e = config.emitters
    return (e.x1, e.alpha) if which == 1 else (e.x2, e.beta)


def self_energy(m: int, n: int, z, config: ModelConfig):
    """Sigma_mn(z) = g^2 G(x_m, s_m; x_n, s_n; z); vectorized over z."""
    if m not in (1, 2) or n not in (1, 2):
        raise ConfigError(f"emitter indices must be 1 or 2, got ({m}, {n})")
    g = config.emitters.g
    if g == 0.0:
        if isinstance(z, np.ndarray):
            return np.zeros(z.shape, dtype=complex)
        return 0.0 + 0.0j
    (xm, sm), (xn, sn) = _site(config, m), _site(config, n)
    return g * g * greens_closed(xm - xn, sm, sn, z, config.bath)


def pole_function(z, config: ModelConfig):
    """D(z) = [z - Delta - Sigma_11][z - Delta - Sigma_22] - [Omega_12 + Sigma_12]^2."""
    if not isinstance(z, np.ndarray):
        z = complex(z)
    e = config.emitters
    s11 = self_energy(1, 1, z, config)
    s22 = self_energy(2, 2, z, config)
    s12 = self_energy(1, 2, z, config)
    return (z - e.Delta - s11) * (z - e.Delta - s22) - (e.omega12 + s12) ** 2


def _numerator(z, config: ModelConfig):
    return config.emitters.omega12 + self_energy(1, 2, z, config)


def _factor(z, config: ModelConfig, sign: int):
    """F_pm(z) for kappa = 0 (Sigma_11 = Sigma_22 = Sigma_d there)."""
    if not isinstance(z, np.ndarray):
        z = complex(z)
    e = config.emitters
    sd = self_energy(1, 1, z, config)
    s12 = self_energy(1, 2, z, config)
    return z - e.Delta - sd - sign * (e.omega12 + s12)


def _scan_grid(config: ModelConfig, z_max: float, grid_step: float) -> list[np.ndarray]:
    """Real grids covering the gap and both outer regions, refined near edges."""
    bath = config.bath
    j = bath.J
    (neg_lo, neg_hi), (pos_lo, pos_hi) = band_edges(bath)
    pad = TOL_SPEC * j
    # log-spaced approach points toward each band edge
    ladder = np.array([1e-6, 2e-6, 5e-6, 1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4]) * j

    segments = []

    def add(lo: float, hi: float):
        if hi - lo <= 2 * pad:
            return
        base = np.arange(lo + pad, hi - pad, grid_step * j)
        pts = np.concatenate([base, [hi - pad], lo + ladder, hi - ladder])
        pts = np.unique(pts[(pts > lo) & (pts < hi)])
        segments.append(pts)

    add(neg_hi, pos_lo)          # inner gap (empty when delta = 0)
    add(pos_hi, z_max)           # outer positive
    add(-z_max, neg_lo)          # outer negative
    return segments


def _bisect(fun, lo: float, hi: float, flo: float, fhi: float) -> tuple[float, int]:
    iters = 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = fun(mid)
        iters += 1
        if fm == 0.0:
            return mid, iters
        if (flo < 0) != (fm < 0):
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-15 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi), iters


def _scan_factor_roots(config: ModelConfig, sign: int, segments,
                       report: PoleSearchReport) -> list[float]:
    roots: list[float] = []

    def f_scalar(x: float) -> float:
        return float(np.real(_factor(complex(x), config, sign)))

    for grid in segments:
        vals = np.real(_factor(grid.astype(complex), config, sign))
        report.brackets_scanned += len(grid) - 1
        exact = np.nonzero(vals == 0.0)[0]
        for i in exact:
            roots.append(float(grid[i]))
        flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        for i in flips:
            root, iters = _bisect(f_scalar, float(grid[i]), float(grid[i + 1]),
                                  float(vals[i]), float(vals[i + 1]))
            report.refinement_iterations += iters
            roots.append(root)
    return sorted(roots)


def _dist_to_bands(z0: float, config: ModelConfig) -> float:
    (nl, nh), (pl, ph) = band_edges(config.bath)
    return min(abs(z0 - e) for e in (nl, nh, pl, ph))


def _fd_step(z0: complex, config: ModelConfig) -> float:
    h = FD_STEP * config.bath.J
    if config.bath.dissipative or abs(np.imag(z0)) > 10 * h:
        return h
    dist = _dist_to_bands(float(np.real(z0)), config)
    return min(h, max(dist / 8.0, 1e-12))


def _d_prime(z0: complex, config: ModelConfig, h: float | None = None) -> complex:
    """Richardson-extrapolated central difference of D."""
    h = h or _fd_step(z0, config)
    d = lambda x: complex(pole_function(x, config))
    return (8.0 * (d(z0 + h) - d(z0 - h)) - (d(z0 + 2 * h) - d(z0 - 2 * h))) / (12.0 * h)


def _laurent_double(z0: complex, config: ModelConfig) -> tuple[complex, complex]:
    """(simple-pole coefficient, secular coefficient) of n/D at a double root."""
    j = config.bath.J
    d = lambda x: complex(pole_function(x, config))
    n = lambda x: complex(_numerator(x, config))
    h2 = min(1e-4 * j, max(_fd_step(z0, config), 1e-7 * j) * 50)
    d2 = (-d(z0 + 2 * h2) + 16 * d(z0 + h2) - 30 * d(z0)
          + 16 * d(z0 - h2) - d(z0 - 2 * h2)) / (12.0 * h2 * h2)
    h3 = min(1e-3 * j, h2 * 10)
    d3 = (d(z0 + 2 * h3) - 2 * d(z0 + h3) + 2 * d(z0 - h3) - d(z0 - 2 * h3)) / (2.0 * h3 ** 3)
    h1 = _fd_step(z0, config)
    n0 = n(z0)
    n1 = (8.0 * (n(z0 + h1) - n(z0 - h1)) - (n(z0 + 2 * h1) - n(z0 - 2 * h1))) / (12.0 * h1)
    secular = 2.0 * n0 / d2
    residue = 2.0 * n1 / d2 - (2.0 / 3.0) * n0 * d3 / (d2 * d2)
    return residue, secular


def residue_at(z0: complex, multiplicity: int, config: ModelConfig) -> complex:
    """Residue of (Sigma_12 + Omega_12)/D at an accepted root of D.

    Simple poles: n(z0)/D'(z0) with a Richardson central difference for D'.
    Double roots: simple-pole Laurent coefficient; a secular coefficient
    above SECULAR_TOL raises ModelInconsistencyError for coherent (real)
    roots, where it would break the bounded-amplitude sum. A decaying
    double pole (exceptional point under dissipation) carries a genuine
    but bounded secular term and does not error.
    """
    z0 = complex(z0)
    if multiplicity == 1:
        return complex(_numerator(z0, config)) / _d_prime(z0, config)
    if multiplicity == 2:
        residue, secular = _laurent_double(z0, config)
        if abs(secular) > SECULAR_TOL and abs(z0.imag) <= TOL_IM * config.bath.J:
            raise ModelInconsistencyError(
                f"double pole at z = {z0} has secular coefficient {abs(secular):.2e} "
                f"> {SECULAR_TOL:g}: genuine higher-order pole with nonzero numerator"
            )
        return residue
    raise ConfigError(f"unsupported pole multiplicity {multiplicity}")


def _default_z_max(config: ModelConfig) -> float:
    e, b = config.emitters, config.bath
    return abs(e.Delta) + abs(e.Omega) + abs(e.g) + 4.0 * b.J


def _dark_pole(config: ModelConfig) -> BoundState:
    e = config.emitters
    return BoundState(energy=complex(e.Delta - e.Omega), residue=-0.5 + 0.0j,
                      multiplicity=1, kind="coherent")


def find_coherent_bse(config: ModelConfig, *, grid_step: float = GRID_STEP,
                      z_max: float | None = None, return_report: bool = False):
    """All real roots of D off the bands, with residues and multiplicities.

    Requires kappa_a = kappa_b = 0. Roots are returned in ascending energy
    order. A root shared by both factors within MERGE_TOL becomes one pole
    of multiplicity 2.
    """
    bath, e = config.bath, config.emitters
    if bath.dissipative:
        raise PreconditionError(
            "find_coherent_bse requires kappa_a = kappa_b = 0; "
            "use find_dissipative_poles for lossy baths"
        )
    report = PoleSearchReport()
    z_max = z_max or _default_z_max(config)

    if e.g == 0.0 and e.omega12 == 0.0:
        # Bare atom line with identically vanishing numerator: no poles.
        return ([], report) if return_report else []

    poles: list[BoundState] = []
    if e.same_cavity:
        poles.append(_dark_pole(config))
        if e.g == 0.0:
            poles.append(BoundState(energy=complex(e.Delta + e.Omega), residue=0.5 + 0.0j))
        else:
            segments = _scan_grid(config, z_max, grid_step)
            bright = _scan_factor_roots(config, +1, segments, report)
            for z0 in bright:
                poles.append(BoundState(energy=complex(z0),
                                        residue=residue_at(z0, 1, config)))
    else:
        segments = _scan_grid(config, z_max, grid_step)
        roots_p = _scan_factor_roots(config, +1, segments, report)
        roots_m = _scan_factor_roots(config, -1, segments, report)
        merged: list[tuple[float, int]] = []
        used_m = [False] * len(roots_m)
        for zp in roots_p:
            partner = None
            for i, zm in enumerate(roots_m):
                if not used_m[i] and abs(zm - zp) <= MERGE_TOL * bath.J:
                    partner = i
                    break
            if partner is None:
                merged.append((zp, 1))
            else:
                used_m[partner] = True
                merged.append((0.5 * (zp + roots_m[partner]), 2))
        merged.extend((zm, 1) for i, zm in enumerate(roots_m) if not used_m[i])
        for z0, mult in merged:
            poles.append(BoundState(energy=complex(z0),
                                    residue=residue_at(z0, mult, config),
                                    multiplicity=mult))

    poles.sort(key=lambda p: (p.energy.real, p.energy.imag))
    residuals = tuple(abs(complex(pole_function(p.energy, config))) for p in poles
                      if not (e.same_cavity and p.energy == e.Delta - e.Omega))
    report.roots_found = len(poles)
    report.residuals = residuals
    return (poles, report) if return_report else poles


def _newton(fun, z0: complex, *, h: float, tol: float = 1e-12,
            max_iter: int = 60, deflate: tuple[complex, ...] = ()) -> complex:
    """Complex Newton iteration with finite-difference derivative.

    ``deflate`` divides out already-located roots so a second walker cannot
    fall back onto them.
    """

    def g(z: complex) -> complex:
        val = fun(z)
        for r in deflate:
            val /= (z - r)
        return val

    z = complex(z0)
    best = (np.inf, z)
    for it in range(max_iter):
        gz = g(z)
        if abs(gz) < best[0]:
            best = (abs(gz), z)
        gp = (g(z + h) - g(z - h)) / (2.0 * h)
        if gp == 0:
            break
        step = gz / gp
        z = z - step
        if not np.isfinite(z) or abs(z) > 1e6:
            break
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
        if (it >= 25 and abs(step) <= 1e-6 * max(1.0, abs(z))
                and best[0] <= 1e-9 * max(1.0, abs(z))):
            # linear convergence stalled at the rounding floor of a
            # (near-)double root, located to ~sqrt(eps); the merge
            # tolerance absorbs this
            return best[1]
    raise ContinuationError(f"Newton refinement failed to converge from z0 = {z0}")


def _walker_seeds(coherent: list[BoundState], config: ModelConfig) -> list[complex]:
    e, j = config.emitters, config.bath.J
    walkers: list[complex] = []
    for p in coherent:
        if e.same_cavity and abs(p.energy - (e.Delta - e.Omega)) < 1e-12:
            continue  # dark pole is kappa-independent and re-added at assembly
        if p.multiplicity == 1:
            walkers.append(complex(p.energy))
        else:
            # a double root generically splits under dissipation
            eps = 1e-4 * j
            walkers.extend([complex(p.energy) + eps, complex(p.energy) - eps])
    return walkers


def _lossy_config(config: ModelConfig, frac: float) -> ModelConfig:
    bath = config.bath
    return ModelConfig(
        replace(bath, kappa_a=frac * bath.kappa_a, kappa_b=frac * bath.kappa_b),
        config.emitters,
    )


def _pole_equation_at(config: ModelConfig, frac: float):
    cfg_s = _lossy_config(config, frac)
    if config.emitters.same_cavity and config.emitters.g > 0.0:
        return lambda z, c=cfg_s: complex(_factor_lossy_bright(z, c))
    return lambda z, c=cfg_s: complex(pole_function(z, c))


def _advance_walkers(config: ModelConfig, current: list[complex], f0: float,
                     f1: float, h: float, depth: int = 0) -> list[complex]:
    """Move every tracked root from loss fraction f0 to f1, substepping on failure."""
    fun = _pole_equation_at(config, f1)
    j = config.bath.J
    new_walkers: list[complex] = []
    try:
        for z0 in current:
            z1 = _newton(fun, z0, h=h)
            if any(abs(z1 - w) <= 1e-9 * j for w in new_walkers):
                # fell onto an already-found root: retry with deflation
                z1 = _newton(fun, z0, h=h, deflate=tuple(new_walkers))
            new_walkers.append(z1)
        return new_walkers
    except ContinuationError as exc:
        if depth >= 10:
            bath = config.bath
            raise ContinuationError(
                f"lost a pole between kappa fractions {f0:.4f} and {f1:.4f} "
                f"of (kappa_a = {bath.kappa_a:.4g}, kappa_b = {bath.kappa_b:.4g})"
            ) from exc
        mid = 0.5 * (f0 + f1)
        half = _advance_walkers(config, current, f0, mid, h, depth + 1)
        return _advance_walkers(config, half, mid, f1, h, depth + 1)


def _assemble_poles(config: ModelConfig, walkers: list[complex]) -> list[BoundState]:
    """Merge colliding walkers and attach residues and classifications."""
    e, j = config.emitters, config.bath.J
    merged: list[tuple[complex, int]] = []
    for z in sorted(walkers, key=lambda w: (w.real, w.imag)):
        hit = next((i for i, (zm, _) in enumerate(merged)
                    if abs(z - zm) <= MERGE_TOL * j), None)
        if hit is None:
            merged.append((z, 1))
        else:
            zm, m = merged[hit]
            merged[hit] = ((zm * m + z) / (m + 1), m + 1)

    poles: list[BoundState] = []
    if e.same_cavity and not (e.g == 0.0 and e.omega12 == 0.0):
        poles.append(_dark_pole(config))
    for z0, mult in merged:
        kind = "coherent" if abs(z0.imag) <= TOL_IM * j else "dissipative"
        if kind == "coherent":
            z0 = complex(z0.real)
        poles.append(BoundState(energy=z0, residue=residue_at(z0, mult, config),
                                multiplicity=mult, kind=kind))
    poles.sort(key=lambda p: (p.energy.real, p.energy.imag))
    return poles


def find_dissipative_poles(config: ModelConfig, *, kappa_step: float = KAPPA_STEP,
                           grid_step: float = GRID_STEP) -> list[BoundState]:
    """Poles of 1/D for a lossy bath by numerical continuation in kappa.

    Starts from the kappa = 0 coherent roots and steps both loss rates up
    proportionally (steps <= kappa_step * J, substepping where a pole moves
    fast), refining every root with a complex Newton iteration at each
    step. kappa-independent real poles (dark state, vacancy-like zero
    mode) persist by construction. Walkers colliding within the merge
    tolerance become one pole of higher multiplicity.
    """
    bath, e = config.bath, config.emitters
    if not bath.dissipative:
        return find_coherent_bse(config, grid_step=grid_step)

    config0 = ModelConfig(replace(bath, kappa_a=0.0, kappa_b=0.0), e)
    coherent = find_coherent_bse(config0, grid_step=grid_step)
    j = bath.J
    kmax = max(bath.kappa_a, bath.kappa_b)
    n_steps = max(1, int(math.ceil(kmax / (kappa_step * j))))
    fractions = np.linspace(0.0, 1.0, n_steps + 1)[1:]
    h = 1e-7 * j

    walkers = _walker_seeds(coherent, config)
    if e.same_cavity and e.g == 0.0:
        walkers = [] if e.omega12 == 0.0 else [complex(e.Delta + e.Omega)]

    f_prev = 0.0
    for frac in fractions:
        walkers = _advance_walkers(config, walkers, f_prev, frac, h)
        f_prev = frac
    return _assemble_poles(config, walkers)


def track_poles_vs_kappa(config: ModelConfig, kappa_values,
                         *, kappa_step: float = KAPPA_STEP,
                         grid_step: float = GRID_STEP) -> dict[float, list[BoundState]]:
    """Pole sets at each kappa_a in one continuation pass (kappa_b = 0).

    A single walk up the sorted kappa grid, capturing the assembled poles
    at every requested value; much cheaper than repeated
    find_dissipative_poles calls on a grid.
    """
    e = config.emitters
    values = sorted({float(k) for k in np.atleast_1d(kappa_values)})
    if values and values[0] < 0:
        raise ConfigError("kappa values must be >= 0")
    kmax = values[-1] if values else 0.0
    base = ModelConfig(replace(config.bath, kappa_a=max(kmax, 1.0), kappa_b=0.0), e)

    config0 = ModelConfig(replace(config.bath, kappa_a=0.0, kappa_b=0.0), e)
    coherent = find_coherent_bse(config0, grid_step=grid_step)
    j = config.bath.J
    h = 1e-7 * j

    out: dict[float, list[BoundState]] = {}
    walkers = _walker_seeds(coherent, base)
    if e.same_cavity and e.g == 0.0:
        walkers = [] if e.omega12 == 0.0 else [complex(e.Delta + e.Omega)]
    k_prev = 0.0
    ka_ref = base.bath.kappa_a
    for k in values:
        if k == 0.0:
            out[k] = coherent
            continue
        n_sub = max(1, int(math.ceil((k - k_prev) / (kappa_step * j))))
        for f in np.linspace(k_prev, k, n_sub + 1)[1:]:
            walkers = _advance_walkers(base, walkers, k_prev / ka_ref, f / ka_ref, h)
            k_prev = f
        out[k] = _assemble_poles(_lossy_config(base, k / ka_ref), walkers)
    return out


def _factor_lossy_bright(z, config: ModelConfig):
    """Bright factor z - Delta - Omega - 2 Sigma_d for a same-cavity pair.

    Valid at any kappa: with both atoms on one site, Sigma_11 = Sigma_22 =
    Sigma_12 exactly and D = (z - Delta + Omega) * (this factor).
    """
    if not isinstance(z, np.ndarray):
        z = complex(z)
    e = config.emitters
    sd = self_energy(1, 1, z, config)
    return z - e.Delta - e.Omega - 2.0 * sd


def long_time_amplitude(t, poles: list[BoundState], include_decaying: bool = False):
    """Bound-state amplitude sum(Res_b exp(-i E_b t)); vectorized over t.

    Only coherent poles contribute unless include_decaying is set (a
    short-time approximation that ignores branch cuts).
    """
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape, dtype=complex)
    for p in poles:
        if p.kind != "coherent" and not include_decaying:
            continue
        total = total + p.residue * np.exp(-1j * p.energy * t)
    return total if total.ndim else complex(total)
