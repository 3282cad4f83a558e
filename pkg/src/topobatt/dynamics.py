"""Exact single-excitation evolution of the effective non-Hermitian system.

The state lives in the (2N + 2)-dimensional basis (battery excited,
charger excited, lattice modes a_1, b_1, ..., a_N, b_N); the charger
starts excited with the lattice in vacuum. Atom diagonals sit at Delta,
lattice modes at 0 minus i/2 times their loss rate, matching the
resolvent convention where bands surround z = 0.

This is the oracle for the analytic pipeline: everything bound states and
residues predict is cross-checked against these trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse import csr_matrix, lil_matrix

from .bath import build_finite_lattice
from .errors import ConfigError, LightConeError, SolverError
from .model import ModelConfig

# solve_ivp tolerances; tighter than the 1e-10 local target to hold
# 1e-9 global accuracy over the acceptance horizons
RTOL = 1e-12
ATOL = 1e-13


@dataclass(frozen=True)
class AmplitudeTrace:
    """Battery/charger amplitudes and norm on a time grid."""

    times: np.ndarray
    c_B: np.ndarray
    c_C: np.ndarray
    norm: np.ndarray

    @property
    def p_loss(self) -> np.ndarray:
        return 1.0 - self.norm


def minimal_lattice_size(config: ModelConfig, t_max: float) -> int:
    """Smallest N whose light cone (speed <= 2J) stays clear of the atoms."""
    d = abs(config.emitters.d)
    return int(math.ceil(2.0 * (2.0 * config.bath.J * t_max) + d + 4))


def build_single_excitation_hamiltonian(config: ModelConfig, N: int,
                                        boundary: str = "periodic") -> csr_matrix:
    """Sparse H_eff in the (battery, charger, lattice...) ordering.

    The charger sits at code cell N//2 and the battery at N//2 + d;
    absolute placement is irrelevant by translation invariance.
    """
    e = config.emitters
    lattice = build_finite_lattice(N, boundary, config.bath)
    c2 = N // 2
    c1 = c2 + e.d
    if not (0 <= c1 < N):
        raise ConfigError(f"cell distance d={e.d} does not fit a lattice of N={N} cells")
    s1 = 2 + lattice.site_index(c1, e.alpha)
    s2 = 2 + lattice.site_index(c2, e.beta)
    dim = 2 * N + 2
    h = lil_matrix((dim, dim), dtype=complex)
    h[2:, 2:] = lattice.matrix
    h[0, 0] = e.Delta
    h[1, 1] = e.Delta
    om = e.omega12
    if om != 0.0:
        h[0, 1] = om
        h[1, 0] = om
    if e.g != 0.0:
        h[0, s1] += e.g
        h[s1, 0] += e.g
        h[1, s2] += e.g
        h[s2, 1] += e.g
    return csr_matrix(h)


def evolve_finite(config: ModelConfig, t_grid, N: int | None = None,
                  boundary: str = "periodic", rtol: float = RTOL,
                  atol: float = ATOL, return_states: bool = False):
    """Integrate i d|psi>/dt = H_eff |psi> from |g,e;vac> on t_grid.

    N defaults to the light-cone bound for t_grid[-1]; an explicit N below
    that bound raises LightConeError carrying the minimal size.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.ndim != 1 or len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("t_grid must be a nonempty strictly increasing 1D array")
    if t_grid[0] < 0:
        raise ConfigError("t_grid must start at t >= 0")
    t_max = float(t_grid[-1])
    n_min = minimal_lattice_size(config, t_max)
    if N is None:
        N = n_min
    elif N < n_min:
        raise LightConeError(
            f"N = {N} is too small for t_max = {t_max:g}: the light cone "
            f"reaches the emitters; need N >= {n_min}",
            minimal_n=n_min,
        )

    h = build_single_excitation_hamiltonian(config, N, boundary)
    psi0 = np.zeros(h.shape[0], dtype=complex)
    psi0[1] = 1.0

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        return -1j * (h @ y)

    t_span = (0.0, t_max if t_max > 0 else 1e-12)
    sol = solve_ivp(rhs, t_span, psi0, method="DOP853", t_eval=t_grid,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise SolverError(f"time integration failed: {sol.message}")
    states = sol.y
    trace = AmplitudeTrace(
        times=t_grid,
        c_B=states[0].copy(),
        c_C=states[1].copy(),
        norm=np.sum(np.abs(states) ** 2, axis=0),
    )
    return (trace, states) if return_states else trace


def loss_probability(trace: AmplitudeTrace) -> np.ndarray:
    """p_t = 1 - Tr[e^{-iHt} rho_0 e^{+iHt}], the leaked population."""
    return 1.0 - trace.norm


def reduced_battery_state(c_b: complex) -> np.ndarray:
    """Reduced battery density matrix diag(|c_B|^2, 1 - |c_B|^2) in (e, g).

    Tracing out charger and field leaves no e-g coherence for the
    charger-excited initial state.
    """
    p = abs(complex(c_b)) ** 2
    if p > 1.0 + 1e-9:
        raise SolverError(f"|c_B| = {math.sqrt(p):.12f} exceeds 1: inconsistent amplitude")
    p = min(p, 1.0)
    return np.array([[p, 0.0], [0.0, 1.0 - p]], dtype=complex)


def stroboscopic_samples(trace: AmplitudeTrace, period: float) -> AmplitudeTrace:
    """Restrict a trace to the samples nearest t_n = n * period."""
    if not period > 0:
        raise ConfigError(f"stroboscopic period must be > 0, got {period}")
    t = trace.times
    n_max = int(math.floor(t[-1] / period + 1e-9))
    idx = sorted({int(np.argmin(np.abs(t - n * period))) for n in range(n_max + 1)})
    sel = np.asarray(idx, dtype=int)
    return AmplitudeTrace(times=t[sel], c_B=trace.c_B[sel], c_C=trace.c_C[sel],
                          norm=trace.norm[sel])
