"""SSH bath in both representations.

Momentum space: the 2x2 Bloch matrix with sublattice loss and the
thermodynamic-limit single-particle Green's function

    G_{ab}(x; z) = (1/2pi) Int dk e^{ikx} [(z - h_k)^{-1}]_{ab},

with the 2x2 inverse taken in closed form per k. Two evaluation routes are
provided: adaptive quadrature over the Brillouin zone (the normative path,
with an error estimate) and an exact unit-circle residue evaluation
(substituting w = e^{-ik}; machine precision, analytic in z, vectorized
over z). Real space: an explicit finite-lattice effective non-Hermitian
bath matrix used as the exactness oracle throughout.

Basis ordering of the finite lattice is (a_1, b_1, ..., a_N, b_N); code
cell indices run 0..N-1 for cells 1..N.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve as dense_solve

from .errors import AccuracyError, ConfigError, OnSpectrumError, SolverError
from .model import BathParams, band_edges

# Minimum distance of a real z from the lossless bands for quadrature.
TOL_SPEC = 1e-6
# Default absolute error target of the quadrature route.
QUAD_TOL = 1e-10


@dataclass(frozen=True)
class BlochMatrix:
    """2x2 Bloch matrix of the lossy SSH bath at momentum k."""

    entries: np.ndarray
    k: float


def coupling_fk(k, bath: BathParams):
    """Momentum-space coupling f_k = J_+ + J_- e^{-ik} between the a_k, b_k modes."""
    return bath.j_plus + bath.j_minus * np.exp(-1j * np.asarray(k, dtype=float))


def bloch_matrix(k: float, bath: BathParams) -> BlochMatrix:
    """Re[f_k] sx - Im[f_k] sy - i kappa_+ sz - i kappa_- s0, as an explicit matrix.

    Equals [[-i kappa_a/2, f_k], [conj(f_k), -i kappa_b/2]].
    """
    fk = complex(coupling_fk(k, bath))
    m = np.array(
        [[-0.5j * bath.kappa_a, fk], [np.conj(fk), -0.5j * bath.kappa_b]],
        dtype=complex,
    )
    return BlochMatrix(entries=m, k=float(k))


def _check_off_spectrum(z: complex, bath: BathParams, tol: float = TOL_SPEC) -> None:
    if bath.dissipative or abs(np.imag(z)) > 0:
        return
    (lo_neg, hi_neg), (lo_pos, hi_pos) = band_edges(bath)
    x = float(np.real(z))
    if (lo_neg - tol <= x <= hi_neg + tol) or (lo_pos - tol <= x <= hi_pos + tol):
        raise OnSpectrumError(
            f"z = {x:g} is within {tol:g} of the bath spectrum "
            f"[{lo_neg:g}, {hi_neg:g}] U [{lo_pos:g}, {hi_pos:g}]"
        )


def _greens_quadrature(x: int, alpha: str, beta: str, z: complex,
                       bath: BathParams, tol: float = QUAD_TOL):
    """Adaptive Brillouin-zone quadrature of the closed-form 2x2 inverse."""
    jp, jm = bath.j_plus, bath.j_minus
    za = z + 0.5j * bath.kappa_a
    zb = z + 0.5j * bath.kappa_b

    def integrand(k: float) -> complex:
        absf2 = jp * jp + jm * jm + 2.0 * jp * jm * np.cos(k)
        det = za * zb - absf2
        if alpha == "A" and beta == "A":
            num = zb
        elif alpha == "B" and beta == "B":
            num = za
        elif alpha == "A" and beta == "B":
            num = jp + jm * np.exp(-1j * k)
        else:
            num = jp + jm * np.exp(1j * k)
        return np.exp(1j * k * x) * num / det

    re, re_err = quad(lambda k: integrand(k).real, -np.pi, np.pi,
                      limit=400, epsabs=0.05 * tol, epsrel=1e-12)
    im, im_err = quad(lambda k: integrand(k).imag, -np.pi, np.pi,
                      limit=400, epsabs=0.05 * tol, epsrel=1e-12)
    value = (re + 1j * im) / (2.0 * np.pi)
    estimate = (re_err + im_err) / (2.0 * np.pi)
    if estimate > tol:
        raise AccuracyError(
            f"quadrature error estimate {estimate:.2e} exceeds target {tol:.2e}",
            estimate=estimate,
        )
    return value, estimate


def _greens_dimerized(x: int, alpha: str, beta: str, za, zb, jp: float, jm: float):
    # One hopping absent: the lattice is a set of disconnected dimers (or
    # monomers), so G is a Kronecker delta in the cell distance.
    if jm == 0.0:
        det0 = za * zb - jp * jp
        if alpha == beta:
            num = zb if alpha == "A" else za
            return num / det0 if x == 0 else np.zeros_like(det0)
        return jp / det0 if x == 0 else np.zeros_like(det0)
    det0 = za * zb - jm * jm
    if alpha == beta:
        num = zb if alpha == "A" else za
        return num / det0 if x == 0 else np.zeros_like(det0)
    if alpha == "A" and beta == "B":
        return jm / det0 if x == 1 else np.zeros_like(det0)
    return jm / det0 if x == -1 else np.zeros_like(det0)


def _greens_scalar(x: int, alpha: str, beta: str, z: complex, bath: BathParams) -> complex:
    # cmath twin of greens_closed: the continuation path calls this millions
    # of times, where ndarray dispatch overhead dominates
    jp, jm = bath.j_plus, bath.j_minus
    za = z + 0.5j * bath.kappa_a
    zb = z + 0.5j * bath.kappa_b
    if beta == "A" and alpha == "B":
        x, alpha, beta = -x, "A", "B"
    p = jp * jm
    b = za * zb - jp * jp - jm * jm
    disc = cmath.sqrt(b * b - 4.0 * p * p)
    if (b.real * disc.real + b.imag * disc.imag) < 0:
        disc = -disc
    q = -0.5 * (b + disc)
    r1 = q / (-p)
    r2 = (-p) / q
    if abs(r1) <= abs(r2):
        w_in, w_out = r1, r2
    else:
        w_in, w_out = r2, r1
    res_scale = 1.0 / ((-p) * (w_in - w_out))
    if alpha == beta:
        num = zb if alpha == "A" else za
        return num * w_in ** abs(int(x)) * res_scale
    if x <= 0:
        return (jp + jm * w_in) * w_in ** (-int(x)) * res_scale
    return (jp * w_in + jm) * w_in ** (int(x) - 1) * res_scale


def greens_closed(x: int, alpha: str, beta: str, z, bath: BathParams):
    """Exact residue evaluation of G_{alpha beta}(x; z); vectorized over z.

    Off the bath spectrum the integrand is a rational function of
    w = e^{-ik} whose denominator has one root inside the unit circle;
    the integral reduces to that residue.
    """
    if isinstance(z, (int, float, complex)) and bath.j_plus != 0.0 and bath.j_minus != 0.0:
        return _greens_scalar(int(x), alpha, beta, complex(z), bath)
    z = np.asarray(z, dtype=complex)
    jp, jm = bath.j_plus, bath.j_minus
    za = z + 0.5j * bath.kappa_a
    zb = z + 0.5j * bath.kappa_b
    if jp == 0.0 or jm == 0.0:
        return _greens_dimerized(x, alpha, beta, za, zb, jp, jm)
    if beta == "A" and alpha == "B":
        # G_BA(x; z) = G_AB(-x; z)
        x, alpha, beta = -x, "A", "B"

    p = jp * jm
    b = za * zb - jp * jp - jm * jm
    disc = np.sqrt(b * b - 4.0 * p * p)
    flip = (np.real(b) * np.real(disc) + np.imag(b) * np.imag(disc)) < 0
    disc = np.where(flip, -disc, disc)
    q = -0.5 * (b + disc)
    r1 = q / (-p)
    r2 = (-p) / q
    inner = np.abs(r1) <= np.abs(r2)
    w_in = np.where(inner, r1, r2)
    w_out = np.where(inner, r2, r1)
    res_scale = 1.0 / ((-p) * (w_in - w_out))

    if alpha == beta:
        num = zb if alpha == "A" else za
        return num * w_in ** abs(int(x)) * res_scale
    if x <= 0:
        return (jp + jm * w_in) * w_in ** (-int(x)) * res_scale
    return (jp * w_in + jm) * w_in ** (int(x) - 1) * res_scale


def greens_function(x_m: int, alpha: str, x_n: int, beta: str, z,
                    bath: BathParams, method: str = "quadrature",
                    tol: float = QUAD_TOL):
    """Thermodynamic-limit bath Green's function between two lattice sites.

    Depends on the cells only through x_m - x_n. ``method="quadrature"``
    is the normative adaptive route (scalar z, raises AccuracyError when
    the error target is missed); ``method="residue"`` is the exact
    closed form (vectorized over z).
    """
    x = int(x_m) - int(x_n)
    if method == "residue":
        return greens_closed(x, alpha, beta, z, bath)
    if method != "quadrature":
        raise ConfigError(f"unknown Green's function method {method!r}")
    z = complex(z)
    _check_off_spectrum(z, bath)
    value, _ = _greens_quadrature(x, alpha, beta, z, bath, tol=tol)
    return value


def greens_function_with_error(x_m: int, alpha: str, x_n: int, beta: str, z,
                               bath: BathParams, tol: float = QUAD_TOL):
    """Quadrature route returning (value, error estimate) for reporting."""
    z = complex(z)
    _check_off_spectrum(z, bath)
    return _greens_quadrature(int(x_m) - int(x_n), alpha, beta, z, bath, tol=tol)


@dataclass(frozen=True)
class FiniteLattice:
    """Effective non-Hermitian bath matrix on N unit cells.

    Basis ordering (a_1, b_1, ..., a_N, b_N): row 2*c is the A site and
    row 2*c + 1 the B site of code cell c in 0..N-1.
    """

    N: int
    boundary: str
    matrix: np.ndarray

    def site_index(self, cell: int, sublattice: str) -> int:
        if not 0 <= cell < self.N:
            raise ConfigError(f"cell {cell} outside 0..{self.N - 1}")
        return 2 * cell + (0 if sublattice == "A" else 1)


def build_finite_lattice(N: int, boundary: str, bath: BathParams) -> FiniteLattice:
    """(2N)x(2N) effective NH bath matrix: SSH hoppings minus i/2 loss diagonal."""
    if N < 2:
        raise ConfigError(f"finite lattice needs N >= 2 cells, got {N}")
    if boundary not in ("periodic", "open"):
        raise ConfigError(f"boundary must be 'periodic' or 'open', got {boundary!r}")
    jp, jm = bath.j_plus, bath.j_minus
    h = np.zeros((2 * N, 2 * N), dtype=complex)
    for c in range(N):
        a, b = 2 * c, 2 * c + 1
        h[a, a] = -0.5j * bath.kappa_a
        h[b, b] = -0.5j * bath.kappa_b
        h[a, b] += jp
        h[b, a] += jp
        if c + 1 < N:
            h[b, 2 * c + 2] += jm
            h[2 * c + 2, b] += jm
    if boundary == "periodic":
        h[2 * N - 1, 0] += jm
        h[0, 2 * N - 1] += jm
    return FiniteLattice(N=N, boundary=boundary, matrix=h)


def greens_function_finite(x_m: int, alpha: str, x_n: int, beta: str, z,
                           lattice: FiniteLattice) -> complex:
    """Matrix element of (z - H_lattice)^{-1} between two sites (oracle)."""
    m = lattice.site_index(int(x_m), alpha)
    n = lattice.site_index(int(x_n), beta)
    dim = lattice.matrix.shape[0]
    rhs = np.zeros(dim, dtype=complex)
    rhs[n] = 1.0
    a = complex(z) * np.eye(dim, dtype=complex) - lattice.matrix
    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore")  # singularity is detected below
            col = dense_solve(a, rhs)
    except np.linalg.LinAlgError:
        raise SolverError(f"z = {z} is an eigenvalue of the finite lattice")
    residual = np.linalg.norm(a @ col - rhs)
    if not np.all(np.isfinite(col)) or residual > 1e-8:
        raise SolverError(f"z = {z} is (numerically) an eigenvalue of the finite lattice")
    return complex(col[m])
