"""Parameter records and the unit conventions shared by every module.

Units: the hopping scale J sets the energy unit (J = 1 by default) and
hbar = 1, so times are measured in 1/J. Stored energy and ergotropy carry
the battery splitting omega_e as a prefactor only; the rotating frame
removes omega_e from the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .errors import ConfigError

SUBLATTICES = ("A", "B")

_CONFIG_KEYS = (
    "J", "delta", "kappa_a", "kappa_b",
    "Delta", "Omega", "g", "x1", "alpha", "x2", "beta", "omega_e",
)


@dataclass(frozen=True)
class BathParams:
    """SSH lattice couplings and sublattice loss rates."""

    J: float = 1.0
    delta: float = 0.0
    kappa_a: float = 0.0
    kappa_b: float = 0.0

    def __post_init__(self):
        if not self.J > 0:
            raise ConfigError(f"J must be > 0, got {self.J}")
        if abs(self.delta) > 1:
            raise ConfigError(f"delta out of [-1,1]: {self.delta}")
        if self.kappa_a < 0:
            raise ConfigError(f"kappa_a negative: {self.kappa_a}")
        if self.kappa_b < 0:
            raise ConfigError(f"kappa_b negative: {self.kappa_b}")

    @property
    def j_plus(self) -> float:
        return self.J * (1.0 + self.delta)

    @property
    def j_minus(self) -> float:
        return self.J * (1.0 - self.delta)

    @property
    def kappa_plus(self) -> float:
        return 0.25 * (self.kappa_a + self.kappa_b)

    @property
    def kappa_minus(self) -> float:
        return 0.25 * (self.kappa_a - self.kappa_b)

    @property
    def dissipative(self) -> bool:
        return self.kappa_a > 0 or self.kappa_b > 0

    @property
    def decoupled_limit(self) -> bool:
        """True at |delta| = 1, where one of the two hoppings is absent."""
        return abs(self.delta) == 1.0


@dataclass(frozen=True)
class EmitterConfig:
    """Battery (atom 1) and charger (atom 2) parameters.

    alpha/beta are the sublattices the battery/charger attach to; x1/x2
    the unit-cell indices. d = x1 - x2 is the cell distance (battery
    minus charger, so Fig.-2-style placements use d = -1, -2).
    """

    Delta: float = 0.0
    Omega: float = 0.0
    g: float = 0.0
    x1: int = 0
    alpha: str = "A"
    x2: int = 0
    beta: str = "A"
    omega_e: float = 1.0

    def __post_init__(self):
        if self.alpha not in SUBLATTICES:
            raise ConfigError(f"alpha must be 'A' or 'B', got {self.alpha!r}")
        if self.beta not in SUBLATTICES:
            raise ConfigError(f"beta must be 'A' or 'B', got {self.beta!r}")
        if self.x1 != int(self.x1):
            raise ConfigError(f"x1 must be an integer, got {self.x1}")
        if self.x2 != int(self.x2):
            raise ConfigError(f"x2 must be an integer, got {self.x2}")
        if not self.omega_e > 0:
            raise ConfigError(f"omega_e must be > 0, got {self.omega_e}")

    @property
    def d(self) -> int:
        return int(self.x1) - int(self.x2)

    @property
    def same_cavity(self) -> bool:
        return self.d == 0 and self.alpha == self.beta

    @property
    def omega12(self) -> float:
        """Effective direct coupling Omega * delta_{x1,x2} * delta_{alpha,beta}."""
        return self.Omega if self.same_cavity else 0.0


@dataclass(frozen=True)
class ModelConfig:
    bath: BathParams
    emitters: EmitterConfig

    def with_kappa(self, kappa_a: float, kappa_b: float = 0.0) -> "ModelConfig":
        return ModelConfig(replace(self.bath, kappa_a=kappa_a, kappa_b=kappa_b),
                           self.emitters)

    def as_dict(self) -> dict:
        b, e = self.bath, self.emitters
        return {
            "J": b.J, "delta": b.delta, "kappa_a": b.kappa_a, "kappa_b": b.kappa_b,
            "Delta": e.Delta, "Omega": e.Omega, "g": e.g,
            "x1": e.x1, "alpha": e.alpha, "x2": e.x2, "beta": e.beta,
            "omega_e": e.omega_e,
        }


def validate(raw: Mapping | ModelConfig) -> ModelConfig:
    """Build a validated ModelConfig from a flat mapping of the JSON keys.

    Idempotent: passing a ModelConfig returns an equal config. Unknown keys
    are rejected so typos in config files fail loudly.
    """
    if isinstance(raw, ModelConfig):
        return ModelConfig(BathParams(**_bath_kwargs(raw.as_dict())),
                           EmitterConfig(**_emitter_kwargs(raw.as_dict())))
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    data = dict(raw)
    for key in ("J", "delta", "kappa_a", "kappa_b", "Delta", "Omega", "g", "omega_e"):
        if key in data:
            try:
                data[key] = float(data[key])
            except (TypeError, ValueError):
                raise ConfigError(f"config key {key!r} is not a number: {data[key]!r}")
    for key in ("x1", "x2"):
        if key in data:
            try:
                data[key] = int(data[key])
            except (TypeError, ValueError):
                raise ConfigError(f"config key {key!r} is not an integer: {data[key]!r}")
    return ModelConfig(BathParams(**_bath_kwargs(data)), EmitterConfig(**_emitter_kwargs(data)))


def _bath_kwargs(data: Mapping) -> dict:
    return {k: data[k] for k in ("J", "delta", "kappa_a", "kappa_b") if k in data}


def _emitter_kwargs(data: Mapping) -> dict:
    keys = ("Delta", "Omega", "g", "x1", "alpha", "x2", "beta", "omega_e")
    return {k: data[k] for k in keys if k in data}


def effective_direct_coupling(config: ModelConfig) -> float:
    """Direct atom-atom coupling, nonzero only when both sit in one cavity."""
    return config.emitters.omega12


def band_edges(bath: BathParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """The two real bands of the lossless lattice, [-2J, -2J|d|] and [2J|d|, 2J].

    |f_k| ranges over [2J|delta|, 2J]; at |delta| = 1 both bands degenerate
    to the single points -2J and +2J (one hopping is absent and |f_k| is
    constant).
    """
    j, ad = bath.J, abs(bath.delta)
    return ((-2.0 * j, -2.0 * j * ad), (2.0 * j * ad, 2.0 * j))
