"""From mirrors, geometry and an atomic species to model rates.

Transmission and loss coefficients are given in ppm and converted to exact
rationals on ingestion; reflectivities sit within a few ppm of one, so the
``1 - R`` differences are formed exactly and the remaining square roots use
``expm1``/``log1p``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from scipy.constants import c as SPEED_OF_LIGHT

from .errors import ConfigError
from .inout import LangevinMatrix, langevin_matrix
from .model import EffectiveCoefficients, PhysicalParams, effective_coefficients, omega_prime_for_zero_delta1

TWO_PI = 2.0 * math.pi
PPM = Fraction(1, 10**6)
PRESET_SCHEMA_VERSION = 1


def ppm(value) -> Fraction:
    """Exact fraction for a ppm value (decimal literal semantics for floats)."""
    if isinstance(value, Fraction):
        return value * PPM
    return Fraction(str(value)) * PPM


@dataclass(frozen=True)
class MirrorSpec:
    """Two-mirror cavity for modes ``a`` (``t1``, ``t2``) and ``b`` (``t1_prime``, ``t2_prime``).

    Coefficients in ppm; ``radius`` in metres. ``t2_prime`` is the output
    coupler of mode ``b``.
    """

    t1_ppm: float
    t2_ppm: float
    t1_prime_ppm: float
    t2_prime_ppm: float
    loss_ppm: float
    radius: float

    def __post_init__(self):
        for name in ("t1_ppm", "t2_ppm", "t1_prime_ppm", "t2_prime_ppm", "loss_ppm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0 <= v < 1e6):
                raise ValueError(f"{name} must lie in [0, 1e6) ppm, got {v}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("radius must be positive")
        for t in ("t1_ppm", "t2_ppm", "t1_prime_ppm", "t2_prime_ppm"):
            r = 1 - ppm(self.loss_ppm) - ppm(getattr(self, t))
            if not 0 < r < 1:
                raise ValueError(f"reflectivity 1 - L - {t} = {float(r):.6g} outside (0, 1)")

    def reflectivities(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        L = ppm(self.loss_ppm)
        return tuple(1 - L - ppm(t) for t in (self.t1_ppm, self.t2_ppm, self.t1_prime_ppm, self.t2_prime_ppm))

    def with_output(self, t2_prime_ppm: float) -> "MirrorSpec":
        from dataclasses import replace

        return replace(self, t2_prime_ppm=t2_prime_ppm)


@dataclass(frozen=True)
class AtomPreset:
    """Four-level species: mode frequencies and decay rates in rad/s, lifetimes in s."""

    name: str
    levels: tuple[str, str, str, str]
    omega: float
    omega_prime: float
    gamma: float
    gamma_prime: float
    gamma_pp: float
    tau1: float = math.nan
    tau2: float = math.nan
    tau3: float = math.nan

    def __post_init__(self):
        for name in ("omega", "omega_prime", "gamma", "gamma_prime", "gamma_pp"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class CavityGeometry:
    length: float
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and 0 < self.length < 2 * self.radius):
            raise ValueError(f"need 0 < l < 2r for a stable resonator (l={self.length}, r={self.radius})")


def mode_volume(length: float, radius: float, omega: float) -> float:
    """``pi c l sqrt(l (2r - l)) / (4 omega)`` in m^3."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if not (radius > 0 and 0 < length < 2 * radius):
        raise ValueError(f"need 0 < l < 2r (l={length}, r={radius})")
    return math.pi * SPEED_OF_LIGHT * length * math.sqrt(length * (2 * radius - length)) / (4 * omega)


def coupling_g(omega: float, gamma: float, volume: float) -> float:
    """Atom-mode coupling ``sqrt(3 pi c^3 gamma / (2 omega^2 V))`` in rad/s."""
    if omega <= 0 or gamma < 0 or volume <= 0:
        raise ValueError("omega and volume must be positive, gamma non-negative")
    return math.sqrt(3 * math.pi * SPEED_OF_LIGHT**3 * gamma / (2 * omega**2 * volume))


def _two_mirror_rate(r1: Fraction, r2: Fraction, length: float) -> float:
    """``c (1 - sqrt(R1 R2)) / (l (R1 R2)^(1/4))``."""
    prod = r1 * r2
    one_minus = float(1 - prod)
    # 1 - sqrt(P) = -expm1(log1p(-(1-P)) / 2)
    num = -math.expm1(0.5 * math.log1p(-one_minus))
    return SPEED_OF_LIGHT * num / (length * math.exp(0.25 * math.log1p(-one_minus)))


@dataclass(frozen=True)
class DampingRates:
    kappa: float
    eta: float
    eta_prime: float
    eta_tot: float


def damping_rates(mirrors: MirrorSpec, length: float) -> DampingRates:
    """Cavity damping of mode ``a`` (``kappa``) and the two channels of mode ``b``.

    For equal mirrors ``kappa`` reduces to ``c (1 - R) / (l sqrt(R))``.
    ``eta`` is the share of ``eta_tot`` leaving through the output coupler.
    """
    if length <= 0:
        raise ValueError("length must be positive")
    r1, r2, r1p, r2p = mirrors.reflectivities()
    kappa = _two_mirror_rate(r1, r2, length)
    eta_tot = _two_mirror_rate(r1p, r2p, length)
    L = ppm(mirrors.loss_ppm)
    t1p, t2p = ppm(mirrors.t1_prime_ppm), ppm(mirrors.t2_prime_ppm)
    total = 2 * L + t1p + t2p
    eta = float(t2p / total) * eta_tot
    eta_prime = eta_tot - eta
    return DampingRates(kappa, eta, eta_prime, eta_tot)


def kappa_gamma(n_atoms: int, gamma: float, g: float, delta: float) -> float:
    """Extra decay of mode ``a`` from spontaneous emission while the lasers are off."""
    if delta == 0:
        raise ValueError("delta must be non-zero")
    return n_atoms * gamma * g**2 / delta**2


@dataclass(frozen=True)
class DerivedSystem:
    params: PhysicalParams
    coeffs: EffectiveCoefficients
    rates: DampingRates
    langevin: LangevinMatrix
    kappa_gamma: float
    geometry: CavityGeometry
    mirrors: MirrorSpec
    preset: AtomPreset

    def summary(self) -> dict[str, float]:
        p, r = self.params, self.rates
        out = dict(
            g=p.g, g_prime=p.g_prime, delta=p.delta, omega=p.omega, omega_prime=p.omega_prime,
            gamma=p.gamma, gamma_prime=p.gamma_prime, gamma_pp=p.gamma_pp,
            kappa=r.kappa, eta=r.eta, eta_prime=r.eta_prime, eta_tot=r.eta_tot,
            kappa_gamma=self.kappa_gamma,
        )
        out.update(zeta1=self.langevin.zeta1, theta1=self.langevin.theta1,
                   zeta2=self.langevin.zeta2, theta2=self.langevin.theta2,
                   delta1=self.coeffs.delta1, delta2=self.coeffs.delta2)
        return out


def derive_system(
    geometry: CavityGeometry,
    mirrors: MirrorSpec,
    preset: AtomPreset,
    n_atoms: int,
    delta_over_g: float,
    omega_over_delta: float,
    include_kappa_gamma: bool = False,
    cutoff: int = 1,
) -> DerivedSystem:
    """Full parameter bundle of the device.

    ``Delta = delta_over_g * g``, ``Omega = omega_over_delta * Delta`` and
    ``Omega'`` is tuned so that ``delta1 = 0``. With ``include_kappa_gamma``
    the closed-mode atomic loss is added to ``kappa`` in the drift matrix.
    """
    if abs(geometry.radius - mirrors.radius) > 1e-12 * mirrors.radius:
        raise ConfigError("geometry and mirror radii differ")
    v = mode_volume(geometry.length, geometry.radius, preset.omega)
    vp = mode_volume(geometry.length, geometry.radius, preset.omega_prime)
    g = coupling_g(preset.omega, preset.gamma, v)
    gp = coupling_g(preset.omega_prime, preset.gamma_prime, vp)
    delta = delta_over_g * g
    omega = omega_over_delta * delta
    omega_p = omega_prime_for_zero_delta1(omega, delta, g, gp)
    params = PhysicalParams(
        g=g, g_prime=gp, delta=delta, omega=omega, omega_prime=omega_p,
        gamma=preset.gamma, gamma_prime=preset.gamma_prime,
        gamma3=0.5 * preset.gamma_pp, gamma3_prime=0.5 * preset.gamma_pp,
        n_atoms=n_atoms, cutoff=cutoff,
    )
    coeffs = effective_coefficients(params)
    rates = damping_rates(mirrors, geometry.length)
    kg = kappa_gamma(n_atoms, preset.gamma, g, delta)
    kappa = rates.kappa + (kg if include_kappa_gamma else 0.0)
    lm = langevin_matrix(coeffs, params, kappa, rates.eta, rates.eta_prime)
    return DerivedSystem(params, coeffs, rates, lm, kg, geometry, mirrors, preset)


# --------------------------------------------------------------------------
# presets


def _read_preset(name_or_path: str | Path) -> dict:
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        try:
            text = resources.files("diamond_cavity.presets").joinpath(f"{name_or_path}.json").read_text()
        except FileNotFoundError:
            raise ConfigError(f"unknown preset {name_or_path!r}") from None
    doc = json.loads(text)
    if doc.get("schema_version") != PRESET_SCHEMA_VERSION:
        raise ConfigError(f"preset {name_or_path!r}: unsupported schema_version {doc.get('schema_version')!r}")
    return doc


def load_atom_preset(name_or_path: str | Path = "rb87") -> AtomPreset:
    doc = _read_preset(name_or_path)
    if doc.get("kind") != "atom":
        raise ConfigError(f"{name_or_path!r} is not an atom preset")
    return AtomPreset(
        name=doc["name"],
        levels=tuple(doc["levels"]),
        omega=TWO_PI * doc["omega_over_2pi_hz"],
        omega_prime=TWO_PI * doc["omega_prime_over_2pi_hz"],
        gamma=TWO_PI * doc["gamma_over_2pi_hz"],
        gamma_prime=TWO_PI * doc["gamma_prime_over_2pi_hz"],
        gamma_pp=TWO_PI * doc["gamma_pp_over_2pi_hz"],
        tau1=doc.get("tau1_s", math.nan),
        tau2=doc.get("tau2_s", math.nan),
        tau3=doc.get("tau3_s", math.nan),
    )


def load_mirror_preset(name_or_path: str | Path = "low_loss_mirrors") -> MirrorSpec:
    doc = _read_preset(name_or_path)
    if doc.get("kind") != "mirrors":
        raise ConfigError(f"{name_or_path!r} is not a mirror preset")
    return MirrorSpec(
        t1_ppm=doc["t1_ppm"], t2_ppm=doc["t2_ppm"],
        t1_prime_ppm=doc["t1_prime_ppm"], t2_prime_ppm=doc["t2_prime_ppm"],
        loss_ppm=doc["loss_ppm"], radius=doc["radius_m"],
    )
