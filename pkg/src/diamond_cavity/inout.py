"""Input-output description of field extraction through the auxiliary mode.

The intracavity mode ``a`` is released through mode ``b`` into a waveguide.
With vacuum inputs, the Heisenberg-Langevin equations reduce to the 2x2 drift
matrix ``M`` and the figure of merit

    F = eta * int_0^inf |[exp(-M tau)]_{12}|^2 d tau,

evaluated here by adaptive quadrature (oracle), by a Sylvester solve
(production path) and by a closed-form approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .core import DensityOperator, HilbertSpace, boson_mode, destroy
from .errors import DimensionError, SingularityError, UnstableDriftError
from .linalg import matrix_exponential, spectral_abscissa, sylvester_solve
from .model import EffectiveCoefficients, PhysicalParams


@dataclass(frozen=True)
class LangevinMatrix:
    """Drift matrix and the rates it is built from (rad/s)."""

    m: np.ndarray = field(repr=False)
    zeta1: float
    theta1: float
    zeta2: float
    theta2: float
    kappa: float
    eta: float
    eta_prime: float
    delta1: float
    delta2: float

    @property
    def eta_tot(self) -> float:
        return self.eta + self.eta_prime

    @property
    def cross_rate(self) -> float:
        """``sqrt(zeta1 theta1) + sqrt(zeta2 theta2)``."""
        return math.sqrt(self.zeta1 * self.theta1) + math.sqrt(self.zeta2 * self.theta2)

    @property
    def abscissa(self) -> float:
        return spectral_abscissa(self.m)

    @property
    def stable(self) -> bool:
        return self.abscissa > 0

    def as_dict(self) -> dict[str, float]:
        return dict(zeta1=self.zeta1, theta1=self.theta1, zeta2=self.zeta2, theta2=self.theta2,
                    kappa=self.kappa, eta=self.eta, eta_prime=self.eta_prime,
                    eta_tot=self.eta_tot, delta1=self.delta1, delta2=self.delta2)


def drift_matrix(kappa, eta_tot, zeta1, theta1, zeta2, theta2, delta1, delta2) -> np.ndarray:
    s = 0.5 * (math.sqrt(zeta1 * theta1) + math.sqrt(zeta2 * theta2)) - 1j * delta2
    return np.array(
        [[0.5 * (kappa + zeta1 + zeta2), s],
         [s, 0.5 * (eta_tot + theta1 + theta2) - 1j * delta1]],
        dtype=complex,
    )


def langevin_matrix(
    coeffs: EffectiveCoefficients,
    params: PhysicalParams,
    kappa: float,
    eta: float,
    eta_prime: float,
) -> LangevinMatrix:
    """Drift matrix for the atom-assisted coupling of modes ``a`` and ``b``."""
    for name, v in (("kappa", kappa), ("eta", eta), ("eta_prime", eta_prime)):
        if not (math.isfinite(v) and v >= 0):
            raise ValueError(f"{name} must be finite and non-negative, got {v}")
    p = params
    a1, a2, a3 = coeffs.alpha[:3]
    n = p.n_atoms
    zeta1 = n * p.gamma_prime * a3**2 * p.g**2
    theta1 = n * p.gamma_prime * a1**2 * p.g_prime**2
    zeta2 = n * p.gamma * a2**2 * p.g**2
    theta2 = n * p.gamma * a3**2 * p.g_prime**2
    m = drift_matrix(kappa, eta + eta_prime, zeta1, theta1, zeta2, theta2, coeffs.delta1, coeffs.delta2)
    return LangevinMatrix(m, zeta1, theta1, zeta2, theta2, kappa, eta, eta_prime,
                          coeffs.delta1, coeffs.delta2)


def _matrix(m) -> np.ndarray:
    m = m.m if isinstance(m, LangevinMatrix) else np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise DimensionError(f"drift matrix must be square with d >= 2, got shape {m.shape}")
    return m


def _require_stable(m: np.ndarray) -> float:
    a = spectral_abscissa(m)
    if not a > 0:
        raise UnstableDriftError(
            f"drift matrix is not strictly stable (smallest eigenvalue real part {a:.4g})"
        )
    return a


# --------------------------------------------------------------------------
# figure of merit


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    tail_bound: float


def _element_integral_quad(m: np.ndarray, i: int, j: int, horizon: float = 40.0) -> QuadratureResult:
    """``int_0^inf |[exp(-M tau)]_{ij}|^2 d tau`` by panelled adaptive quadrature.

    Time is rescaled by the spectral abscissa ``a``; the integral over
    ``[0, horizon/a]`` is split into panels no longer than a quarter of the
    fastest beat period, each integrated by Gauss-Kronrod (``scipy.integrate.quad``).
    The remainder beyond the horizon is bounded using ``||exp(-Ms)|| <= c exp(-a s)``
    with ``c`` the eigenvector condition number.
    """
    a = _require_stable(m)
    ms = m / a
    lam, v = np.linalg.eig(ms)
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > 1e8:
        cond = math.inf

    def integrand(s):
        return abs(matrix_exponential(-ms * s)[i, j]) ** 2

    # beat frequencies between eigenmodes set the oscillation scale
    beats = np.abs(lam.imag[:, None] - lam.imag[None, :]).max(initial=0.0)
    beats = max(beats, np.abs(lam.imag).max(initial=0.0))
    n_panels = 1 if beats == 0 else min(int(math.ceil(horizon * beats / (0.5 * math.pi))), 20000)
    n_panels = max(n_panels, 8)
    edges = np.linspace(0.0, horizon, n_panels + 1)
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200)
        total += val
        err += e
    # |E_ij(s)|^2 <= c^2 exp(-2 s) past the horizon (non-normal case: fall back to a crude bound)
    if math.isinf(cond):
        tail = integrand(horizon) * horizon
    else:
        tail = cond**2 * math.exp(-2 * horizon) / 2
    return QuadratureResult(total / a, err / a, tail / a)


def fom_quadrature(m, eta: float, i: int = 0, j: int = 1) -> float:
    """Figure of merit by direct quadrature of the squared matrix-exponential element."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    m = _matrix(m)
    if eta == 0:
        _require_stable(m)
        return 0.0
    r = _element_integral_quad(m, i, j)
    return eta * r.value


def fom_sylvester(m, eta: float, i: int = 0, j: int = 1) -> float:
    """Figure of merit ``eta X_{i j j i}(M)`` from the Sylvester tensor (any d x d)."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    m = _matrix(m)
    _require_stable(m)
    d = m.shape[0]
    x = sylvester_solve(m)
    # X[(i,k),(j,l)] integrates E_ij conj(E)_lk; need k = j, l = i
    return float(eta * x[i * d + j, j * d + i].real)


def fom_approx(lm: LangevinMatrix) -> float:
    """Closed-form approximation valid for ``eta_tot >> delta2 >> kappa, zeta, theta``."""
    d2 = lm.delta2
    if d2 == 0:
        raise SingularityError("delta2 = 0: approximation undefined")
    et = lm.eta_tot
    if et == 0:
        return 0.0
    loss_a = lm.kappa + lm.zeta1 + lm.zeta2
    return (lm.eta / et) * (
        1.0 - lm.cross_rate**2 / (2 * d2**2) - et * loss_a / (4 * d2**2 + et * loss_a)
    )


@dataclass(frozen=True)
class FomResult:
    f_quadrature: float
    f_sylvester: float
    f_approx: float
    profile_norm: float

    @property
    def method_delta(self) -> float:
        return abs(self.f_quadrature - self.f_sylvester)

    @property
    def approx_delta(self) -> float:
        return abs(self.f_approx - self.f_sylvester)


def figure_of_merit(lm: LangevinMatrix) -> FomResult:
    """All three estimates of F for one drift matrix."""
    fq = fom_quadrature(lm.m, lm.eta)
    fs = fom_sylvester(lm.m, lm.eta)
    try:
        fa = fom_approx(lm)
    except SingularityError:
        fa = math.nan
    norm = _element_integral_quad(lm.m, 0, 1).value
    return FomResult(fq, fs, fa, norm)


# --------------------------------------------------------------------------
# output pulse shape


@dataclass(frozen=True)
class TemporalProfile:
    tau: np.ndarray
    u: np.ndarray
    norm_sq: float


def temporal_profile(m, tau) -> TemporalProfile:
    """Waveguide mode function ``u(tau)`` proportional to ``[exp(-M tau)]_{12}``, unit L2 norm.

    The normalisation uses the exact integral from the Sylvester tensor.
    """
    m = _matrix(m)
    _require_stable(m)
    d = m.shape[0]
    norm_sq = float(sylvester_solve(m)[1, d].real)
    if norm_sq <= 0:
        raise SingularityError("[exp(-M tau)]_12 vanishes identically; no output profile")
    tau = np.asarray(tau, dtype=float)
    vals = np.array([matrix_exponential(-m * t)[0, 1] for t in tau.ravel()]).reshape(tau.shape)
    return TemporalProfile(tau, vals / math.sqrt(norm_sq), norm_sq)


# --------------------------------------------------------------------------
# output state


def single_mode_space(cutoff: int, label: str = "out") -> HilbertSpace:
    return HilbertSpace((boson_mode(label, cutoff),))


def loss_liouvillian(cutoff: int) -> np.ndarray:
    """``L rho = a rho a^+ - (a^+a rho + rho a^+a)/2`` acting on row-major ``vec(rho)``."""
    a = destroy(cutoff)
    n = a.conj().T @ a
    eye = np.eye(cutoff + 1)
    return np.kron(a, a.conj()) - 0.5 * (np.kron(n, eye) + np.kron(eye, n.T))


def output_loss_superoperator(cutoff: int, f: float) -> np.ndarray:
    """``exp((1 - F) L)`` on row-major vectorised density matrices."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"figure of merit must lie in [0, 1], got {f}")
    return matrix_exponential((1.0 - f) * loss_liouvillian(cutoff))


def apply_output_loss(rho0, f: float, leak_tol: float = 1e-6) -> DensityOperator:
    """Output state ``exp((1 - F) L) rho0`` of the extracted mode.

    Raises ``DimensionError`` if the input populates the top Fock level by more
    than ``leak_tol``, a sign that the cutoff truncates the state.
    """
    if isinstance(rho0, DensityOperator):
        space, data = rho0.space, rho0.data
    else:
        data = np.asarray(rho0, dtype=complex)
        space = single_mode_space(data.shape[0] - 1)
    if len(space.factors) != 1 or space.factors[0].kind != "mode":
        raise DimensionError("output loss acts on a single boson mode")
    cutoff = space.factors[0].dim - 1
    if abs(data[cutoff, cutoff]) > leak_tol:
        raise DimensionError(
            f"cutoff {cutoff} too small: top Fock level holds population {abs(data[cutoff, cutoff]):.3g}"
        )
    s = output_loss_superoperator(cutoff, f)
    out = (s @ data.reshape(-1)).reshape(data.shape)
    return DensityOperator(space, out)


def choi_matrix(superop: np.ndarray) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) Phi(|i><j|)`` of a row-major superoperator."""
    dd = superop.shape[0]
    d = int(round(math.sqrt(dd)))
    if d * d != dd:
        raise DimensionError("superoperator dimension is not a square")
    choi = np.zeros((dd, dd), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1.0
            img = (superop @ e.reshape(-1)).reshape(d, d)
            choi[i * d:(i + 1) * d, j * d:(j + 1) * d] = img
    return choi


# --------------------------------------------------------------------------
# regime checks


@dataclass(frozen=True)
class Condition:
    name: str
    ratio: float
    threshold: float

    @property
    def satisfied(self) -> bool:
        return self.ratio >= self.threshold


def extraction_conditions(
    lm: LangevinMatrix, params: PhysicalParams, threshold: float = 10.0
) -> list[Condition]:
    """Ratios that must be large for efficient extraction and for the approximate F.

    Each ratio is arranged so that "large" means "satisfied".
    """
    p = params
    n = p.n_atoms
    et = lm.eta_tot
    d2 = abs(lm.delta2)
    inf = math.inf
    out = [
        Condition("n g^2 / (gamma eta_tot)", n * p.g**2 / (p.gamma * et) if p.gamma * et > 0 else inf, threshold),
        Condition("n g'^2 / (gamma' eta_tot)",
                  n * p.g_prime**2 / (p.gamma_prime * et) if p.gamma_prime * et > 0 else inf, threshold),
        Condition("delta2^2 / (kappa eta_tot)", d2**2 / (lm.kappa * et) if lm.kappa * et > 0 else inf, threshold),
        Condition("4 delta2^2 / (eta_tot (kappa + zeta1 + zeta2))",
                  4 * d2**2 / (et * (lm.kappa + lm.zeta1 + lm.zeta2))
                  if et * (lm.kappa + lm.zeta1 + lm.zeta2) > 0 else inf, threshold),
        Condition("eta_tot / delta2", et / d2 if d2 > 0 else inf, threshold),
    ]
    small = max(lm.kappa, lm.zeta1, lm.theta1, lm.zeta2, lm.theta2)
    out.append(Condition("delta2 / max(kappa, zeta, theta)", d2 / small if small > 0 else inf, threshold))
    return out
