"""Diamond-configuration atoms coupled to two cavity modes.

Full model
    ``H = sum_k [D s11 + D s22 + 2D s33 + (W s23 + W' s13 + g a^+ s02 + g' b^+ s01 + h.c.)]``
    with spontaneous-emission jump operators ``sqrt(gamma') s01``,
    ``sqrt(gamma) s02``, ``sqrt(gamma3) s23``, ``sqrt(gamma3') s13`` per atom.

Effective model (atoms adiabatically eliminated)
    ``H_eff = d0 (a^+a + b^+b) + d1 b^+b + d2 (a^+b + b^+a)``.

All frequencies and rates are angular (rad/s). ``PhysicalParams.from_units_of_g``
builds a parameter set from values quoted in units of ``g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import HilbertSpace, Operator, destroy, embed, flip, number, zero
from .errors import DimensionError, SectorError, SingularityError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalParams:
    """Raw model rates (rad/s) and sizes.

    ``gamma``/``gamma_prime`` are the decay rates of ``|2>`` and ``|1>`` to
    ``|0>``; ``gamma3``/``gamma3_prime`` those of ``|3>`` to ``|2>`` and
    ``|1>``. ``cutoff`` is the per-mode Fock cutoff (levels ``0..cutoff``).
    """

    g: float
    g_prime: float
    delta: float
    omega: float
    omega_prime: float
    gamma: float = 0.0
    gamma_prime: float = 0.0
    gamma3: float = 0.0
    gamma3_prime: float = 0.0
    n_atoms: int = 1
    cutoff: int = 2

    def __post_init__(self):
        for name in ("g", "g_prime", "delta", "omega", "omega_prime",
                     "gamma", "gamma_prime", "gamma3", "gamma3_prime"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("g", "g_prime", "omega", "omega_prime",
                     "gamma", "gamma_prime", "gamma3", "gamma3_prime"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError("n_atoms must be a positive integer")
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ValueError("cutoff must be a non-negative integer")

    @property
    def gamma_pp(self) -> float:
        """Total decay rate of ``|3>``."""
        return self.gamma3 + self.gamma3_prime

    @property
    def g_min(self) -> float:
        return min(self.g, self.g_prime)

    @classmethod
    def from_units_of_g(
        cls,
        g: float,
        g_prime: float,
        delta: float,
        omega: float,
        omega_prime: float,
        gamma: float = 0.0,
        gamma_prime: float = 0.0,
        gamma_pp: float = 0.0,
        n_atoms: int = 1,
        cutoff: int = 2,
    ) -> "PhysicalParams":
        """Build from ``g`` in rad/s and every other rate as a multiple of ``g``.

        ``gamma_pp`` (total decay of ``|3>``) is split evenly between the two
        channels; only the sum enters the no-jump dynamics.
        """
        return cls(
            g=g,
            g_prime=g_prime * g,
            delta=delta * g,
            omega=omega * g,
            omega_prime=omega_prime * g,
            gamma=gamma * g,
            gamma_prime=gamma_prime * g,
            gamma3=0.5 * gamma_pp * g,
            gamma3_prime=0.5 * gamma_pp * g,
            n_atoms=n_atoms,
            cutoff=cutoff,
        )

    def with_(self, **changes) -> "PhysicalParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class EffectiveCoefficients:
    xi: float
    alpha: tuple[float, float, float, float, float, float]
    delta0: float
    delta1: float
    delta2: float
    delta_r: float
    epsilon: float
    lambdas: tuple[float, float, float, float, float, float]
    gamma_eff: float
    gamma_tot: float
    omega_r: float

    @property
    def alpha1(self) -> float:
        return self.alpha[0]

    @property
    def alpha2(self) -> float:
        return self.alpha[1]

    @property
    def alpha3(self) -> float:
        return self.alpha[2]

    def as_dict(self) -> dict[str, float]:
        out = {"xi": self.xi}
        out.update({f"alpha{i + 1}": a for i, a in enumerate(self.alpha)})
        out.update(delta0=self.delta0, delta1=self.delta1, delta2=self.delta2,
                   delta_r=self.delta_r, epsilon=self.epsilon)
        out.update({f"lambda{i + 1}": v for i, v in enumerate(self.lambdas)})
        out.update(gamma_eff=self.gamma_eff, gamma_tot=self.gamma_tot, omega_r=self.omega_r)
        return out


def _omega_r(p: PhysicalParams) -> float:
    return math.sqrt(p.delta**2 + 4 * p.omega**2 + 4 * p.omega_prime**2)


def effective_coefficients(params: PhysicalParams) -> EffectiveCoefficients:
    """Closed-form coefficients of the adiabatically eliminated model."""
    p = params
    d, w, wp, g, gp, n = p.delta, p.omega, p.omega_prime, p.g, p.g_prime, p.n_atoms
    if d == 0:
        raise SingularityError("detuning must be non-zero for the effective model")
    denom = w**2 + wp**2 - 2 * d**2
    if abs(denom) <= 1e-14 * (w**2 + wp**2 + 2 * d**2):
        raise SingularityError("xi pole: Omega^2 + Omega'^2 = 2 Delta^2")
    xi = 1.0 / (d * denom)
    a1 = xi * (w**2 - 2 * d**2)
    a2 = xi * (wp**2 - 2 * d**2)
    a3 = -xi * w * wp
    a4 = -xi * d**2
    a5 = xi * d * wp
    a6 = xi * d * w
    delta0 = -n * g**2 * a2
    delta1 = n * (g**2 * a2 - gp**2 * a1)
    delta2 = -n * g * gp * a3
    delta_r = math.sqrt(4 * delta2**2 + delta1**2)
    epsilon = 0.5 * (1.0 - delta1 / delta_r) if delta_r > 0 else 0.5

    omega_r = _omega_r(p)
    if w == 0 and wp == 0:
        # dressed state |mu> undefined with the lasers off
        lambdas = (math.nan,) * 6
    else:
        lower, upper = 3 * d - omega_r, 3 * d + omega_r
        if lower == 0 or upper == 0:
            raise SingularityError("lambda pole: 3 Delta = +/- Omega_R")
        n_mu = 1.0 / math.sqrt(w**2 + wp**2)
        n_phi = 1.0 / math.sqrt(2 * omega_r * (omega_r - d))
        n_psi = 1.0 / math.sqrt(2 * omega_r * (omega_r + d))
        lambdas = (
            n_mu * g * wp / d,
            4 * n_phi * g * w / lower,
            4 * n_psi * g * w / upper,
            n_mu * gp * w / d,
            4 * n_phi * gp * wp / lower,
            4 * n_psi * gp * wp / upper,
        )

    gsum = g**2 + gp**2
    gamma_eff = (2 * n * g**2 * gp**2 * (g**2 * p.gamma_prime + gp**2 * p.gamma)
                 / (d**2 * gsum**2)) if gsum > 0 else 0.0
    gamma_tot = n * p.gamma * g**2 / d**2
    return EffectiveCoefficients(
        xi=xi,
        alpha=(a1, a2, a3, a4, a5, a6),
        delta0=delta0,
        delta1=delta1,
        delta2=delta2,
        delta_r=delta_r,
        epsilon=epsilon,
        lambdas=lambdas,
        gamma_eff=gamma_eff,
        gamma_tot=gamma_tot,
        omega_r=omega_r,
    )


def alpha_matrix(coeffs: EffectiveCoefficients) -> np.ndarray:
    """Approximate inverse of the excited-manifold Hamiltonian on (|1>,|2>,|3>)."""
    a1, a2, a3, a4, a5, a6 = coeffs.alpha
    return np.array([[a1, a3, a5], [a3, a2, a6], [a5, a6, a4]], dtype=complex)


def excited_manifold_hamiltonian(params: PhysicalParams, with_decay: bool = True) -> np.ndarray:
    """Non-Hermitian Hamiltonian of one atom's excited levels (|1>,|2>,|3>)."""
    p = params
    h = np.array(
        [[p.delta, 0.0, p.omega_prime],
         [0.0, p.delta, p.omega],
         [p.omega_prime, p.omega, 2 * p.delta]],
        dtype=complex,
    )
    if with_decay:
        h -= 0.5j * np.diag([p.gamma_prime, p.gamma, p.gamma_pp])
    return h


@dataclass(frozen=True)
class ReducedModel:
    """Quadratic effective model in the mode vector (a, b).

    ``H_eff = sum_ij h[i, j] x_i^+ x_j`` and each jump operator is
    ``sum_j c[j] x_j`` with ``x = (a, b)``.
    """

    h: np.ndarray
    jumps: tuple[np.ndarray, np.ndarray]


def reduce_excited_manifold(
    params: PhysicalParams, inverse: Literal["exact", "alpha"] = "exact"
) -> ReducedModel:
    """Effective-operator reduction computed numerically.

    ``H_eff = -1/2 V_- [H_NH^-1 + (H_NH^-1)^+] V_+`` and
    ``L_eff = L H_NH^-1 V_+`` for the two ground-state decay channels, with
    the inverse taken numerically (``"exact"``) or from the closed-form
    alpha matrix (``"alpha"``). Collective enhancement by ``n`` atoms is
    included. Independent of :func:`effective_coefficients` apart from the
    alpha matrix in ``"alpha"`` mode.
    """
    p = params
    if inverse == "exact":
        inv = np.linalg.inv(excited_manifold_hamiltonian(p))
    elif inverse == "alpha":
        inv = alpha_matrix(effective_coefficients(p))
    else:
        raise ValueError(f"unknown inverse mode {inverse!r}")
    # V_+ = g a s20 + g' b s10: column j maps field operator x_j into excited level
    v_plus = np.array([[0.0, p.g_prime], [p.g, 0.0], [0.0, 0.0]], dtype=complex)
    h = -0.5 * p.n_atoms * v_plus.conj().T @ (inv + inv.conj().T) @ v_plus
    rows = inv @ v_plus
    l1 = math.sqrt(p.n_atoms * p.gamma_prime) * rows[0]
    l2 = math.sqrt(p.n_atoms * p.gamma) * rows[1]
    return ReducedModel(h=h, jumps=(l1, l2))


# --------------------------------------------------------------------------
# full-model builders


def default_space(params: PhysicalParams, excitation_sector: int | None = None) -> HilbertSpace:
    return HilbertSpace.cavity_atoms(params.n_atoms, params.cutoff, excitation_sector)


def _check_full_space(params: PhysicalParams, space: HilbertSpace) -> None:
    kinds = [f.kind for f in space.factors]
    if kinds[:2] != ["mode", "mode"] or any(k != "atom" for k in kinds[2:]):
        raise DimensionError("space must be two boson modes followed by diamond atoms")
    if len(kinds) - 2 != params.n_atoms:
        raise DimensionError(f"space holds {len(kinds) - 2} atoms, params say {params.n_atoms}")


def _build_on_full(params: PhysicalParams, space: HilbertSpace, builder) -> Operator:
    _check_full_space(params, space)
    op = builder(params, space.full())
    if space.is_restricted:
        return op.restrict(space.excitation_sector)
    return op


def _mode_ops(space: HilbertSpace):
    ca = space.factors[0].dim - 1
    cb = space.factors[1].dim - 1
    return embed(destroy(ca), 0, space), embed(destroy(cb), 1, space)


def _hamiltonian(params: PhysicalParams, space: HilbertSpace, level_energies) -> Operator:
    p = params
    a, b = _mode_ops(space)
    h = zero(space)
    for k in range(2, len(space.factors)):
        diag = np.diag(level_energies)
        h = h + embed(diag, k, space)
        drive = p.omega * flip(2, 3) + p.omega_prime * flip(1, 3)
        drive = drive + drive.conj().T
        h = h + embed(drive, k, space)
        s02 = embed(flip(0, 2), k, space)
        s01 = embed(flip(0, 1), k, space)
        coupling = p.g * (a.dag() @ s02) + p.g_prime * (b.dag() @ s01)
        h = h + coupling + coupling.dag()
    return h


def build_full_hamiltonian(params: PhysicalParams, space: HilbertSpace | None = None) -> Operator:
    """Hermitian n-atom Hamiltonian in the frame rotating with the mode/laser frequencies."""
    space = space or default_space(params)
    d = params.delta
    return _build_on_full(
        params, space, lambda p, s: _hamiltonian(p, s, [0.0, d, d, 2 * d])
    )


def build_lindblads(params: PhysicalParams, space: HilbertSpace | None = None) -> list[Operator]:
    """Jump operators ``[L1, L2, L3, L4]`` for each atom, atom-major order.

    ``L1`` and ``L2`` lower the excitation number, so the space must not be
    restricted to a single sector.
    """
    space = space or default_space(params)
    _check_full_space(params, space)
    if space.is_restricted:
        raise SectorError("jump operators connect different excitation sectors; use the full space")
    p = params
    out = []
    for k in range(2, len(space.factors)):
        out.append(math.sqrt(p.gamma_prime) * embed(flip(0, 1), k, space))
        out.append(math.sqrt(p.gamma) * embed(flip(0, 2), k, space))
        out.append(math.sqrt(p.gamma3) * embed(flip(2, 3), k, space))
        out.append(math.sqrt(p.gamma3_prime) * embed(flip(1, 3), k, space))
    return out


def build_nonhermitian(params: PhysicalParams, space: HilbertSpace | None = None) -> Operator:
    """No-jump generator ``H - (i/2) sum_j L_j^+ L_j``."""
    space = space or default_space(params)

    def builder(p, s):
        h = build_full_hamiltonian(p, s)
        decay = zero(s)
        for op in build_lindblads(p, s):
            decay = decay + op.dag() @ op
        return h - 0.5j * decay

    return _build_on_full(params, space, builder)


def total_excitation(space: HilbertSpace) -> Operator:
    from .core import excitation_operator

    return excitation_operator(space)


# --------------------------------------------------------------------------
# effective-model builders


@dataclass(frozen=True)
class FrameChoice:
    """Rotating frame of the effective two-mode Hamiltonian.

    ``lab``: the frame of the full model (keeps ``delta0``).
    ``rotating``: rotating at ``delta0`` (drops it).
    ``generic``: common mode shift ``delta_x`` in place of ``delta0``.
    """

    variant: Literal["lab", "rotating", "generic"] = "rotating"
    delta_x: float | None = None

    def __post_init__(self):
        if self.variant not in ("lab", "rotating", "generic"):
            raise ValueError(f"unknown frame variant {self.variant!r}")
        if self.variant == "generic":
            if self.delta_x is None or not math.isfinite(self.delta_x):
                raise ValueError("generic frame needs a finite delta_x")
        elif self.delta_x is not None:
            raise ValueError(f"delta_x is only meaningful for the generic frame, not {self.variant!r}")

    def common_shift(self, coeffs: EffectiveCoefficients) -> float:
        if self.variant == "lab":
            return coeffs.delta0
        if self.variant == "rotating":
            return 0.0
        return float(self.delta_x)


def _check_two_mode(space: HilbertSpace) -> None:
    if len(space.factors) != 2 or any(f.kind != "mode" for f in space.factors):
        raise DimensionError("effective operators act on a two-mode space (a, b) only")


def _two_mode_ops(space: HilbertSpace):
    _check_two_mode(space)
    full = space.full()
    a = embed(destroy(space.factors[0].dim - 1), 0, full)
    b = embed(destroy(space.factors[1].dim - 1), 1, full)
    return a, b


def _finish(op: Operator, space: HilbertSpace) -> Operator:
    return op.restrict(space.excitation_sector) if space.is_restricted else op


def build_effective_hamiltonian(
    coeffs: EffectiveCoefficients, space: HilbertSpace, frame: FrameChoice = FrameChoice()
) -> Operator:
    """``shift (a^+a + b^+b) + d1 b^+b + d2 (a^+b + b^+a)`` with the frame's common shift."""
    a, b = _two_mode_ops(space)
    na, nb = a.dag() @ a, b.dag() @ b
    h = frame.common_shift(coeffs) * (na + nb) + coeffs.delta1 * nb
    h = h + coeffs.delta2 * (a.dag() @ b + b.dag() @ a)
    return _finish(h, space)


def superposition_mode(coeffs: EffectiveCoefficients, space: HilbertSpace) -> Operator:
    """``C = sqrt(1 - eps) a - sgn(d2) sqrt(eps) b`` diagonalising the mode coupling.

    With this ``C``, the rotating-frame Hamiltonian equals
    ``-delta_r C^+C + delta_r (1 - eps)(a^+a + b^+b)``.
    """
    if space.is_restricted:
        raise SectorError("C changes the excitation number; use an unrestricted two-mode space")
    a, b = _two_mode_ops(space)
    eps = coeffs.epsilon
    sign = 1.0 if coeffs.delta2 >= 0 else -1.0
    return math.sqrt(1 - eps) * a - sign * math.sqrt(eps) * b


def build_effective_lindblads(
    params: PhysicalParams,
    coeffs: EffectiveCoefficients | None,
    space: HilbertSpace,
    mode: Literal["open", "closed"] = "open",
) -> list[Operator]:
    """The two effective jump operators (|1> and |2> decay channels)."""
    if space.is_restricted:
        raise SectorError("jump operators lower the photon number; use an unrestricted space")
    a, b = _two_mode_ops(space)
    p = params
    n = p.n_atoms
    if mode == "open":
        if coeffs is None:
            coeffs = effective_coefficients(p)
        a1, a2, a3 = coeffs.alpha[:3]
        l1 = math.sqrt(n * p.gamma_prime) * (a3 * p.g * a + a1 * p.g_prime * b)
        l2 = math.sqrt(n * p.gamma) * (a2 * p.g * a + a3 * p.g_prime * b)
    elif mode == "closed":
        if p.delta == 0:
            raise SingularityError("closed-mode operators need a non-zero detuning")
        l1 = (math.sqrt(n * p.gamma_prime) * p.g_prime / complex(p.delta, -p.gamma_prime / 2)) * b
        l2 = (math.sqrt(n * p.gamma) * p.g / complex(p.delta, -p.gamma / 2)) * a
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return [l1, l2]


def build_closed_hamiltonian(params: PhysicalParams, space: HilbertSpace) -> Operator:
    """Lasers-off effective Hamiltonian: two uncoupled, Stark-shifted modes."""
    p = params
    if p.delta == 0:
        raise SingularityError("closed-mode Hamiltonian needs a non-zero detuning")
    a, b = _two_mode_ops(space)
    sa = -p.n_atoms * p.g**2 * p.delta / (p.delta**2 + p.gamma**2 / 4)
    sb = -p.n_atoms * p.g_prime**2 * p.delta / (p.delta**2 + p.gamma_prime**2 / 4)
    return _finish(sa * (a.dag() @ a) + sb * (b.dag() @ b), space)


def build_effective_nonhermitian(coeffs: EffectiveCoefficients, space: HilbertSpace) -> Operator:
    """``-(2 d2 + i gamma_eff / 2) C^+C``."""
    full = space.full()
    c = superposition_mode(coeffs, full)
    ctc = c.dag() @ c
    h = complex(-2 * coeffs.delta2, -0.5 * coeffs.gamma_eff) * ctc
    return _finish(h, space)


# --------------------------------------------------------------------------
# dressed states


@dataclass(frozen=True)
class DressedBasis:
    """Eigenbasis of the laser-dressed excited manifold (|1>,|2>,|3>).

    ``vectors`` columns are ``|mu>``, ``|phi>``, ``|psi>`` with energies
    ``Delta``, ``(3 Delta - Omega_R)/2``, ``(3 Delta + Omega_R)/2``. The
    overall sign of ``|phi>`` is chosen so that the couplings of the
    re-expressed Hamiltonian carry the signs of
    :func:`build_dressed_hamiltonian`.
    """

    omega_r: float
    energies: tuple[float, float, float]
    norms: tuple[float, float, float]
    vectors: np.ndarray = field(repr=False)

    def unitary(self) -> np.ndarray:
        """4x4 change of basis, columns ``|0>, |mu>, |phi>, |psi>`` in bare levels."""
        u = np.zeros((4, 4), dtype=complex)
        u[0, 0] = 1.0
        u[1:, 1:] = self.vectors
        return u


def dressed_basis(params: PhysicalParams) -> DressedBasis:
    p = params
    w, wp, d = p.omega, p.omega_prime, p.delta
    if w == 0 and wp == 0:
        raise SingularityError("dressed state |mu> is undefined for Omega = Omega' = 0")
    omega_r = _omega_r(p)
    n_mu = 1.0 / math.sqrt(w**2 + wp**2)
    n_phi = 1.0 / math.sqrt(2 * omega_r * (omega_r - d))
    n_psi = 1.0 / math.sqrt(2 * omega_r * (omega_r + d))
    mu = n_mu * np.array([-w, wp, 0.0])
    phi = -n_phi * np.array([2 * wp, 2 * w, d - omega_r])
    psi = n_psi * np.array([2 * wp, 2 * w, d + omega_r])
    return DressedBasis(
        omega_r=omega_r,
        energies=(d, (3 * d - omega_r) / 2, (3 * d + omega_r) / 2),
        norms=(n_mu, n_phi, n_psi),
        vectors=np.column_stack([mu, phi, psi]).astype(complex),
    )


def drive_hamiltonian(params: PhysicalParams) -> np.ndarray:
    """Single-atom laser-dressed Hamiltonian on (|1>,|2>,|3>)."""
    return excited_manifold_hamiltonian(params, with_decay=False)


def build_dressed_hamiltonian(params: PhysicalParams, cutoff: int | None = None) -> Operator:
    """Single-atom Hamiltonian written directly in the dressed basis.

    The atomic factor's levels are ``|0>, |mu>, |phi>, |psi>``; conjugating
    the bare single-atom Hamiltonian with :meth:`DressedBasis.unitary`
    reproduces this operator.
    """
    p = params.with_(n_atoms=1, cutoff=params.cutoff if cutoff is None else cutoff)
    db = dressed_basis(p)
    n_mu, n_phi, n_psi = db.norms
    space = default_space(p)
    a, b = _mode_ops(space)
    w, wp = p.omega, p.omega_prime
    h = embed(np.diag([0.0, *db.energies]), 2, space)
    # coupling amplitudes of a^+ s0x and b^+ s0x for x = mu, phi, psi
    ca = (n_mu * p.g * wp, -2 * n_phi * p.g * w, 2 * n_psi * p.g * w)
    cb = (-n_mu * p.g_prime * w, -2 * n_phi * p.g_prime * wp, 2 * n_psi * p.g_prime * wp)
    for x in range(3):
        s0x = embed(flip(0, x + 1), 2, space)
        term = ca[x] * (a.dag() @ s0x) + cb[x] * (b.dag() @ s0x)
        h = h + term + term.dag()
    return h


# --------------------------------------------------------------------------
# Omega' tuning and validity


def omega_prime_for_zero_delta1(omega: float, delta: float, g: float, g_prime: float) -> float:
    """Second drive amplitude that makes ``delta1`` vanish."""
    if g == 0:
        raise SingularityError("g must be non-zero")
    radicand = (omega**2 - 2 * delta**2) * g_prime**2 / g**2 + 2 * delta**2
    if radicand < 0:
        raise ValueError(f"no real Omega' gives delta1 = 0 (radicand {radicand:.6g} < 0)")
    return math.sqrt(radicand)


@dataclass(frozen=True)
class Margin:
    name: str
    value: float
    status: str
    threshold: float


@dataclass(frozen=True)
class ValidityReport:
    margins: tuple[Margin, ...]
    pass_threshold: float
    warn_threshold: float

    @property
    def ok(self) -> bool:
        return all(m.status == "pass" for m in self.margins)

    @property
    def warnings(self) -> list[str]:
        return [
            f"{m.name} margin {m.value:.4g} below pass threshold {m.threshold:g} ({m.status})"
            for m in self.margins
            if m.status != "pass"
        ]


def classify(value: float, pass_threshold: float, warn_threshold: float) -> str:
    if not math.isnan(value) and value >= pass_threshold:
        return "pass"
    if not math.isnan(value) and value >= warn_threshold:
        return "warn"
    return "fail"


def validity_report(
    params: PhysicalParams,
    mean_photons_a: float,
    mean_photons_b: float,
    pass_threshold: float = 10.0,
    warn_threshold: float = 3.0,
) -> ValidityReport:
    """Margins of the adiabatic-elimination conditions.

    Two detuning margins ``|Delta| / (g_min sqrt(n nbar))`` and the dressed-state
    margin ``min(l1, l4) / max(l2, l3, l5, l6)`` (absolute values). Each
    margin passes at ``>= pass_threshold`` and warns at ``>= warn_threshold``.
    """
    p = params
    margins = []
    for label, nbar in (("detuning_a", mean_photons_a), ("detuning_b", mean_photons_b)):
        scale = p.g_min * math.sqrt(p.n_atoms * nbar)
        value = math.inf if scale == 0 else abs(p.delta) / scale
        margins.append(Margin(label, value, classify(value, pass_threshold, warn_threshold), pass_threshold))
    try:
        lam = [abs(x) for x in effective_coefficients(p).lambdas]
        big = max(lam[1], lam[2], lam[4], lam[5])
        value = math.inf if big == 0 else min(lam[0], lam[3]) / big
    except SingularityError:
        value = math.nan
    margins.append(Margin("dressed_states", value, classify(value, pass_threshold, warn_threshold), pass_threshold))
    return ValidityReport(tuple(margins), pass_threshold, warn_threshold)


def single_excitation_block(op: Operator) -> np.ndarray:
    """2x2 matrix of a two-mode operator on span(|1,0>, |0,1>)."""
    space = op.space
    _check_two_mode(space)
    idx = [space.index_of((1, 0)), space.index_of((0, 1))]
    return op.dense()[np.ix_(idx, idx)]


def mode_number_operators(space: HilbertSpace) -> tuple[Operator, Operator]:
    """``a^+a`` and ``b^+b`` on the first two factors (admissible in sector spaces)."""
    return (
        embed(number(space.factors[0].dim - 1), 0, space),
        embed(number(space.factors[1].dim - 1), 1, space),
    )
