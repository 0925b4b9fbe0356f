"""Time evolution and the photon state-mapping experiment.

Two propagation routes are provided: adaptive Runge-Kutta integration of the
Lindblad master equation / no-jump Schrodinger equation, and exact
propagation with matrix exponentials (or an eigen-decomposition when it is
well conditioned). The mapping experiment works sector by sector, since the
no-jump generator conserves the total excitation number.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .core import DensityOperator, HilbertSpace, KetState, Operator, identity
from .errors import DimensionError, EvolutionError, SearchWindowError, SingularityError
from .linalg import matrix_exponential
from .model import (
    EffectiveCoefficients,
    FrameChoice,
    PhysicalParams,
    build_nonhermitian,
    effective_coefficients,
    mode_number_operators,
    validity_report,
)

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
# tighter defaults for density matrices: pure initial states sit on the edge of
# the positive cone and 1e-10 absolute error already shows up as -1e-8 eigenvalues
LINDBLAD_RTOL = 1e-10
LINDBLAD_ATOL = 1e-12


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled trajectory: ``states[i]`` is the state at ``times[i]``."""

    times: np.ndarray
    states: list = field(repr=False)
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("time grid must be a non-empty 1-D array")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "times", t)


def _grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size == 0 or not np.all(np.isfinite(t)):
        raise ValueError("time grid must be finite and non-empty")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def _dense(op) -> np.ndarray:
    if isinstance(op, Operator):
        return op.dense()
    return np.asarray(op, dtype=complex)


def evolve_lindblad(
    hamiltonian: Operator,
    lindblads: Sequence[Operator],
    rho0: DensityOperator,
    times,
    rtol: float = LINDBLAD_RTOL,
    atol: float = LINDBLAD_ATOL,
    e_ops: Mapping[str, Operator] | None = None,
    store_states: bool = True,
) -> EvolutionResult:
    """Integrate ``d rho/dt = -i[H, rho] + sum_j (L rho L^+ - {L^+L, rho}/2)``.

    Uses the DOP853 embedded Runge-Kutta pair of ``scipy.integrate.solve_ivp``
    with dense output sampled at ``times`` (``times[0]`` is the initial time).
    Diagnostics record the largest trace drift, Hermiticity error and the
    smallest eigenvalue seen on the grid.
    """
    t = _grid(times)
    space = rho0.space
    for op in [hamiltonian, *lindblads]:
        if op.space != space:
            raise DimensionError("all operators must share the state's space")
    d = space.total_dim
    h = hamiltonian.dense()
    ls = [op.dense() for op in lindblads]
    heff = h.copy()
    for l in ls:
        heff -= 0.5j * l.conj().T @ l
    heff_dag = heff.conj().T

    def rhs(_, y):
        rho = y.reshape(d, d)
        out = -1j * (heff @ rho - rho @ heff_dag)
        for l in ls:
            out += l @ rho @ l.conj().T
        return out.ravel()

    y0 = np.array(rho0.data, dtype=complex).ravel()
    sol = solve_ivp(rhs, (t[0], t[-1]), y0, method="DOP853", t_eval=t, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise EvolutionError(f"Lindblad integration failed at t={sol.t[-1] if sol.t.size else t[0]:.6g}: {sol.message}")
    ys = sol.y.T
    if not np.all(np.isfinite(ys)):
        raise EvolutionError("Lindblad integration produced non-finite entries")

    tr0 = rho0.trace()
    states, obs = [], {name: np.empty(t.size, dtype=complex) for name in (e_ops or {})}
    drift = herm = 0.0
    min_eig = math.inf
    for i, y in enumerate(ys):
        rho = DensityOperator(space, y.reshape(d, d))
        drift = max(drift, abs(rho.trace() - tr0))
        herm = max(herm, rho.hermiticity_error())
        min_eig = min(min_eig, rho.min_eigenvalue())
        for name, op in (e_ops or {}).items():
            obs[name][i] = rho.expect(op)
        if store_states:
            states.append(rho)
    obs = {k: (v.real if np.allclose(v.imag, 0, atol=1e-10) else v) for k, v in obs.items()}
    diag = {"trace_drift": drift, "hermiticity_error": herm, "min_eigenvalue": min_eig,
            "n_rhs_evals": float(sol.nfev)}
    return EvolutionResult(t, states, obs, diag)


def no_jump_generator(
    hamiltonian: Operator, lindblads: Sequence[Operator], sector: int | None = None
) -> Operator:
    """``H - (i/2) sum_j L_j^+ L_j``, optionally restricted to one excitation sector."""
    out = hamiltonian
    for l in lindblads:
        out = out - 0.5j * (l.dag() @ l)
    return out.restrict(sector) if sector is not None else out


class Propagator:
    """Exact propagation ``psi(t) = exp(-i Ht t) psi0`` for a fixed dense generator.

    When the eigenvector matrix of ``Ht`` is well conditioned the propagation
    uses the eigen-decomposition (fast for many time points); otherwise every
    time point is evaluated with :func:`matrix_exponential`.
    """

    def __init__(self, generator, cond_limit: float = 1e8):
        self.h = _dense(generator)
        if self.h.ndim != 2 or self.h.shape[0] != self.h.shape[1]:
            raise DimensionError("generator must be square")
        self.method = "expm"
        try:
            lam, v = np.linalg.eig(self.h)
            cond = np.linalg.cond(v)
        except np.linalg.LinAlgError:
            cond = math.inf
        if np.isfinite(cond) and cond < cond_limit:
            self.method = "eig"
            self.lam, self.v, self.vinv = lam, v, np.linalg.inv(v)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.lam if self.method == "eig" else np.linalg.eigvals(self.h)

    def states(self, psi0: np.ndarray, times) -> np.ndarray:
        """Array of shape ``(len(times), dim)``."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        psi0 = np.asarray(psi0, dtype=complex)
        if self.method == "eig":
            coef = self.vinv @ psi0
            out = np.empty((t.size, psi0.size), dtype=complex)
            chunk = max(1, 2_000_000 // max(psi0.size, 1))
            for s in range(0, t.size, chunk):
                ph = np.exp(-1j * np.outer(t[s:s + chunk], self.lam))
                out[s:s + chunk] = (ph * coef) @ self.v.T
            return out
        return np.array([matrix_exponential(-1j * self.h * tk) @ psi0 for tk in t])

    def exact(self, psi0: np.ndarray, t: float) -> np.ndarray:
        return matrix_exponential(-1j * self.h * t) @ np.asarray(psi0, dtype=complex)


def evolve_nonhermitian(
    generator: Operator,
    psi0: KetState,
    times,
    method: str = "rk",
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    e_ops: Mapping[str, Operator] | None = None,
    store_states: bool = True,
) -> EvolutionResult:
    """Solve ``d psi/dt = -i Ht psi`` from ``times[0]``.

    ``method="rk"`` integrates adaptively (DOP853, sparse generators stay
    sparse); ``method="expm"`` propagates exactly with one matrix exponential
    per distinct step. Observables are conditional expectations on the
    normalised state; ``norm_sq`` is the no-jump probability.
    """
    t = _grid(times)
    if generator.space != psi0.space:
        raise DimensionError("generator and ket live on different spaces")
    if not psi0.normalized and abs(psi0.norm() - 1.0) > 1e-12:
        raise ValueError("initial ket must be normalized")
    y0 = np.array(psi0.amplitudes, dtype=complex)

    if method == "rk":
        data = generator.data

        def rhs(_, y):
            return -1j * (data @ y)

        sol = solve_ivp(rhs, (t[0], t[-1]), y0, method="DOP853", t_eval=t, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise EvolutionError(f"no-jump integration failed: {sol.message}")
        ys = sol.y.T
    elif method == "expm":
        h = generator.dense()
        ys = np.empty((t.size, y0.size), dtype=complex)
        ys[0] = y0
        cache: dict[float, np.ndarray] = {}
        for i in range(1, t.size):
            dt = t[i] - t[i - 1]
            key = round(dt, 15 - int(math.floor(math.log10(abs(dt)))))
            if key not in cache:
                cache[key] = matrix_exponential(-1j * h * dt)
            ys[i] = cache[key] @ ys[i - 1]
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(ys)):
        raise EvolutionError("no-jump evolution produced non-finite amplitudes")

    norm_sq = np.einsum("ij,ij->i", ys.conj(), ys).real
    obs: dict[str, np.ndarray] = {"norm_sq": norm_sq}
    for name, op in (e_ops or {}).items():
        vals = np.einsum("ij,ij->i", ys.conj(), (op.data @ ys.T).T) / norm_sq
        obs[name] = vals.real if np.allclose(vals.imag, 0, atol=1e-10 * max(1.0, np.abs(vals).max())) else vals
    increase = float(np.max(np.diff(norm_sq), initial=0.0))
    states = [KetState(psi0.space, y, normalized=False) for y in ys] if store_states else []
    return EvolutionResult(t, states, obs, {"max_norm_increase": increase})


# --------------------------------------------------------------------------
# closed forms


def mean_photon_b_analytic(n_ph: float, delta1: float, delta2: float, t):
    """``n_ph (1 - d1^2/dr^2) sin^2(dr t / 2)``."""
    if delta1 == 0 and delta2 == 0:
        raise SingularityError("delta1 and delta2 cannot both vanish")
    dr = math.sqrt(4 * delta2**2 + delta1**2)
    return n_ph * (1 - delta1**2 / dr**2) * np.sin(dr * np.asarray(t) / 2) ** 2


def t_pi_analytic(coeffs: EffectiveCoefficients) -> float:
    if coeffs.delta_r == 0:
        raise SingularityError("delta_r = 0: the modes do not exchange photons")
    return math.pi / coeffs.delta_r


def mapping_phase(n_ph, delta2: float, delta_x: float):
    """Phase acquired by ``|n_ph>`` during the transfer in a frame with common shift ``delta_x``."""
    if delta2 == 0:
        raise SingularityError("delta2 must be non-zero")
    return -np.asarray(n_ph) * math.pi * (delta2 + delta_x) / (2 * delta2)


# --------------------------------------------------------------------------
# t_pi search


@dataclass(frozen=True)
class TPiSearch:
    t_pi: float
    population: float
    window: tuple[float, float]
    resolution: float
    local_maxima: tuple[tuple[float, float], ...]


def _as_list(x):
    if isinstance(x, (list, tuple)):
        return list(x)
    return [x]


def _ket_array(x) -> np.ndarray:
    return np.asarray(x.amplitudes if isinstance(x, KetState) else x, dtype=complex)


def find_t_pi_numeric(
    generators,
    psi0s,
    targets,
    window: tuple[float, float],
    resolution: float | None = None,
    max_refine: int = 64,
) -> TPiSearch:
    """Global maximum of the conditional target population over a time window.

    ``generators``, ``psi0s`` and ``targets`` are matching per-sector lists
    (or single items). The population is
    ``|sum_s <target_s|psi_s(t)>|^2 / sum_s ||psi_s(t)||^2`` with the targets
    jointly normalised. A uniform scan at ``resolution`` (default: the
    smaller of 1/400 of the window and 1/16 of the fastest oscillation
    period) is followed by bounded Brent refinement of the best
    ``max_refine`` local maxima; the best refined point wins.

    Raises :class:`SearchWindowError` when the maximum sits at a window edge.
    """
    gens, psis, tgts = _as_list(generators), _as_list(psi0s), _as_list(targets)
    if not len(gens) == len(psis) == len(tgts):
        raise DimensionError("need one initial ket and one target per generator")
    lo, hi = map(float, window)
    if not 0 <= lo < hi:
        raise ValueError(f"invalid search window {window}")
    props = [Propagator(g) for g in gens]
    psis = [_ket_array(p) for p in psis]
    tgts = [_ket_array(x) for x in tgts]
    tnorm = math.sqrt(sum(np.vdot(x, x).real for x in tgts))
    if tnorm == 0:
        raise ValueError("target has zero norm")
    tgts = [x / tnorm for x in tgts]
    if resolution is None:
        spread = max(np.ptp(p.eigenvalues.real) for p in props)
        resolution = (hi - lo) / 400
        if spread > 0:
            resolution = min(resolution, 2 * math.pi / spread / 16)
    npts = int(math.ceil((hi - lo) / resolution)) + 1
    grid = np.linspace(lo, hi, npts)

    def population(ts):
        ts = np.atleast_1d(ts)
        ov = np.zeros(ts.size, dtype=complex)
        nrm = np.zeros(ts.size)
        for p, psi, tg in zip(props, psis, tgts):
            ys = p.states(psi, ts)
            ov += ys @ tg.conj()
            nrm += np.einsum("ij,ij->i", ys.conj(), ys).real
        return np.abs(ov) ** 2 / nrm

    pop = population(grid)
    interior = np.flatnonzero((pop[1:-1] >= pop[:-2]) & (pop[1:-1] >= pop[2:])) + 1
    best_edge = max(pop[0], pop[-1])
    order = interior[np.argsort(pop[interior])[::-1]][:max_refine]
    maxima = []
    for i in order:
        res = minimize_scalar(
            lambda s: -population(s)[0], bounds=(grid[i - 1], grid[i + 1]), method="bounded",
            options={"xatol": 1e-10 * max(hi, 1e-300)},
        )
        t_best, p_best = float(res.x), float(-res.fun)
        if pop[i] > p_best:
            t_best, p_best = float(grid[i]), float(pop[i])
        maxima.append((t_best, p_best))
    if not maxima or best_edge > max(m[1] for m in maxima):
        raise SearchWindowError(
            f"population maximum lies on the edge of the window [{lo:.6g}, {hi:.6g}]; widen it"
        )
    maxima.sort()
    t_pi, p_pi = max(maxima, key=lambda m: m[1])
    return TPiSearch(t_pi, p_pi, (lo, hi), float(grid[1] - grid[0]), tuple(maxima))


# --------------------------------------------------------------------------
# state mapping


@dataclass(frozen=True)
class MappingReport:
    t_pi: float
    fidelity: float
    success_probability: float
    t_pi_analytic: float
    fidelity_unconditional: float
    frame: FrameChoice
    times: np.ndarray = field(repr=False)
    n_b: np.ndarray = field(repr=False)
    n_b_analytic: np.ndarray = field(repr=False)
    norm_sq: np.ndarray = field(repr=False)
    local_maxima: tuple[tuple[float, float], ...] = field(repr=False)
    warnings: tuple[str, ...] = ()


def _frame_shift(frame: FrameChoice, coeffs: EffectiveCoefficients) -> float:
    return frame.common_shift(coeffs)


def _sector_problem(params: PhysicalParams, k: int):
    """No-jump generator on sector ``k`` and the kets ``|k,0;0..0>``, ``|0,k;0..0>``."""
    space = HilbertSpace.cavity_atoms(params.n_atoms, max(params.cutoff, k), k)
    gen = build_nonhermitian(params.with_(cutoff=max(params.cutoff, k)), space)
    ground = (0,) * params.n_atoms
    start = KetState.basis(space, (k, 0) + ground)
    end = KetState.basis(space, (0, k) + ground)
    return space, gen, start, end


def state_mapping_report(
    params: PhysicalParams,
    amplitudes: Sequence[complex],
    frame: FrameChoice = FrameChoice("lab"),
    window: tuple[float, float] = (0.8, 1.2),
    resolution: float | None = None,
    curve_points: int = 401,
    curve_span: float = 2.0,
    pass_threshold: float = 10.0,
    warn_threshold: float = 3.0,
) -> MappingReport:
    """Map ``sum_k c_k |k>_A`` onto mode ``b`` and score the result.

    The full no-jump generator is evolved in each excitation sector ``k`` with
    ``c_k != 0``. ``t_pi`` maximises the conditional fidelity with the target
    ``|0>_A sum_k c_k exp(i phi_pi(k)) |k>_B`` over ``window`` (in units of
    the analytic ``t_pi``), where the phase uses the frame's common shift and
    the simulated state is carried into the same frame.
    ``success_probability`` is the total norm squared at ``t_pi``.
    ``window`` is given relative to the analytic pulse time.
    """
    c = np.asarray(amplitudes, dtype=complex)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("amplitudes must be a non-empty vector")
    if abs(np.vdot(c, c).real - 1.0) > 1e-12:
        raise ValueError("input amplitudes must be normalized")
    kmax = int(np.max(np.flatnonzero(c)))
    if params.cutoff < kmax:
        raise DimensionError(f"Fock cutoff {params.cutoff} is below the largest input photon number {kmax}")
    coeffs = effective_coefficients(params)
    uncoupled = coeffs.delta2 == 0
    if uncoupled:
        # no exchange between the modes: curves only, over a span set by the Stark shift or g
        rate = coeffs.delta_r if coeffs.delta_r > 0 else max(params.g, params.g_prime, abs(params.delta))
        if rate == 0:
            raise SingularityError("all coupling rates vanish; no time scale for the transfer curve")
        tpa = math.pi / rate
        shift = 0.0
    else:
        tpa = t_pi_analytic(coeffs)
        shift = _frame_shift(frame, coeffs)

    sectors = [k for k in range(c.size) if c[k] != 0]
    gens, psis, tgts, nbs = [], [], [], []
    for k in sectors:
        space, gen, start, end = _sector_problem(params, k)
        phase = 1.0 if uncoupled else np.exp(1j * mapping_phase(k, coeffs.delta2, shift))
        if not uncoupled and shift != coeffs.delta0:
            # the full model runs in the frame of the bare modes; move sector k into the chosen one
            gen = gen - k * (coeffs.delta0 - shift) * identity(space)
        gens.append(gen)
        psis.append(c[k] * start.amplitudes)
        tgts.append(c[k] * phase * end.amplitudes)
        nbs.append(mode_number_operators(space)[1].dense())

    notes = []
    if uncoupled:
        t_pi = fidelity = prob = fid_uncond = math.nan
        maxima: tuple = ()
        notes.append("delta2 = 0: the modes are uncoupled and no pi pulse exists")
    else:
        search = find_t_pi_numeric(gens, psis, tgts, (window[0] * tpa, window[1] * tpa), resolution)
        t_pi, maxima = search.t_pi, search.local_maxima
        final = [matrix_exponential(-1j * g.dense() * t_pi) @ p for g, p in zip(gens, psis)]
        prob = float(sum(np.vdot(y, y).real for y in final))
        overlap = sum(np.vdot(tg, y) for tg, y in zip(tgts, final))
        fid_uncond = float(abs(overlap) ** 2)
        fidelity = min(max(fid_uncond / prob, 0.0), 1.0)
        prob = min(max(prob, 0.0), 1.0)

    times = np.linspace(0.0, curve_span * tpa, curve_points)
    norm_sq = np.zeros(times.size)
    nb_num = np.zeros(times.size)
    for g, p, nb in zip(gens, psis, nbs):
        ys = Propagator(g).states(p, times)
        norm_sq += np.einsum("ij,ij->i", ys.conj(), ys).real
        nb_num += np.einsum("ij,ij->i", ys.conj(), ys @ nb.T).real
    nb_num /= norm_sq
    nbar = float(np.sum(np.abs(c) ** 2 * np.arange(c.size)))
    if coeffs.delta1 == 0 and coeffs.delta2 == 0:
        nb_an = np.zeros(times.size)
    else:
        nb_an = mean_photon_b_analytic(nbar, coeffs.delta1, coeffs.delta2, times)

    report = validity_report(params, nbar, nbar, pass_threshold, warn_threshold)
    for w in report.warnings:
        log.info("validity: %s", w)
    return MappingReport(
        t_pi=t_pi,
        fidelity=float(fidelity),
        success_probability=float(prob),
        t_pi_analytic=math.nan if uncoupled else tpa,
        fidelity_unconditional=fid_uncond,
        frame=frame,
        times=times,
        n_b=nb_num,
        n_b_analytic=nb_an,
        norm_sq=norm_sq,
        local_maxima=maxima,
        warnings=tuple(notes + report.warnings),
    )


def photon_transfer(
    params: PhysicalParams, n_ph: int, times, method: str = "expm"
) -> EvolutionResult:
    """No-jump evolution of ``|n_ph>_A |0>_B |0..0>`` in the full model.

    Observables ``n_a``, ``n_b`` (conditional) and ``norm_sq``.
    """
    space, gen, start, _ = _sector_problem(params, n_ph)
    na, nb = mode_number_operators(space)
    return evolve_nonhermitian(gen, start, times, method=method, e_ops={"n_a": na, "n_b": nb})


# --------------------------------------------------------------------------
# t_pi dependence on photon number


@dataclass(frozen=True)
class TPiRow:
    n_ph: int
    t_pi: float
    deviation_percent: float
    population: float


def tpi_deviation_scan(
    params: PhysicalParams,
    n_ph_values: Sequence[int],
    window: tuple[float, float] = (0.8, 1.2),
    resolution: float | None = None,
) -> list[TPiRow]:
    """Numerical ``t_pi(n_ph)`` for Fock inputs and its deviation from ``t_pi(1)`` in percent.

    The reference is ``t_pi`` of the smallest ``n_ph`` in the list (normally 1).
    """
    values = sorted(set(int(v) for v in n_ph_values))
    if not values or values[0] < 1:
        raise ValueError("n_ph values must be positive integers")
    tpa = t_pi_analytic(effective_coefficients(params))
    found = []
    for k in values:
        _, gen, start, end = _sector_problem(params, k)
        s = find_t_pi_numeric(gen, start, end, (window[0] * tpa, window[1] * tpa), resolution)
        found.append((k, s.t_pi, s.population))
    ref = found[0][1]
    return [TPiRow(k, t, 100.0 * (t - ref) / ref, p) for k, t, p in found]


def detect_jumps(deviations: Sequence[float], threshold: float = 1.0) -> list[int]:
    """Indices ``i`` where the deviation changes by more than ``threshold`` percentage points
    between entries ``i-1`` and ``i``.
    """
    d = np.asarray(deviations, dtype=float)
    return [int(i) + 1 for i in np.flatnonzero(np.abs(np.diff(d)) > threshold)]
