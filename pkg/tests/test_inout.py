import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid
from scipy.linalg import expm
from scipy.special import gammaln

from conftest import random_stable
from diamond_cavity.core import DensityOperator, HilbertSpace, KetState
from diamond_cavity.errors import DimensionError, SingularityError, UnstableDriftError
from diamond_cavity.inout import (
    LangevinMatrix,
    apply_output_loss,
    choi_matrix,
    drift_matrix,
    extraction_conditions,
    figure_of_merit,
    fom_approx,
    fom_quadrature,
    fom_sylvester,
    langevin_matrix,
    loss_liouvillian,
    output_loss_superoperator,
    single_mode_space,
    temporal_profile,
)
from diamond_cavity.model import PhysicalParams, effective_coefficients


def make_lm(kappa=0.01, eta=1.0, eta_prime=0.1, zeta=0.01, delta2=0.3, delta1=0.0):
    m = drift_matrix(kappa, eta + eta_prime, zeta, zeta, zeta, zeta, delta1, delta2)
    return LangevinMatrix(m, zeta, zeta, zeta, zeta, kappa, eta, eta_prime, delta1, delta2)


def coherent(alpha, cutoff):
    n = np.arange(cutoff + 1)
    amp = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha) - 0.5 * gammaln(n + 1))
    return np.outer(amp, amp.conj())


def test_drift_matrix_layout():
    m = drift_matrix(1.0, 2.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    s = 0.5 * (math.sqrt(0.02) + math.sqrt(0.12)) - 0.6j
    np.testing.assert_allclose(m, [[0.7, s], [s, 1.3 - 0.5j]])


def test_langevin_matrix_rates():
    p = PhysicalParams.from_units_of_g(1.0, 2, 30, 100, 80, 1.5, 2.5, n_atoms=3)
    c = effective_coefficients(p)
    lm = langevin_matrix(c, p, 0.01, 0.5, 0.1)
    a1, a2, a3 = c.alpha[:3]
    assert lm.zeta1 == pytest.approx(3 * 2.5 * a3**2)
    assert lm.theta1 == pytest.approx(3 * 2.5 * a1**2 * 4)
    assert lm.zeta2 == pytest.approx(3 * 1.5 * a2**2)
    assert lm.theta2 == pytest.approx(3 * 1.5 * a3**2 * 4)
    assert lm.eta_tot == pytest.approx(0.6)
    assert lm.stable
    with pytest.raises(ValueError):
        langevin_matrix(c, p, -1.0, 0.5, 0.1)


def test_fom_no_coupling_is_zero():
    m = np.diag([1.0, 2.0]).astype(complex)
    assert fom_sylvester(m, 1.0) == 0.0
    assert fom_quadrature(m, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert fom_quadrature(m, 0.0) == 0.0


def test_fom_unstable_raises():
    with pytest.raises(UnstableDriftError):
        fom_sylvester(np.array([[0.0, 1.0], [1.0, 1.0]]), 1.0)
    with pytest.raises(UnstableDriftError):
        fom_quadrature(np.array([[-0.1, 0.0], [0.0, 1.0]]), 1.0)
    with pytest.raises(DimensionError):
        fom_sylvester(np.array([[1.0]]), 1.0)


def test_fom_lossless_limit_approaches_one():
    # only the output coupler damps mode b: every photon leaves through it
    for d2 in (0.1, 1.0, 10.0):
        m = drift_matrix(0.0, 1.0, 0, 0, 0, 0, 0.0, d2)
        assert fom_sylvester(m, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_fom_sylvester_equals_quadrature_random(rng):
    for _ in range(100):
        m = random_stable(rng, scale=rng.uniform(0.1, 10))
        eta = rng.uniform(0, 2)
        assert abs(fom_sylvester(m, eta) - fom_quadrature(m, eta)) <= 1e-8


def test_fom_generic_dimension(rng):
    m = random_stable(rng, d=3)
    ref = quad(lambda t: abs(expm(-m * t)[0, 2]) ** 2, 0, np.inf, limit=500)[0]
    assert fom_sylvester(m, 1.0, 0, 2) == pytest.approx(ref, abs=1e-8)
    assert fom_quadrature(m, 1.0, 0, 2) == pytest.approx(ref, abs=1e-8)


def test_fom_in_unit_interval_for_physical_rates(rng):
    for _ in range(50):
        lm = make_lm(kappa=rng.uniform(0, 0.5), eta=rng.uniform(0, 2), eta_prime=rng.uniform(0, 1),
                     zeta=rng.uniform(0, 0.2), delta2=rng.uniform(0.01, 3), delta1=rng.uniform(-1, 1))
        if lm.stable:
            assert -1e-12 <= fom_sylvester(lm.m, lm.eta) <= 1 + 1e-12


def test_fom_monotone_in_eta():
    values = [fom_sylvester(make_lm(eta=eta).m, eta) for eta in np.linspace(0.05, 1.0, 20)]
    assert np.all(np.diff(values) > 0)


def test_fom_falls_when_extraction_freezes_exchange():
    # eta_tot >> delta2 slows the a-b exchange to 4 delta2^2 / eta_tot, so losses of a win
    values = [fom_sylvester(make_lm(eta=eta).m, eta) for eta in (2.0, 20.0, 200.0)]
    assert values[0] > values[1] > values[2]


def test_fom_approx_improves_with_strong_extraction():
    gaps = []
    for eta in (0.6, 2, 6, 20):
        lm = make_lm(kappa=0.001, eta=eta, eta_prime=0.0, zeta=0.0005, delta2=0.2)
        r = figure_of_merit(lm)
        gaps.append(r.approx_delta)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    with pytest.raises(SingularityError):
        fom_approx(make_lm(delta2=0.0))


def test_figure_of_merit_bundle():
    r = figure_of_merit(make_lm())
    assert r.method_delta <= 1e-8
    assert r.profile_norm > 0


# --------------------------------------------------------------------------
# temporal profile


def test_temporal_profile_normalised():
    lm = make_lm()
    a = lm.abscissa
    tau = np.linspace(0, 60 / a, 20001)
    prof = temporal_profile(lm.m, tau)
    assert prof.u[0] == 0
    integral = trapezoid(np.abs(prof.u) ** 2, tau)
    assert integral == pytest.approx(1.0, abs=1e-6)
    ref = quad(lambda t: abs(temporal_profile(lm.m, [t]).u[0]) ** 2, 0, np.inf, limit=400, epsabs=1e-13)[0]
    assert ref == pytest.approx(1.0, abs=1e-8)
    # envelope bounded by c exp(-a tau)
    env = np.abs(prof.u) * np.exp(a * tau)
    assert env[-1] <= 10 * env.max()
    with pytest.raises(SingularityError):
        temporal_profile(np.diag([1.0, 2.0]), tau)


# --------------------------------------------------------------------------
# output loss


def test_loss_liouvillian_trace_preserving():
    l = loss_liouvillian(4)
    eye = np.eye(5).reshape(-1)
    # trace functional annihilates L
    np.testing.assert_allclose(eye @ l, 0, atol=1e-14)


def test_output_loss_identity_at_unit_fom():
    s = single_mode_space(3)
    rho = KetState(s, np.array([0.6, 0.8j, 0, 0])).to_density()
    out = apply_output_loss(rho, 1.0)
    np.testing.assert_allclose(out.data, rho.data, atol=1e-15)


def test_output_loss_fock_one():
    for f in (0.0, 0.3, 0.92):
        out = apply_output_loss(np.diag([0, 1.0, 0, 0]).astype(complex), f)
        e = math.exp(-(1 - f))
        np.testing.assert_allclose(out.data, np.diag([1 - e, e, 0, 0]), atol=1e-6)
        assert abs(out.trace() - 1) < 1e-8


def test_output_loss_coherent_state():
    alpha, cutoff, f = 1.2 + 0.5j, 40, 0.7
    out = apply_output_loss(coherent(alpha, cutoff), f)
    ref = coherent(alpha * math.exp(-(1 - f) / 2), cutoff)
    ev = np.linalg.eigvalsh(out.data - ref)
    assert 0.5 * np.abs(ev).sum() < 1e-6


def test_output_loss_cptp():
    for f in (0.0, 0.5, 0.97):
        s = output_loss_superoperator(5, f)
        choi = choi_matrix(s)
        assert np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min() >= -1e-8
    with pytest.raises(ValueError):
        output_loss_superoperator(3, 1.5)


def test_output_loss_cutoff_check():
    with pytest.raises(DimensionError):
        apply_output_loss(np.diag([0, 0, 1.0]).astype(complex), 0.5)
    with pytest.raises(DimensionError):
        apply_output_loss(DensityOperator(HilbertSpace.two_modes(1), np.eye(4) / 4), 0.5)


def test_extraction_conditions():
    conds = extraction_conditions(make_lm(eta=10.0, delta2=0.3, zeta=1e-4, kappa=1e-4),
                                  PhysicalParams(g=1, g_prime=1, delta=10, omega=30, omega_prime=30,
                                                 gamma=1e-3, gamma_prime=1e-3, n_atoms=100))
    assert len(conds) == 6
    by_name = {c.name: c for c in conds}
    assert by_name["eta_tot / delta2"].satisfied
    assert by_name["eta_tot / delta2"].ratio == pytest.approx(10.1 / 0.3)
