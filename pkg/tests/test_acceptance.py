"""Acceptance criteria 1-8.

Each test evaluates every part of one criterion, prints a single
``ACCEPTANCE criterion k: PASS/FAIL`` line and then asserts. Tolerances are
the stated ones; nothing is relaxed here. Companion tests at the bottom
document the analysis behind criteria whose literal form does not hold.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from conftest import random_stable, record
from diamond_cavity.cavity import (
    CavityGeometry,
    derive_system,
    load_atom_preset,
    load_mirror_preset,
)
from diamond_cavity.cli import main as cli_main
from diamond_cavity.core import HilbertSpace, KetState, excitation_operator
from diamond_cavity.dynamics import (
    detect_jumps,
    evolve_lindblad,
    photon_transfer,
    state_mapping_report,
    t_pi_analytic,
    tpi_deviation_scan,
)
from diamond_cavity.inout import (
    apply_output_loss,
    choi_matrix,
    fom_approx,
    fom_quadrature,
    fom_sylvester,
    output_loss_superoperator,
    temporal_profile,
)
from diamond_cavity.model import (
    FrameChoice,
    PhysicalParams,
    build_dressed_hamiltonian,
    build_effective_hamiltonian,
    build_effective_lindblads,
    build_effective_nonhermitian,
    build_full_hamiltonian,
    build_lindblads,
    build_nonhermitian,
    default_space,
    dressed_basis,
    effective_coefficients,
    superposition_mode,
)

TWO_PI = 2 * math.pi
G10 = TWO_PI * 10e6
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


def device(length_mm, t2p_ppm, n_atoms):
    mirrors = load_mirror_preset().with_output(t2p_ppm)
    return derive_system(CavityGeometry(length_mm * 1e-3, mirrors.radius), mirrors, load_atom_preset(),
                         n_atoms, 700, 5)


def mapping_set(n_atoms, delta):
    return PhysicalParams.from_units_of_g(1.0, 1, delta, 5 * delta, 5 * delta, 2, 2, 1, n_atoms=n_atoms, cutoff=3)


# --------------------------------------------------------------------------


def test_criterion_1_coefficients():
    c = effective_coefficients(PhysicalParams.from_units_of_g(G10, 1, 11, 55, 55))
    d0, d2 = c.delta0 / 1e6, c.delta2 / 1e6
    ok = within(d0, -2.74, 0.01) and within(d2, 2.98, 0.01)
    record(1, ok, f"delta0 = {d0:.4f}, delta2 = {d2:.4f} rad/us (targets -2.74, +2.98, 1%)")
    assert ok


def test_criterion_2_photon_transfer_curve():
    p = PhysicalParams.from_units_of_g(G10, 1, 11, 55, 55, 1, 1, 1, cutoff=2)
    c = effective_coefficients(p)
    assert c.delta1 == 0
    tpi = t_pi_analytic(c)
    t = np.linspace(0, 2 * tpi, 4001)
    res = photon_transfer(p, 2, t)
    nb = res.observables["n_b"]
    analytic = 2 * np.sin(c.delta_r * t / 2) ** 2
    dev = float(np.max(np.abs(nb - analytic)))
    ipk = int(np.argmax(nb))
    t_ref = math.pi / (2 * c.delta2)
    shift = abs(t[ipk] - t_ref) / t_ref
    ok = dev <= 0.15 and nb[ipk] >= 1.8 and shift <= 0.03
    record(2, ok, f"max |<b+b> - analytic| = {dev:.4f} (<= 0.15); peak {nb[ipk]:.3f} (>= 1.8) "
                  f"at {t[ipk] / t_ref:.4f} pi/(2 delta2) (within 3%)")
    assert ok


def test_criterion_3_state_mapping():
    amps = [0.5, 0.5, 0.5, 0.5]
    cases = [
        ("a", mapping_set(4, 35), 0.993, 0.005, 0.885, 0.01, 26.5),
        ("b", mapping_set(1, 35), 0.995, 0.005, 0.886, 0.01, 105.6),
        ("c", mapping_set(1, 17), 0.979, 0.005, 0.795, 0.015, 51.6),
    ]
    ok, parts = True, []
    for label, p, f0, df, p0, dp, t0 in cases:
        rep = state_mapping_report(p, amps, curve_points=21)
        good = (abs(rep.fidelity - f0) <= df and abs(rep.success_probability - p0) <= dp
                and within(rep.t_pi * p.g, t0, 0.02))
        ok &= good
        parts.append(f"({label}) F={rep.fidelity:.4f} P={rep.success_probability:.4f} t_pi={rep.t_pi * p.g:.2f}/g")
    record(3, ok, "; ".join(parts))
    assert ok


def test_criterion_4_analytic_t_pi():
    ta = t_pi_analytic(effective_coefficients(mapping_set(4, 35)))
    tb = t_pi_analytic(effective_coefficients(mapping_set(1, 35)))
    ok = 26.4 * 0.995 <= ta <= 26.5 * 1.005 and 105.5 * 0.995 <= tb <= 105.6 * 1.005
    record(4, ok, f"t_pi(a) = {ta:.3f}/g, t_pi(b) = {tb:.3f}/g (ranges 26.4-26.5 and 105.5-105.6, 0.5%)")
    assert ok


def test_criterion_5_derived_parameters():
    s = device(50, 800, 1000)
    summ = {k: v / TWO_PI / 1e6 for k, v in s.summary().items()}
    expected = dict(g=0.1, g_prime=0.29, delta=72.8, omega=364, omega_prime=989, gamma=1.4, gamma_prime=6.06,
                    gamma_pp=0.6, eta_tot=0.4, kappa=4.7e-3)
    bad = [k for k, v in expected.items() if not within(summ[k], v, 0.05)]
    khz = {k: summ[k] * 1e3 for k in ("zeta1", "theta1", "zeta2", "theta2")}
    listed = dict(zeta1=1.3, theta1=2.3, zeta2=1.2, theta2=2.5)
    bad += [k for k, v in listed.items() if not within(khz[k], v, 0.10)]
    if not within(summ["delta2"], 0.14, 0.05):
        bad.append("delta2")
    if not within(summ["kappa_gamma"], 2.9e-3, 0.05):
        bad.append("kappa_gamma")
    ok = not bad
    record(5, ok, "rates (kHz): " + ", ".join(f"{k}={v:.3f}" for k, v in khz.items())
           + f"; delta2={summ['delta2']:.4f} MHz; kappa_gamma={summ['kappa_gamma'] * 1e3:.3f} kHz"
           + (f"; out of tolerance: {', '.join(bad)}" if bad else ""))
    assert ok


def test_criterion_6_figure_of_merit(tmp_path):
    points = [((99.9, 2000, 1000), 0.97, 0.02), ((50, 800, 1000), 0.92, 0.02), ((50, 800, 8000), 0.97, 0.02)]
    ok, parts = True, []
    for (l, t2p, n), target, tol in points:
        lm = device(l, t2p, n).langevin
        f = fom_sylvester(lm.m, lm.eta)
        good = abs(f - target) <= tol
        ok &= good
        parts.append(f"F({l} mm, {t2p} ppm, n={n}) = {f:.4f}{'' if good else ' [miss]'}")
    fa = fom_approx(device(50, 800, 1000).langevin)
    ok &= abs(fa - 0.95) <= 0.01
    parts.append(f"approx = {fa:.4f}")

    t0 = time.perf_counter()
    code = cli_main(["fom", "--config", str(CONFIGS / "fom_sweep_n1000.json"), "--out", str(tmp_path),
                     "--jobs", str(os.cpu_count() or 1)])
    elapsed = time.perf_counter() - t0
    rows = (tmp_path / "fom_sweep.csv").read_text().strip().splitlines()[1:]
    ok &= code == 0 and len(rows) >= 2500 and elapsed < 60
    parts.append(f"{len(rows)}-point sweep in {elapsed:.1f} s")
    record(6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_oracle_equivalence():
    rng = np.random.default_rng(7)
    worst = 0.0
    for l, t2p, n in ((99.9, 2000, 1000), (50, 800, 1000), (50, 800, 8000)):
        lm = device(l, t2p, n).langevin
        worst = max(worst, abs(fom_sylvester(lm.m, lm.eta) - fom_quadrature(lm.m, lm.eta)))
    for _ in range(100):
        m = random_stable(rng, scale=rng.uniform(0.1, 10))
        eta = rng.uniform(0, 1)
        worst = max(worst, abs(fom_sylvester(m, eta) - fom_quadrature(m, eta)))
    ok = worst <= 1e-8
    record(7, ok, f"max |F_sylvester - F_quadrature| = {worst:.2e} over 3 device points + 100 random matrices")
    assert ok


def test_criterion_8_properties():
    rng = np.random.default_rng(8)
    fails = []

    # Lindblad runs: full and effective models, with decay
    p = PhysicalParams.from_units_of_g(1.0, 1, 35, 175, 175, 2, 2, 1, cutoff=1)
    c = effective_coefficients(p)
    t = np.linspace(0, 2 * t_pi_analytic(c), 21)
    fs, es = default_space(p), HilbertSpace.two_modes(2)
    runs = [
        evolve_lindblad(build_full_hamiltonian(p, fs), build_lindblads(p, fs),
                        KetState.basis(fs, (1, 0, 0)).to_density(), t),
        evolve_lindblad(build_effective_hamiltonian(c, es, FrameChoice("lab")), build_effective_lindblads(p, c, es),
                        KetState.basis(es, (2, 0)).to_density(), t),
    ]
    drift = max(r.diagnostics["trace_drift"] for r in runs)
    mineig = min(r.diagnostics["min_eigenvalue"] for r in runs)
    if drift > 1e-8 or mineig < -1e-8:
        fails.append("lindblad")

    # excitation conservation of every Hamiltonian builder
    worst_comm = 0.0
    for _ in range(10):
        q = PhysicalParams(g=1.0, g_prime=rng.uniform(0.3, 3), delta=rng.uniform(5, 40),
                           omega=rng.uniform(10, 100), omega_prime=rng.uniform(10, 100),
                           gamma=rng.uniform(0, 2), gamma_prime=rng.uniform(0, 2),
                           n_atoms=int(rng.integers(1, 3)), cutoff=2)
        qc = effective_coefficients(q)
        two = HilbertSpace.two_modes(2)
        for h in (build_full_hamiltonian(q), build_nonhermitian(q), build_dressed_hamiltonian(q.with_(n_atoms=1)),
                  build_effective_hamiltonian(qc, two), build_effective_nonhermitian(qc, two)):
            worst_comm = max(worst_comm, h.commutator(excitation_operator(h.space)).norm() / h.norm())
    if worst_comm > 1e-12:
        fails.append("conservation")

    # dressed-basis conjugation
    worst_conj = 0.0
    for _ in range(20):
        d = rng.uniform(5, 40)
        q = PhysicalParams(g=1.0, g_prime=rng.uniform(0.3, 3), delta=d, omega=rng.uniform(0.5, 8) * d,
                           omega_prime=rng.uniform(0.5, 8) * d, cutoff=1)
        bare = build_full_hamiltonian(q).dense()
        u = np.kron(np.eye(4), dressed_basis(q).unitary())
        worst_conj = max(worst_conj, np.abs(u.conj().T @ bare @ u - build_dressed_hamiltonian(q).dense()).max()
                         / np.abs(bare).max())
    if worst_conj > 1e-10:
        fails.append("dressed")

    # output profile normalisation
    lm = device(50, 800, 1000).langevin
    scale = lm.abscissa
    norm = quad(lambda s: abs(temporal_profile(lm.m, [s / scale]).u[0]) ** 2, 0, np.inf,
                limit=500, epsabs=1e-13, epsrel=1e-12)[0] / scale
    if abs(norm - 1) > 1e-8:
        fails.append("profile")

    # output loss channel
    choi_min = min(np.linalg.eigvalsh(choi_matrix(output_loss_superoperator(6, f))).min() for f in (0, 0.5, 0.92))
    f = 0.92
    fock = apply_output_loss(np.diag([0, 1.0, 0, 0]).astype(complex), f).data
    e = math.exp(-(1 - f))
    fock_err = np.abs(fock - np.diag([1 - e, e, 0, 0])).max()
    alpha, cutoff = 1.1 - 0.4j, 40
    nn = np.arange(cutoff + 1)
    def coh(a):
        v = np.exp(-abs(a) ** 2 / 2 + nn * np.log(a) - 0.5 * gammaln(nn + 1))
        return np.outer(v, v.conj())

    diff = apply_output_loss(coh(alpha), f).data - coh(alpha * math.exp(-(1 - f) / 2))
    coh_err = 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum()
    if choi_min < -1e-8 or fock_err > 1e-6 or coh_err > 1e-6:
        fails.append("output loss")

    # epsilon identity
    worst_eps = 0.0
    for _ in range(10):
        d = rng.uniform(5, 40)
        q = PhysicalParams(g=1.0, g_prime=rng.uniform(0.3, 3), delta=d, omega=rng.uniform(0.5, 8) * d,
                           omega_prime=rng.uniform(0.5, 8) * d, n_atoms=int(rng.integers(1, 5)))
        qc = effective_coefficients(q)
        s = HilbertSpace.two_modes(3)
        cc = superposition_mode(qc, s)
        h = build_effective_hamiltonian(qc, s, FrameChoice("rotating"))
        const = qc.delta_r * (1 - qc.epsilon) * excitation_operator(s)
        worst_eps = max(worst_eps, (h - (-qc.delta_r * (cc.dag() @ cc) + const)).norm() / qc.delta_r)
    if worst_eps > 1e-12:
        fails.append("epsilon")

    # t_pi against photon number
    good = tpi_deviation_scan(PhysicalParams.from_units_of_g(1.0, 1, 30, 100, 100, cutoff=9), range(1, 10))
    bad = tpi_deviation_scan(PhysicalParams.from_units_of_g(1.0, 1, 10, 33, 33, cutoff=9), range(1, 10))
    dev_good = [r.deviation_percent for r in good]
    dev_bad = [r.deviation_percent for r in bad]
    jumps = detect_jumps(dev_bad)
    if not (dev_good[0] == 0 and dev_bad[0] == 0 and max(map(abs, dev_good)) < 3
            and max(map(abs, dev_bad)) > 3 and jumps):
        fails.append("t_pi scan")

    ok = not fails
    record(8, ok, f"trace drift {drift:.1e}, min eig {mineig:.1e}, [H,N] {worst_comm:.1e}, "
                  f"dressed {worst_conj:.1e}, profile {abs(norm - 1):.1e}, choi {choi_min:.1e}, "
                  f"fock {fock_err:.1e}, coherent {coh_err:.1e}, epsilon {worst_eps:.1e}, "
                  f"t_pi dev max {max(map(abs, dev_good)):.2f}% / {max(map(abs, dev_bad)):.2f}% jumps at n={[i + 1 for i in jumps]}"
                  + (f"; failing: {', '.join(fails)}" if fails else ""))
    assert ok


# --------------------------------------------------------------------------
# companion analysis for criteria whose literal form does not hold


def test_companion_loss_rates_match_with_swapped_labels():
    # the listed kHz values match (zeta1, zeta2, theta1, theta2) in that order
    s = device(50, 800, 1000)
    lm = s.langevin
    got = [x / TWO_PI / 1e3 for x in (lm.zeta1, lm.zeta2, lm.theta1, lm.theta2)]
    for value, target in zip(got, (1.3, 2.3, 1.2, 2.5)):
        assert within(value, target, 0.10)


def test_companion_large_ensemble_optimum_reaches_target():
    # at n = 8000 the fixed 800 ppm coupler is far from optimal; the best output
    # coupler on the same geometry reaches the quoted value
    at_800 = device(50, 800, 8000).langevin
    f800 = fom_sylvester(at_800.m, at_800.eta)
    best = max(fom_sylvester(device(50, t, 8000).langevin.m, device(50, t, 8000).langevin.eta)
               for t in np.geomspace(10, 5000, 60))
    assert f800 < 0.95 < best
    assert abs(best - 0.97) <= 0.02
