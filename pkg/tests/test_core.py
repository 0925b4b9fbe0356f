import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from diamond_cavity.core import (
    DensityOperator,
    HilbertSpace,
    KetState,
    Operator,
    boson_mode,
    destroy,
    embed,
    excitation_operator,
    flip,
    identity,
    kron,
    number,
    product_ket,
)
from diamond_cavity.errors import DimensionError, SectorError


def test_kron_identities():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    np.testing.assert_array_equal(kron(np.diag([1, 2]), np.diag([3])), np.diag([3, 6]))


def test_kron_squared_matches_direct_product(rng):
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    k = kron(x, x)
    np.testing.assert_allclose(k @ k, kron(x @ x, x @ x), atol=1e-12)


def test_kron_sparse_path_matches_dense(rng):
    a, b = rng.normal(size=(3, 3)), rng.normal(size=(2, 2))
    out = kron(sp.csr_matrix(a), b)
    assert sp.issparse(out)
    np.testing.assert_allclose(out.toarray(), np.kron(a, b))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kron_mixed_product_and_associativity(seed):
    r = np.random.default_rng(seed)
    a, b, c, d = (r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2)) for _ in range(4))
    np.testing.assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)
    np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)


def test_space_dimensions_and_basis_order():
    s = HilbertSpace.cavity_atoms(2, 1)
    assert s.dims == (2, 2, 4, 4)
    assert s.total_dim == 64
    states = s.basis_states()
    assert states[0] == (0, 0, 0, 0)
    assert states[1] == (0, 0, 0, 1)  # last factor fastest
    assert s.index_of((1, 0, 0, 0)) == 32


def test_sector_basis_satisfies_excitation_sum():
    s = HilbertSpace.cavity_atoms(2, 3, excitation_sector=2)
    w = [tuple(range(4)), tuple(range(4)), (0, 1, 1, 1), (0, 1, 1, 1)]
    for lv in s.basis_states():
        assert sum(wi[x] for wi, x in zip(w, lv)) == 2
    # full-space dimensions of all sectors add up
    full = s.full()
    assert sum(full.sector(n).total_dim for n in full.sectors_present()) == full.total_dim
    with pytest.raises(SectorError):
        s.index_of((3, 0, 0, 0))


def test_duplicate_labels_rejected():
    with pytest.raises(DimensionError):
        HilbertSpace((boson_mode("a", 1), boson_mode("a", 2)))


def test_embed_number_operator_eigenvalue():
    s = HilbertSpace.two_modes(3)
    n_a = embed(number(3), "a", s)
    ket = KetState.basis(s, (2, 0))
    np.testing.assert_allclose((n_a @ ket).amplitudes, 2 * ket.amplitudes)


def test_embed_flip_operator():
    s = HilbertSpace.cavity_atoms(1, 1)
    s02 = embed(flip(0, 2), "atom1", s)
    src = KetState.basis(s, (1, 0, 2))
    dst = KetState.basis(s, (1, 0, 0))
    np.testing.assert_allclose((s02 @ src).amplitudes, dst.amplitudes)
    assert np.allclose((s02 @ dst).amplitudes, 0)


def test_commutator_deviates_only_in_top_fock_row():
    cutoff = 5
    s = HilbertSpace((boson_mode("a", cutoff),))
    a = embed(destroy(cutoff), 0, s)
    comm = a.commutator(a.dag()).dense()
    np.testing.assert_allclose(comm[:cutoff, :cutoff], np.eye(cutoff), atol=1e-14)
    assert abs(comm[cutoff, cutoff] - (-cutoff)) < 1e-12


def test_embed_errors():
    s = HilbertSpace.cavity_atoms(1, 2)
    with pytest.raises(DimensionError):
        embed(np.eye(3), "atom1", s)
    with pytest.raises(SectorError):
        embed(destroy(2), "a", s.sector(1))
    # conserving operator is admitted in a sector and equals the projected block
    blk = embed(number(2), "a", s.sector(1))
    full = embed(number(2), "a", s)
    idx = s.sector(1).basis_indices
    np.testing.assert_allclose(blk.dense(), full.dense()[np.ix_(idx, idx)])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_embedded_operators_on_different_factors_commute(seed):
    r = np.random.default_rng(seed)
    s = HilbertSpace.cavity_atoms(1, 2)
    x = embed(r.normal(size=(3, 3)), "a", s)
    y = embed(r.normal(size=(4, 4)), "atom1", s)
    assert x.commutator(y).norm() < 1e-12


def test_operator_restrict_and_conservation():
    s = HilbertSpace.two_modes(2)
    a = embed(destroy(2), "a", s)
    b = embed(destroy(2), "b", s)
    hop = a.dag() @ b + b.dag() @ a
    assert hop.conserves_excitation()
    r = hop.restrict(1)
    assert r.space.total_dim == 2
    np.testing.assert_allclose(r.dense(), [[0, 1], [1, 0]])
    with pytest.raises(SectorError):
        a.restrict(1)


def test_sparse_and_dense_operators_agree():
    s = HilbertSpace.two_modes(2)
    a = embed(destroy(2), "a", s)
    sp_a = a.to_sparse()
    assert sp_a.is_sparse
    np.testing.assert_allclose((sp_a.dag() @ sp_a).dense(), (a.dag() @ a).dense())
    assert abs(sp_a.norm() - a.norm()) < 1e-14


def test_operator_space_mismatch():
    with pytest.raises(DimensionError):
        identity(HilbertSpace.two_modes(1)) + identity(HilbertSpace.two_modes(2))
    with pytest.raises(DimensionError):
        Operator(HilbertSpace.two_modes(1), np.eye(3))


def test_ket_normalisation_flag():
    s = HilbertSpace.two_modes(1)
    with pytest.raises(ValueError):
        KetState(s, [1, 1, 0, 0])
    k = KetState(s, [1, 1, 0, 0], normalized=False).normalize()
    assert abs(k.norm() - 1) < 1e-15
    with pytest.raises(DimensionError):
        KetState(s, [1, 0, 0])


def test_conditional_expectation_of_unnormalised_ket():
    s = HilbertSpace.two_modes(2)
    nb = embed(number(2), "b", s)
    k = KetState.basis(s, (0, 2)).scaled(0.3)
    assert abs(k.expect(nb) - 2) < 1e-14


def test_density_operator_checks():
    s = HilbertSpace.two_modes(1)
    rho = KetState.basis(s, (1, 0)).to_density()
    rho.validate()
    assert abs(rho.purity() - 1) < 1e-14
    bad = DensityOperator(s, np.diag([1.2, -0.2, 0, 0]))
    with pytest.raises(ValueError):
        bad.validate()
    with pytest.raises(ValueError):
        DensityOperator(s, np.diag([0.5, 0.2, 0, 0])).validate()


def test_product_ket_and_excitation_operator():
    s = HilbertSpace.cavity_atoms(1, 1)
    k = product_ket(s, [np.array([0, 1]), np.array([1, 0]), np.array([0, 0, 0, 1])])
    assert k.expect(excitation_operator(s)) == pytest.approx(2.0)
