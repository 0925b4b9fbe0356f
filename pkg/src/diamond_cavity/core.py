"""Truncated composite Hilbert spaces, operators and states.

Basis convention: factors are ordered as given (two boson modes ``a``, ``b``
first, then atoms ``1..n``) and the product basis is enumerated
lexicographically with the last factor running fastest, i.e. the same order
``numpy.kron`` produces. When an excitation sector is selected the basis is
the ordered subsequence of product states whose weighted excitation number
equals the sector value.

Operators carry either a dense ``numpy`` array or a ``scipy.sparse`` CSR
matrix; both representations have identical semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property, reduce
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, SectorError

Matrix = Union[np.ndarray, sp.spmatrix, sp.sparray]

# above this dimension builders keep operators sparse
SPARSE_THRESHOLD = 512

DIAMOND_LEVELS = ("0", "1", "2", "3")
# |3> couples to |1>,|2> through the classical drives only, so it carries one
# excitation like the intermediate levels
DIAMOND_WEIGHTS = (0, 1, 1, 1)


@dataclass(frozen=True)
class Factor:
    """One tensor factor: a boson mode or a multi-level atom."""

    label: str
    dim: int
    weights: tuple[int, ...]
    kind: str = "generic"

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"factor {self.label!r} must have dim >= 1")
        if len(self.weights) != self.dim:
            raise DimensionError(
                f"factor {self.label!r}: {len(self.weights)} weights for dim {self.dim}"
            )


def boson_mode(label: str, cutoff: int) -> Factor:
    """Boson mode with Fock states ``0..cutoff``."""
    if cutoff < 0:
        raise DimensionError("Fock cutoff must be non-negative")
    return Factor(label, cutoff + 1, tuple(range(cutoff + 1)), kind="mode")


def diamond_atom(label: str) -> Factor:
    """Four-level diamond atom with levels ``|0>..|3>``."""
    return Factor(label, 4, DIAMOND_WEIGHTS, kind="atom")


@dataclass(frozen=True)
class HilbertSpace:
    factors: tuple[Factor, ...]
    excitation_sector: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        labels = [f.label for f in self.factors]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate factor labels in {labels}")

    @classmethod
    def two_modes(cls, cutoff: int, excitation_sector: int | None = None) -> "HilbertSpace":
        return cls((boson_mode("a", cutoff), boson_mode("b", cutoff)), excitation_sector)

    @classmethod
    def cavity_atoms(
        cls, n_atoms: int, cutoff: int, excitation_sector: int | None = None
    ) -> "HilbertSpace":
        """Modes ``a``, ``b`` followed by ``n_atoms`` diamond atoms."""
        if n_atoms < 1:
            raise DimensionError("need at least one atom")
        factors = [boson_mode("a", cutoff), boson_mode("b", cutoff)]
        factors += [diamond_atom(f"atom{k}") for k in range(1, n_atoms + 1)]
        return cls(tuple(factors), excitation_sector)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def full_dim(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def full_excitations(self) -> np.ndarray:
        """Excitation number of every product-basis state (full space)."""
        total = np.zeros(1, dtype=np.int64)
        for f in self.factors:
            total = (total[:, None] + np.asarray(f.weights)[None, :]).ravel()
        return total

    @cached_property
    def basis_indices(self) -> np.ndarray:
        """Full-space indices of the basis states of this space."""
        if self.excitation_sector is None:
            return np.arange(self.full_dim)
        return np.flatnonzero(self.full_excitations == self.excitation_sector)

    @property
    def total_dim(self) -> int:
        return int(self.basis_indices.size)

    @property
    def is_restricted(self) -> bool:
        return self.excitation_sector is not None

    def factor_index(self, key: int | str) -> int:
        if isinstance(key, str):
            try:
                return self.labels.index(key)
            except ValueError:
                raise DimensionError(f"no factor labelled {key!r}") from None
        if not 0 <= key < len(self.factors):
            raise DimensionError(f"factor index {key} out of range")
        return key

    def full(self) -> "HilbertSpace":
        return HilbertSpace(self.factors)

    def sector(self, n: int) -> "HilbertSpace":
        return HilbertSpace(self.factors, n)

    def basis_states(self) -> list[tuple[int, ...]]:
        """Level tuples of the basis states, in basis order."""
        return [tuple(int(i) for i in np.unravel_index(k, self.dims)) for k in self.basis_indices]

    def index_of(self, levels: Sequence[int]) -> int:
        """Position of a product state (given per-factor levels) in this basis."""
        if len(levels) != len(self.factors):
            raise DimensionError(f"expected {len(self.factors)} levels, got {len(levels)}")
        for lv, f in zip(levels, self.factors):
            if not 0 <= lv < f.dim:
                raise DimensionError(f"level {lv} outside factor {f.label!r}")
        flat = int(np.ravel_multi_index(tuple(levels), self.dims))
        pos = int(np.searchsorted(self.basis_indices, flat))
        if pos >= self.total_dim or self.basis_indices[pos] != flat:
            raise SectorError(f"state {tuple(levels)} is not in excitation sector {self.excitation_sector}")
        return pos

    def sectors_present(self) -> list[int]:
        return sorted(set(int(x) for x in self.full_excitations))


def kron(*blocks: Matrix) -> Matrix:
    """Kronecker product of any number of blocks; sparse if any input is sparse."""
    if not blocks:
        raise DimensionError("kron needs at least one block")
    if any(sp.issparse(b) for b in blocks):
        return reduce(lambda x, y: sp.kron(x, y, format="csr"), blocks)
    return reduce(np.kron, [np.asarray(b) for b in blocks])


def destroy(cutoff: int) -> np.ndarray:
    """Truncated annihilation operator on Fock states ``0..cutoff``."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def number(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex)


def flip(i: int, j: int, dim: int = 4) -> np.ndarray:
    """Atomic flip operator ``|i><j|``."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def _conserves(small: np.ndarray, weights: Sequence[int], tol: float = 0.0) -> bool:
    w = np.asarray(weights)
    mask = w[:, None] != w[None, :]
    return bool(np.all(np.abs(np.asarray(small)[mask]) <= tol))


def _as_storage(m: Matrix, dim: int) -> Matrix:
    if sp.issparse(m):
        return m.tocsr() if dim > SPARSE_THRESHOLD else m.toarray()
    return np.asarray(m, dtype=complex)


@dataclass(frozen=True, eq=False)
class Operator:
    space: HilbertSpace
    data: Matrix = field(repr=False)

    def __post_init__(self):
        d = self.space.total_dim
        data = self.data
        if sp.issparse(data):
            data = sp.csr_matrix(data, dtype=complex)
        else:
            data = np.array(data, dtype=complex)
            data.setflags(write=False)
        if data.shape != (d, d):
            raise DimensionError(f"operator shape {data.shape} does not match space dim {d}")
        object.__setattr__(self, "data", data)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def dense(self) -> np.ndarray:
        return self.data.toarray() if self.is_sparse else np.array(self.data)

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T)

    def norm(self) -> float:
        """Frobenius norm."""
        if self.is_sparse:
            return float(sp.linalg.norm(self.data))
        return float(np.linalg.norm(self.data))

    def hermiticity_error(self) -> float:
        return (self - self.dag()).norm()

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return self.hermiticity_error() <= tol * max(self.norm(), 1.0)

    def _check(self, other: "Operator"):
        if other.space != self.space:
            raise DimensionError("operators live on different spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.data - other.data)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.data)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.data * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.data @ other.data)
        if isinstance(other, KetState):
            if other.space != self.space:
                raise DimensionError("ket and operator live on different spaces")
            return KetState(self.space, self.data @ other.amplitudes, normalized=False)
        return NotImplemented

    def commutator(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.data @ v

    def conserves_excitation(self, tol: float = 1e-14) -> bool:
        exc = self.space.full_excitations[self.space.basis_indices]
        coo = sp.coo_matrix(self.data)
        off = exc[coo.row] != exc[coo.col]
        return bool(np.all(np.abs(coo.data[off]) <= tol * max(self.norm(), 1.0)))

    def restrict(self, sector: int) -> "Operator":
        """Block of an excitation-conserving full-space operator on one sector."""
        if self.space.is_restricted:
            raise SectorError("operator is already restricted to a sector")
        if not self.conserves_excitation():
            raise SectorError("operator does not conserve the excitation number")
        target = self.space.sector(sector)
        idx = target.basis_indices
        block = sp.csr_matrix(self.data)[idx][:, idx]
        return Operator(target, _as_storage(block, idx.size))

    def to_sparse(self) -> "Operator":
        return Operator(self.space, sp.csr_matrix(self.data))

    def to_dense(self) -> "Operator":
        return Operator(self.space, self.dense())


def embed(op: np.ndarray, factor: int | str, space: HilbertSpace) -> Operator:
    """Lift a single-factor operator to the composite space.

    In a sector-restricted space only excitation-conserving operators (with
    respect to that factor's level weights) are admitted; the result is the
    projected block.
    """
    k = space.factor_index(factor)
    op = np.asarray(op, dtype=complex)
    f = space.factors[k]
    if op.shape != (f.dim, f.dim):
        raise DimensionError(f"operator of shape {op.shape} cannot act on factor {f.label!r} (dim {f.dim})")
    if space.is_restricted and not _conserves(op, f.weights):
        raise SectorError(f"operator on {f.label!r} changes the excitation number")
    blocks = [sp.identity(d, dtype=complex, format="csr") for d in space.dims]
    blocks[k] = sp.csr_matrix(op)
    full = kron(*blocks)
    if space.is_restricted:
        idx = space.basis_indices
        full = full[idx][:, idx]
    return Operator(space, _as_storage(full, space.total_dim))


def identity(space: HilbertSpace) -> Operator:
    d = space.total_dim
    return Operator(space, sp.identity(d, dtype=complex, format="csr") if d > SPARSE_THRESHOLD else np.eye(d))


def zero(space: HilbertSpace) -> Operator:
    d = space.total_dim
    return Operator(space, sp.csr_matrix((d, d), dtype=complex) if d > SPARSE_THRESHOLD else np.zeros((d, d)))


def excitation_operator(space: HilbertSpace) -> Operator:
    diag = space.full_excitations[space.basis_indices].astype(complex)
    d = space.total_dim
    return Operator(space, sp.diags(diag, format="csr") if d > SPARSE_THRESHOLD else np.diag(diag))


@dataclass(frozen=True, eq=False)
class KetState:
    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)
    normalized: bool = True

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.space.total_dim:
            raise DimensionError(f"ket of length {amps.size} in space of dim {self.space.total_dim}")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ValueError(f"ket flagged normalized has norm {np.linalg.norm(amps):.15g}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, space: HilbertSpace, levels: Sequence[int]) -> "KetState":
        amps = np.zeros(space.total_dim, dtype=complex)
        amps[space.index_of(levels)] = 1.0
        return cls(space, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "KetState":
        return KetState(self.space, self.amplitudes / self.norm(), normalized=True)

    def scaled(self, c: complex) -> "KetState":
        return replace(self, amplitudes=self.amplitudes * c, normalized=False)

    def overlap(self, other: "KetState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expect(self, op: Operator) -> complex:
        """``<psi|O|psi> / <psi|psi>`` (conditional expectation for unnormalized kets)."""
        v = self.amplitudes
        return complex(np.vdot(v, op.data @ v) / np.vdot(v, v).real)

    def to_density(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(self.space, np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    space: HilbertSpace
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.data.toarray() if sp.issparse(self.data) else self.data, dtype=complex)
        d = self.space.total_dim
        if rho.shape != (d, d):
            raise DimensionError(f"density matrix shape {rho.shape} does not match space dim {d}")
        rho.setflags(write=False)
        object.__setattr__(self, "data", rho)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.linalg.norm(self.data - self.data.conj().T))

    def eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.data + self.data.conj().T)
        return np.linalg.eigvalsh(herm)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def expect(self, op: Operator) -> complex:
        return complex(np.sum(op.dense().T * self.data)) if not op.is_sparse else complex((op.data @ self.data).trace())

    def validate(self, trace: float = 1.0, trace_tol: float = 1e-8, tol: float = 1e-10) -> None:
        """Raise ``ValueError`` unless Hermitian, PSD and of the intended trace."""
        if self.hermiticity_error() > tol:
            raise ValueError(f"density operator not Hermitian (error {self.hermiticity_error():.3g})")
        if abs(self.trace() - trace) > trace_tol:
            raise ValueError(f"trace {self.trace():.12g} differs from {trace}")
        if self.min_eigenvalue() < -tol:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.3g}")


def product_ket(space: HilbertSpace, amplitudes_per_factor: Sequence[np.ndarray]) -> KetState:
    """Product state from per-factor amplitude vectors (projected onto the space)."""
    if len(amplitudes_per_factor) != len(space.factors):
        raise DimensionError("one amplitude vector per factor is required")
    full = reduce(np.kron, [np.asarray(v, dtype=complex) for v in amplitudes_per_factor])
    return KetState(space, full[space.basis_indices], normalized=False)
