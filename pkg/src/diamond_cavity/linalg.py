"""Matrix functions: exponential, Sylvester tensor solve, Hermitian eigensolver."""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import MatrixOverflowError, SingularSystemError


def matrix_exponential(a) -> np.ndarray:
    """Dense matrix exponential ``e^A``.

    Backed by the Padé scaling-and-squaring algorithm of ``scipy.linalg.expm``.
    Non-finite results (overflow for extreme norms) raise
    :class:`MatrixOverflowError` instead of returning NaN/inf entries.
    """
    a = a.toarray() if sp.issparse(a) else np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix_exponential needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix_exponential input has non-finite entries")
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(a.astype(complex) if np.iscomplexobj(a) else a.astype(float))
    if not np.all(np.isfinite(out)):
        raise MatrixOverflowError(
            f"matrix exponential overflowed (1-norm of input {np.linalg.norm(a, 1):.3g})"
        )
    return out


def spectral_abscissa(m: np.ndarray) -> float:
    """Smallest real part among the eigenvalues (decay rate of ``e^{-M t}``)."""
    return float(np.min(np.linalg.eigvals(np.asarray(m)).real))


def sylvester_solve(m: np.ndarray, rel_gap: float = 1e-12) -> np.ndarray:
    """Solve ``(M (x) I) X + X (I (x) M^H) = I (x) I`` for the ``d^2 x d^2`` tensor ``X``.

    For strictly stable ``M`` (all eigenvalues with positive real part) the
    solution equals ``int_0^inf expm(-M t) (x) expm(-M^H t) dt``. Element
    ``X[(i,k),(j,l)]`` (row ``i*d+k``, column ``j*d+l``) is the integral of
    ``[e^{-Mt}]_{ij} [e^{-M^H t}]_{kl}``.

    The system is vectorised explicitly, ``(I (x) A + B^T (x) I) vec(X) = vec(C)``,
    and solved densely; the dimension is ``d^4``, which is tiny for the
    two-mode drift matrices used here.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"sylvester_solve needs a square matrix, got shape {m.shape}")
    d = m.shape[0]
    lam = np.linalg.eigvals(m)
    # spectra of A = M(x)I and -B = -(I(x)M^H) must be disjoint
    gaps = np.abs(lam[:, None] + lam.conj()[None, :])
    scale = max(np.linalg.norm(m, 2), np.finfo(float).tiny)
    if gaps.min() <= rel_gap * scale:
        raise SingularSystemError(
            "Sylvester system is singular: eigenvalues of M and -M^H overlap "
            f"(min |lambda_i + conj(lambda_j)| = {gaps.min():.3g}); M must be strictly stable"
        )
    # the residual below is invariant under M -> M/s, X -> s X; solve the scaled problem
    ms = m / scale
    eye = np.eye(d)
    a = np.kron(ms, eye)
    b = np.kron(eye, ms.conj().T)
    n = d * d
    big = np.kron(np.eye(n), a) + np.kron(b.T, np.eye(n))
    rhs = np.eye(n).reshape(-1, order="F")
    try:
        vec = np.linalg.solve(big, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Sylvester system could not be solved: {exc}") from exc
    xs = vec.reshape(n, n, order="F")
    residual = np.linalg.norm(a @ xs + xs @ b - np.eye(n))
    if not np.isfinite(residual) or residual > 1e-10 * np.sqrt(n):
        raise SingularSystemError(f"Sylvester solve inaccurate (residual {residual:.3g})")
    x = xs / scale
    return x


def hermitian_eig(a, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian matrix."""
    a = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=complex)
    scale = max(np.linalg.norm(a), 1.0)
    if np.linalg.norm(a - a.conj().T) > tol * scale:
        raise ValueError("hermitian_eig: input is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w, v
