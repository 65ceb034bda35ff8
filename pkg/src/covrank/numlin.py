"""
Symmetric eigen-solvers used by the rankers.

Every eigenvector returned here is sign-normalised so that its
largest-magnitude entry is positive. Rankers re-orient by upsets afterwards,
this only makes the intermediate results deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


class NumericalError(ArithmeticError):
    """A factorisation or iterative solve failed."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    jitter: float = 0.0


@dataclass(frozen=True)
class SpectralConfig:
    tol: float = 1e-10
    max_iter: int = 10000
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` (or each column of ``v``) so the largest-magnitude entry is positive."""
    v = np.array(v, dtype=float, copy=True)
    if v.ndim == 1:
        k = int(np.argmax(np.abs(v)))
        return -v if v[k] < 0 else v
    k = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[k, np.arange(v.shape[1])] < 0, -1.0, 1.0)
    return v * signs


def _check_symmetric(A, rtol=1e-10):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    if np.abs(A - A.T).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (A + A.T)


def dense_sym_eig(A):
    """Full spectrum of a symmetric matrix.

    Returns
    -------
    values : (n,) ndarray
        Eigenvalues in ascending order.
    vectors : (n, n) ndarray
        Orthonormal eigenvectors as columns, sign-normalised.
    """
    A = _check_symmetric(A)
    w, V = np.linalg.eigh(A)
    return w, fix_sign(V)


def top_eigenpair(A) -> EigenPair:
    """Largest eigenpair of a symmetric matrix by a dense partial solve."""
    A = _check_symmetric(A)
    n = A.shape[0]
    w, V = linalg.eigh(A, subset_by_index=[n - 1, n - 1], check_finite=False)
    return EigenPair(float(w[0]), fix_sign(V[:, 0]))


def power_top_eigenvector(A, cfg: SpectralConfig = SpectralConfig(), deflate=None) -> EigenPair:
    """Dominant eigenpair of a symmetric PSD matrix by power iteration.

    ``deflate`` is an optional (n, k) array of orthonormal vectors that are
    projected out at every step, giving the next eigenpair after them.
    """
    A = _check_symmetric(A)
    n = A.shape[0]
    rng = np.random.default_rng(cfg.seed)
    Q = None if deflate is None else np.atleast_2d(np.asarray(deflate, dtype=float).T).T

    def project(x):
        if Q is not None:
            x = x - Q @ (Q.T @ x)
        return x

    v = project(rng.standard_normal(n))
    nv = np.linalg.norm(v)
    if nv == 0:
        raise NumericalError("start vector vanished after deflation")
    v /= nv
    delta = np.inf
    for _ in range(cfg.max_iter):
        w = project(A @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            # v lies in the null space, which is then the whole remaining spectrum
            return EigenPair(0.0, fix_sign(v))
        w /= nw
        delta = np.linalg.norm(w - v)
        v = w
        if delta < cfg.tol:
            break
    else:
        lam = float(v @ A @ v)
        residual = float(np.linalg.norm(A @ v - lam * v))
        raise ConvergenceError(
            f"power iteration did not converge in {cfg.max_iter} steps "
            f"(last step {delta:.3e}, residual {residual:.3e})", residual)
    lam = float(v @ A @ v)
    return EigenPair(lam, fix_sign(v))


def ones_complement_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the complement of the all-ones vector, shape (n, n-1).

    Built from the Householder reflection that maps ``e_1`` onto ``1/sqrt(n)``.
    """
    u = -np.full(n, 1.0 / np.sqrt(n))
    u[0] += 1.0
    nu = u @ u
    Hh = np.eye(n)
    if nu > 0:
        Hh -= 2.0 * np.outer(u, u) / nu
    return Hh[:, 1:]


def restricted_eig(A):
    """Spectrum of symmetric ``A`` restricted to vectors orthogonal to ``1``.

    Returns ascending eigenvalues and the corresponding unit vectors in R^n.
    """
    A = _check_symmetric(A)
    n = A.shape[0]
    Z = ones_complement_basis(n)
    M = Z.T @ A @ Z
    w, Q = np.linalg.eigh(0.5 * (M + M.T))
    V = Z @ Q
    # exact orthogonality to 1 up to rounding
    V -= V.mean(axis=0)
    V /= np.linalg.norm(V, axis=0)
    return w, fix_sign(V)


def fiedler_vector(lap) -> np.ndarray:
    """Eigenvector of the smallest eigenvalue of a Laplacian on the complement of ``1``."""
    lap = np.asarray(lap, dtype=float)
    if lap.shape[0] < 2:
        raise ValueError("fiedler vector needs at least two nodes")
    _, V = restricted_eig(lap)
    return V[:, 0]


def laplacian(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    return np.diag(W.sum(axis=1)) - W


def cholesky_jitter(M, jitter0=None, max_steps=6, singular=False):
    """Lower Cholesky factor of ``M + delta I`` with the smallest working delta.

    ``delta`` runs through ``0, jitter0, 10 jitter0, ..., 10**max_steps jitter0``.
    The default ``jitter0`` is ``1e-10 * trace(M) / n``. Pass ``singular=True``
    for matrices known to be singular: the ``delta = 0`` attempt then only
    succeeds by rounding luck, which would make results depend on item order.

    Returns
    -------
    L : ndarray
    delta : float
    """
    M = _check_symmetric(M)
    n = M.shape[0]
    if jitter0 is None:
        jitter0 = 1e-10 * np.trace(M) / n
    deltas = [] if singular and jitter0 > 0 else [0.0]
    if jitter0 > 0:
        deltas += [jitter0 * 10.0 ** k for k in range(max_steps + 1)]
    eye = np.eye(n)
    for delta in deltas:
        try:
            return np.linalg.cholesky(M + delta * eye), delta
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"matrix is not positive definite after jitter up to {deltas[-1]:.3e}")


def whiten(L, X):
    """``L^{-1} X`` for lower-triangular ``L``."""
    return linalg.solve_triangular(L, X, lower=True, check_finite=False)


def unwhiten(L, y):
    """``L^{-T} y`` for lower-triangular ``L``."""
    return linalg.solve_triangular(L.T, y, lower=False, check_finite=False)


def generalized_top_eig(A, B, jitter0=None, singular=False) -> EigenPair:
    """Top eigenpair of ``A x = lambda B x`` via Cholesky reduction.

    ``B`` is jittered as in :func:`cholesky_jitter`; the jitter used is
    reported on the returned pair.
    """
    A = _check_symmetric(A)
    L, delta = cholesky_jitter(B, jitter0, singular=singular)
    Ai = whiten(L, whiten(L, A).T)
    top = top_eigenpair(0.5 * (Ai + Ai.T))
    x = unwhiten(L, top.vector)
    x = fix_sign(x / np.linalg.norm(x))
    return EigenPair(top.value, x, delta)
