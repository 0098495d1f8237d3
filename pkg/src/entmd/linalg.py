"""Dense real linear algebra used by every other module.

All matrices are dense 2-D float arrays in row-major order and all vectors
are 1-D float arrays.  Routines validate finiteness and shapes up front and
raise :class:`~entmd.errors.DimensionMismatch` / :class:`~entmd.errors.DomainError`
on bad input.  Everything here is a pure function of its arguments; random
routines take an explicit generator and never touch global state.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, DomainError

__all__ = [
    "as_matrix",
    "as_vector",
    "seeded_rng",
    "matvec",
    "matvec_transpose",
    "max_col_norm_sq",
    "jacobi_eigenvalues",
    "smallest_positive_eigenvalue",
    "lambda_max_scaled_gram",
    "random_orthogonal",
    "kernel_projector",
]


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D float array, requiring finite entries."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise DimensionMismatch(f"expected a nonempty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def as_vector(x) -> np.ndarray:
    """Coerce to a 1-D float array, requiring finite entries."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatch(f"expected a nonempty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("vector entries must be finite")
    return x


def seeded_rng(seed: int) -> np.random.Generator:
    """Deterministic generator used throughout: 64-bit counter-based Philox."""
    return np.random.Generator(np.random.Philox(seed))


def matvec(a, x) -> np.ndarray:
    """Return ``A x``.

    Raises
    ------
    DimensionMismatch
        If ``len(x) != A.cols``.
    """
    a = as_matrix(a)
    x = as_vector(x)
    if x.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matvec: matrix is {a.shape}, vector has length {x.shape[0]}")
    return a @ x


def matvec_transpose(a, y) -> np.ndarray:
    """Return ``A^T y``.

    Raises
    ------
    DimensionMismatch
        If ``len(y) != A.rows``.
    """
    a = as_matrix(a)
    y = as_vector(y)
    if y.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"matvec_transpose: matrix is {a.shape}, vector has length {y.shape[0]}")
    return a.T @ y


def max_col_norm_sq(a) -> float:
    """Largest squared Euclidean column norm, max_j sum_i A[i,j]^2."""
    a = as_matrix(a)
    return float(np.max(np.sum(a * a, axis=0)))


def jacobi_eigenvalues(g, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by the cyclic Jacobi method.

    Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
    norm falls below ``1e-13 * ||G||_F`` or ``max_sweeps`` sweeps elapse.
    Returns the eigenvalues sorted ascending.

    Raises
    ------
    DomainError
        If the input is not square or not symmetric to 1e-10 relative.
    """
    g = as_matrix(g)
    n = g.shape[0]
    if g.shape[0] != g.shape[1]:
        raise DomainError(f"eigendecomposition needs a square matrix, got {g.shape}")
    scale = float(np.max(np.abs(g)))
    if float(np.max(np.abs(g - g.T))) > 1e-10 * max(scale, 1e-300):
        raise DomainError("matrix is not symmetric to 1e-10 relative")
    if n == 1:
        return g[0].copy()

    a = 0.5 * (g + g.T)  # exactly symmetric working copy
    fro = math.sqrt(float(np.sum(a * a)))
    tol = 1e-13 * fro
    for _ in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                # Rotations with negligible pivots are no-ops; zeroing them
                # directly avoids overflow in the theta quotient.
                if abs(apq) <= 1e-300 + 1e-18 * (abs(a[p, p]) + abs(a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


def smallest_positive_eigenvalue(g) -> float:
    """Smallest eigenvalue of a symmetric matrix above the zero threshold.

    The threshold separating numerically-zero eigenvalues is
    ``tau = 1e-10 * lambda_max``.

    Raises
    ------
    DomainError
        If no eigenvalue exceeds the threshold (zero-rank signal), or the
        input is not symmetric.
    """
    evals = jacobi_eigenvalues(g)
    lam_max = float(evals[-1])
    tau = 1e-10 * lam_max
    positive = evals[evals > tau]
    if lam_max <= 0.0 or positive.size == 0:
        raise DomainError("no eigenvalue exceeds the positivity threshold")
    return float(positive[0])


def lambda_max_scaled_gram(a, x, rel_tol: float = 1e-12, max_iters: int = 100_000) -> float:
    """Largest eigenvalue of ``diag(x) A^T A`` for nonnegative weights x.

    Computed as the top eigenvalue of the symmetric similar matrix
    ``diag(sqrt(x)) A^T A diag(sqrt(x))`` by power iteration from the
    all-ones vector, stopping when the Rayleigh quotient is stable to
    ``rel_tol`` relative.

    Raises
    ------
    DomainError
        If ``x`` has a negative entry or wrong length.
    """
    a = as_matrix(a)
    x = as_vector(x)
    if x.shape[0] != a.shape[1]:
        raise DimensionMismatch("weight vector length must equal the number of columns")
    if np.any(x < 0):
        raise DomainError("weights must be nonnegative")
    b = a * np.sqrt(x)  # A diag(sqrt x); gram of b is the similar matrix
    v = np.ones(a.shape[1])
    lam = 0.0
    for _ in range(max_iters):
        w = b.T @ (b @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        lam_new = float(v @ (b.T @ (b @ v)))
        if abs(lam_new - lam) <= rel_tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix.

    QR of a standard Gaussian matrix with the R diagonal sign folded into Q,
    which makes the distribution exactly Haar and the output deterministic
    for a given generator state.
    """
    if dim < 1:
        raise DomainError("dimension must be at least 1")
    gauss = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(gauss)
    d = np.diag(r)
    return q * np.where(d == 0.0, 1.0, np.sign(d))


def kernel_projector(a) -> np.ndarray:
    """Orthonormal basis Q of range(A^T); ``v - Q (Q^T v)`` projects onto ker(A).

    Uses twice-through modified Gram-Schmidt on the rows of A, dropping rows
    that are numerically dependent.
    """
    a = as_matrix(a)
    rows = []
    for r in a:
        v = r.copy()
        for _ in range(2):
            for u in rows:
                v = v - (u @ v) * u
        nv = float(np.linalg.norm(v))
        if nv > 1e-12 * max(1.0, float(np.linalg.norm(r))):
            rows.append(v / nv)
    if not rows:
        return np.zeros((a.shape[1], 0))
    return np.array(rows).T
