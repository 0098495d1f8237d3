"""Shared instance builders for the test suite."""

import numpy as np

from entmd import ProblemInstance, seeded_rng


def centered_gaussian_instance(m, n, sparsity, seed, x0_scale=None):
    """Random consistent instance with rows centered (A @ ones = 0).

    Centering guarantees the solution set contains strictly positive points
    (z + t * ones for every t > 0), which keeps the entropy projection off
    the boundary.
    """
    rng = seeded_rng(seed)
    g = rng.standard_normal((m, n))
    a = g - g.mean(axis=1, keepdims=True)
    z = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    z[support] = rng.uniform(0.0, 1.0, sparsity)
    return ProblemInstance(a, a @ z, planted=z)


def gaussian_instance(m, n, sparsity, seed):
    """Plain i.i.d. Gaussian design with a sparse planted solution."""
    rng = seeded_rng(seed)
    a = rng.standard_normal((m, n))
    z = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    z[support] = rng.uniform(0.0, 1.0, sparsity)
    return ProblemInstance(a, a @ z, planted=z)


def positive_solution_instance(m, n, seed, lo=0.25, hi=1.0):
    """Overdetermined full-column-rank system whose unique solution is the
    dense planted vector, bounded away from the boundary."""
    rng = seeded_rng(seed)
    a = rng.standard_normal((m, n))
    z = rng.uniform(lo, hi, n)
    return ProblemInstance(a, a @ z, planted=z)


def row_orthonormal_matrix(m, n, rng):
    """m x n matrix with orthonormal rows (m <= n)."""
    g = rng.standard_normal((n, m))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return (q * np.where(d == 0.0, 1.0, np.sign(d))).T


def signed_system(m, n, seed):
    """Well-conditioned signed system: orthonormal rows, signed planted z."""
    rng = seeded_rng(seed)
    a = row_orthonormal_matrix(m, n, rng)
    z = rng.standard_normal(n)
    return a, a @ z, z
