"""Independent oracles used by the test suite.

These deliberately reimplement quantities by routes different from the
library code paths they check.
"""

import math

import numpy as np

from subspace_action import log_beta


def classical_gram_schmidt(m):
    """Column-by-column Gram-Schmidt with positive pivots."""
    m = np.asarray(m, dtype=float)
    q = np.zeros_like(m)
    for j in range(m.shape[1]):
        v = m[:, j].copy()
        for i in range(j):
            v -= (q[:, i] @ m[:, j]) * q[:, i]
        norm = np.linalg.norm(v)
        q[:, j] = v / norm
    return q


def cofactor_det(a):
    """Determinant by cofactor expansion (small matrices only)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * a[0, j] * cofactor_det(minor)
    return total


def riemann_midpoint_01(f, n_cells=10_000_000):
    """Midpoint rule over (0, 1) with implicit endpoint exclusion."""
    xs = (np.arange(n_cells) + 0.5) / n_cells
    return float(np.sum(f(xs))) / n_cells


def invariant_moment_exact(k, d, p, n_max, sq0):
    """E[||x - x_n||^(2p)] for the invariant law on G(k, d): the squared
    error picks up i.i.d. Beta((d-k)/2, k/2) factors, so the p-th moment is
    geometric with ratio E[u^p] in closed Beta form."""
    rho = math.exp(log_beta((d - k) / 2 + p, k / 2) - log_beta((d - k) / 2, k / 2))
    return sq0 ** p * rho ** np.arange(n_max + 1)


def roots_moment_exact(K, theta0, p, n_max, sq0):
    """E[||x - x_n||^(2p)] for the K-th roots-of-unity law in R^2.

    In the plane the residual direction after acting on atom j is always
    atom j's perpendicular, so the direction process is a K-state chain and
    moments follow from powers of a K x K transfer matrix.  theta0 is the
    angle of the initial residual x - x0.
    """
    thetas = 2 * np.pi * np.arange(1, K + 1) / K
    phis = thetas + np.pi / 2
    factors = 1.0 - np.cos(phis[:, None] - thetas[None, :]) ** 2
    transfer = (factors ** p) / K
    v = (1.0 - np.cos(theta0 - thetas) ** 2) ** p / K
    out = np.empty(n_max + 1)
    out[0] = sq0 ** p
    for n in range(1, n_max + 1):
        out[n] = sq0 ** p * v.sum()
        v = transfer.T @ v
    return out


def roots_log_mean_exact(K, theta0, n_max, sq0):
    """E[log ||x - x_n||^2] for the K-th roots-of-unity law in R^2.

    The chain state after step 1 is uniform over atoms, so the log error
    grows linearly after the first step.
    """
    thetas = 2 * np.pi * np.arange(1, K + 1) / K
    phis = thetas + np.pi / 2
    factors = 1.0 - np.cos(phis[:, None] - thetas[None, :]) ** 2
    g_first = float(np.mean(np.log(1.0 - np.cos(theta0 - thetas) ** 2)))
    g_stationary = float(np.mean(np.log(factors)))
    out = np.full(n_max + 1, math.log(sq0))
    for n in range(1, n_max + 1):
        out[n] += g_first + (n - 1) * g_stationary
    return out
