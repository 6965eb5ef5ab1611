"""Log-domain scaling kernels.

The iteration is the hot loop of everything floating-point in this package
(it runs up to 1e5 times per call and thousands of calls per equilibrium
solve), so it carries a numba-compiled variant.  Set ``OTDUALS_DISABLE_NUMBA=1``
to force the pure-numpy twin; the two paths compute identical updates.
``benchmarks/sinkhorn_benchmark.py`` compares them.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("OTDUALS_DISABLE_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def _logsumexp_rows(z):
    m = np.max(z, axis=1)
    return m + np.log(np.sum(np.exp(z - m[:, None]), axis=1))


def _logsumexp_cols(z):
    m = np.max(z, axis=0)
    return m + np.log(np.sum(np.exp(z - m[None, :]), axis=0))


def sinkhorn_core_numpy(cost, log_mu, log_nu, eps, tol, max_iter, phi, psi):
    """Alternating potential updates until the row marginals match.

    After each target-side update the column marginals are exact, so the
    residual is the max-norm row marginal violation.  Returns
    (phi, psi, iterations, residual).
    """
    mu = np.exp(log_mu)
    it = 0
    residual = np.inf
    while it < max_iter:
        it += 1
        phi = eps * (log_mu - _logsumexp_rows((psi[None, :] - cost) / eps))
        psi = eps * (log_nu - _logsumexp_cols((phi[:, None] - cost) / eps))
        rows = np.sum(np.exp((phi[:, None] + psi[None, :] - cost) / eps), axis=1)
        residual = float(np.max(np.abs(rows - mu)))
        if residual <= tol:
            break
    return phi, psi, it, residual


def _sinkhorn_core_loops(cost, log_mu, log_nu, eps, tol, max_iter, phi, psi):
    # explicit loops: the numba twin of sinkhorn_core_numpy
    m, n = cost.shape
    mu = np.exp(log_mu)
    it = 0
    residual = np.inf
    while it < max_iter:
        it += 1
        for i in range(m):
            best = -np.inf
            for j in range(n):
                z = (psi[j] - cost[i, j]) / eps
                if z > best:
                    best = z
            acc = 0.0
            for j in range(n):
                acc += np.exp((psi[j] - cost[i, j]) / eps - best)
            phi[i] = eps * (log_mu[i] - best - np.log(acc))
        for j in range(n):
            best = -np.inf
            for i in range(m):
                z = (phi[i] - cost[i, j]) / eps
                if z > best:
                    best = z
            acc = 0.0
            for i in range(m):
                acc += np.exp((phi[i] - cost[i, j]) / eps - best)
            psi[j] = eps * (log_nu[j] - best - np.log(acc))
        residual = 0.0
        for i in range(m):
            row = 0.0
            for j in range(n):
                row += np.exp((phi[i] + psi[j] - cost[i, j]) / eps)
            r = abs(row - mu[i])
            if r > residual:
                residual = r
        if residual <= tol:
            break
    return phi, psi, it, residual


if USE_NUMBA:
    sinkhorn_core = njit(cache=True)(_sinkhorn_core_loops)
else:
    sinkhorn_core = sinkhorn_core_numpy


def plan_from_potentials(cost, eps, phi, psi):
    """Gibbs-form coupling exp((phi_i + psi_j - c_ij) / eps); always positive."""
    return np.exp((phi[:, None] + psi[None, :] - cost) / eps)
