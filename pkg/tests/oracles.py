"""Independent oracles the test suite checks the package against.

Everything here is deliberately written the slow, obvious way (explicit
loops, finite differences, exhaustive enumeration) and never calls into
the package's vectorised code paths.
"""

import math

import mpmath
import numpy as np

mpmath.mp.dps = 40


def mp_kernel(x, y, lam, family, beta):
    """Base kernel evaluated in high precision."""
    u = mpmath.fsum((a - b) ** 2 for a, b in zip(x, y))
    lam = mpmath.mpf(lam)
    if family == "gaussian":
        return mpmath.e ** (-u / lam**2)
    return (1 + u / lam**2) ** (-mpmath.mpf(beta))


def fd_kernel_partials(x, y, lam, family, beta, step=1e-5):
    """Central finite differences of the kernel in high precision.

    Returns (grad_x, grad_y, mixed trace). The high-precision evaluation
    keeps the O(step^2) truncation error as the only error source, which
    is what makes a 1e-6 relative comparison against float64 closed forms
    meaningful for second derivatives.
    """
    x = [mpmath.mpf(float(v)) for v in np.atleast_1d(x)]
    y = [mpmath.mpf(float(v)) for v in np.atleast_1d(y)]
    h = mpmath.mpf(step)
    d = len(x)

    def k_at(xv, yv):
        return mp_kernel(xv, yv, lam, family, beta)

    def shifted(vec, i, delta):
        out = list(vec)
        out[i] = out[i] + delta
        return out

    grad_x = np.array(
        [float((k_at(shifted(x, i, h), y) - k_at(shifted(x, i, -h), y)) / (2 * h)) for i in range(d)]
    )
    grad_y = np.array(
        [float((k_at(x, shifted(y, i, h)) - k_at(x, shifted(y, i, -h))) / (2 * h)) for i in range(d)]
    )
    trace = mpmath.mpf(0)
    for i in range(d):
        pp = k_at(shifted(x, i, h), shifted(y, i, h))
        pm = k_at(shifted(x, i, h), shifted(y, i, -h))
        mp_ = k_at(shifted(x, i, -h), shifted(y, i, h))
        mm = k_at(shifted(x, i, -h), shifted(y, i, -h))
        trace += (pp - pm - mp_ + mm) / (4 * h**2)
    return grad_x, grad_y, float(trace)


def fd_stein_entry(x, y, sx, sy, lam, family, beta, step=1e-5):
    """Four-term Stein value with all kernel derivatives from finite differences."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    sx = np.atleast_1d(np.asarray(sx, dtype=float))
    sy = np.atleast_1d(np.asarray(sy, dtype=float))
    grad_x, grad_y, trace = fd_kernel_partials(x, y, lam, family, beta, step)
    k = float(mp_kernel([mpmath.mpf(v) for v in x], [mpmath.mpf(v) for v in y], lam, family, beta))
    return float(sx @ sy) * k + float(sy @ grad_x) + float(sx @ grad_y) + trace


def fd_log_density_gradient(log_density, x, step=1e-6):
    """Central finite differences of a scalar log-density (float64)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grad = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (log_density(xp) - log_density(xm)) / (2 * step)
    return grad


def naive_ksd_ustat(H):
    n = len(H)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += H[i][j]
    return total / (n * (n - 1))


def naive_wild_stat(H, eps):
    n = len(H)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += eps[i] * eps[j] * H[i][j]
    return total / (n * (n - 1))


def naive_power_proxy(H, floor=1e-8):
    n = len(H)
    r = []
    for i in range(n):
        r.append(sum(H[i][j] for j in range(n) if j != i) / (n - 1))
    m1 = sum(r) / n
    m2 = sum(v * v for v in r) / n
    var = max(floor, (4.0 / n) * (m2 - m1 * m1))
    return naive_ksd_ustat(H) / math.sqrt(var)


def rbm_log_density_enumeration(weights, visible_bias, hidden_bias, x):
    """Unnormalised marginal log-density by summing over all hidden states.

    Enumerates h in {-1, 1}^d_h explicitly; only usable for small d_h.
    """
    W = np.asarray(weights, dtype=float)
    b = np.asarray(visible_bias, dtype=float)
    c = np.asarray(hidden_bias, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d_h = c.size
    exponents = []
    for bits in range(2**d_h):
        h = np.array([1.0 if (bits >> j) & 1 else -1.0 for j in range(d_h)])
        exponents.append(x @ W @ h + b @ x + c @ h - 0.5 * x @ x)
    m = max(exponents)
    return m + math.log(sum(math.exp(e - m) for e in exponents))


def grid_search_u_alpha(sorted_banks, extras, weights, alpha, b3):
    """Largest feasible u on the grid {step, 2 step, ...} with step = u_max 2^-b3."""
    weights = np.asarray(weights, dtype=float)
    u_max = 1.0 / weights.max()
    step = u_max * 2.0**-b3
    m = sorted_banks.shape[1]
    best = 0.0
    for i in range(1, 2**b3):
        u = i * step
        idx = np.ceil(m * (1.0 - u * weights)).astype(int)
        np.clip(idx, 1, m, out=idx)
        thresholds = sorted_banks[np.arange(len(weights)), idx - 1]
        p_hat = float(np.any(extras > thresholds[:, None], axis=0).mean())
        if p_hat <= alpha:
            best = u
    return best
