"""Reference computations that share no code path with the package."""
import mpmath
import numpy as np


def mp_range_difference(a_i, a_0, x, dps=50):
    with mpmath.workdps(dps):
        def norm(v):
            return mpmath.sqrt(sum(mpmath.mpf(c) ** 2 for c in v))

        return norm([p - q for p, q in zip(a_i, x)]) - norm([p - q for p, q in zip(x, a_0)])


def central_gradient(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def central_jacobian(f, x, h):
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.column_stack(cols)


def qr_lstsq(A, b):
    Qm, R = np.linalg.qr(A)
    return np.linalg.solve(R, Qm.T @ b)


def whitened_lambda_max(Q, S):
    """lambda_max(Q^{-1} S) via Cholesky whitening and a symmetric eigensolve."""
    L = np.linalg.cholesky(Q)
    Li = np.linalg.inv(L)
    W = Li @ S @ Li.T
    return np.linalg.eigvalsh(0.5 * (W + W.T))[..., -1]


def noise_variance_grid_scan(a, d, z_max, step):
    """Smallest grid z where lambda_max(Q^{-1} S(z)) reaches 1, by brute force.

    ``a`` are sensor coordinates with the reference at the origin.  Builds Q and
    S(z) from scratch (block [[4z, -4 dbar z], [-4 dbar z, 4 d2bar z - 2 z^2]])
    and scans every grid point with the whitened eigensolve.  Returns the
    bracketing interval (z_lo, z_hi) or None.
    """
    d = np.asarray(d)
    a = np.asarray(a)
    At = np.hstack([-2 * a, np.ones((len(d), 1)), -2 * d[:, None], (d**2 - (a**2).sum(1))[:, None]])
    Q = At.T @ At / len(d)
    dbar, d2bar = d.mean(), (d**2).mean()
    z = np.arange(0.0, z_max + step, step)
    k = Q.shape[0]
    S = np.zeros((z.size, k, k))
    S[:, -2, -2] = 4 * z
    S[:, -2, -1] = S[:, -1, -2] = -4 * dbar * z
    S[:, -1, -1] = 4 * d2bar * z - 2 * z**2
    L = np.linalg.cholesky(Q)
    Li = np.linalg.inv(L)
    W = Li @ S @ Li.T
    lam = np.linalg.eigvalsh(0.5 * (W + np.swapaxes(W, -1, -2)))[:, -1]
    hit = np.nonzero(lam >= 1.0)[0]
    if hit.size == 0 or hit[0] == 0:
        return None
    j = hit[0]
    return z[j - 1], z[j]
