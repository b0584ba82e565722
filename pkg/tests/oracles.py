"""Independent reference computations used by the tests.

Everything here is built straight from the reflection definitions with
dense ``2**n x 2**n`` matrices; nothing is shared with the package's
simulation paths.
"""

import numpy as np


def dense_oracle(n, t):
    o = np.eye(2**n)
    o[t, t] = -1.0
    return o


def dense_diffusion(n, m):
    s = np.full(2**m, 2.0 ** (-m / 2))
    local = np.eye(2**m) - 2.0 * np.outer(s, s)
    return np.kron(np.eye(2 ** (n - m)), local)


def dense_grover(n, m, t):
    return -dense_diffusion(n, m) @ dense_oracle(n, t)


def reduced_basis(n, m, t):
    """Columns |t>, |ntt>, |u> as explicit 2**n vectors."""
    size = 2**m
    block = t >> m
    e_t = np.zeros(2**n)
    e_t[t] = 1.0
    ntt = np.zeros(2**n)
    ntt[block * size:(block + 1) * size] = 1.0
    ntt[t] = 0.0
    ntt /= np.linalg.norm(ntt)
    u = np.ones(2**n)
    u[block * size:(block + 1) * size] = 0.0
    u /= np.linalg.norm(u)
    return np.stack([e_t, ntt, u], axis=1)


def dense_run(n, m, t, steps):
    """Amplitudes after applying a G/L step string to the uniform state."""
    g, loc = dense_grover(n, n, t), dense_grover(n, m, t)
    v = np.full(2**n, 2.0 ** (-n / 2))
    for s in steps:
        v = (g if s == "G" else loc) @ v
    return v
