"""Shared test utilities: random specs and an independent wave-matching solver."""

import numpy as np
from hypothesis import strategies as st

from cantorscatter import PotentialSpec


def random_spec(rng, N_range=(2, 6), S_range=(0, 5)):
    """Draw a valid spec from the randomized-suite ranges."""
    while True:
        N = int(rng.integers(N_range[0], N_range[1] + 1))
        S = int(rng.integers(S_range[0], S_range[1] + 1))
        mu = rng.uniform(0.2, 2.0)
        nu = 0.0 if rng.random() < 0.3 else rng.uniform(0.2, 2.0)
        lo = max(1.05, (N - 1) ** (1.0 / (mu + nu)) + 0.05)
        if lo < 6.0:
            break
    return PotentialSpec(N, rng.uniform(lo, 6.0), mu, nu, S, rng.uniform(1.0, 25.0), rng.uniform(1.0, 50.0))


def suite(seed, n_specs, n_k=64, **kw):
    """(spec, k-array) pairs over (0.1, 3 sqrt V], skipping the degenerate band."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_specs):
        spec = random_spec(rng, **kw)
        k = np.sort(rng.uniform(0.1, 3.0 * np.sqrt(spec.V), n_k))
        out.append((spec, k[np.abs(k * k - spec.V) >= 1e-6]))
    return out


@st.composite
def specs(draw, max_N=6, max_S=5, V=True):
    N = draw(st.integers(2, max_N))
    S = draw(st.integers(0, max_S))
    mu = draw(st.floats(0.2, 2.0))
    nu = draw(st.one_of(st.just(0.0), st.floats(0.2, 2.0)))
    lo = max(1.05, (N - 1) ** (1.0 / (mu + nu)) + 0.05)
    rho = draw(st.floats(lo, max(lo, 6.0) + 1.0))
    L = draw(st.floats(1.0, 25.0))
    height = draw(st.floats(1.0, 50.0)) if V else 0.0
    return PotentialSpec(N, rho, mu, nu, S, L, height)


def _basis(q, x):
    return np.array([[np.exp(1j * q * x), np.exp(-1j * q * x)],
                     [1j * q * np.exp(1j * q * x), -1j * q * np.exp(-1j * q * x)]])


def wave_matching_transmission(starts, width, V, k):
    """T from matching psi and psi' at every barrier edge (no transfer-matrix algebra shared).

    Each region carries its own local origin, so evanescent factors never
    exceed exp(kappa * width) and the solve stays well conditioned.
    """
    kt = np.sqrt(k * k - V + 0j)
    edges = []
    for s in starts:
        edges += [(s, k, kt), (s + width, kt, k)]
    M = np.eye(2, dtype=complex)  # leftmost amplitudes -> current region amplitudes
    origin = 0.0
    det = 1.0 + 0j
    for x, q1, q2 in edges:
        M = np.linalg.solve(_basis(q2, 0.0), _basis(q1, x - origin)) @ M
        det *= q1 / q2  # Wronskian ratio; taken analytically to dodge cancellation
        origin = x
    # outgoing region: (F, G) = M (A, B) with G = 0
    F = det / M[1, 1]
    return abs(F) ** 2
