"""Closed-form transmission of a UCP treated as a super-periodic potential.

The stage-S potential is a unit barrier of width ``b_S`` repeated ``N``
times at pitch ``r_1``, that block repeated ``N`` times at ``r_2``, and so
on for ``S`` levels.  Transmission then factorizes as

    T = 1 / (1 + |sigma_- sin(ktilde b_S)|**2 * prod_q U_{N-1}(Gamma_q)**2)

with one Bloch argument ``Gamma_q`` per level, evaluated sequentially
(each level consumes all lower ones).  Cost is O(S**2) per k.

Deep in a band gap the Chebyshev factors overflow double precision; those
k points are re-evaluated with mpmath floats (53-bit mantissa, unbounded
exponent) and T is returned through the log of the denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .geometry import PotentialSpec, check_spec, stage_metrics, stage_widths
from .scattering import WaveContext, barrier_matrix, sigma_sin

OVERFLOW_GUARD = 1e150


def chebyshev_u(n: int, x):
    """Chebyshev polynomial of the second kind via its trigonometric forms.

    ``sin((n+1)t)/sin t`` with ``x = cos t`` inside ``[-1, 1]``, and
    ``sgn(x)**n sinh((n+1)t)/sinh t`` with ``|x| = cosh t`` outside.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.ones_like(x)[()]
    ax = np.abs(x)
    sign = np.where(x < 0, (-1.0) ** n, 1.0)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        t = np.arccos(np.clip(x, -1.0, 1.0))
        inside = np.sin((n + 1) * t) / np.sin(t)
        th = np.arccosh(np.maximum(ax, 1.0))
        outside = sign * np.sinh((n + 1) * th) / np.sinh(th)
    edge = sign * (n + 1.0)
    out = np.where(ax < 1.0, inside, np.where(ax > 1.0, outside, edge))
    return out[()]


def chebyshev_u_recurrence(n: int, x):
    """Same polynomial from ``U_{m+1} = 2x U_m - U_{m-1}``."""
    x = np.asarray(x, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return cur[()]


def _u_mp(n: int, x):
    prev, cur = mpmath.mpf(0), mpmath.mpf(1)
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def chi1(spec: PotentialSpec, q: int) -> float:
    """``-(b_S + d_{S-q+1})``; always negative."""
    if not 1 <= q <= spec.S:
        raise IndexError(f"order {q} outside 1..{spec.S}")
    m = stage_metrics(spec)
    return -float(m.b[spec.S] + m.d[spec.S - q])


def chi2(spec: PotentialSpec, q: int, h: int) -> float:
    """``d_{S-h+1} - d_{S-q+1}`` for ``h < q``; negative because gaps shrink with stage."""
    if not 1 <= h < q <= spec.S:
        raise IndexError(f"need 1 <= h < q <= S (got q={q}, h={h})")
    m = stage_metrics(spec)
    return float(m.d[spec.S - h] - m.d[spec.S - q])


def _chi_tables(spec: PotentialSpec):
    m = stage_metrics(spec)
    S = spec.S
    c1 = np.array([-(m.b[S] + m.d[S - q]) for q in range(1, S + 1)])
    return m.b[S], c1


@dataclass
class _Terms:
    """Per-k ingredients of the closed form, arrays over k."""

    k: np.ndarray
    sm_sin: np.ndarray  # sigma_- sin(ktilde b_S), real
    gamma: np.ndarray  # (S, K)
    log_u: np.ndarray  # (S, K) log|U_{N-1}(Gamma_q)|
    log_x: np.ndarray  # log of the term added to 1 in the denominator


def _gamma_recursion(N, A, C, u_hi, u_lo):
    """Sequential Bloch arguments for one k (or a vector of k).

    ``A[q]`` is |M22| cos(tau - k chi1(q)); ``C[q][h]`` is cos(k chi2(q, h)).
    The lower-level corrections enter with a minus sign: expanding the
    N-fold block matrix as ``U_{N-1} M - U_{N-2} 1`` and taking half its
    trace gives ``-U_{N-2}(Gamma_h)`` for every earlier level h.
    """
    S = len(A)
    gam, U1, U2 = [], [], []
    for q in range(S):
        prod = 1
        for p in range(q):
            prod = prod * U1[p]
        g = A[q] * prod
        for h in range(q):
            tail = 1
            for p in range(h + 1, q):
                tail = tail * U1[p]
            g = g - C[q][h] * U2[h] * tail
        gam.append(g)
        U1.append(u_hi(g))
        U2.append(u_lo(g))
    return gam, U1


def _closed_form_terms(spec: PotentialSpec, k) -> _Terms:
    check_spec(spec)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k <= 0):
        raise ValueError("k must be positive")
    N, S = spec.N, spec.S
    bS, c1 = _chi_tables(spec)
    ctx = WaveContext(k, spec.V)
    _, sm, _ = sigma_sin(ctx, bS)
    m22 = barrier_matrix(ctx, bS).m22
    mag, tau = np.abs(m22), np.angle(m22)
    A = [mag * np.cos(tau - k * c1[q]) for q in range(S)]
    C = [[np.cos(k * (c1[q] - c1[h])) for h in range(q)] for q in range(S)]

    with np.errstate(over="ignore", invalid="ignore"):
        gam, U1 = _gamma_recursion(
            N, A, C, lambda g: chebyshev_u(N - 1, g), lambda g: chebyshev_u(N - 2, g)
        )
    gamma = np.array(gam).reshape(S, k.size)
    U = np.array(U1).reshape(S, k.size)
    with np.errstate(divide="ignore"):
        log_u = np.log(np.abs(U))
    bad = ~np.all(np.isfinite(gamma) & np.isfinite(U) & (np.abs(gamma) < OVERFLOW_GUARD)
                  & (np.abs(U) < OVERFLOW_GUARD), axis=0)
    for i in np.flatnonzero(bad):
        g_mp, u_mp = _mp_recursion(N, [a[i] for a in A], [[c[i] for c in row] for row in C])
        gamma[:, i] = [float(g) if abs(g) < 1e300 else math.copysign(math.inf, g) for g in g_mp]
        log_u[:, i] = [float(mpmath.log(abs(u))) if u != 0 else -math.inf for u in u_mp]
    with np.errstate(divide="ignore"):
        log_x = 2.0 * np.log(np.abs(sm)) + 2.0 * log_u.sum(axis=0)
    # a zero barrier factor wins over any Chebyshev growth: T = 1 exactly
    log_x = np.where(sm == 0, -np.inf, log_x)
    return _Terms(k=k, sm_sin=sm, gamma=gamma, log_u=log_u, log_x=log_x)


def _mp_recursion(N, A, C):
    with mpmath.workprec(53):
        A = [mpmath.mpf(a) for a in A]
        C = [[mpmath.mpf(c) for c in row] for row in C]
        return _gamma_recursion(N, A, C, lambda g: _u_mp(N - 1, g), lambda g: _u_mp(N - 2, g))


def _shape_like(k, arr):
    return arr.reshape(np.shape(k)) if np.ndim(k) else arr[0]


@dataclass(frozen=True)
class BlochArgs:
    gamma: np.ndarray  # Gamma_1..Gamma_S
    u_products: np.ndarray  # running products prod_{p<=q} U_{N-1}(Gamma_p)

    def __len__(self) -> int:
        return len(self.gamma)


def bloch_args(spec: PotentialSpec, k: float) -> BlochArgs:
    t = _closed_form_terms(spec, k)
    g = t.gamma[:, 0]
    u = chebyshev_u(spec.N - 1, g) if spec.S else np.zeros(0)
    return BlochArgs(gamma=g, u_products=np.cumprod(np.atleast_1d(u)))


def log_denominator(spec: PotentialSpec, k):
    """``log(|sigma_- sin|^2 prod U^2)``, so that ``T = 1/(1 + exp(.))``."""
    return _shape_like(k, _closed_form_terms(spec, k).log_x)


def transmission_closed_form(spec: PotentialSpec, k):
    x = log_denominator(spec, k)
    return np.exp(-np.logaddexp(0.0, x))


def reflection_closed_form(spec: PotentialSpec, k):
    """``1 - T`` evaluated without cancellation, accurate for tiny reflection."""
    x = log_denominator(spec, k)
    return np.exp(x - np.logaddexp(0.0, x))


def log10_transmission(spec: PotentialSpec, k):
    """``log10 T``; finite even where T underflows."""
    return -np.logaddexp(0.0, log_denominator(spec, k)) / math.log(10.0)


def area_preserving_height(spec: PotentialSpec, V0: float) -> float:
    """Height ``V_S`` keeping the total barrier area at ``L * V0``."""
    b = stage_widths(spec)
    return spec.L * V0 / (spec.N**spec.S * b[spec.S])


@dataclass(frozen=True)
class ReflectionEstimate:
    estimate: float
    exact: float
    V_S: float
    valid: bool  # k**2 >= 100 V_S


def reflection_asymptotic(spec: PotentialSpec, V0: float, k: float) -> ReflectionEstimate:
    """Large-k reflection ``(V0 L / 2 N^S k)^2 prod U_{N-1}(Gamma_q)^2`` at height V_S."""
    VS = area_preserving_height(spec, V0)
    scaled = spec.replace(V=VS)
    t = _closed_form_terms(scaled, k)
    log_est = 2.0 * math.log(V0 * spec.L / (2.0 * spec.N**spec.S * k)) + 2.0 * float(t.log_u[:, 0].sum())
    x = float(t.log_x[0])
    exact = math.exp(x - np.logaddexp(0.0, x))
    return ReflectionEstimate(estimate=math.exp(log_est), exact=exact, V_S=VS, valid=k * k >= 100.0 * VS)


def laue(x, N: int):
    """N-slit interference function ``sin^2(Nx)/sin^2(x)`` (N^2 at the poles)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    x = np.asarray(x, dtype=float)
    s = np.sin(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sin(N * x) ** 2 / s**2
    return np.where(np.abs(s) < 1e-8, float(N * N), val)[()]


@dataclass(frozen=True)
class ScalingValue:
    value: float
    gap_regime: bool


def scaling_function(spec: PotentialSpec, k: float) -> ScalingValue:
    """Product of Laue functions over the Bloch angles ``arccos Gamma_q``.

    In a gap (some ``|Gamma_q| > 1``) the angle is not real and the squared
    Chebyshev product is returned instead, flagged.
    """
    t = _closed_form_terms(spec, k)
    g = t.gamma[:, 0]
    if np.all(np.abs(g) <= 1.0):
        return ScalingValue(float(np.prod(laue(np.arccos(g), spec.N))), False)
    return ScalingValue(float(np.exp(2.0 * t.log_u[:, 0].sum())), True)
