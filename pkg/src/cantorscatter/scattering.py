"""Brute-force transfer matrices for stacks of rectangular barriers.

Units: hbar = 2m = 1, so E = k**2 and the in-barrier wavenumber is
``ktilde = sqrt(k**2 - V)`` (imaginary below the barrier top).

Matrix convention: a matrix maps the plane-wave amplitudes ``(A, B)`` of
``A exp(ikx) + B exp(-ikx)`` on the right of a region to those on its left.
``barrier_matrix`` is the unit-cell matrix for a barrier occupying
``[0, b]`` with both sides referenced to ``x = 0``.  A barrier starting at
``x0`` is ``P(x0) M P(-x0)`` with ``P = propagation_matrix``, so a stack
composes as ``M P(p1) M P(p2) M ...`` where each ``p`` is the start-to-start
pitch between consecutive barriers (width plus the gap that follows).

All functions broadcast over an array of ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEnergy, NonPhysicalMatrix
from .geometry import DEFAULT_MAX_SEGMENTS, PotentialSpec, SegmentLayout, build_layout

DEGENERATE_BAND = 1e-6  # in units of k**2
SERIES_CUTOFF = 1e-6  # |ktilde * b| below which sin(ktilde b)/ktilde uses its series


@dataclass(frozen=True)
class WaveContext:
    k: np.ndarray | float
    V: float

    def __post_init__(self):
        if np.any(np.asarray(self.k) <= 0):
            raise ValueError("k must be positive")

    @property
    def kk(self):
        k = np.asarray(self.k)
        return k if k.dtype.kind == "f" else k.astype(float)

    @property
    def ktilde_sq(self):
        return self.kk**2 - self.V

    @property
    def ktilde(self):
        return np.sqrt(self.ktilde_sq + 0j)

    @property
    def degenerate(self):
        return np.abs(self.ktilde_sq) < DEGENERATE_BAND


@dataclass(frozen=True)
class TransferMatrix:
    """Stack of 2x2 complex matrices, shape ``(..., 2, 2)``."""

    m: np.ndarray

    @classmethod
    def from_entries(cls, m11, m12, m21, m22) -> "TransferMatrix":
        dtype = np.result_type(complex, m11, m12, m21, m22)
        m11, m12, m21, m22 = np.broadcast_arrays(*(np.asarray(x, dtype=dtype) for x in (m11, m12, m21, m22)))
        return cls(np.stack([np.stack([m11, m12], -1), np.stack([m21, m22], -1)], -2))

    @classmethod
    def identity(cls, shape=()) -> "TransferMatrix":
        return cls(np.broadcast_to(np.eye(2, dtype=complex), tuple(shape) + (2, 2)).copy())

    m11 = property(lambda self: self.m[..., 0, 0])
    m12 = property(lambda self: self.m[..., 0, 1])
    m21 = property(lambda self: self.m[..., 1, 0])
    m22 = property(lambda self: self.m[..., 1, 1])

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(self.m @ other.m)

    @property
    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    def flux_residual(self):
        """``|m22|**2 - |m12|**2 - 1``; zero for a lossless stack at E > 0."""
        return np.abs(self.m22) ** 2 - np.abs(self.m12) ** 2 - 1.0


def sigma_pm(ctx: WaveContext):
    """``sigma_pm = (k/ktilde +- ktilde/k) / 2``; complex below the barrier top."""
    if np.any(ctx.degenerate):
        raise DegenerateEnergy("|k^2 - V| below the degenerate band; use barrier_matrix")
    k = ctx.kk
    kt = ctx.ktilde
    return 0.5 * (k / kt + kt / k), 0.5 * (k / kt - kt / k)


def _sin_over_ktilde(ctx: WaveContext, b: float):
    """``sin(ktilde b)/ktilde``, real in every regime, with the E = V series branch."""
    kt = ctx.ktilde
    z = kt * b
    z2 = ctx.ktilde_sq * b * b
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(z) / kt
    series = b * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
    return np.where(small, series, direct).real


def sigma_sin(ctx: WaveContext, b: float):
    """``(sigma_+ sin(ktilde b), sigma_- sin(ktilde b), cos(ktilde b))``.

    Written through ``sin(ktilde b)/ktilde`` so E = V needs no special case:
    ``sigma_- sin = V sk / 2k`` and ``sigma_+ sin = (2k^2 - V) sk / 2k``.
    """
    k = ctx.kk
    sk = _sin_over_ktilde(ctx, b)
    cos = np.cos(ctx.ktilde * b).real
    sp = (2.0 * k * k - ctx.V) * sk / (2.0 * k)
    sm = ctx.V * sk / (2.0 * k)
    return sp, sm, cos


def barrier_matrix(ctx: WaveContext, b: float) -> TransferMatrix:
    if b < 0:
        raise ValueError("barrier width must be non-negative")
    k = ctx.kk
    sp, sm, cos = sigma_sin(ctx, b)
    phase = np.exp(1j * k * b)
    return TransferMatrix.from_entries(
        phase * (cos - 1j * sp),
        1j * sm,
        -1j * sm,
        (cos + 1j * sp) / phase,
    )


def propagation_matrix(k, d: float) -> TransferMatrix:
    """Reference-plane shift ``diag(exp(-ikd), exp(ikd))`` over free space."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    ph = np.exp(-1j * np.asarray(k, dtype=float) * d)
    return TransferMatrix.from_entries(ph, 0, 0, 1 / ph)


def transmission_from_matrix(M: TransferMatrix):
    """``(T, R) = (1/|m22|^2, |m12|^2/|m22|^2)``."""
    a22 = np.abs(M.m22)
    if np.any(a22 < 1 - 1e-9):
        raise NonPhysicalMatrix("|m22| < 1: matrix does not conserve flux")
    T = 1.0 / a22**2
    R = (np.abs(M.m12) / a22) ** 2
    return np.asarray(T, dtype=float)[()], np.asarray(R, dtype=float)[()]


def _pairwise_product(mats: np.ndarray) -> np.ndarray:
    """Ordered product of ``mats[..., i, :, :]`` over ``i`` by pairwise reduction."""
    while mats.shape[-3] > 1:
        n = mats.shape[-3]
        head = mats[..., : n - n % 2, :, :]
        prod = head[..., 0::2, :, :] @ head[..., 1::2, :, :]
        if n % 2:
            prod = np.concatenate([prod, mats[..., n - 1 :, :, :]], axis=-3)
        mats = prod
    return mats[..., 0, :, :]


def compose_layout(layout: SegmentLayout, k, V: float, reverse: bool = False, chunk: int = 64) -> TransferMatrix:
    """Multiply the barrier matrices of every segment in the layout.

    The ordered product ``M P(p1) M P(p2) ... M`` is reduced pairwise in
    extended precision (``np.longdouble``): under deep tunneling the unit
    matrix entries grow like ``exp(kappa b)`` and double-precision rounding of
    them alone can break flux conservation at the 1e-10 level.
    ``reverse`` composes the mirror image ``x -> L - x`` of the layout, i.e.
    the same stack seen by a wave incident from the right.
    """
    k = np.asarray(k, dtype=float)
    flat = np.atleast_1d(k)
    starts = layout.starts
    if reverse:
        starts = np.sort(layout.spec.L - layout.ends)
    pitches = np.diff(starts)
    out = np.empty(flat.shape + (2, 2), dtype=np.clongdouble)
    for lo in range(0, flat.size, chunk):
        kc = flat[lo : lo + chunk].astype(np.longdouble)
        B = barrier_matrix(WaveContext(kc, V), layout.width).m
        ph = np.exp(-1j * kc[:, None] * pitches[None, :])
        # step i = P(p_i) @ B: row 0 of B scaled by exp(-ikp), row 1 by exp(+ikp)
        steps = np.empty((kc.size, pitches.size + 1, 2, 2), dtype=np.clongdouble)
        steps[:, 0] = B
        steps[:, 1:, 0, :] = ph[..., None] * B[:, None, 0, :]
        steps[:, 1:, 1, :] = B[:, None, 1, :] / ph[..., None]
        out[lo : lo + chunk] = _pairwise_product(steps)
    return TransferMatrix(out.reshape(k.shape + (2, 2)))


def brute_force_matrix(spec: PotentialSpec, k, max_segments: int = DEFAULT_MAX_SEGMENTS, reverse: bool = False):
    return compose_layout(build_layout(spec, max_segments), k, spec.V, reverse=reverse)


def brute_force_transmission(spec: PotentialSpec, k, max_segments: int = DEFAULT_MAX_SEGMENTS):
    """Transmission of the explicit stage-S stack; cost O(N**S) per k."""
    T, _ = transmission_from_matrix(brute_force_matrix(spec, k, max_segments))
    return T
