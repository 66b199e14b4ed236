"""Stage geometry of the generalized unified Cantor potential.

A spec ``(N, rho, mu, nu, S)`` on a span ``L`` is built by repeatedly
splitting every barrier segment into ``N`` children.  At stage ``s`` each
parent of width ``b[s-1]`` loses ``N - 1`` equal gaps of width
``b[s-1] / rho**(mu + nu*s)``, placed symmetrically, so every leaf has
the same width ``b[s]``.  Stage indices follow ``b[0] = L`` with gaps and
super-periods counted from 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpec, LayoutTooLarge

DEFAULT_MAX_SEGMENTS = 10**6


@dataclass(frozen=True)
class PotentialSpec:
    """One UCP instance: ``N`` children per segment, scaling ``rho**(mu + nu*s)``.

    ``L`` is the total span and ``V`` the barrier height (hbar = 2m = 1).
    """

    N: int
    rho: float
    mu: float
    nu: float
    S: int
    L: float = 1.0
    V: float = 0.0

    def replace(self, **changes) -> "PotentialSpec":
        return replace(self, **changes)

    def removal_exponent(self, s: int) -> float:
        return self.mu + self.nu * s

    def removal_factor(self, s: int) -> float:
        """Width fraction ``1 - (N-1)/rho**(mu+nu*s)`` kept by the children at stage ``s``."""
        return 1.0 - (self.N - 1) / self.rho ** self.removal_exponent(s)


def validate_spec(spec: PotentialSpec) -> list[str]:
    """Return the violated constraints of ``spec``; an empty list means valid."""
    problems = []
    if not isinstance(spec.N, (int, np.integer)) or spec.N < 2:
        problems.append(f"N must be an integer >= 2 (got {spec.N!r})")
    if not isinstance(spec.S, (int, np.integer)) or spec.S < 0:
        problems.append(f"S must be an integer >= 0 (got {spec.S!r})")
    for name in ("rho", "mu", "nu", "L", "V"):
        if not np.isfinite(getattr(spec, name)):
            problems.append(f"{name} must be finite")
    if problems:
        return problems
    if not spec.rho > 1:
        problems.append(f"rho must exceed 1 (got {spec.rho})")
    if not spec.L > 0:
        problems.append(f"L must be positive (got {spec.L})")
    if spec.V < 0:
        problems.append(f"V must be non-negative (got {spec.V})")
    if spec.mu == 0 and spec.nu == 0:
        problems.append("(mu, nu) simultaneously zero")
    if spec.rho > 1:
        for j in range(1, spec.S + 1):
            if not spec.removal_factor(j) > 0:
                problems.append(f"factor non-positive at j={j}")
    return problems


def check_spec(spec: PotentialSpec) -> None:
    problems = validate_spec(spec)
    if problems:
        raise InvalidSpec("; ".join(problems))


def q_pochhammer(alpha: float, beta: float, p: int) -> float:
    """Finite q-Pochhammer product ``prod_{j<p} (1 - alpha*beta**j)``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    out = 1.0
    term = alpha
    for _ in range(p):
        out *= 1.0 - term
        term *= beta
    return out


def stage_widths(spec: PotentialSpec) -> np.ndarray:
    """Segment widths ``b[0..S]`` from the explicit product form."""
    check_spec(spec)
    b = np.empty(spec.S + 1)
    prod = 1.0
    b[0] = spec.L
    for s in range(1, spec.S + 1):
        prod *= spec.removal_factor(s)
        b[s] = spec.L * prod / spec.N**s
    return b


def segment_width(spec: PotentialSpec, s: int) -> float:
    if not 0 <= s <= spec.S:
        raise IndexError(f"stage {s} outside 0..{spec.S}")
    return float(stage_widths(spec)[s])


def gap_width(spec: PotentialSpec, s: int) -> float:
    """Gap ``d[s] = b[s-1] / rho**(mu + nu*s)`` opened between siblings at stage ``s``."""
    if not 1 <= s <= spec.S:
        raise IndexError(f"gap stage {s} outside 1..{spec.S}")
    b = stage_widths(spec)
    return float(b[s - 1] / spec.rho ** spec.removal_exponent(s))


def super_period(spec: PotentialSpec, q: int) -> float:
    """Spacing ``r_q`` between consecutive copies at hierarchy level ``q``.

    Level 1 repeats the leaf barrier; level ``S`` repeats the largest blocks.
    """
    if not 1 <= q <= spec.S:
        raise IndexError(f"order {q} outside 1..{spec.S}")
    b = stage_widths(spec)
    s = spec.S + 1 - q
    return float(b[s] + b[s - 1] / spec.rho ** spec.removal_exponent(s))


@dataclass(frozen=True)
class StageMetrics:
    b: np.ndarray  # b[0..S]
    d: np.ndarray  # d[1..S] stored at index s-1
    r: np.ndarray  # r[1..S] stored at index q-1

    def gap(self, s: int) -> float:
        return float(self.d[s - 1])

    def period(self, q: int) -> float:
        return float(self.r[q - 1])


def stage_metrics(spec: PotentialSpec) -> StageMetrics:
    b = stage_widths(spec)
    S = spec.S
    d = np.array([b[s - 1] / spec.rho ** spec.removal_exponent(s) for s in range(1, S + 1)])
    r = np.array([b[S + 1 - q] + d[S - q] for q in range(1, S + 1)])
    return StageMetrics(b=b, d=d, r=r)


@dataclass(frozen=True)
class SegmentLayout:
    """Leaf barriers of one spec as start coordinates plus a common width."""

    starts: np.ndarray
    width: float
    spec: PotentialSpec

    @property
    def ends(self) -> np.ndarray:
        return self.starts + self.width

    @property
    def segments(self) -> list[tuple[float, float]]:
        return [(float(a), float(a + self.width)) for a in self.starts]

    def __len__(self) -> int:
        return len(self.starts)


def build_layout(spec: PotentialSpec, max_segments: int = DEFAULT_MAX_SEGMENTS) -> SegmentLayout:
    """Explicit stage-``S`` layout by recursive subdivision of ``[0, L]``.

    Every leaf start is its parent's start plus a child offset, so each
    coordinate carries at most ``S`` rounding steps.
    """
    check_spec(spec)
    count = spec.N**spec.S
    if count > max_segments:
        raise LayoutTooLarge(f"N**S = {count} segments exceeds cap {max_segments}")
    m = stage_metrics(spec)
    starts = np.zeros(1)
    for s in range(1, spec.S + 1):
        pitch = m.b[s] + m.d[s - 1]
        offsets = pitch * np.arange(spec.N)
        starts = (starts[:, None] + offsets[None, :]).ravel()
    return SegmentLayout(starts=starts, width=float(m.b[spec.S]), spec=spec)
