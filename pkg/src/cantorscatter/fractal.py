"""Fractal dimension and lacunarity parameters of polyadic Cantor structures.

Both dimension formulas are negative when read literally (``ln zeta < 0``);
the magnitudes are returned, which is the convention the usual tabulated
values (0.6309 for the triadic set) follow.  Lacunarity parameters refer to
a unit span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .geometry import PotentialSpec, gap_width


def fractal_dimension(N: int, rho: float) -> float:
    """Similarity dimension ``ln N / ln rho``."""
    if N < 2:
        raise DomainError("N must be >= 2")
    if not rho > 1:
        raise DomainError(f"rho must exceed 1 (got {rho})")
    return math.log(N) / math.log(rho)


def fractal_dimension_alt(zeta: float) -> float:
    """Two-segment dimension ``|ln 2 / ln((1 - zeta)/2)|``.

    Only meaningful for N = 2; it coincides with ``fractal_dimension(2, 3)``
    at ``zeta = 1/3``.
    """
    base = (1.0 - zeta) / 2.0
    if not 0 < base < 1:
        raise DomainError(f"(1 - zeta)/2 = {base} outside (0, 1)")
    return abs(math.log(2.0) / math.log(base))


@dataclass(frozen=True)
class Descriptors:
    N: int
    zeta: float
    D: float
    g_c: float
    eps_min: float
    eps_reg: float
    eps_max: Optional[float]  # None where the parity formula divides by zero
    eps_reg_negative: bool = False
    eps_max_negative: bool = False

    @property
    def ordered(self) -> Optional[bool]:
        """``0 = eps_min < eps_reg < eps_max``; None when eps_max is not applicable."""
        if self.eps_max is None:
            return None
        return self.eps_min == 0 and self.eps_min < self.eps_reg < self.eps_max

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "zeta": self.zeta,
            "D": self.D,
            "g_c": self.g_c,
            "eps_min": self.eps_min,
            "eps_reg": self.eps_reg,
            "eps_max": self.eps_max if self.eps_max is not None else "n/a",
            "eps_reg_negative": self.eps_reg_negative,
            "eps_max_negative": self.eps_max_negative,
            "ordered": self.ordered if self.ordered is not None else "n/a",
        }


def lacunarity_parameters(N: int, zeta: float) -> Descriptors:
    """Outermost-gap parameters of an N-adic Cantor generator with scale ``zeta``.

    ``eps_reg`` (all gaps equal) is the minimum-lacunarity arrangement;
    ``eps_max`` uses ``g_c/(N-2)`` for even N and ``g_c/(N-3)`` for odd N,
    which leaves it undefined for N = 2 and N = 3.
    """
    if N < 2:
        raise DomainError("N must be >= 2")
    if not 0 < zeta < 1.0 / N:
        raise DomainError(f"zeta = {zeta} outside (0, 1/N)")
    g_c = 1.0 - zeta * N
    reg = g_c / (N - 1)
    denom = N - 2 if N % 2 == 0 else N - 3
    mx = g_c / denom if denom != 0 else None
    return Descriptors(
        N=N,
        zeta=zeta,
        D=fractal_dimension(N, 1.0 / zeta),
        g_c=g_c,
        eps_min=0.0,
        eps_reg=abs(reg),
        eps_max=abs(mx) if mx is not None else None,
        eps_reg_negative=reg < 0,
        eps_max_negative=mx is not None and mx < 0,
    )


def ucp_epsilon(spec: PotentialSpec) -> float:
    """Lacunarity parameter of a UCP spec: its first-stage gap ``d_1``."""
    if spec.S < 1:
        raise DomainError("the first-stage gap needs S >= 1")
    return gap_width(spec, 1)
