"""Correlation measures as (component kernels, aggregator) pairs.

Each measure writes a feature-response correlation strength as
``omega = g(theta_1, ..., theta_s)`` where every component ``theta_h`` has an
unbiased symmetric kernel.  Built-ins: ``pearson``, ``kendall``, ``sirs`` and
``dc`` (squared distance correlation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import fast
from .exceptions import DegenerateDenominator
from .kernels import (
    DC_KERNELS,
    KENDALL_KERNEL,
    PEARSON_KERNELS,
    SIRS_KERNEL,
    ComponentKernel,
)

__all__ = [
    "MeasureSpec",
    "g_pearson",
    "g_kendall",
    "g_sirs",
    "g_dc",
    "builtin_measure",
    "register_measure",
    "MEASURES",
]

EPS = 1e-12


def g_pearson(t1, t2, t3, t4, t5, eps=EPS):
    """``|(E XY - E X E Y) / sqrt(var X var Y)|`` from raw moments."""
    vx = t4 - t2 * t2
    vy = t5 - t3 * t3
    if not vx > eps:
        raise DegenerateDenominator("E X^2 - (E X)^2", vx)
    if not vy > eps:
        raise DegenerateDenominator("E Y^2 - (E Y)^2", vy)
    return abs((t1 - t2 * t3) / math.sqrt(vx * vy))


def g_kendall(t1):
    return abs(t1 - 0.25)


def g_sirs(t1):
    # population value is >= 0; sampling noise below 0 is clamped
    return max(t1, 0.0)


def g_dc(t1, t2, t3, t4, t5, t6, t7, t8, eps=EPS):
    """Squared distance correlation from its eight components.

    The numerator (distance covariance) is clamped at 0; a nonpositive
    distance variance raises :class:`DegenerateDenominator`.
    """
    dvar_y = t5 + t2 * t2 - 2.0 * t6
    dvar_x = t7 + t3 * t3 - 2.0 * t8
    if not dvar_y > eps:
        raise DegenerateDenominator("distance variance of Y", dvar_y)
    if not dvar_x > eps:
        raise DegenerateDenominator("distance variance of X", dvar_x)
    num = max(t1 + t2 * t3 - 2.0 * t4, 0.0)
    return num / math.sqrt(dvar_y * dvar_x)


@dataclass(frozen=True)
class MeasureSpec:
    """A correlation measure.

    Attributes
    ----------
    name : str
    kernels : tuple of ComponentKernel
        Component kernels, in the order ``aggregate`` expects its arguments.
    aggregate : callable
        ``g``; takes ``s`` reals and returns a finite value ``>= 0`` or
        raises :class:`DegenerateDenominator`.
    requires_standardized_features : bool
        Features are standardized globally before kernel evaluation.
    batch : callable, optional
        Vectorized ``(Xt, y, offsets) -> (q, s, m)`` local U-statistics.
        Without it, estimation falls back to enumeration.
    """

    name: str
    kernels: tuple[ComponentKernel, ...]
    aggregate: Callable[..., float]
    requires_standardized_features: bool = False
    batch: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))
        if not self.kernels:
            raise ValueError("a measure needs at least one kernel")

    @property
    def s(self) -> int:
        return len(self.kernels)

    @property
    def max_degree(self) -> int:
        return max(k.degree for k in self.kernels)

    def g(self, components: Sequence[float]) -> float:
        return self.aggregate(*(float(c) for c in components))


MEASURES: dict[str, MeasureSpec] = {}


def register_measure(spec: MeasureSpec, replace: bool = False) -> MeasureSpec:
    if spec.name in MEASURES and not replace:
        raise ValueError(f"measure {spec.name!r} already registered")
    MEASURES[spec.name] = spec
    return spec


register_measure(MeasureSpec("pearson", PEARSON_KERNELS, g_pearson, batch=fast.pearson_table))
register_measure(MeasureSpec("kendall", (KENDALL_KERNEL,), g_kendall, batch=fast.kendall_table))
register_measure(
    MeasureSpec("sirs", (SIRS_KERNEL,), g_sirs, requires_standardized_features=True,
                batch=fast.sirs_table)
)
register_measure(MeasureSpec("dc", DC_KERNELS, g_dc, batch=fast.dc_table))

BUILTIN = ("pearson", "kendall", "sirs", "dc")


def builtin_measure(name: str) -> MeasureSpec:
    """Look up a registered measure by name."""
    try:
        return MEASURES[name]
    except KeyError:
        raise ValueError(
            f"unknown measure {name!r}; choose from {', '.join(sorted(MEASURES))}"
        ) from None
