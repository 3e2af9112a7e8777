"""Tolerance policy used by every numerical predicate in the package.

Three scales, from matrix comparison down to integer rounding:

* ``eq_tol``   entrywise / Frobenius comparison of matrices,
* ``spec_tol`` spectrum and angle comparison,
* ``rank_tol`` integer rounding of traces and eigenvalue counts.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    eq_tol: float = 1e-9
    spec_tol: float = 1e-8
    rank_tol: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("eq_tol", "spec_tol", "rank_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2), got {value!r}")


DEFAULT_TOL = ToleranceConfig()
