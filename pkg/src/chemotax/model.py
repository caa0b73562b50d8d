"""Reaction kinetics and coefficients of the chemotaxis model.

The system couples an active bacterial density ``u``, a chemoattractant
concentration ``c`` and a nutrient density ``n``.  Two rate functions
control the reactions:

* the activation rate ``g``: smooth, increasing, ``g(0) = 0``, saturating
  at a finite level ``G0``;
* the deactivation rate ``b``: smooth, positive, decreasing, with
  ``b(0) = B0 > 0``.

Two closed-form families with these properties are built in, plus a
tabulated family for measured rates:

``saturating-rational``
    ``g(u) = G0 u / (g_scale + u)``,  ``b(n) = B0 / (1 + n / b_scale)``.

``saturating-exponential``
    ``g(u) = G0 (1 - exp(-u / g_scale))``,  ``b(n) = B0 exp(-n / b_scale)``.

``custom-table``
    piecewise-linear interpolation of ``(x, value)`` tables with strictly
    increasing abscissae; values are held constant beyond the table range.

``validate_kinetics`` samples a user-chosen window and reports each
structural hypothesis separately; it is what the ``validate`` CLI
subcommand runs before committing to a simulation.  Note that a sampled
check can only certify behaviour on the sampled window, never globally.

The constructor accepts ``G0 = 0`` or ``B0 = 0`` so that degenerate
kinetics (reactions switched off) remain constructible for conservation
tests; ``validate_kinetics`` flags them as hypothesis violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

FAMILIES = ("saturating-rational", "saturating-exponential", "custom-table")

# Relative slack used when comparing sampled values against exact bounds.
_TINY = 1.0e-12


def _as_table(table) -> Tuple[np.ndarray, np.ndarray]:
    x, y = table
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size or x.size < 2:
        raise ValueError("kinetics table needs two equal-length 1-d columns with at least 2 rows")
    if not np.all(np.diff(x) > 0):
        raise ValueError("kinetics table abscissae must be strictly increasing")
    return x, y


@dataclass(frozen=True)
class KineticsSpec:
    """Choice of rate family and its parameters.

    Parameters
    ----------
    family : str
        One of ``saturating-rational``, ``saturating-exponential``,
        ``custom-table``.
    G0, B0 : float
        Saturation level of ``g`` and value of ``b`` at zero nutrient.
        Nonnegative; zero is accepted only for degenerate test kinetics.
    g_scale, b_scale : float
        Positive shape parameters of the closed-form families.
    g_table, b_table : pair of arrays, optional
        Sample tables for the ``custom-table`` family.
    """

    family: str = "saturating-rational"
    G0: float = 1.0
    B0: float = 1.0
    g_scale: float = 1.0
    b_scale: float = 1.0
    g_table: Optional[Tuple[np.ndarray, np.ndarray]] = None
    b_table: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kinetics family {self.family!r}; expected one of {FAMILIES}")
        if not (np.isfinite(self.G0) and self.G0 >= 0):
            raise ValueError("G0 must be finite and >= 0")
        if not (np.isfinite(self.B0) and self.B0 >= 0):
            raise ValueError("B0 must be finite and >= 0")
        if not (self.g_scale > 0 and self.b_scale > 0):
            raise ValueError("g_scale and b_scale must be positive")
        if self.family == "custom-table":
            if self.g_table is None or self.b_table is None:
                raise ValueError("custom-table kinetics require both g_table and b_table")
            object.__setattr__(self, "g_table", _as_table(self.g_table))
            object.__setattr__(self, "b_table", _as_table(self.b_table))
        elif self.g_table is not None or self.b_table is not None:
            raise ValueError(f"tables are only meaningful for the custom-table family, not {self.family!r}")

    def slope_bound_g(self) -> Optional[float]:
        """Analytic bound on g' for closed-form families, None for tables."""
        if self.family == "custom-table":
            return None
        # Both built-in families have g'(0) = G0 / g_scale as their maximum.
        return self.G0 / self.g_scale

    def slope_bound_b(self) -> Optional[float]:
        if self.family == "custom-table":
            return None
        return self.B0 / self.b_scale


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the coupled system.

    ``alpha`` scales chemoattractant production, ``beta`` its decay,
    ``gamma`` the nutrient consumption rate, and ``eps >= 0`` the strength
    of the regularizing diffusion of the active density (``eps = 0`` is
    the hyperbolic limit).
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    eps: float = 0.0
    kinetics: KineticsSpec = field(default_factory=KineticsSpec)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be finite and positive, got {val!r}")
        if not (np.isfinite(self.eps) and self.eps >= 0):
            raise ValueError(f"eps must be finite and >= 0, got {self.eps!r}")


def g_eval(u, kin: KineticsSpec):
    """Activation rate g evaluated on a scalar or array of densities.

    Raises ``ValueError`` for negative input: the rate is only defined on
    nonnegative densities.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("g is only defined for nonnegative density values")
    if kin.family == "saturating-rational":
        out = kin.G0 * u / (kin.g_scale + u)
    elif kin.family == "saturating-exponential":
        out = kin.G0 * (-np.expm1(-u / kin.g_scale))
    else:
        x, y = kin.g_table
        out = np.interp(u, x, y)
    return out if out.ndim else float(out)


def b_eval(n, kin: KineticsSpec):
    """Deactivation rate b evaluated on a scalar or array of densities."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValueError("b is only defined for nonnegative density values")
    if kin.family == "saturating-rational":
        out = kin.B0 / (1.0 + n / kin.b_scale)
    elif kin.family == "saturating-exponential":
        out = kin.B0 * np.exp(-n / kin.b_scale)
    else:
        x, y = kin.b_table
        out = np.interp(n, x, y)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    where: float
    detail: str = ""

    def __str__(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: worst {self.worst:.6g} at {self.where:.6g} {self.detail}".rstrip()


@dataclass(frozen=True)
class ValidationReport:
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        return "\n".join(str(c) for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def validate_kinetics(
    kin: KineticsSpec,
    u_max: float = 10.0,
    n_max: float = 10.0,
    samples: int = 201,
    table_slope_cap: Optional[float] = None,
) -> ValidationReport:
    """Check the structural hypotheses on g and b over a sampled window.

    Each hypothesis becomes one named check with the worst violating
    sample.  Closed-form families are compared against their analytic
    derivative bound; tabulated rates carry no such bound, so their
    difference quotients are checked against ``table_slope_cap``
    (default ``1e3 * level / window``).  Always returns a report, never
    raises on a failing hypothesis.
    """
    if samples < 3:
        raise ValueError("need at least 3 samples")
    if not (u_max > 0 and n_max > 0):
        raise ValueError("sampling windows must be positive")

    checks = []

    def add(name, passed, worst, where, detail=""):
        checks.append(CheckResult(name, bool(passed), float(worst), float(where), detail))

    add("G0 positive", kin.G0 > 0, kin.G0, 0.0)
    add("B0 positive", kin.B0 > 0, kin.B0, 0.0)

    ug = np.linspace(0.0, u_max, samples)
    gv = g_eval(ug, kin)
    add("g(0) = 0", abs(gv[0]) <= _TINY * max(kin.G0, 1.0), gv[0], 0.0)

    dg = np.diff(gv)
    i = int(np.argmin(dg))
    add("g nondecreasing", np.all(dg >= -_TINY * max(kin.G0, 1.0)), dg[i], ug[i],
        "(smallest sample increment)")

    i = int(np.argmax(gv))
    add("g bounded by G0", gv[i] <= kin.G0 * (1.0 + _TINY) + _TINY, gv[i], ug[i])

    i = int(np.argmin(gv[1:])) + 1
    add("g positive on (0, u_max]", np.all(gv[1:] > 0) or kin.G0 == 0, gv[i], ug[i])

    quot = np.abs(dg) / np.diff(ug)
    bound = kin.slope_bound_g()
    if bound is None:
        bound = table_slope_cap if table_slope_cap is not None else 1.0e3 * max(kin.G0, 1.0) / u_max
        detail = "(table quotient cap)"
    else:
        bound = 1.05 * bound
        detail = "(analytic bound + 5%)"
    i = int(np.argmax(quot))
    add("g slope bounded", quot[i] <= bound or kin.G0 == 0, quot[i], ug[i], detail)

    nb = np.linspace(0.0, n_max, samples)
    bv = b_eval(nb, kin)
    add("b(0) = B0", abs(bv[0] - kin.B0) <= _TINY * max(kin.B0, 1.0), bv[0], 0.0)

    i = int(np.argmin(bv))
    add("b positive", np.all(bv > 0), bv[i], nb[i])

    db = np.diff(bv)
    i = int(np.argmax(db))
    add("b nonincreasing", np.all(db <= _TINY * max(kin.B0, 1.0)), db[i], nb[i],
        "(largest sample increment)")

    quot = np.abs(db) / np.diff(nb)
    bound = kin.slope_bound_b()
    if bound is None:
        bound = table_slope_cap if table_slope_cap is not None else 1.0e3 * max(kin.B0, 1.0) / n_max
        detail = "(table quotient cap)"
    else:
        bound = 1.05 * bound
        detail = "(analytic bound + 5%)"
    i = int(np.argmax(quot))
    add("b slope bounded", quot[i] <= bound or kin.B0 == 0, quot[i], nb[i], detail)

    return ValidationReport(tuple(checks))
