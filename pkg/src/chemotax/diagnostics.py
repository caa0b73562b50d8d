"""Per-step diagnostics, conservation residuals and blow-up verdicts.

A :class:`DiagRecord` summarizes one state: masses, extrema, norms, the
two structural residuals and the co-integrated comparison-ODE bound.  The
residuals test the discrete scheme against the exact balance laws of the
model:

* mass law: d/dt integral(u + n/gamma) = -integral(b(n) u), so the total
  mass is nonincreasing and its decay rate is the deactivation sink;

* L^p power identity: (1/p) d/dt ||u||_p^p equals
  ``alpha (p-1)/p int u^{p+1} - beta (p-1)/p int c u^p
  + int (g(u) n - b(n)) u^p``,
  minus, for eps > 0, the dissipation ``4 eps (p-1)/p^2`` times the
  Dirichlet energy of ``u^{p/2}``.

Both residuals are first order in the step size, which is what the
halving checks in the acceptance suite measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .grid import Field, dirichlet_energy, integrate, lp_norm, w1p_norm
from .model import ModelParams, b_eval, g_eval

if TYPE_CHECKING:  # pragma: no cover - type hints only
    from .dynamics import State


@dataclass(frozen=True)
class DiagConfig:
    """Diagnostic exponent and blow-up thresholds.

    ``p`` is the norm exponent (> 1); ``blowup_factor`` triggers the
    norm-threshold verdict at ``factor * linf_u(0)``; ``ode_constant`` is
    the constant of the co-integrated growth bound.
    """

    p: float = 2.0
    blowup_factor: float = 1.0e4
    ode_constant: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 1):
            raise ValueError("p must be finite and > 1")
        if not (np.isfinite(self.blowup_factor) and self.blowup_factor > 1):
            raise ValueError("blowup_factor must be > 1")
        if not (np.isfinite(self.ode_constant) and self.ode_constant >= 0):
            raise ValueError("ode_constant must be finite and >= 0")


@dataclass(frozen=True)
class DiagRecord:
    t: float
    dt: float
    mass_u: float
    mass_n: float
    mass_total: float
    min_u: float
    max_u: float
    lp_u: float
    w1p_u: float
    linf_u: float
    min_n: float
    max_n: float
    min_c: float
    max_c: float
    mass_law_residual: float
    zzz_residual: float
    ode_bound: float


@dataclass(frozen=True)
class BlowupVerdict:
    """Outcome of a run: Completed, BlowupDetected or Aborted."""

    kind: str
    peak_linf: float
    t_detect: Optional[float] = None
    trigger: Optional[str] = None  # norm-threshold | dt-collapse
    reason: str = ""

    def __post_init__(self):
        if self.kind not in ("Completed", "BlowupDetected", "Aborted"):
            raise ValueError(f"unknown verdict kind {self.kind!r}")
        if self.kind == "BlowupDetected" and self.trigger not in ("norm-threshold", "dt-collapse"):
            raise ValueError(f"blow-up verdict needs a trigger, got {self.trigger!r}")


def mass_law_residual(
    prev_state: "State",
    prev_record: DiagRecord,
    cur_record: DiagRecord,
    params: ModelParams,
    m0: float,
) -> float:
    """|d/dt mass_total + deactivation sink|, normalized by the initial mass.

    The time derivative is the difference quotient between the two
    records; the sink ``integral(b(n) u)`` is evaluated at the earlier
    state (left endpoint, first-order consistent).
    """
    dt = cur_record.t - prev_record.t
    if dt <= 0:
        raise ValueError("records must be strictly ordered in time")
    rate = (cur_record.mass_total - prev_record.mass_total) / dt
    u = np.maximum(prev_state.u.values, 0.0)
    sink = integrate(Field(prev_state.u.grid, b_eval(prev_state.n.values, params.kinetics) * u))
    scale = m0 if m0 > 0 else 1.0
    return abs(rate + sink) / scale


def zzz_residual(
    prev_state: "State",
    prev_record: DiagRecord,
    cur_record: DiagRecord,
    params: ModelParams,
    p: float,
) -> float:
    """Defect of the discrete L^p power identity across two records.

    Left side: difference quotient of (1/p) ||u||_p^p.  Right side,
    evaluated entirely at the earlier state (left endpoint, matching the
    first-order splitting):
    ``alpha (p-1)/p int u^{p+1} - beta (p-1)/p int c u^p +
    int (g(u) n - b(n)) u^p``, minus the eps-dissipation term
    ``4 eps (p-1)/p^2 * dirichlet_energy(u^{p/2})`` when eps > 0.
    """
    dt = cur_record.t - prev_record.t
    if dt <= 0:
        raise ValueError("records must be strictly ordered in time")
    lhs = (cur_record.lp_u**p - prev_record.lp_u**p) / (p * dt)

    grid = prev_state.u.grid
    kin = params.kinetics
    u = np.maximum(prev_state.u.values, 0.0)
    up = u**p
    coeff = (p - 1.0) / p
    rhs = params.alpha * coeff * integrate(Field(grid, u * up))
    rhs -= params.beta * coeff * integrate(Field(grid, prev_state.c.values * up))
    rhs += integrate(Field(grid, (g_eval(u, kin) * prev_state.n.values - b_eval(prev_state.n.values, kin)) * up))
    if params.eps > 0:
        rhs -= (4.0 * params.eps * coeff / p) * dirichlet_energy(Field(grid, u ** (p / 2.0)))
    return abs(lhs - rhs)


def record(
    s: "State",
    dt: float,
    cfg: DiagConfig,
    params: ModelParams,
    prev_state: Optional["State"] = None,
    prev_record: Optional[DiagRecord] = None,
    m0: Optional[float] = None,
    ode_bound: float = math.nan,
) -> DiagRecord:
    """Summarize a state; residuals need the previous record, else NaN."""
    u, n, c = s.u.values, s.n.values, s.c.values
    mass_u = integrate(s.u)
    mass_n = integrate(s.n)
    rec = DiagRecord(
        t=float(s.t),
        dt=float(dt),
        mass_u=mass_u,
        mass_n=mass_n,
        mass_total=mass_u + mass_n / params.gamma,
        min_u=float(u.min()),
        max_u=float(u.max()),
        lp_u=lp_norm(s.u, cfg.p),
        w1p_u=w1p_norm(s.u, cfg.p),
        linf_u=float(np.abs(u).max()),
        min_n=float(n.min()),
        max_n=float(n.max()),
        min_c=float(c.min()),
        max_c=float(c.max()),
        mass_law_residual=math.nan,
        zzz_residual=math.nan,
        ode_bound=float(ode_bound),
    )
    if prev_state is not None and prev_record is not None:
        mres = mass_law_residual(prev_state, prev_record, rec, params,
                                 rec.mass_total if m0 is None else m0)
        zres = zzz_residual(prev_state, prev_record, rec, params, cfg.p)
        rec = replace(rec, mass_law_residual=mres, zzz_residual=zres)
    return rec


def detect_blowup(
    records: Sequence[DiagRecord],
    factor: float = 1.0e4,
    dt_min: Optional[float] = None,
    dt_collapsed: bool = False,
) -> Optional[BlowupVerdict]:
    """Blow-up verdict from a trajectory prefix, or None to keep going.

    Triggers on the sup-norm threshold ``linf_u > factor * linf_u(0)`` or
    on a collapsed time step (signalled explicitly by the stepper via
    ``dt_collapsed``, or visible in the records when ``dt_min`` is given).
    """
    records = list(records)
    peak = max((r.linf_u for r in records), default=0.0)
    if dt_collapsed:
        t = records[-1].t if records else 0.0
        return BlowupVerdict("BlowupDetected", peak_linf=peak, t_detect=t, trigger="dt-collapse")
    if not records:
        return None
    linf0 = records[0].linf_u
    for r in records[1:]:
        if r.linf_u > factor * linf0:
            return BlowupVerdict("BlowupDetected", peak_linf=peak, t_detect=r.t, trigger="norm-threshold")
    if dt_min is not None:
        for r in records[1:]:
            if r.dt < dt_min:
                return BlowupVerdict("BlowupDetected", peak_linf=peak, t_detect=r.t, trigger="dt-collapse")
    return None
