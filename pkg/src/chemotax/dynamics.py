"""Time stepping for the coupled transport-elliptic-diffusion system.

One step of the first-order splitting, with every substep reading the
state frozen at time t:

1. the chemoattractant carried by the state is the elliptic solve for the
   current active density (states are constructed that way and every
   advance re-solves for the state it returns);
2. CFL step selection: ``dt = min(dt_max, cfl * h / max |grad c|,
   1 / (2 (G0 max n + B0)))``, aborting when it falls below the floor;
3. active density: first-order upwind transport by the face gradients of
   c, then the reaction with implicit loss factor
   ``u <- u (1 + dt g(u) n) / (1 + dt b(n))``, then (eps > 0) a
   backward-Euler diffusion solve;
4. nutrient: implicit consumption factor ``n <- n / (1 + dt gamma g(u) u)``
   followed by the theta-scheme diffusion solve;
5. inactive accumulation ``w <- w + dt b(n) u`` (left-endpoint quadrature);
6. t += dt.

The combination keeps u, n, w nonnegative, keeps n below its initial
maximum, and conserves the transport mass exactly (reactions off), all
without clipping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .diagnostics import BlowupVerdict, DiagConfig, DiagRecord, record
from .elliptic import EllipticConfig, helmholtz_residual, solve_helmholtz, solve_shifted
from .errors import DtCollapse
from .grid import (
    FaceField,
    Field,
    face_divergence,
    gradient_faces,
    laplacian_neumann,
    w1p_norm,
)
from .model import ModelParams, b_eval, g_eval
from .ode import OVERFLOW_GUARD, GrowthOdeParams, growth_rhs


@dataclass(frozen=True)
class StepConfig:
    """Stepping horizon, CFL numbers and the diffusion scheme weight."""

    t_end: float = 1.0
    cfl: float = 0.45
    dt_max: float = 1.0e-2
    dt_min: Optional[float] = None  # resolved to 1e-10 * t_end when unset
    diffusion_theta: float = 1.0
    snapshot_every: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError("t_end must be finite and >= 0")
        if not (0 < self.cfl < 1):
            raise ValueError("cfl must lie in (0, 1)")
        if not (np.isfinite(self.dt_max) and self.dt_max > 0):
            raise ValueError("dt_max must be positive")
        if self.dt_min is not None and not (np.isfinite(self.dt_min) and 0 < self.dt_min < self.dt_max):
            raise ValueError("dt_min must satisfy 0 < dt_min < dt_max when given")
        if not (0.5 <= self.diffusion_theta <= 1.0):
            raise ValueError("diffusion_theta must lie in [0.5, 1]")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    def resolved_dt_min(self) -> float:
        return self.dt_min if self.dt_min is not None else 1.0e-10 * self.t_end


@dataclass(frozen=True)
class State:
    """Solution snapshot; the chemoattractant is consistent with u.

    Consistency means the elliptic residual of the (u, c) pair stays below
    ten times the solver tolerance; :meth:`initial` and
    :func:`advance` construct only such states.
    """

    t: float
    u: Field
    c: Field
    n: Field
    w: Field
    n0_max: float

    @classmethod
    def initial(cls, u0: Field, n0: Field, params: ModelParams,
                ecfg: EllipticConfig = EllipticConfig()) -> "State":
        if np.any(u0.values < 0) or np.any(n0.values < 0):
            raise ValueError("initial data must be nonnegative")
        if not (np.all(np.isfinite(u0.values)) and np.all(np.isfinite(n0.values))):
            raise ValueError("initial data must be finite")
        c = solve_helmholtz(u0, params, ecfg)
        w = Field.full(u0.grid, 0.0)
        return cls(t=0.0, u=u0, c=c, n=n0, w=w, n0_max=float(n0.values.max()))


def validate_state(s: State, params: ModelParams, ecfg: EllipticConfig = EllipticConfig()) -> List[str]:
    """List of invariant violations (empty when the state is healthy)."""
    problems = []
    for name in ("u", "c", "n", "w"):
        vals = getattr(s, name).values
        if not np.all(np.isfinite(vals)):
            problems.append(f"{name} has non-finite entries")
            continue
        scale = max(float(np.abs(vals).max()), 1.0)
        if vals.min() < -1.0e-12 * scale:
            problems.append(f"{name} has negative entries beyond round-off ({vals.min():.3e})")
    if np.all(np.isfinite(s.n.values)) and s.n.values.max() > s.n0_max + 1.0e-12:
        problems.append(
            f"n exceeds its initial maximum ({s.n.values.max():.15g} > {s.n0_max:.15g} + 1e-12)")
    res = helmholtz_residual(s.u, s.c, params)
    if res > 10.0 * ecfg.tol:
        problems.append(f"chemoattractant inconsistent with u (residual {res:.3e})")
    if not (np.isfinite(s.t) and s.t >= 0):
        problems.append(f"invalid time {s.t!r}")
    return problems


def cfl_dt(s: State, cfg: StepConfig, params: ModelParams) -> float:
    """Stable step: advective CFL, reaction limit and dt_max; aborts below
    the floor via :class:`DtCollapse`."""
    grad = gradient_faces(s.c)
    # sum of per-axis max |v_a| / h_a; in 1-d the advective bound below is
    # the familiar cfl * h / max |grad c|
    speed = 0.0
    for a, f in enumerate(grad.faces):
        if f.size:
            speed += float(np.abs(f).max()) / s.c.grid.h[a]
    dt = cfg.dt_max
    if speed > 0:
        dt = min(dt, cfg.cfl / speed)
    kin = params.kinetics
    rate = 2.0 * (kin.G0 * float(s.n.values.max()) + kin.B0)
    if rate > 0:
        dt = min(dt, 1.0 / rate)
    floor = cfg.resolved_dt_min()
    if dt < floor:
        raise DtCollapse(s.t, dt, floor)
    return dt


def advective_flux(s: State) -> FaceField:
    """First-order upwind flux of u with the face gradient of c as speed."""
    grid = s.u.grid
    grad = gradient_faces(s.c)
    fluxes = []
    for a in range(grid.dim):
        v = grad.faces[a]
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        upwind = np.where(v > 0, s.u.values[tuple(lo)], s.u.values[tuple(hi)])
        fluxes.append(v * upwind)
    return FaceField(grid, tuple(fluxes))


def step_u(s: State, dt: float, params: ModelParams,
           ecfg: EllipticConfig = EllipticConfig()) -> Field:
    """Transport, reaction and (eps > 0) implicit diffusion of u."""
    grid = s.u.grid
    kin = params.kinetics
    u1 = s.u.values - dt * face_divergence(advective_flux(s))
    # round-off guard: exact arithmetic keeps u1 >= 0 under the CFL bound
    gain = g_eval(np.maximum(u1, 0.0), kin) * s.n.values
    loss = b_eval(s.n.values, kin)
    u2 = u1 * (1.0 + dt * gain) / (1.0 + dt * loss)
    if params.eps > 0:
        sigma = 1.0 / (params.eps * dt)
        return solve_shifted(Field(grid, sigma * u2), sigma, ecfg)
    return Field(grid, u2)


def step_n(s: State, dt: float, params: ModelParams, cfg: StepConfig,
           ecfg: EllipticConfig = EllipticConfig()) -> Field:
    """Implicit consumption factor, then the theta-scheme diffusion solve."""
    grid = s.n.grid
    kin = params.kinetics
    uc = np.maximum(s.u.values, 0.0)
    n1 = s.n.values / (1.0 + dt * params.gamma * g_eval(uc, kin) * uc)
    theta = cfg.diffusion_theta
    rhs = n1 if theta == 1.0 else n1 + (1.0 - theta) * dt * laplacian_neumann(Field(grid, n1)).values
    sigma = 1.0 / (theta * dt)
    return solve_shifted(Field(grid, sigma * rhs), sigma, ecfg)


def accumulate_w(s: State, dt: float, params: ModelParams) -> Field:
    """Left-endpoint quadrature of the deactivation flux b(n) u."""
    uc = np.maximum(s.u.values, 0.0)
    return Field(s.w.grid, s.w.values + dt * b_eval(s.n.values, params.kinetics) * uc)


def advance(
    s: State,
    params: ModelParams,
    cfg: StepConfig,
    ecfg: EllipticConfig = EllipticConfig(),
    dt: Optional[float] = None,
) -> Tuple[State, float]:
    """One full step; returns the new consistent state and the dt used.

    ``dt=None`` selects the CFL step (raising :class:`DtCollapse` below
    the floor); a caller-supplied dt overrides it, which is how sweeps run
    several systems on a shared schedule.
    """
    if dt is None:
        dt = cfl_dt(s, cfg, params)
    u_new = step_u(s, dt, params, ecfg)
    n_new = step_n(s, dt, params, cfg, ecfg)
    w_new = accumulate_w(s, dt, params)
    c_new = solve_helmholtz(u_new, params, ecfg)
    return State(t=s.t + dt, u=u_new, c=c_new, n=n_new, w=w_new, n0_max=s.n0_max), dt


@dataclass
class Trajectory:
    records: List[DiagRecord] = field(default_factory=list)


@dataclass
class RunResult:
    trajectory: Trajectory
    verdict: BlowupVerdict
    final_state: State


def _ode_bound_step(w: float, t: float, dt: float, gp: GrowthOdeParams) -> float:
    """One RK4 step of the growth bound, saturating at the overflow guard."""
    if w >= OVERFLOW_GUARD:
        return OVERFLOW_GUARD

    def f(tt, ww):
        return growth_rhs(tt, min(ww, OVERFLOW_GUARD), gp)

    k1 = f(t, w)
    k2 = f(t + dt / 2, w + dt / 2 * k1)
    k3 = f(t + dt / 2, w + dt / 2 * k2)
    k4 = f(t + dt, w + dt * k3)
    return min(w + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), OVERFLOW_GUARD)


def run(
    state: State,
    params: ModelParams,
    cfg: StepConfig,
    ecfg: EllipticConfig = EllipticConfig(),
    dcfg: DiagConfig = DiagConfig(),
) -> RunResult:
    """Advance until the horizon, a blow-up trigger or an abort.

    Emits a diagnostic record at t = 0, then every ``snapshot_every``-th
    step and at the final step.  The sup norm of u is monitored every
    step, so the norm-threshold trigger does not wait for the cadence.
    """
    t_end = cfg.t_end
    eps_t = 1.0e-12 * max(t_end, 1.0)
    if t_end <= state.t + eps_t:
        peak = float(np.abs(state.u.values).max())
        return RunResult(Trajectory([]), BlowupVerdict("Completed", peak_linf=peak), state)

    wb0 = w1p_power(state, dcfg.p)
    gp = GrowthOdeParams(C=dcfg.ode_constant, p=dcfg.p, w0=wb0)
    rec0 = record(state, 0.0, dcfg, params, ode_bound=wb0)
    records = [rec0]
    m0 = rec0.mass_total
    linf0 = rec0.linf_u
    peak = linf0
    ode_w = rec0.ode_bound
    prev_pair = (state, rec0)
    verdict = None
    step_idx = 0
    s = state

    while s.t < t_end - eps_t:
        try:
            dt = min(cfl_dt(s, cfg, params), t_end - s.t)
            s2, dt = advance(s, params, cfg, ecfg, dt=dt)
        except DtCollapse:
            verdict = BlowupVerdict("BlowupDetected", peak_linf=peak,
                                    t_detect=s.t, trigger="dt-collapse")
            break
        step_idx += 1
        ode_w = _ode_bound_step(ode_w, s.t, dt, gp)
        linf = float(np.abs(s2.u.values).max())
        if not np.isfinite(linf):
            verdict = BlowupVerdict("Aborted", peak_linf=peak, t_detect=s2.t,
                                    reason="non-finite field values")
            s = s2
            break
        peak = max(peak, linf)
        blown = linf > dcfg.blowup_factor * linf0
        final = s2.t >= t_end - eps_t
        if blown or final or step_idx % cfg.snapshot_every == 0:
            prev_s, prev_r = prev_pair
            rec = record(s2, dt, dcfg, params, prev_state=prev_s, prev_record=prev_r,
                         m0=m0, ode_bound=ode_w)
            records.append(rec)
            prev_pair = (s2, rec)
        s = s2
        if blown:
            verdict = BlowupVerdict("BlowupDetected", peak_linf=peak,
                                    t_detect=s2.t, trigger="norm-threshold")
            break
    if verdict is None:
        verdict = BlowupVerdict("Completed", peak_linf=peak)
    return RunResult(Trajectory(records), verdict, s)


def w1p_power(s: State, p: float) -> float:
    """p-th power of the W^{1,p} norm of u, the growth-bound variable."""
    return w1p_norm(s.u, p) ** p
