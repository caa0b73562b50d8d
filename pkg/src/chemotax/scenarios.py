"""Initial conditions, reference scenarios, sweeps and amplitude scans.

Initial data are described declaratively (kind plus a handful of shape
parameters), evaluated at cell centers and clamped at zero.  On top of
single runs this module provides

* :func:`epsilon_sweep`: the same scenario at a geometric ladder of
  diffusion levels plus the hyperbolic limit, advanced in lockstep on a
  shared step schedule (the smallest CFL step across levels each round)
  so that space-time distances between levels are well defined;

* :func:`blowup_scan`: bisection on the amplitude of the active-density
  hump between a completing and a blowing-up run, with both bracket
  endpoints re-verified by direct runs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .diagnostics import DiagConfig
from .dynamics import RunResult, State, StepConfig, advance, cfl_dt, run
from .elliptic import EllipticConfig
from .errors import DtCollapse, ScanError, SweepError
from .grid import Field, GridSpec, build_grid, lp_norm
from .model import ModelParams

IC_KINDS = ("constant", "gaussian", "cosine-perturbation", "table")


@dataclass(frozen=True)
class InitialCondition:
    """Declarative initial profile; evaluated values are clamped at zero.

    kinds:
      constant             background + amplitude everywhere
      gaussian             background + amplitude * exp(-|x - center|^2 / (2 width^2))
      cosine-perturbation  background + amplitude * prod_a cos(pi x_a / L_a)
      table                explicit per-cell values (shape must match the grid)
    """

    kind: str = "constant"
    amplitude: float = 1.0
    background: float = 0.0
    center: Optional[Tuple[float, ...]] = None
    width: float = 0.1
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ValueError(f"unknown initial-condition kind {self.kind!r}; expected one of {IC_KINDS}")
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError("amplitude must be finite and >= 0")
        if not (np.isfinite(self.background) and self.background >= 0):
            raise ValueError("background must be finite and >= 0")
        if self.kind == "gaussian" and not (np.isfinite(self.width) and self.width > 0):
            raise ValueError("gaussian width must be positive")
        if self.kind == "table" and self.values is None:
            raise ValueError("table initial condition needs explicit values")
        if self.center is not None:
            center = (self.center,) if np.isscalar(self.center) else tuple(self.center)
            object.__setattr__(self, "center", tuple(float(x) for x in center))
        if self.values is not None:
            object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def make_initial_condition(ic: InitialCondition, grid) -> Field:
    """Evaluate the profile at cell centers and clamp at zero."""
    if ic.kind == "constant":
        vals = np.full(grid.shape, ic.background + ic.amplitude)
    elif ic.kind == "gaussian":
        center = ic.center if ic.center is not None else tuple(L / 2 for L in grid.spec.lengths)
        if len(center) != grid.dim:
            raise ValueError(f"center {center!r} does not match grid dimension {grid.dim}")
        coords = grid.coords()
        r2 = sum((x - x0) ** 2 for x, x0 in zip(coords, center))
        vals = ic.background + ic.amplitude * np.exp(-r2 / (2.0 * ic.width**2))
    elif ic.kind == "cosine-perturbation":
        coords = grid.coords()
        mode = np.ones(grid.shape)
        for x, L in zip(coords, grid.spec.lengths):
            mode = mode * np.cos(np.pi * x / L)
        vals = ic.background + ic.amplitude * mode
    else:
        if ic.values.shape != grid.shape:
            raise ValueError(f"table values shape {ic.values.shape} does not match grid shape {grid.shape}")
        vals = ic.values
    return Field(grid, np.maximum(vals, 0.0))


@dataclass(frozen=True)
class Scenario:
    grid: GridSpec
    u0: InitialCondition
    n0: InitialCondition
    name: str = ""


def make_initial_state(scn: Scenario, params: ModelParams,
                       ecfg: EllipticConfig = EllipticConfig()) -> State:
    grid = build_grid(scn.grid)
    u0 = make_initial_condition(scn.u0, grid)
    n0 = make_initial_condition(scn.n0, grid)
    return State.initial(u0, n0, params, ecfg)


def run_scenario(
    scn: Scenario,
    params: ModelParams,
    cfg: StepConfig,
    ecfg: EllipticConfig = EllipticConfig(),
    dcfg: DiagConfig = DiagConfig(),
) -> RunResult:
    return run(make_initial_state(scn, params, ecfg), params, cfg, ecfg, dcfg)


@dataclass(frozen=True)
class EpsStudySpec:
    """Geometric ladder eps0 * 2^-k, k = 0..levels-1, plus the limit run."""

    eps0: float = 0.1
    levels: int = 4
    p: float = 2.0

    def __post_init__(self):
        if not (np.isfinite(self.eps0) and self.eps0 > 0):
            raise ValueError("eps0 must be positive")
        if self.levels < 2:
            raise ValueError("need at least 2 levels")
        if not (np.isfinite(self.p) and self.p >= 1):
            raise ValueError("p must be finite and >= 1")

    def eps_values(self) -> List[float]:
        return [self.eps0 * 2.0**-k for k in range(self.levels)]


@dataclass(frozen=True)
class SweepResult:
    eps: Tuple[float, ...]           # diffusion levels, largest first
    dist_consecutive: Tuple[float, ...]  # levels[k] vs levels[k+1]
    dist_to_limit: Tuple[float, ...]     # levels[k] vs the eps = 0 run
    t_end: float
    steps: int


def epsilon_sweep(
    study: EpsStudySpec,
    scn: Scenario,
    params: ModelParams,
    cfg: StepConfig,
    ecfg: EllipticConfig = EllipticConfig(),
    dcfg: DiagConfig = DiagConfig(),
) -> SweepResult:
    """Lockstep runs over the diffusion ladder with space-time distances.

    Every round all levels take the same step, the smallest CFL step any
    of them requests, so fields stay time-aligned and the accumulated
    ``(sum_steps dt ||u_i - u_j||_p^p)^(1/p)`` is a proper space-time
    distance.  A level leaving the small-data regime (norm trigger or a
    collapsed step) raises :class:`SweepError` naming the level.
    """
    eps_values = study.eps_values()
    all_eps = eps_values + [0.0]
    level_params = [replace(params, eps=e) for e in all_eps]
    states = [make_initial_state(scn, lp, ecfg) for lp in level_params]
    t_end = cfg.t_end

    linf0 = float(np.abs(states[0].u.values).max())
    n_levels = len(all_eps)
    acc_consec = np.zeros(max(study.levels - 1, 0))
    acc_limit = np.zeros(study.levels)
    p = study.p
    t = 0.0
    steps = 0

    while t < t_end - 1.0e-12 * max(t_end, 1.0):
        dts = []
        for e, lp, s in zip(all_eps, level_params, states):
            try:
                dts.append(cfl_dt(s, cfg, lp))
            except DtCollapse as exc:
                raise SweepError(e, s.t, "time step collapsed") from exc
        dt = min(min(dts), t_end - t)

        # left-endpoint quadrature of the level differences
        for k in range(study.levels - 1):
            diff = Field(states[k].u.grid, states[k].u.values - states[k + 1].u.values)
            acc_consec[k] += dt * lp_norm(diff, p) ** p
        for k in range(study.levels):
            diff = Field(states[k].u.grid, states[k].u.values - states[-1].u.values)
            acc_limit[k] += dt * lp_norm(diff, p) ** p

        new_states = []
        for e, lp, s in zip(all_eps, level_params, states):
            s2, _ = advance(s, lp, cfg, ecfg, dt=dt)
            linf = float(np.abs(s2.u.values).max())
            if not np.isfinite(linf) or linf > dcfg.blowup_factor * linf0 > 0:
                raise SweepError(e, s2.t, "sup norm left the small-data regime")
            new_states.append(s2)
        states = new_states
        t += dt
        steps += 1

    return SweepResult(
        eps=tuple(eps_values),
        dist_consecutive=tuple(float(a) ** (1.0 / p) for a in acc_consec),
        dist_to_limit=tuple(float(a) ** (1.0 / p) for a in acc_limit),
        t_end=t_end,
        steps=steps,
    )


@dataclass(frozen=True)
class ScanResult:
    amp_lo: float
    amp_hi: float
    lp_u0_lo: float
    lp_u0_hi: float
    iterations: int
    probes: int


def blowup_scan(
    scn: Scenario,
    params: ModelParams,
    cfg: StepConfig,
    amp_lo: float,
    amp_hi: float,
    iters: int,
    ecfg: EllipticConfig = EllipticConfig(),
    dcfg: DiagConfig = DiagConfig(),
    threads: int = 1,
) -> ScanResult:
    """Bisect the u-amplitude between a completing and a blowing-up run.

    The scenario's active-density profile provides the shape; its
    amplitude is the scan variable.  Endpoints are verified up front and
    the final bracket is re-verified by direct runs, so the returned
    bracket always straddles a detected transition.  Deterministic: equal
    inputs give bit-equal brackets.
    """
    if not (0 <= amp_lo < amp_hi):
        raise ScanError(f"need 0 <= amp_lo < amp_hi, got [{amp_lo!r}, {amp_hi!r}]")
    if iters < 0:
        raise ScanError("iters must be >= 0")

    probes = 0

    def blows(amp: float) -> bool:
        nonlocal probes
        probes += 1
        probe_scn = replace(scn, u0=replace(scn.u0, amplitude=amp))
        result = run_scenario(probe_scn, params, cfg, ecfg, dcfg)
        if result.verdict.kind == "Aborted":
            raise ScanError(f"probe at amplitude {amp:.6g} aborted: {result.verdict.reason}")
        return result.verdict.kind == "BlowupDetected"

    def verify(lo: float, hi: float, stage: str):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=min(threads, 2)) as ex:
                lo_blows, hi_blows = list(ex.map(blows, (lo, hi)))
        else:
            lo_blows, hi_blows = blows(lo), blows(hi)
        if lo_blows:
            raise ScanError(f"{stage}: lower amplitude {lo:.6g} already blows up")
        if not hi_blows:
            raise ScanError(f"{stage}: upper amplitude {hi:.6g} does not blow up")

    verify(amp_lo, amp_hi, "initial bracket")
    lo, hi = float(amp_lo), float(amp_hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if blows(mid):
            hi = mid
        else:
            lo = mid
    if iters > 0:
        verify(lo, hi, "final bracket")

    grid = build_grid(scn.grid)
    u_lo = make_initial_condition(replace(scn.u0, amplitude=lo), grid)
    u_hi = make_initial_condition(replace(scn.u0, amplitude=hi), grid)
    return ScanResult(
        amp_lo=lo,
        amp_hi=hi,
        lp_u0_lo=lp_norm(u_lo, dcfg.p),
        lp_u0_hi=lp_norm(u_hi, dcfg.p),
        iterations=iters,
        probes=probes,
    )
