"""Scalar comparison ODEs: growth majorant and blow-up minorant.

Two model ODEs bracket the PDE dynamics and double as run-time monitors:

* the growth bound
  ``w' = C (1 + t + 2 sqrt(t)) (1 + w^{3/p} (1 + logplus(w))) w``,
  a majorant for the p-th power of the W^{1,p} norm of the active density
  while the solution stays regular;

* the escape minorant
  ``y' = (a1/2) y^{1 + 1/p} - a2 y - a3``,
  whose solutions reach infinity in finite time once the initial value
  clears three explicit monotone conditions (see :func:`blowup_threshold`).
  The leading coefficient is half of the nominal a1: the threshold
  analysis only controls the dynamics after absorbing the lower-order
  terms at the price of that factor, so the halved form is the one whose
  escape is actually certified, and its a2 = a3 = 0 limit matches
  ``pure_power_blowup_time(y0, a1/2, p)`` exactly.

``logplus(x)`` is ``log(x)`` for ``x > 1`` and ``0`` otherwise, with the
branch exact at ``x = 1``.  Blow-up times are operationalized as the
crossing time of a large cap; the remaining tail is bounded by the
pure-power majorant and reported alongside (see ``tail_bound``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

OVERFLOW_GUARD = 1.0e12


def logplus(x):
    """log(x) above 1, zero at or below 1; exact at the branch point."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 1.0, np.log(np.maximum(x, 1.0)), 0.0)
    return out if out.ndim else float(out)


def growth_factor(t):
    """Time weight 1 + t + 2 sqrt(t) of the growth bound."""
    t = np.asarray(t, dtype=float)
    out = 1.0 + t + 2.0 * np.sqrt(t)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GrowthOdeParams:
    C: float
    p: float
    w0: float

    def __post_init__(self):
        if not (np.isfinite(self.C) and self.C >= 0):
            raise ValueError("C must be finite and >= 0")
        if not (np.isfinite(self.p) and self.p > 1):
            raise ValueError("p must be finite and > 1")
        if not (np.isfinite(self.w0) and self.w0 >= 0):
            raise ValueError("w0 must be finite and >= 0")


def growth_rhs(t: float, w: float, params: GrowthOdeParams) -> float:
    w = max(float(w), 0.0)
    return params.C * growth_factor(t) * (1.0 + w ** (3.0 / params.p) * (1.0 + logplus(w))) * w


@dataclass(frozen=True)
class GrowthOdeResult:
    t: np.ndarray
    w: np.ndarray
    reached: float
    guard_tripped: bool


def integrate_growth_ode(
    params: GrowthOdeParams,
    t_end: float,
    rtol: float = 1.0e-8,
    t_eval: Optional[np.ndarray] = None,
) -> GrowthOdeResult:
    """Adaptive embedded Runge-Kutta integration of the growth bound.

    Stops early when the solution exceeds the overflow guard (1e12) and
    reports the time actually reached.  ``t_eval`` requests output at
    specific times within the reached interval.
    """
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    if t_end == 0:
        return GrowthOdeResult(np.array([0.0]), np.array([params.w0]), 0.0, False)

    def guard(t, y):
        return y[0] - OVERFLOW_GUARD

    guard.terminal = True
    guard.direction = 1

    sol = solve_ivp(
        lambda t, y: [growth_rhs(t, y[0], params)],
        (0.0, float(t_end)),
        [params.w0],
        method="RK45",
        rtol=rtol,
        atol=1.0e-12,
        t_eval=None if t_eval is None else np.asarray(t_eval, dtype=float),
        dense_output=False,
        events=guard,
    )
    if not sol.success and sol.status != 1:
        # Near its singularity the solution can cross the guard faster than
        # the floating-point resolution of t, in which case the integrator
        # underflows its step size before the event fires.  The right side
        # is monotone and superlinear in w, so a step failure with the
        # solution at or above its start certifies the same escape.
        if sol.status == -1 and (sol.t.size == 0 or sol.y[0][-1] >= params.w0):
            t = sol.t if sol.t.size else np.array([0.0])
            w = sol.y[0] if sol.t.size else np.array([params.w0])
            return GrowthOdeResult(t, w, float(t[-1]), True)
        raise RuntimeError(f"growth ODE integration failed: {sol.message}")
    tripped = sol.status == 1
    t = sol.t
    w = sol.y[0]
    reached = float(sol.t_events[0][0]) if tripped else float(t_end)
    if tripped and (t.size == 0 or t[-1] < reached):
        t = np.append(t, reached)
        w = np.append(w, sol.y_events[0][0, 0])
    return GrowthOdeResult(t, w, reached, tripped)


@dataclass(frozen=True)
class BlowupOdeParams:
    alpha1: float
    alpha2: float
    alpha3: float
    p: float
    y0: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha1) and self.alpha1 > 0):
            raise ValueError("alpha1 must be finite and positive")
        for name in ("alpha2", "alpha3"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and >= 0")
        if not (np.isfinite(self.p) and self.p > 1):
            raise ValueError("p must be finite and > 1")
        if not np.isfinite(self.y0):
            raise ValueError("y0 must be finite")


def blowup_rhs(y: float, params: BlowupOdeParams) -> float:
    """Right side of the certified escape dynamics (leading term a1/2)."""
    pos = max(float(y), 0.0)
    return 0.5 * params.alpha1 * pos ** (1.0 + 1.0 / params.p) - params.alpha2 * y - params.alpha3


@dataclass(frozen=True)
class BlowupOdeResult:
    t: np.ndarray
    y: np.ndarray
    blowup_time: Optional[float]
    certified_bounded: bool
    tail_bound: Optional[float]


def integrate_blowup_ode(
    params: BlowupOdeParams,
    rtol: float = 1.0e-8,
    y_cap: float = 1.0e9,
    t_max: float = 1.0e3,
) -> BlowupOdeResult:
    """Integrate the certified escape dynamics until the cap is crossed or
    the horizon is exhausted.

    Returns the cap-crossing time as the detected blow-up time (``None``
    when the cap is never reached).  The integrated right side carries the
    halved leading coefficient (see the module docstring), so the detected
    time is conservative for everything the threshold conditions certify;
    its own escape past the cap takes at most ``tail_bound`` longer than
    the crossing.  ``certified_bounded`` is set when the right-hand side
    is nonpositive at the start or the end of the run: an autonomous
    scalar solution can then never climb past its current value, so the
    absence of blow-up is a certificate, not a timeout.
    """
    if y_cap <= max(params.y0, 0.0):
        raise ValueError("y_cap must exceed the initial value")

    f0 = blowup_rhs(params.y0, params)
    if f0 <= 0:
        # Monotone comparison: the solution can never exceed y0 again.
        return BlowupOdeResult(np.array([0.0]), np.array([params.y0]), None, True, None)

    def cap(t, y):
        return y[0] - y_cap

    cap.terminal = True
    cap.direction = 1

    sol = solve_ivp(
        lambda t, y: [blowup_rhs(y[0], params)],
        (0.0, float(t_max)),
        [params.y0],
        method="RK45",
        rtol=rtol,
        atol=1.0e-12,
        events=cap,
    )
    if not sol.success and sol.status != 1:
        raise RuntimeError(f"blow-up ODE integration failed: {sol.message}")
    t = sol.t
    y = sol.y[0]
    if sol.status == 1:
        t_cross = float(sol.t_events[0][0])
        if t.size == 0 or t[-1] < t_cross:
            t = np.append(t, t_cross)
            y = np.append(y, sol.y_events[0][0, 0])
        # Above the cap the lower-order terms cost at most the fraction r of
        # the leading term, so w' >= (a1/2)(1-r) w^{1+1/p} bounds the
        # remaining climb to infinity; exact when a2 = a3 = 0.
        tail = None
        lead = 0.5 * params.alpha1 * y_cap ** (1.0 + 1.0 / params.p)
        r = (params.alpha2 * y_cap + params.alpha3) / lead
        if r < 0.5:
            tail = pure_power_blowup_time(y_cap, 0.5 * params.alpha1 * (1.0 - r), params.p)
        return BlowupOdeResult(t, y, t_cross, False, tail)

    certified = blowup_rhs(y[-1], params) <= 0
    return BlowupOdeResult(t, y, None, certified, None)


def pure_power_blowup_time(w0: float, k: float, p: float) -> float:
    """Exact escape time of ``w' = k w^{1+1/p}``: ``p / (k w0^{1/p})``."""
    if not (w0 > 0 and k > 0 and p > 1):
        raise ValueError("need w0 > 0, k > 0, p > 1")
    return p / (k * w0 ** (1.0 / p))


def _bisect_root(f, lo: float, hi: float, rel: float = 1.0e-10, max_iter: int = 200) -> float:
    """Root of a function with f(lo) <= 0 < f(hi) by plain bisection."""
    flo = f(lo)
    if flo > 0:
        raise ValueError("bisection bracket does not straddle the root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel * max(abs(mid), 1.0e-300):
            return mid
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _smallest_positive_clearance(f, rel: float = 1.0e-10) -> float:
    """Smallest x >= 0 with f positive beyond x, for f negative-then-positive.

    Returns 0 when f is already positive arbitrarily close to zero.
    """
    hi = 1.0
    for _ in range(600):
        if f(hi) > 0:
            break
        hi *= 2.0
    else:
        raise ValueError("condition never becomes positive")
    if f(0.0) > 0:
        return 0.0
    return _bisect_root(f, 0.0, hi, rel)


def blowup_threshold(
    alpha1: float,
    alpha2: float,
    alpha3: float,
    p: float,
    beta0: float,
    rel: float = 1.0e-10,
) -> float:
    """Smallest initial value above which escape to infinity is guaranteed.

    Three monotone conditions on ``y0`` (with ``z0 = y0 - beta0``) enter:

    * the right-hand side stays positive on ``[y0, infinity)``;
    * ``a1 b0 (1 + 1/p) z0^{1/p} - a2 b0 - a3 > 0``;
    * ``a1 z0^{1/p} / 2 - a2 > 0``.

    Each is resolved by bisection to relative accuracy ``rel`` and the
    maximum of the three clearances is returned.
    """
    if not (np.isfinite(alpha1) and alpha1 > 0):
        raise ValueError("alpha1 must be positive")
    if alpha2 < 0 or alpha3 < 0:
        raise ValueError("alpha2 and alpha3 must be >= 0")
    if not (np.isfinite(p) and p > 1):
        raise ValueError("p must be finite and > 1")
    if not (np.isfinite(beta0) and beta0 > 0):
        raise ValueError("beta0 must be positive")

    q = 1.0 + 1.0 / p

    def phi(x):
        return alpha1 * x**q - alpha2 * x - alpha3

    if alpha2 == 0 and alpha3 == 0:
        rhs_clear = 0.0
    else:
        # phi dips below zero and has a single largest root beyond its minimum.
        x_min = (alpha2 * p / (alpha1 * (p + 1.0))) ** p if alpha2 > 0 else 0.0
        hi = max(x_min, 1.0)
        for _ in range(600):
            if phi(hi) > 0:
                break
            hi *= 2.0
        else:
            raise ValueError("right-hand side never becomes positive")
        rhs_clear = _bisect_root(phi, x_min, hi, rel)

    def shifted_growth(z):
        return alpha1 * beta0 * (1.0 + 1.0 / p) * z ** (1.0 / p) - alpha2 * beta0 - alpha3

    def pure_power_margin(z):
        return 0.5 * alpha1 * z ** (1.0 / p) - alpha2

    z1 = _smallest_positive_clearance(shifted_growth, rel)
    z2 = _smallest_positive_clearance(pure_power_margin, rel)

    return max(rhs_clear, beta0 + max(z1, z2))


@dataclass(frozen=True)
class ComparatorRow:
    t: float
    bound: float
    observed: float
    ok: bool


@dataclass(frozen=True)
class ComparatorReport:
    rows: Tuple[ComparatorRow, ...]
    C_fit: float

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def flagged(self) -> List[ComparatorRow]:
        return [r for r in self.rows if not r.ok]


def ode_comparator_check(times, observed_w1p, C_fit: float, p: float) -> ComparatorReport:
    """Compare observed W^{1,p} norms against the integrated growth bound.

    ``observed_w1p`` are norm values at ``times`` (starting at t = 0); the
    bound is integrated from the p-th power of the first observation.  A
    row is flagged when the observed p-th power exceeds the bound; past an
    overflow-guard trip the bound counts as infinite, so nothing flags.
    """
    times = np.asarray(times, dtype=float)
    observed = np.asarray(observed_w1p, dtype=float) ** p
    if times.ndim != 1 or times.shape != observed.shape or times.size == 0:
        raise ValueError("times and observations must be matching nonempty 1-d arrays")
    if times[0] != 0.0:
        raise ValueError("comparison starts at t = 0")
    res = integrate_growth_ode(
        GrowthOdeParams(C=C_fit, p=p, w0=observed[0]),
        t_end=float(times[-1]),
        t_eval=times[times <= times[-1]],
    )
    bounds = np.interp(times, res.t, res.w)
    bounds[times > res.reached] = np.inf
    rows = tuple(
        ComparatorRow(float(t), float(bd), float(ob), bool(ob <= bd))
        for t, bd, ob in zip(times, bounds, observed)
    )
    return ComparatorReport(rows, float(C_fit))


def fit_comparison_constant(times, observed_w1p, p: float, max_doublings: int = 60) -> float:
    """Smallest power-of-two constant keeping every comparator row clear."""
    C = 1.0
    for _ in range(max_doublings + 1):
        if ode_comparator_check(times, observed_w1p, C, p).all_ok:
            return C
        C *= 2.0
    raise ValueError(f"no power-of-two constant up to 2^{max_doublings} clears the comparison")
