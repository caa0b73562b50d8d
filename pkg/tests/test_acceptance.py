"""Acceptance gates for the full solver stack.

Thirteen quantitative criteria, one test each, covering the elliptic
solver, the transport/diffusion stepping, the structural residuals, the
comparison ODEs and the end-to-end blow-up machinery.  Every test prints
a single ``[PASS]``/``[FAIL]`` line with the measured numbers (run with
``pytest -s`` to see them all).
"""

import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from chemotax.diagnostics import DiagConfig
from chemotax.dynamics import State, StepConfig, advance
from chemotax.elliptic import EllipticConfig, solve_helmholtz
from chemotax.grid import Field, GridSpec, build_grid, integrate
from chemotax.model import KineticsSpec, ModelParams, b_eval, g_eval, validate_kinetics
from chemotax.ode import (
    BlowupOdeParams,
    blowup_threshold,
    integrate_blowup_ode,
    pure_power_blowup_time,
)
from chemotax.scenarios import (
    EpsStudySpec,
    InitialCondition,
    Scenario,
    blowup_scan,
    epsilon_sweep,
    run_scenario,
)


def _verdict(num, name, ok, detail):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {num:2d}: {name} ({detail})")
    return ok


def _grid1d(cells):
    return build_grid(GridSpec(dim=1, lengths=1.0, cells=cells))


# Shared smooth scenario for the residual-halving criteria: broad enough
# that the upwind dissipation floor sits well below the splitting error.
SMOOTH = Scenario(
    GridSpec(dim=1, lengths=1.0, cells=256),
    InitialCondition(kind="gaussian", amplitude=0.2, width=0.2),
    InitialCondition(kind="constant", amplitude=1.0),
)

# Sharp-hump setup exhibiting the amplitude dichotomy: small humps decay
# under deactivation, large ones aggregate and run away.
DICHOTOMY_GRID = GridSpec(dim=1, lengths=1.0, cells=256)
DICHOTOMY_N0 = InitialCondition(kind="constant", amplitude=1.0)
DICHOTOMY_PARAMS = ModelParams(gamma=0.02, kinetics=KineticsSpec(G0=8.0, B0=4.0))
DICHOTOMY_STEP = StepConfig(t_end=1.0, dt_max=2.0e-3)
DICHOTOMY_DIAG = DiagConfig(blowup_factor=20.0)


def _dichotomy_u0(amp):
    return InitialCondition(kind="gaussian", amplitude=amp, width=0.02)


def test_criterion_01_elliptic_convergence():
    t0 = time.perf_counter()
    params = ModelParams()
    errs = {}
    for cells in (64, 128):
        grid = _grid1d(cells)
        x = grid.coords()[0]
        c_exact = np.cos(np.pi * x)
        u = (np.pi**2 + params.beta) * c_exact / params.alpha
        c = solve_helmholtz(Field(grid, u), params, EllipticConfig())
        errs[cells] = np.abs(c.values - c_exact).max()
    ratio = errs[64] / errs[128]
    elapsed = time.perf_counter() - t0
    ok = 3.5 <= ratio <= 4.5 and elapsed < 5.0
    assert _verdict(1, "elliptic convergence", ok,
                    f"max-error ratio 64->128 = {ratio:.4f}, target [3.5, 4.5], {elapsed:.2f}s")


def test_criterion_02_elliptic_sign_preservation():
    rng = np.random.default_rng(42)
    params = ModelParams()
    worst = 0.0
    for i in range(100):
        if i % 2 == 0:
            grid = _grid1d(64)
            vals = rng.uniform(0.0, 1.0, grid.shape)
        else:
            grid = build_grid(GridSpec(dim=2, lengths=(1.0, 1.0), cells=(12, 17)))
            vals = rng.exponential(1.0, grid.shape)
        ecfg = EllipticConfig() if i % 4 < 2 else EllipticConfig(method="cg")
        c = solve_helmholtz(Field(grid, vals), params, ecfg)
        worst = max(worst, -c.values.min() / max(c.values.max(), 1e-300))
    ok = worst <= 1.0e-10
    assert _verdict(2, "elliptic sign preservation", ok,
                    f"worst min(c)/max(c) = {-worst:.2e} over 100 nonnegative samples, floor -1e-10")


def test_criterion_03_heat_mode_decay():
    grid = _grid1d(128)
    x = grid.coords()[0]
    mode = np.cos(np.pi * x)
    params = ModelParams()
    state = State.initial(Field(grid, np.zeros(grid.shape)), Field(grid, 1.0 + 0.5 * mode), params)
    step = StepConfig(t_end=0.1, dt_max=1.0e-4, diffusion_theta=1.0)
    while state.t < 0.1 - 1e-12:
        state, _ = advance(state, params, step, EllipticConfig(), dt=1.0e-4)
    norm = integrate(Field(grid, mode * mode))
    amp0 = 0.5
    amp1 = integrate(Field(grid, (state.n.values - 1.0) * mode)) / norm
    rate = np.log(amp0 / amp1) / 0.1
    rel = abs(rate - np.pi**2) / np.pi**2
    ok = rel <= 0.02
    assert _verdict(3, "heat-mode decay", ok,
                    f"fitted rate {rate:.5f} vs pi^2 {np.pi**2:.5f}, rel {rel:.2e} <= 2e-2")


def test_criterion_04_exact_transport_conservation():
    params = ModelParams(kinetics=KineticsSpec(G0=0.0, B0=0.0))
    grid = _grid1d(64)
    x = grid.coords()[0]
    u0 = Field(grid, 0.5 * np.exp(-((x - 0.5) ** 2) / (2 * 0.1**2)))
    state = State.initial(u0, Field(grid, np.ones(grid.shape)), params)
    step = StepConfig(t_end=10.0, dt_max=5.0e-3)
    m0 = integrate(state.u)
    for _ in range(1000):
        state, _ = advance(state, params, step, EllipticConfig())
    drift = abs(integrate(state.u) - m0) / m0
    nontrivial = np.abs(state.c.values).max() > 1e-3
    ok = drift <= 1.0e-12 and nontrivial
    assert _verdict(4, "exact transport conservation", ok,
                    f"relative mass drift {drift:.2e} over 1000 steps, max|c| = {np.abs(state.c.values).max():.3f}")


def test_criterion_05_nutrient_max_principle():
    scenarios = [
        ("small-data", Scenario(GridSpec(dim=1, lengths=1.0, cells=128),
                                InitialCondition(kind="gaussian", amplitude=0.01, width=0.05),
                                InitialCondition(kind="constant", amplitude=1.0)),
         ModelParams(), StepConfig(t_end=1.0), DiagConfig()),
        ("smooth", SMOOTH, ModelParams(), StepConfig(t_end=0.2, dt_max=4.0e-3), DiagConfig()),
        ("planar", Scenario(GridSpec(dim=2, lengths=(1.0, 1.0), cells=(16, 16)),
                            InitialCondition(kind="gaussian", amplitude=0.5, width=0.1),
                            InitialCondition(kind="cosine-perturbation", background=1.0, amplitude=0.5)),
         ModelParams(), StepConfig(t_end=0.05, dt_max=2.5e-3), DiagConfig()),
        ("runaway", Scenario(DICHOTOMY_GRID, _dichotomy_u0(0.5), DICHOTOMY_N0),
         DICHOTOMY_PARAMS, DICHOTOMY_STEP, DICHOTOMY_DIAG),
    ]
    worst_over = -np.inf
    worst_under = np.inf
    small_data_completed = False
    for name, scn, params, step, diag in scenarios:
        res = run_scenario(scn, params, step, EllipticConfig(), diag)
        n0_max = res.trajectory.records[0].max_n
        for rec in res.trajectory.records:
            worst_over = max(worst_over, rec.max_n - n0_max)
            worst_under = min(worst_under, rec.min_n)
        if name == "small-data":
            small_data_completed = res.verdict.kind == "Completed"
    ok = worst_over <= 1.0e-12 and worst_under >= -1.0e-12 and small_data_completed
    assert _verdict(5, "nutrient max principle", ok,
                    f"worst overshoot {worst_over:.2e}, worst undershoot {worst_under:.2e} "
                    f"across 4 scenarios; small-data run completed: {small_data_completed}")


def _smooth_residuals(dt):
    res = run_scenario(SMOOTH, ModelParams(), StepConfig(t_end=0.2, dt_max=dt),
                       EllipticConfig(), DiagConfig(p=2.0))
    recs = res.trajectory.records
    mass = max(r.mass_law_residual for r in recs[1:])
    zzz = max(r.zzz_residual for r in recs[1:])
    totals = np.array([r.mass_total for r in recs])
    worst_rise = float(np.max(np.diff(totals)))
    return mass, zzz, worst_rise, totals[0]


def test_criterion_06_mass_law():
    rows = [_smooth_residuals(dt) for dt in (1.6e-2, 8.0e-3, 4.0e-3)]
    r1 = rows[1][0] / rows[0][0]
    r2 = rows[2][0] / rows[1][0]
    worst_rise = max(row[2] for row in rows)
    m0 = rows[0][3]
    ok = r1 <= 0.6 and r2 <= 0.6 and worst_rise <= 1.0e-10 * m0
    assert _verdict(6, "mass law", ok,
                    f"residual halving ratios {r1:.3f}, {r2:.3f} <= 0.6; "
                    f"worst total-mass rise {worst_rise:.2e} vs slack {1.0e-10 * m0:.1e}")


def test_criterion_07_lp_power_identity():
    rows = [_smooth_residuals(dt) for dt in (1.6e-2, 8.0e-3, 4.0e-3)]
    r1 = rows[1][1] / rows[0][1]
    r2 = rows[2][1] / rows[1][1]
    ok = r1 <= 0.6 and r2 <= 0.6
    assert _verdict(7, "p-norm power identity", ok,
                    f"residual halving ratios {r1:.3f}, {r2:.3f} <= 0.6 at p = 2")


def test_criterion_08_homogeneous_reduction():
    kin = KineticsSpec(G0=2.0, B0=1.0)
    params = ModelParams(gamma=0.5, kinetics=kin)

    def rhs(t, y):
        u, n = y
        return [(g_eval(u, kin) * n - b_eval(n, kin)) * u,
                -params.gamma * g_eval(u, kin) * n * u]

    ref = solve_ivp(rhs, (0.0, 1.0), [1.0, 1.0], rtol=1e-12, atol=1e-14)
    u_ref, n_ref = ref.y[0][-1], ref.y[1][-1]

    grid = _grid1d(16)
    state = State.initial(Field(grid, np.ones(grid.shape)), Field(grid, np.ones(grid.shape)), params)
    step = StepConfig(t_end=1.0, dt_max=1.0e-4)
    while state.t < 1.0 - 1e-12:
        state, _ = advance(state, params, step, EllipticConfig(), dt=min(1.0e-4, 1.0 - state.t))
    du = np.abs(state.u.values - u_ref).max()
    dn = np.abs(state.n.values - n_ref).max()
    ok = du <= 1.0e-4 and dn <= 1.0e-4
    assert _verdict(8, "homogeneous reduction", ok,
                    f"|u - u_ode| = {du:.2e}, |n - n_ode| = {dn:.2e} <= 1e-4 at t = 1")


def test_criterion_09_blowup_ode_oracle():
    t0 = time.perf_counter()
    t_pure = pure_power_blowup_time(1.0, 1.0, 2.0)
    res = integrate_blowup_ode(BlowupOdeParams(alpha1=2.0, alpha2=1e-6, alpha3=1e-6, p=2.0, y0=1.0))
    elapsed = time.perf_counter() - t0
    detected = res.blowup_time is not None
    rel = abs(res.blowup_time - 2.0) / 2.0 if detected else np.inf
    ok = t_pure == 2.0 and detected and rel <= 0.01 and elapsed < 1.0
    assert _verdict(9, "blow-up ODE oracle", ok,
                    f"closed form {t_pure}, detected t = "
                    f"{res.blowup_time if detected else None}, rel err {rel:.2e} <= 1e-2, {elapsed:.2f}s")


def test_criterion_10_threshold_sufficiency():
    rng = np.random.default_rng(20260822)
    escapes = bounded = 0
    for _ in range(20):
        a1 = rng.uniform(0.5, 3.0)
        a2 = rng.uniform(0.05, 1.0)
        a3 = rng.uniform(0.01, 1.0)
        p = rng.uniform(1.5, 3.0)
        b0 = rng.uniform(0.5, 2.0)

        thr = blowup_threshold(a1, a2, a3, p, b0)
        y0 = 2.0 * thr
        res = integrate_blowup_ode(BlowupOdeParams(a1, a2, a3, p, y0),
                                   y_cap=max(1.0e9, 1.0e4 * y0))
        escapes += res.blowup_time is not None

        # start at a tenth of the slope-domination bound and make the
        # constant sink dominant there: the solution must stay bounded
        y_small = 0.1 * (2.0 * a2 / a1) ** p
        a3_dom = max(a3, 2.0 * a1 * max(y_small, 1.0) ** (1.0 + 1.0 / p))
        res2 = integrate_blowup_ode(BlowupOdeParams(a1, a2, a3_dom, p, y_small), t_max=1.0e3)
        bounded += res2.blowup_time is None
    ok = escapes == 20 and bounded == 20
    assert _verdict(10, "threshold sufficiency", ok,
                    f"{escapes}/20 escapes from 2x threshold, {bounded}/20 bounded from dominated start")


def test_criterion_11_pde_blowup_dichotomy():
    t0 = time.perf_counter()
    a_lo, a_hi = 0.2, 0.5

    lo = run_scenario(Scenario(DICHOTOMY_GRID, _dichotomy_u0(a_lo), DICHOTOMY_N0),
                      DICHOTOMY_PARAMS, DICHOTOMY_STEP, EllipticConfig(), DICHOTOMY_DIAG)
    linf0 = lo.trajectory.records[0].linf_u
    lo_ok = lo.verdict.kind == "Completed" and lo.verdict.peak_linf <= 10.0 * linf0

    hi = run_scenario(Scenario(DICHOTOMY_GRID, _dichotomy_u0(a_hi), DICHOTOMY_N0),
                      DICHOTOMY_PARAMS, DICHOTOMY_STEP, EllipticConfig(), DICHOTOMY_DIAG)
    hi_ok = hi.verdict.kind == "BlowupDetected" and hi.verdict.t_detect < 1.0

    scan = blowup_scan(Scenario(DICHOTOMY_GRID, _dichotomy_u0(1.0), DICHOTOMY_N0),
                       DICHOTOMY_PARAMS, DICHOTOMY_STEP, a_lo, a_hi, 9,
                       EllipticConfig(), DICHOTOMY_DIAG)
    rel_width = (scan.amp_hi - scan.amp_lo) / scan.amp_lo

    relo = run_scenario(Scenario(DICHOTOMY_GRID, _dichotomy_u0(scan.amp_lo), DICHOTOMY_N0),
                        DICHOTOMY_PARAMS, DICHOTOMY_STEP, EllipticConfig(), DICHOTOMY_DIAG)
    rehi = run_scenario(Scenario(DICHOTOMY_GRID, _dichotomy_u0(scan.amp_hi), DICHOTOMY_N0),
                        DICHOTOMY_PARAMS, DICHOTOMY_STEP, EllipticConfig(), DICHOTOMY_DIAG)
    endpoints_ok = relo.verdict.kind == "Completed" and rehi.verdict.kind == "BlowupDetected"

    elapsed = time.perf_counter() - t0
    ok = lo_ok and hi_ok and rel_width <= 2.0**-8 and endpoints_ok and elapsed < 120.0
    assert _verdict(11, "blow-up dichotomy", ok,
                    f"A_lo={a_lo} completed (peak/initial {lo.verdict.peak_linf / linf0:.2f} <= 10), "
                    f"A_hi={a_hi} blew up at t={hi.verdict.t_detect:.3f}; "
                    f"bracket [{scan.amp_lo:.5f}, {scan.amp_hi:.5f}], rel width {rel_width:.2e} <= 2^-8, "
                    f"endpoints re-verified, {elapsed:.1f}s")


def test_criterion_12_eps_consistency():
    t0 = time.perf_counter()
    scn = Scenario(GridSpec(dim=1, lengths=1.0, cells=64),
                   InitialCondition(kind="gaussian", amplitude=0.4, width=0.1),
                   InitialCondition(kind="constant", amplitude=1.0))
    res = epsilon_sweep(EpsStudySpec(eps0=0.1, levels=4, p=2.0), scn, ModelParams(),
                        StepConfig(t_end=0.25, dt_max=2.0e-3), EllipticConfig(), DiagConfig())
    elapsed = time.perf_counter() - t0
    d = list(res.dist_consecutive)
    lim = list(res.dist_to_limit)
    consec_ok = all(d[k] > d[k + 1] > 0 for k in range(len(d) - 1))
    limit_ok = all(lim[k] > lim[k + 1] for k in range(len(lim) - 1))
    ok = consec_ok and limit_ok and elapsed < 120.0
    assert _verdict(12, "vanishing-diffusion consistency", ok,
                    f"D_k = {['%.3e' % v for v in d]} strictly decreasing; "
                    f"dist-to-limit = {['%.3e' % v for v in lim]} decreasing, {elapsed:.1f}s")


def test_criterion_13_kinetics_gate():
    results = []
    for family in ("saturating-rational", "saturating-exponential"):
        kin = KineticsSpec(family=family, G0=2.0, B0=1.5, g_scale=0.7, b_scale=1.3)
        rep = validate_kinetics(kin, u_max=10.0 * kin.g_scale, n_max=10.0 * kin.b_scale)
        results.append((family, rep.passed))

    good_b = ([0.0, 5.0, 10.0], [1.0, 0.5, 0.3])
    violations = [
        ("g(0) = 0", dict(g_table=([0.0, 5.0, 10.0], [0.2, 0.6, 0.9]), b_table=good_b)),
        ("g nondecreasing", dict(g_table=([0.0, 5.0, 10.0], [0.0, 0.9, 0.4]), b_table=good_b)),
        ("b nonincreasing", dict(g_table=([0.0, 5.0, 10.0], [0.0, 0.6, 0.9]),
                                 b_table=([0.0, 5.0, 10.0], [1.0, 1.4, 2.0]))),
    ]
    caught = []
    for expected, tables in violations:
        kin = KineticsSpec(family="custom-table", **tables)
        rep = validate_kinetics(kin)
        names = [c.name for c in rep.failures()]
        caught.append((expected, expected in names, names))

    ok = all(passed for _, passed in results) and all(hit for _, hit, _ in caught)
    assert _verdict(13, "kinetics gate", ok,
                    f"families pass: {results}; violations flagged: "
                    f"{[(e, hit) for e, hit, _ in caught]}")
