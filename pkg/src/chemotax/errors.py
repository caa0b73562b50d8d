"""Exception types shared across the package."""

from __future__ import annotations


class ChemotaxError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ChemotaxError):
    """Raised when a run configuration fails validation.

    Carries the full list of field-level problems so the CLI can report
    every offending dotted path at once.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class SolverFailure(ChemotaxError):
    """Iterative linear solve did not reach the requested tolerance."""

    def __init__(self, message, residual, iterations):
        self.residual = float(residual)
        self.iterations = int(iterations)
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")


class DtCollapse(ChemotaxError):
    """Abort signal: the CFL-limited time step fell below the floor.

    Interpreted downstream as a blow-up candidate, not as a crash.
    """

    def __init__(self, t, dt, dt_min):
        self.t = float(t)
        self.dt = float(dt)
        self.dt_min = float(dt_min)
        super().__init__(f"time step collapsed at t={t:.6g}: dt={dt:.3e} < floor {dt_min:.3e}")


class SweepError(ChemotaxError):
    """A level of an epsilon sweep left the small-data regime."""

    def __init__(self, eps, t, detail=""):
        self.eps = float(eps)
        self.t = float(t)
        msg = f"sweep level eps={eps:.6g} blew up at t={t:.6g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ScanError(ChemotaxError):
    """Amplitude scan preconditions or endpoint re-verification failed."""
