"""Screened-Poisson solves for the chemoattractant balance.

The chemoattractant ``c`` satisfies ``-lap c + beta c = alpha u`` with
zero-flux walls, discretized with the mirror-ghost Laplacian from
:mod:`chemotax.grid`.  Two interchangeable backends solve the shifted
system ``(sigma - lap) x = rhs``:

``transform``
    diagonalization in the cosine basis of the cell-centered stencil
    (exact up to round-off, one forward/inverse transform pair);

``cg``
    matrix-free Jacobi-preconditioned conjugate gradient, kept as an
    independent route so the two backends can cross-check each other on
    every grid.

The same shifted solve drives the implicit diffusion half-steps of the
dynamics (backward Euler and theta scheme), so it is exposed here as
:func:`solve_shifted`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import SolverFailure
from .grid import Field, Grid, laplacian_neumann, lp_norm, w1p_norm
from .model import ModelParams

METHODS = ("transform", "cg")


@dataclass(frozen=True)
class EllipticConfig:
    method: str = "transform"
    tol: float = 1.0e-10
    max_iter: int = 10_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown elliptic method {self.method!r}; expected one of {METHODS}")
        if not (0 < self.tol <= 1.0e-4):
            raise ValueError(f"tol must lie in (0, 1e-4], got {self.tol!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def _stencil_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues of -lap on the cosine modes, broadcast to grid shape."""
    lam = np.zeros(grid.shape)
    for a, (m, h) in enumerate(zip(grid.shape, grid.h)):
        k = np.arange(m)
        lam_a = (4.0 / h**2) * np.sin(np.pi * k / (2 * m)) ** 2
        shape = [1] * grid.dim
        shape[a] = m
        lam = lam + lam_a.reshape(shape)
    return lam


def _solve_transform(rhs: np.ndarray, sigma: float, grid: Grid) -> np.ndarray:
    coeff = scipy.fft.dctn(rhs, type=2, norm="ortho")
    coeff /= sigma + _stencil_eigenvalues(grid)
    return scipy.fft.idctn(coeff, type=2, norm="ortho")


def _shifted_diagonal(sigma: float, grid: Grid) -> np.ndarray:
    """Diagonal of (sigma - lap): boundary cells lose one neighbor per wall."""
    diag = np.full(grid.shape, float(sigma))
    for a, (m, h) in enumerate(zip(grid.shape, grid.h)):
        deg = np.full(m, 2.0)
        deg[0] = deg[-1] = 1.0
        shape = [1] * grid.dim
        shape[a] = m
        diag = diag + deg.reshape(shape) / h**2
    return diag


def _solve_cg(rhs: np.ndarray, sigma: float, grid: Grid, tol: float, max_iter: int) -> np.ndarray:
    def fwd_op(x):
        return sigma * x - laplacian_neumann(Field(grid, x)).values

    inv_diag = 1.0 / _shifted_diagonal(sigma, grid)

    b_norm = np.sqrt((rhs * rhs).sum())
    if b_norm == 0.0:
        return np.zeros(grid.shape)

    x = np.zeros(grid.shape)
    r = rhs.copy()
    z = inv_diag * r
    d = z.copy()
    rz = (r * z).sum()
    for k in range(max_iter):
        res = np.sqrt((r * r).sum())
        if res <= tol * b_norm:
            return x
        ad = fwd_op(d)
        alpha = rz / (d * ad).sum()
        x = x + alpha * d
        r = r - alpha * ad
        z = inv_diag * r
        rz_new = (r * z).sum()
        d = z + (rz_new / rz) * d
        rz = rz_new
    res = np.sqrt((r * r).sum())
    if res <= tol * b_norm:
        return x
    raise SolverFailure("conjugate gradient did not converge", res / b_norm, max_iter)


def solve_shifted(rhs: Field, sigma: float, cfg: EllipticConfig) -> Field:
    """Solve ``(sigma - lap) x = rhs`` with zero-flux walls, sigma > 0."""
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be finite and positive, got {sigma!r}")
    if cfg.method == "transform":
        vals = _solve_transform(rhs.values, sigma, rhs.grid)
    else:
        vals = _solve_cg(rhs.values, sigma, rhs.grid, cfg.tol, cfg.max_iter)
    return Field(rhs.grid, vals)


def solve_helmholtz(u: Field, params: ModelParams, cfg: EllipticConfig) -> Field:
    """Chemoattractant from the active density: (-lap + beta) c = alpha u."""
    return solve_shifted(Field(u.grid, params.alpha * u.values), params.beta, cfg)


def helmholtz_residual(u: Field, c: Field, params: ModelParams) -> float:
    """Relative l2 residual of the chemoattractant balance for a (u, c) pair."""
    rhs = params.alpha * u.values
    lhs = params.beta * c.values - laplacian_neumann(c).values
    num = float(np.sqrt(((lhs - rhs) ** 2).sum()))
    den = float(np.sqrt((rhs**2).sum()))
    return num / den if den > 0 else num


@dataclass(frozen=True)
class EllipticConstants:
    """Empirical regularity ratios over a sample of source fields."""

    w1p_ratio: float
    linf_ratio: float
    n_samples: int


def measure_elliptic_constants(
    params: ModelParams,
    samples: Sequence[Field],
    p: float,
    cfg: EllipticConfig = EllipticConfig(),
) -> EllipticConstants:
    """Largest observed ||c||_{W^{1,p}} / ||u||_p and ||c||_inf / ||u||_inf.

    Samples with vanishing norm are rejected; the list must be nonempty.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample field")
    w1p_best = 0.0
    linf_best = 0.0
    for u in samples:
        up = lp_norm(u, p)
        uinf = lp_norm(u, np.inf)
        if up == 0 or uinf == 0:
            raise ValueError("sample fields must have nonvanishing norm")
        if np.any(u.values < 0):
            raise ValueError("sample fields must be nonnegative")
        c = solve_helmholtz(u, params, cfg)
        w1p_best = max(w1p_best, w1p_norm(c, p) / up)
        linf_best = max(linf_best, lp_norm(c, np.inf) / uinf)
    return EllipticConstants(w1p_best, linf_best, len(samples))
