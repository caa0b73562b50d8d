"""Cell-centered finite-volume grids on rectangles with zero-flux walls.

Fields live at cell centers.  Face quantities (gradients, fluxes) live on
interior faces only: with the mirror-ghost convention the boundary faces
carry exactly zero flux, so they are never stored.  All operators below
are linear, dimension-agnostic (1-d and 2-d) and act on float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np


def _axes_tuple(value, dim, name):
    if np.isscalar(value):
        value = (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise ValueError(f"{name} must have one entry per axis, got {value!r} for dim={dim}")
    return value


@dataclass(frozen=True)
class GridSpec:
    """Rectangle dimensions and cell counts.

    ``dim`` is 1 or 2; ``lengths`` and ``cells`` may be scalars (same for
    every axis) or per-axis tuples.  At least 4 cells per axis so every
    stencil has interior rows.
    """

    dim: int = 1
    lengths: Tuple[float, ...] = (1.0,)
    cells: Tuple[int, ...] = (128,)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim!r}")
        lengths = _axes_tuple(self.lengths, self.dim, "lengths")
        cells = _axes_tuple(self.cells, self.dim, "cells")
        lengths = tuple(float(L) for L in lengths)
        cells = tuple(int(m) for m in cells)
        if any(not (np.isfinite(L) and L > 0) for L in lengths):
            raise ValueError(f"lengths must be positive, got {lengths!r}")
        if any(m < 4 for m in cells):
            raise ValueError(f"need at least 4 cells per axis, got {cells!r}")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "cells", cells)


@dataclass(frozen=True)
class Grid:
    spec: GridSpec
    h: Tuple[float, ...]
    shape: Tuple[int, ...]
    axes: Tuple[np.ndarray, ...]  # cell-center coordinates per axis
    cell_volume: float

    @property
    def dim(self) -> int:
        return self.spec.dim

    def coords(self) -> Tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays broadcast to the full grid shape."""
        return np.meshgrid(*self.axes, indexing="ij")


def build_grid(spec: GridSpec) -> Grid:
    h = tuple(L / m for L, m in zip(spec.lengths, spec.cells))
    axes = tuple((np.arange(m) + 0.5) * hh for m, hh in zip(spec.cells, h))
    volume = float(np.prod(h))
    return Grid(spec=spec, h=h, shape=tuple(spec.cells), axes=axes, cell_volume=volume)


@dataclass(frozen=True)
class Field:
    """Cell-centered scalar field; values have the grid's shape."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"field shape {vals.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def full(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


@dataclass(frozen=True)
class FaceField:
    """Per-axis arrays of interior-face values.

    Along axis ``a`` the array has one fewer entry than the cell array in
    that direction; the two boundary faces are implicitly zero.
    """

    grid: Grid
    faces: Tuple[np.ndarray, ...]

    def __post_init__(self):
        faces = tuple(np.asarray(f, dtype=float) for f in self.faces)
        if len(faces) != self.grid.dim:
            raise ValueError("one face array per axis required")
        for a, f in enumerate(faces):
            want = list(self.grid.shape)
            want[a] -= 1
            if f.shape != tuple(want):
                raise ValueError(f"face array for axis {a} has shape {f.shape}, expected {tuple(want)}")
        object.__setattr__(self, "faces", faces)


def face_divergence(flux: FaceField) -> np.ndarray:
    """Per-cell sum of (outgoing - incoming) face values over volume width.

    Boundary faces contribute zero.  This is the discrete divergence whose
    cell sum telescopes to exactly zero, the backbone of conservation.
    """
    grid = flux.grid
    out = np.zeros(grid.shape)
    for a, f in enumerate(flux.faces):
        pad = [(0, 0)] * f.ndim
        pad[a] = (1, 1)
        padded = np.pad(f, pad)
        out += np.diff(padded, axis=a) / grid.h[a]
    return out


def laplacian_neumann(f: Field) -> Field:
    """Mirror-ghost 3/5-point Laplacian; rows sum to zero by construction."""
    grad = gradient_faces(f)
    return Field(f.grid, face_divergence(grad))


def gradient_faces(f: Field) -> FaceField:
    """Centered difference across each interior face, boundary faces zero."""
    grid = f.grid
    faces = tuple(np.diff(f.values, axis=a) / grid.h[a] for a in range(grid.dim))
    return FaceField(grid, faces)


def integrate(f: Field) -> float:
    """Midpoint quadrature: cell sum times the uniform cell volume."""
    return float(f.values.sum() * f.grid.cell_volume)


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm with the cell volume weight; p = inf gives max |f|."""
    if np.isinf(p):
        return float(np.abs(f.values).max())
    if p < 1:
        raise ValueError(f"p must be in [1, inf], got {p!r}")
    return float((np.abs(f.values) ** p).sum() * f.grid.cell_volume) ** (1.0 / p)


def cell_gradient(f: Field) -> np.ndarray:
    """Per-cell gradient components from averaged adjacent face values.

    Boundary faces count as zero, matching the zero-flux walls; returns an
    array of shape ``(dim,) + grid.shape``.
    """
    grid = f.grid
    comps = np.zeros((grid.dim,) + grid.shape)
    for a in range(grid.dim):
        g = np.diff(f.values, axis=a) / grid.h[a]
        pad = [(0, 0)] * g.ndim
        pad[a] = (1, 1)
        padded = np.pad(g, pad)
        lo = [slice(None)] * g.ndim
        hi = [slice(None)] * g.ndim
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        comps[a] = 0.5 * (padded[tuple(lo)] + padded[tuple(hi)])
    return comps


def w1p_norm(f: Field, p: float) -> float:
    """Discrete W^{1,p} norm: (lp(f)^p + lp(|grad f|)^p)^(1/p), finite p."""
    if not (1 <= p < np.inf):
        raise ValueError(f"p must be finite and >= 1, got {p!r}")
    mag = np.sqrt((cell_gradient(f) ** 2).sum(axis=0))
    grad_term = float((mag ** p).sum() * f.grid.cell_volume)
    return float(lp_norm(f, p) ** p + grad_term) ** (1.0 / p)


def dirichlet_energy(f: Field) -> float:
    """Sum over faces of squared face gradients times cell volume.

    Equals ``-integrate(f * laplacian_neumann(f))`` exactly (discrete
    integration by parts with zero-flux walls).
    """
    grad = gradient_faces(f)
    return float(sum((g ** 2).sum() for g in grad.faces) * f.grid.cell_volume)
