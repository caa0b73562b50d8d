"""Run configuration: a flat TOML document with dotted section paths.

Every key is checked against the schema below; unknown keys and type
errors are collected with their full dotted path and reported together,
so a typo never silently falls back to a default.  Example::

    grid.dim = 1
    grid.cells = 256
    model.alpha = 10.0
    kinetics.family = "saturating-rational"
    step.t_end = 1.0
    initial_u.kind = "gaussian"
    initial_u.amplitude = 4.0
    initial_u.width = 0.02

Sections may equally be written as TOML tables (``[model]`` followed by
bare keys).  Omitted keys take the package defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from .diagnostics import DiagConfig
from .dynamics import StepConfig
from .elliptic import EllipticConfig
from .errors import ConfigError
from .grid import GridSpec
from .model import KineticsSpec, ModelParams
from .scenarios import EpsStudySpec, InitialCondition, Scenario


@dataclass(frozen=True)
class ScanSpec:
    amp_lo: float
    amp_hi: float
    iters: int = 12


@dataclass(frozen=True)
class OdeTaskSpec:
    """One ODE-toolkit invocation for the ``ode`` subcommand."""

    operation: str  # growth | blowup | pure-power | threshold
    C: float = 1.0
    p: float = 2.0
    w0: float = 1.0
    t_end: float = 1.0
    rtol: float = 1.0e-8
    alpha1: float = 1.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    beta0: float = 1.0
    y0: float = 1.0
    y_cap: float = 1.0e9
    horizon: float = 1.0e3
    k: float = 1.0

    def __post_init__(self):
        if self.operation not in ("growth", "blowup", "pure-power", "threshold"):
            raise ValueError(f"operation must be growth, blowup, pure-power or threshold, "
                             f"got {self.operation!r}")


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    params: ModelParams
    step: StepConfig
    elliptic: EllipticConfig
    diag: DiagConfig
    u0: InitialCondition
    n0: InitialCondition
    output_dir: Optional[str] = None
    study: Optional[EpsStudySpec] = None
    scan: Optional[ScanSpec] = None
    ode_task: Optional[OdeTaskSpec] = None

    def scenario(self, name: str = "") -> Scenario:
        return Scenario(grid=self.grid, u0=self.u0, n0=self.n0, name=name)


def _coerce_number(value, path, errors):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{path}: expected a number, got {value!r}")
        return None
    return float(value)


def _coerce_int(value, path, errors):
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{path}: expected an integer, got {value!r}")
        return None
    return value


def _coerce_str(value, path, errors):
    if not isinstance(value, str):
        errors.append(f"{path}: expected a string, got {value!r}")
        return None
    return value


def _coerce_axes(value, path, errors):
    """Scalar or per-axis list of numbers."""
    if isinstance(value, list):
        out = tuple(_coerce_number(v, path, errors) for v in value)
        return None if any(v is None for v in out) else out
    return _coerce_number(value, path, errors)


def _coerce_axes_int(value, path, errors):
    if isinstance(value, list):
        out = tuple(_coerce_int(v, path, errors) for v in value)
        return None if any(v is None for v in out) else out
    return _coerce_int(value, path, errors)


def _coerce_list(value, path, errors):
    if not isinstance(value, list):
        errors.append(f"{path}: expected a list, got {value!r}")
        return None
    return value


_SCHEMA = {
    "grid": {"dim": _coerce_int, "lengths": _coerce_axes, "cells": _coerce_axes_int},
    "model": {"alpha": _coerce_number, "beta": _coerce_number, "gamma": _coerce_number,
              "eps": _coerce_number},
    "kinetics": {"family": _coerce_str, "G0": _coerce_number, "B0": _coerce_number,
                 "g_scale": _coerce_number, "b_scale": _coerce_number,
                 "g_table": _coerce_str, "b_table": _coerce_str},
    "step": {"t_end": _coerce_number, "cfl": _coerce_number, "dt_max": _coerce_number,
             "dt_min": _coerce_number, "diffusion_theta": _coerce_number,
             "snapshot_every": _coerce_int},
    "elliptic": {"method": _coerce_str, "tol": _coerce_number, "max_iter": _coerce_int},
    "diagnostics": {"p": _coerce_number, "blowup_factor": _coerce_number,
                    "ode_constant": _coerce_number},
    "initial_u": {"kind": _coerce_str, "amplitude": _coerce_number,
                  "background": _coerce_number, "center": _coerce_axes,
                  "width": _coerce_number, "values": _coerce_list},
    "initial_n": {"kind": _coerce_str, "amplitude": _coerce_number,
                  "background": _coerce_number, "center": _coerce_axes,
                  "width": _coerce_number, "values": _coerce_list},
    "output": {"dir": _coerce_str},
    "study": {"eps0": _coerce_number, "levels": _coerce_int, "p": _coerce_number},
    "scan": {"amp_lo": _coerce_number, "amp_hi": _coerce_number, "iters": _coerce_int},
    "ode": {"operation": _coerce_str, "C": _coerce_number, "p": _coerce_number,
            "w0": _coerce_number, "t_end": _coerce_number, "rtol": _coerce_number,
            "alpha1": _coerce_number, "alpha2": _coerce_number, "alpha3": _coerce_number,
            "beta0": _coerce_number, "y0": _coerce_number, "y_cap": _coerce_number,
            "horizon": _coerce_number, "k": _coerce_number},
}

_DEFAULT_U0 = InitialCondition(kind="gaussian", amplitude=1.0, width=0.05)
_DEFAULT_N0 = InitialCondition(kind="constant", amplitude=1.0)


def _walk(doc, errors):
    """Schema walk: returns {section: {key: coerced}} and records problems."""
    out = {}
    for section, body in doc.items():
        if section not in _SCHEMA:
            errors.append(f"{section}: unknown section")
            continue
        if not isinstance(body, dict):
            errors.append(f"{section}: expected a table of keys, got {body!r}")
            continue
        fields = _SCHEMA[section]
        got = {}
        for key, value in body.items():
            if key not in fields:
                errors.append(f"{section}.{key}: unknown key")
                continue
            coerced = fields[key](value, f"{section}.{key}", errors)
            if coerced is not None:
                got[key] = coerced
        out[section] = got
    return out


def _build(section, cls, kwargs, errors, keys):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        first = msg.split()[0] if msg else ""
        path = f"{section}.{first}" if first in keys else section
        errors.append(f"{path}: {msg}")
        return None


def _load_rate_table(path, base_dir, label, errors):
    full = path if os.path.isabs(path) else os.path.join(base_dir, path)
    try:
        data = np.loadtxt(full, delimiter=",", ndmin=2)
    except OSError as exc:
        errors.append(f"kinetics.{label}: cannot read {full!r} ({exc})")
        return None
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        errors.append(f"kinetics.{label}: expected two columns and at least two rows in {full!r}")
        return None
    return data[:, 0], data[:, 1]


def parse_config(text: str, base_dir: str = ".") -> RunConfig:
    """Parse and validate a configuration document.

    Raises :class:`ConfigError` carrying every problem found, each
    prefixed with its dotted path.
    """
    errors = []
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"syntax: {exc}"]) from None

    sections = _walk(doc, errors)

    grid_kw = sections.get("grid", {})
    grid = _build("grid", GridSpec, grid_kw, errors, _SCHEMA["grid"])

    kin_kw = dict(sections.get("kinetics", {}))
    for label in ("g_table", "b_table"):
        if label in kin_kw:
            table = _load_rate_table(kin_kw.pop(label), base_dir, label, errors)
            if table is not None:
                kin_kw[label] = table
    kinetics = _build("kinetics", KineticsSpec, kin_kw, errors, _SCHEMA["kinetics"])

    model_kw = dict(sections.get("model", {}))
    if kinetics is not None:
        model_kw["kinetics"] = kinetics
    params = _build("model", ModelParams, model_kw, errors, _SCHEMA["model"])

    step = _build("step", StepConfig, sections.get("step", {}), errors, _SCHEMA["step"])
    elliptic = _build("elliptic", EllipticConfig, sections.get("elliptic", {}),
                      errors, _SCHEMA["elliptic"])
    diag = _build("diagnostics", DiagConfig, sections.get("diagnostics", {}),
                  errors, _SCHEMA["diagnostics"])

    def build_ic(section, default):
        if section not in sections:
            return default
        kw = dict(sections[section])
        if "values" in kw:
            kw["values"] = np.asarray(kw["values"], dtype=float)
            if kw.setdefault("kind", "table") != "table":
                errors.append(f"{section}.values: only meaningful for kind = \"table\"")
                return None
        return _build(section, InitialCondition, kw, errors, _SCHEMA[section])

    u0 = build_ic("initial_u", _DEFAULT_U0)
    n0 = build_ic("initial_n", _DEFAULT_N0)

    study = None
    if "study" in sections:
        study = _build("study", EpsStudySpec, sections["study"], errors, _SCHEMA["study"])
    scan = None
    if "scan" in sections:
        scan = _build("scan", ScanSpec, sections["scan"], errors, _SCHEMA["scan"])
        if scan is not None and not (0 <= scan.amp_lo < scan.amp_hi and scan.iters >= 0):
            errors.append("scan.amp_lo: need 0 <= amp_lo < amp_hi and iters >= 0")
            scan = None
    ode_task = None
    if "ode" in sections:
        kw = sections["ode"]
        if "operation" not in kw:
            errors.append("ode.operation: required for the ode subcommand")
        else:
            ode_task = _build("ode", OdeTaskSpec, kw, errors, _SCHEMA["ode"])

    output_dir = sections.get("output", {}).get("dir")

    if errors:
        raise ConfigError(errors)
    return RunConfig(
        grid=grid, params=params, step=step, elliptic=elliptic, diag=diag,
        u0=u0, n0=n0, output_dir=output_dir, study=study, scan=scan, ode_task=ode_task,
    )


def load_config(path) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
