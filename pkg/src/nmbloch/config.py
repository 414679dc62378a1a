"""Scenario configuration: TOML schema, validation and resolution.

A scenario file looks like::

    mode = "full"                     # or "secular"
    outputs = ["rates", "bloch", "cp", "markov_summary"]
    strict_cp = false
    lamb_shift = false
    workers = 1

    [spectrum]
    kind = "lorentzian"               # lorentzian | ohmic | tabulated
    alpha_sq = 0.01
    p = 0.01                          # or width = ...
    s = 10.0                          # or omega_0 = ...

    [system]
    omega_A = 1.0
    Omega = 0.01
    Delta = 0.0                       # or omega_L = ...

    [initial_state]
    x = 0.0
    y = 0.0
    z = 1.0
    basis = "dressed"                 # or "bare"

    [horizon]
    T_max = 30.0                      # dimensionless; or t_max in time units
    samples = 301

    [sweep]
    "spectrum.s" = [0.1, 10.0]

Ohmic spectra take ``alpha`` and one of ``omega_C``, ``s`` (``omega_C =
omega_L / s``) or ``p`` (``omega_C = omega / p``). Giving both ``p`` and ``s``
fixes ``omega_C`` from ``s`` and sets ``Omega`` so that ``omega = p omega_C``.
Tabulated spectra take ``path`` to a two-column CSV.
"""

from __future__ import annotations

import copy
import itertools
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dressed import SystemParams, dressed_basis, from_bare_frame
from .exceptions import ConfigError, NMBlochError
from .spectral import Lorentzian, Ohmic, Tabulated

OUTPUT_KINDS = ("rates", "bloch", "cp", "markov_summary")
MODES = ("secular", "full")
TOP_KEYS = {"name", "mode", "outputs", "strict_cp", "lamb_shift", "workers", "output_dir",
            "spectrum", "system", "initial_state", "horizon", "sweep", "plot", "notes"}
SECTION_KEYS = {
    "spectrum": {"kind", "alpha_sq", "width", "omega_0", "p", "s", "alpha", "omega_C", "path"},
    "system": {"omega_A", "omega_L", "Omega", "Delta"},
    "initial_state": {"x", "y", "z", "basis"},
    "horizon": {"t_max", "T_max", "samples", "inset_T_max"},
    "plot": {"components", "title"},
}


@dataclass
class ScenarioConfig:
    """Raw, validated scenario description; ``cells()`` expands the sweep."""

    data: dict
    source: Optional[Path] = None

    @property
    def name(self) -> str:
        if "name" in self.data:
            return str(self.data["name"])
        return self.source.stem if self.source else "scenario"

    @property
    def mode(self) -> str:
        return self.data.get("mode", "full")

    @property
    def outputs(self) -> list:
        return list(self.data.get("outputs", ["rates", "bloch", "cp", "markov_summary"]))

    @property
    def strict_cp(self) -> bool:
        return bool(self.data.get("strict_cp", False))

    @property
    def workers(self) -> int:
        return int(self.data.get("workers", 1))

    @property
    def sweep(self) -> dict:
        return flatten_sweep(self.data.get("sweep", {}))

    @property
    def notes(self) -> list:
        return list(self.data.get("notes", []))

    def cells(self) -> list:
        """Cartesian product of the sweep, in declaration order, as resolved cells."""
        sweep = self.sweep
        if not sweep:
            return [resolve_cell(self.data, {})]
        keys = list(sweep)
        out = []
        for values in itertools.product(*(sweep[k] for k in keys)):
            out.append(resolve_cell(self.data, dict(zip(keys, values))))
        return out


@dataclass(frozen=True)
class Cell:
    """One fully resolved simulation."""

    overrides: dict
    model: object
    params: SystemParams
    r0: np.ndarray
    grid: np.ndarray
    mode: str
    lamb_shift: bool
    inset_T_max: Optional[float]
    settings: dict = field(default_factory=dict)

    @property
    def tag(self) -> str:
        if not self.overrides:
            return ""
        return "_".join(f"{k.split('.')[-1]}{v:g}" for k, v in self.overrides.items())


def flatten_sweep(sweep) -> dict:
    """Accept both ``"spectrum.p" = [...]`` and the nested form ``spectrum.p = [...]``."""
    out = {}
    for key, value in sweep.items():
        if isinstance(value, dict):
            for sub, inner in value.items():
                out[f"{key}.{sub}"] = inner
        else:
            out[key] = value
    return out


def _num(sec, key, path, positive=False, nonneg=False):
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", path)
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError("must be finite", path)
    if positive and v <= 0:
        raise ConfigError(f"must be positive, got {v}", path)
    if nonneg and v < 0:
        raise ConfigError(f"must be non-negative, got {v}", path)
    return v


def _opt(sec, key, section, **kw):
    return _num(sec, key, f"{section}.{key}", **kw) if key in sec else None


def validate(data: dict) -> None:
    """Schema check; raises :class:`ConfigError` with the offending field path."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError("unknown key", key)
    for section, allowed in SECTION_KEYS.items():
        sec = data.get(section, {})
        if not isinstance(sec, dict):
            raise ConfigError("must be a table", section)
        for key in sec:
            if key not in allowed:
                raise ConfigError("unknown key", f"{section}.{key}")
    for section in ("spectrum", "system", "horizon"):
        if section not in data:
            raise ConfigError("missing section", section)
    if data.get("mode", "full") not in MODES:
        raise ConfigError(f"must be one of {MODES}", "mode")
    outputs = data.get("outputs", [])
    if not isinstance(outputs, list):
        raise ConfigError("must be a list", "outputs")
    for i, o in enumerate(outputs):
        if o not in OUTPUT_KINDS:
            raise ConfigError(f"unknown output {o!r}; expected one of {OUTPUT_KINDS}", f"outputs[{i}]")
    w = data.get("workers", 1)
    if isinstance(w, bool) or not isinstance(w, int) or w < 1:
        raise ConfigError("must be a positive integer", "workers")
    for flag in ("strict_cp", "lamb_shift"):
        if not isinstance(data.get(flag, False), bool):
            raise ConfigError("must be true or false", flag)
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("must be a table", "sweep")
    for key, values in flatten_sweep(sweep).items():
        path = f"sweep.{key}"
        parts = key.split(".")
        if len(parts) != 2 or parts[0] not in SECTION_KEYS or parts[1] not in SECTION_KEYS[parts[0]]:
            raise ConfigError("sweep keys must name a scalar field as 'section.field'", path)
        if not isinstance(values, list) or not values:
            raise ConfigError("must be a non-empty list", path)
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"sweep values must be finite numbers, got {v!r}", path)
    # resolving every cell surfaces value errors with field paths
    ScenarioConfig(data).cells()


def _build_spectrum(spec: dict, sysd: dict):
    kind = spec.get("kind")
    if kind not in ("lorentzian", "ohmic", "tabulated"):
        raise ConfigError("must be 'lorentzian', 'ohmic' or 'tabulated'", "spectrum.kind")
    omega_A = _opt(sysd, "omega_A", "system", positive=True)
    omega_L = _opt(sysd, "omega_L", "system", positive=True)
    Delta = _opt(sysd, "Delta", "system")
    Omega = _opt(sysd, "Omega", "system", nonneg=True)
    p = _opt(spec, "p", "spectrum", positive=True)
    s = _opt(spec, "s", "spectrum")

    if kind == "ohmic" and p is not None and s is not None:
        if Omega is not None:
            raise ConfigError("Omega is derived from spectrum.p and spectrum.s; omit it", "system.Omega")
        if omega_L is None:
            if omega_A is None or Delta is None:
                raise ConfigError("need omega_L, or omega_A with Delta", "system")
            omega_L = omega_A - Delta
        if s <= 0:
            raise ConfigError("must be positive for an ohmic spectrum", "spectrum.s")
        omega_C = omega_L / s
        w = p * omega_C
        d = Delta if Delta is not None else omega_A - omega_L
        if w < abs(d):
            raise ConfigError("p * omega_C is below |Delta|; no real Omega", "spectrum.p")
        Omega = math.sqrt(w * w - d * d)
    if Omega is None:
        raise ConfigError("missing", "system.Omega")
    params = SystemParams.resolve(Omega, Delta=Delta, omega_A=omega_A, omega_L=omega_L)
    omega = dressed_basis(params).omega

    if kind == "lorentzian":
        if "alpha_sq" not in spec:
            raise ConfigError("missing", "spectrum.alpha_sq")
        alpha_sq = _num(spec, "alpha_sq", "spectrum.alpha_sq", positive=True)
        width = _opt(spec, "width", "spectrum", positive=True)
        if (width is None) == (p is None):
            raise ConfigError("give exactly one of width, p", "spectrum.width")
        if width is None:
            width = omega / p
        omega_0 = _opt(spec, "omega_0", "spectrum")
        if (omega_0 is None) == (s is None):
            raise ConfigError("give exactly one of omega_0, s", "spectrum.omega_0")
        if omega_0 is None:
            omega_0 = params.omega_L + s * width
        return Lorentzian(alpha_sq, width, omega_0), params
    if kind == "ohmic":
        if "alpha" not in spec:
            raise ConfigError("missing", "spectrum.alpha")
        alpha = _num(spec, "alpha", "spectrum.alpha", positive=True)
        omega_C = _opt(spec, "omega_C", "spectrum", positive=True)
        given = sum(x is not None for x in (omega_C, p, s))
        if omega_C is not None and given > 1:
            raise ConfigError("give omega_C alone, or p and/or s", "spectrum.omega_C")
        if given == 0:
            raise ConfigError("need omega_C, p or s", "spectrum.omega_C")
        if omega_C is None:
            if s is not None:
                if s <= 0:
                    raise ConfigError("must be positive for an ohmic spectrum", "spectrum.s")
                omega_C = params.omega_L / s
            else:
                omega_C = omega / p
        return Ohmic(alpha, omega_C), params
    if "path" not in spec:
        raise ConfigError("missing", "spectrum.path")
    try:
        return Tabulated.from_csv(spec["path"]), params
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc), "spectrum.path") from exc


def resolve_cell(data: dict, overrides: dict) -> Cell:
    d = copy.deepcopy(data)
    for key, value in overrides.items():
        section, name = key.split(".")
        d.setdefault(section, {})[name] = value
    try:
        # validity warnings are re-raised by the runner inside its capture
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model, params = _build_spectrum(d["spectrum"], d["system"])
    except ConfigError:
        raise
    except (NMBlochError, ValueError) as exc:
        raise ConfigError(str(exc), "spectrum") from exc
    basis = dressed_basis(params)

    init = d.get("initial_state", {})
    tag = init.get("basis", "dressed")
    if tag not in ("dressed", "bare"):
        raise ConfigError("must be 'dressed' or 'bare'", "initial_state.basis")
    r = np.array([_num(init, k, f"initial_state.{k}") if k in init else v
                  for k, v in (("x", 0.0), ("y", 0.0), ("z", 1.0))])
    if np.linalg.norm(r) > 1 + 1e-12:
        raise ConfigError("initial Bloch vector lies outside the unit ball", "initial_state")
    if tag == "bare":
        r = from_bare_frame(r, basis)

    hz = d["horizon"]
    if ("t_max" in hz) == ("T_max" in hz):
        raise ConfigError("give exactly one of t_max, T_max", "horizon.t_max")
    if "t_max" in hz:
        t_max = _num(hz, "t_max", "horizon.t_max", positive=True)
    else:
        t_max = _num(hz, "T_max", "horizon.T_max", positive=True) / model.scale
    samples = hz.get("samples", 201)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ConfigError("must be an integer >= 2", "horizon.samples")
    inset = _opt(hz, "inset_T_max", "horizon", positive=True)
    grid = np.linspace(0.0, t_max, samples)
    return Cell(dict(overrides), model, params, r, grid, d.get("mode", "full"),
                bool(d.get("lamb_shift", False)), inset, {"plot": d.get("plot", {})})


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}", str(path)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", str(path)) from exc
    # relative tabulated paths are taken from the config file's directory
    spec = data.get("spectrum")
    if isinstance(spec, dict) and isinstance(spec.get("path"), str):
        p = Path(spec["path"])
        if not p.is_absolute():
            spec["path"] = str(path.parent / p)
    validate(data)
    return ScenarioConfig(data, path)


def from_dict(data: dict) -> ScenarioConfig:
    validate(data)
    return ScenarioConfig(copy.deepcopy(data))
