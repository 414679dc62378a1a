"""Scenario execution: rates, then Bloch trajectories, then CP reports.

Cells of a sweep run independently (optionally in worker processes); a single
collector writes every file in cell order so the outputs are deterministic.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import plotting
from .bloch import integrate_bloch, markov_summary, steady_state
from .config import Cell, ScenarioConfig
from .cp import nonsecular_cp_check, secular_cp_check
from .dressed import dressed_basis, to_bare_frame
from .exceptions import ConfigError, NMBlochError, RegimeMismatchWarning
from .rates import RateFunction, SplinedRates, sample_trajectory
from .spectral import Lorentzian, Ohmic, Regime, regime_params

OUTPUT_ENV = "NMBLOCH_OUTPUT_DIR"


class CellError(NMBlochError):
    """A lower-module failure with the sweep cell that triggered it."""

    def __init__(self, cell_index, overrides, cause):
        self.cell_index = cell_index
        self.cause = cause
        where = f"cell {cell_index}" + (f" {overrides}" if overrides else "")
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")


@dataclass
class RunManifest:
    name: str
    output_dir: str
    cells: list = field(default_factory=list)
    files: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    duration_s: float = 0.0

    @property
    def cp_violations(self) -> list:
        return [c for c in self.cells if c.get("cp_verdict", "CP_holds") != "CP_holds"]

    def to_dict(self) -> dict:
        return {"name": self.name, "output_dir": self.output_dir, "cells": self.cells,
                "files": self.files, "warnings": self.warnings,
                "assumptions": self.assumptions, "duration_s": self.duration_s}


def _spectrum_info(model) -> dict:
    if isinstance(model, Lorentzian):
        return {"kind": "lorentzian", "alpha_sq": model.alpha_sq, "width": model.width,
                "omega_0": model.omega_0}
    if isinstance(model, Ohmic):
        return {"kind": "ohmic", "alpha": model.alpha, "omega_C": model.omega_C}
    return {"kind": "tabulated", "nodes": int(model.frequencies.size)}


def _rate_norm(model):
    if isinstance(model, Lorentzian):
        return model.alpha_sq, r"$\gamma/\alpha^2$"
    if isinstance(model, Ohmic):
        return model.alpha ** 2 * model.omega_C, r"$\gamma/(\alpha^2\omega_C)$"
    return 1.0, r"$\gamma$"


def _title(cell: Cell, reg) -> str:
    parts = [f"p={reg.p:g}"]
    if reg.s is not None:
        parts.append(f"s={reg.s:g}")
    return ", ".join(parts)


def simulate_cell(cell: Cell, outputs, index: int = 0) -> dict:
    """Compute everything one cell needs; returns plain arrays and metadata."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            return _simulate(cell, outputs, caught)
    except NMBlochError as exc:
        raise CellError(index, cell.overrides, exc) from exc
    except (ValueError, ArithmeticError) as exc:
        raise CellError(index, cell.overrides, exc) from exc


def _simulate(cell: Cell, outputs, caught) -> dict:
    params, model = cell.params, cell.model
    basis = dressed_basis(params)
    params.warn_validity()
    if isinstance(model, Ohmic):
        Ohmic(model.alpha, model.omega_C)  # re-emits the coupling-strength warning, if any
    reg = regime_params(model, basis, params)
    secular = cell.mode == "secular"
    norm, label = _rate_norm(model)
    out = {"overrides": cell.overrides, "tag": cell.tag, "p": reg.p, "s": reg.s,
           "regime": reg.regime.value, "omega": basis.omega, "spectrum": _spectrum_info(model),
           "system": {"omega_A": params.omega_A, "omega_L": params.omega_L,
                      "Omega": params.Omega, "Delta": params.Delta},
           "r0_dressed": cell.r0.tolist(), "mode": cell.mode, "title": _title(cell, reg),
           "rate_norm": norm, "rate_label": label, "inset_T_max": cell.inset_T_max,
           "plot": cell.settings.get("plot", {})}

    if "rates" in outputs:
        out["rates"] = sample_trajectory(model, basis, params, cell.grid).columns()
    needs_traj = any(o in outputs for o in ("bloch", "cp"))
    rates = RateFunction(model, basis, params)
    if needs_traj:
        if secular and reg.regime is Regime.NONSECULAR:
            warnings.warn(f"secular mode requested at p={reg.p:g}, where the secular "
                          f"approximation does not hold", RegimeMismatchWarning)
        if not secular and reg.regime is Regime.SECULAR:
            warnings.warn(f"full mode at p={reg.p:g} keeps rapidly oscillating nonsecular terms; "
                          f"at strong coupling they can drive the Bloch vector out of the unit ball",
                          RegimeMismatchWarning)
        fn = SplinedRates(rates, cell.grid[-1]) if rates.oracle else rates
        traj = integrate_bloch(fn, cell.r0, cell.grid, secular_only=secular,
                               lamb_shift=cell.lamb_shift)
        out["bloch"] = traj.columns()
        if cell.inset_T_max is not None:
            inset_grid = np.linspace(0.0, cell.inset_T_max / model.scale, cell.grid.size)
            out["bloch_inset"] = integrate_bloch(fn, cell.r0, inset_grid, secular_only=secular,
                                                 lamb_shift=cell.lamb_shift).columns()
        if "cp" in outputs:
            report = secular_cp_check(traj) if secular else nonsecular_cp_check(traj)
            out["cp"] = report.columns()
            out["cp_verdict"] = report.verdict
            out["cp_equivalent_verdicts_agree"] = report.verdicts_agree
            if report.horizon_too_long_at is not None:
                warnings.warn(f"closed-form Choi eigenvalues complex from t={report.horizon_too_long_at:.6g}"
                              f" (Lambda + 2 Gamma > 1); horizon exceeds the second-order regime",
                              RegimeMismatchWarning)
    if "markov_summary" in outputs:
        ms = markov_summary(basis, rates.markov_gamma)
        info = {"tau_R": ms.tau_R, "tau_D": ms.tau_D, "z_inf": ms.z_inf,
                "gamma_markov": rates.markov_gamma.tolist(),
                "lamb_markov": rates.markov_lamb.tolist()}
        try:
            ss = steady_state(rates, secular_only=secular, lamb_shift=cell.lamb_shift)
            info["steady_state_dressed"] = ss.tolist()
            info["steady_state_bare"] = to_bare_frame(ss, basis).tolist()
        except np.linalg.LinAlgError:
            info["steady_state_dressed"] = None
        out["markov_summary"] = info
    out["warnings"] = [f"{w.category.__name__}: {w.message}" for w in caught]
    return out


def _write_csv(path: Path, columns: dict) -> None:
    keys = list(columns)
    arrays = [np.asarray(columns[k]) for k in keys]
    lines = [",".join(keys)]
    for row in zip(*arrays):
        lines.append(",".join(str(int(v)) if np.issubdtype(type(v), np.integer)
                              else format(float(v), ".17g") for v in row))
    path.write_text("\n".join(lines) + "\n")


def resolve_output_dir(config: ScenarioConfig, override=None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    if "output_dir" in config.data:
        return Path(config.data["output_dir"])
    return Path("nmbloch_output") / config.name


def run(config: ScenarioConfig, output_dir=None, workers: Optional[int] = None) -> RunManifest:
    """Execute ``config`` and write CSV, SVG and ``manifest.json`` files.

    ``output_dir`` takes precedence over ``$NMBLOCH_OUTPUT_DIR``, which takes
    precedence over the config's ``output_dir`` key.
    """
    start = time.perf_counter()
    out_dir = resolve_output_dir(config, output_dir)
    cells = config.cells()
    outputs = config.outputs
    n_workers = workers or config.workers
    if not outputs:
        results = []
    elif n_workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(simulate_cell, c, outputs, i) for i, c in enumerate(cells)]
            results = [f.result() for f in futures]
    else:
        results = [simulate_cell(c, outputs, i) for i, c in enumerate(cells)]

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc}", "output_dir") from exc
    manifest = RunManifest(config.name, str(out_dir), assumptions=config.notes)
    seen = set()
    for i, res in enumerate(results):
        prefix = f"cell{i:02d}_{res['tag']}_" if len(cells) > 1 else ""
        files = []
        for kind in ("rates", "bloch", "bloch_inset", "cp"):
            if kind in res:
                path = out_dir / f"{prefix}{kind}.csv"
                _write_csv(path, res[kind])
                files.append(path.name)
        entry = {k: res[k] for k in ("overrides", "p", "s", "regime", "omega", "spectrum",
                                     "system", "r0_dressed", "mode")}
        for key in ("cp_verdict", "cp_equivalent_verdicts_agree", "markov_summary"):
            if key in res:
                entry[key] = res[key]
        entry["files"] = files
        manifest.cells.append(entry)
        manifest.files.extend(files)
        for w in res["warnings"]:
            if w not in seen:
                seen.add(w)
                manifest.warnings.append(w)

    if results:
        figures = []
        if "rates" in results[0]:
            figures.append(("rates.svg", plotting.rates_figure, {}))
        if "bloch" in results[0]:
            comps = tuple(results[0]["plot"].get("components", ("x", "y", "z")))
            figures.append(("bloch.svg", plotting.bloch_figure, {"components": comps}))
        if "cp" in results[0]:
            figures.append(("cp.svg", plotting.cp_figure, {}))
        for name, fn, kw in figures:
            fn(results, out_dir / name, **kw)
            manifest.files.append(name)
    manifest.files.append("manifest.json")
    manifest.duration_s = time.perf_counter() - start
    (out_dir / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    return manifest
