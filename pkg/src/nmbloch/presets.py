"""Ready-made scenarios reproducing the five reference figures.

Every preset uses ``omega_A = 1`` as the frequency unit, a resonant laser
(``Delta = 0``) and ``Omega = 0.01`` (fig2 sets ``Omega`` from ``p``). Open choices
are listed under ``notes`` and copied into the run manifest.
"""

import copy

from .config import ScenarioConfig, from_dict
from .exceptions import ConfigError

_SYSTEM = {"omega_A": 1.0, "Omega": 0.01, "Delta": 0.0}
_DRESSED_UP = {"x": 0.0, "y": 0.0, "z": 1.0, "basis": "dressed"}

PRESETS = {
    "fig1": {
        "name": "fig1",
        "mode": "full",
        "outputs": ["rates"],
        "spectrum": {"kind": "lorentzian", "alpha_sq": 0.01, "p": 1.0, "s": 1.0},
        "system": _SYSTEM,
        "horizon": {"T_max": 30.0, "samples": 301, "inset_T_max": 1.0},
        "sweep": {"spectrum.p": [0.01, 1.0, 100.0], "spectrum.s": [0.1, 1.0, 10.0]},
        "notes": ["Lorentzian width = omega / p and peak omega_0 = omega_L + s * width, "
                  "with alpha^2 = 0.01 omega_A and Omega = 0.01 omega_A as in the fig3 preset"],
    },
    "fig2": {
        "name": "fig2",
        "mode": "full",
        "outputs": ["rates"],
        "spectrum": {"kind": "ohmic", "alpha": 0.01, "p": 1.0, "s": 10.0},
        "system": {"omega_A": 1.0, "Delta": 0.0},
        "horizon": {"T_max": 30.0, "samples": 301, "inset_T_max": 1.0},
        "sweep": {"spectrum.p": [0.01, 1.0, 5.0]},
        "notes": ["s_O = 10 assumed; omega_C = omega_L / s_O and "
                  "Omega = p omega_C; p = 5 is marginal for p << s and carries a validity warning",
                  "rates are plotted as gamma / (alpha^2 omega_C) so the curves are independent of alpha"],
    },
    "fig3": {
        "name": "fig3",
        "mode": "secular",
        "outputs": ["bloch", "cp", "markov_summary"],
        "spectrum": {"kind": "lorentzian", "alpha_sq": 0.01, "p": 100.0, "s": 0.1},
        "system": _SYSTEM,
        "initial_state": _DRESSED_UP,
        "horizon": {"T_max": 4000.0, "samples": 2001, "inset_T_max": 30.0},
        "plot": {"components": ["z"]},
        "notes": ["secular mode (p = 100 is deep in the secular regime)",
                  "horizon T = 4000 covers ten relaxation times tau_R"],
    },
    "fig4": {
        "name": "fig4",
        "mode": "full",
        "outputs": ["bloch", "cp", "markov_summary"],
        "spectrum": {"kind": "lorentzian", "alpha_sq": 0.01, "p": 0.01, "s": 0.1},
        "system": _SYSTEM,
        "initial_state": _DRESSED_UP,
        "horizon": {"T_max": 100000.0, "samples": 4001, "inset_T_max": 30.0},
        "sweep": {"spectrum.s": [0.1, 10.0]},
        "plot": {"components": ["z"]},
        "notes": ["coupling read as alpha^2 = 0.01 omega_A",
                  "initial state (0, 0, 1) in the dressed basis"],
    },
    "fig5": {
        "name": "fig5",
        "mode": "full",
        "outputs": ["bloch", "cp", "markov_summary"],
        "spectrum": {"kind": "lorentzian", "alpha_sq": 0.01, "p": 0.01, "s": 0.1},
        "system": _SYSTEM,
        "initial_state": _DRESSED_UP,
        "horizon": {"T_max": 100000.0, "samples": 4001},
        "sweep": {"spectrum.s": [0.1, 10.0]},
        "plot": {"components": ["x", "y"]},
        "notes": ["coupling read as alpha^2 = 0.01 omega_A",
                  "initial state (0, 0, 1) in the dressed basis"],
    },
}


def figure_preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset")
    return from_dict(copy.deepcopy(PRESETS[name]))
