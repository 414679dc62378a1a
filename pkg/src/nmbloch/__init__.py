"""Non-Markovian optical Bloch equations for a laser-driven two-level atom.

The package evaluates the time-dependent decay and Lamb coefficients of a
driven atom in a structured reservoir, integrates the resulting Bloch
equations in the dressed basis and certifies complete positivity of the map.
"""

from .bloch import (BlochTrajectory, GeneratorMatrices, MarkovSummary, build_generator,
                    generator_from_master_equation, integrate_bloch, integrate_trajectory,
                    markov_solution, markov_summary, secular_solution, steady_state)
from .config import ScenarioConfig, load
from .cp import (CPReport, ChoiData, choi_for_rates, choi_numeric, nonsecular_cp_check,
                 secular_cp_check)
from .dressed import DressedBasis, SystemParams, dressed_basis, from_bare_frame, to_bare_frame
from .exceptions import (ConfigError, DegenerateSystemError, IntegrationError,
                         ModelValidityWarning, NMBlochError, QuadratureError,
                         RegimeMismatchWarning, SpecialFunctionError)
from .presets import PRESETS, figure_preset
from .rates import (RateFunction, RateSample, RateTrajectory, generic_rate_oracle,
                    lorentzian_rate, markov_limits, ohmic_rate, sample_trajectory)
from .runner import RunManifest, run
from .spectral import Lorentzian, Ohmic, Regime, Tabulated, regime_params

__version__ = "0.1.0"
