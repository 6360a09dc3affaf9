"""Ruin probabilities for heavy-tailed claims via spectral hyperexponential fits."""
from .errors import DomainError, NumericError, RuinkitError
from .distributions import (AbateWhitt, ClaimModel, MomentSet, Pareto, WeibullHalf, claim_ccdf,
                            excess_ccdf, model_from_params, moments, zeta)
from .spectral import (HyperExp, SpectralCdf, fit_hyperexp, spectral_cdf, spectral_density,
                       spectral_quantile)
from .pk import (RuinSolution, certified_bound, hyperexp_lt, phases_for_bound, residues,
                 ruin_spectral, solve, solve_roots, spectral_ruin)
from .classic import (brown_bound, brown_gamma, extended_bound, heavy_tail, heavy_traffic,
                      heavy_traffic_params, matched_phases)
from .oracle import (EmpiricalRuin, McConfig, McEstimate, exact_ruin_abate_whitt, grid_convolve,
                     mc_ruin, sample_excess, simulate_maximum)
from .experiments import ExperimentSpec, emit_figure_data, run_experiment

__version__ = "0.1.0"
