"""Entanglement harvesting with trapped impurities in a Bose-Einstein condensate.

The impurities act as two-level detectors coupled to the condensate's phonon
field.  :mod:`~polaron_harvest.params` reduces atomic inputs to detector
parameters, :mod:`~polaron_harvest.response` evaluates the observables in
closed form and :mod:`~polaron_harvest.oracle` recomputes them by quadrature.
"""

__version__ = "0.1.0"

from .params import (A0, AMU, HBAR, RB87, K39, CondensateSpec, DetectorSpec, DimensionlessParams,
                     Experiment, PairGeometry, ParameterError, derive_condensate, to_dimensionless)
from .response import (HarvestResult, assemble_state, harvest, l_term_closed, m_minus_closed,
                       m_plus_closed, negativity, q_beta_closed, signaling_estimator,
                       state_negativity)
from .oracle import (Integrand, l_cross_numeric, l_term_numeric, m_numeric, q_beta_numeric,
                     spectral_report)
from .dispersion import bogoliubov_point, relativistic_error
from .sweep import SweepSpec, find_peak, repetition_estimate, run_sweep

__all__ = [
    "A0", "AMU", "HBAR", "RB87", "K39", "CondensateSpec", "DetectorSpec", "DimensionlessParams",
    "Experiment", "PairGeometry", "ParameterError", "derive_condensate", "to_dimensionless",
    "HarvestResult", "assemble_state", "harvest", "l_term_closed", "m_minus_closed",
    "m_plus_closed", "negativity", "q_beta_closed", "signaling_estimator", "state_negativity",
    "Integrand", "l_cross_numeric", "l_term_numeric", "m_numeric", "q_beta_numeric",
    "spectral_report", "bogoliubov_point", "relativistic_error", "SweepSpec", "find_peak",
    "repetition_estimate", "run_sweep",
]
