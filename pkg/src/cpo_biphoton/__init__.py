"""Narrowband biphoton generation from four-wave mixing with long-lived coherent population oscillations."""
from .correlations import (
    CorrelationMetrics,
    CorrelationResult,
    Mode,
    biphoton_wavefunction,
    g2,
    integrate_spectrum,
    metrics,
    singles_rates,
)
from .floquet import sideband_response, zeroth_order_steady_state
from .params import DerivedParams, RegimeReport, SystemParams, derive_params, validate_regime
from .propagation import TransferCoefficients, thin_medium_coefficients, transfer_coefficients
from .susceptibility import GridSpec, SpectralGrid, SusceptibilityQuad, build_grid, coherence_term, susceptibilities

__version__ = "0.1.0"
