"""Layered (broadcast-approach) coding rates over fading channels.

Rates are in nats unless a module states otherwise.
"""
__version__ = "0.1.0"

from .channels import FadingLaw, DiscreteStates, rayleigh_power, chi2_simo
from .numerics import NumericsError, Tolerance
from .siso import optimal_profile, expected_rate, ergodic_capacity, outage_capacity

__all__ = ["FadingLaw", "DiscreteStates", "rayleigh_power", "chi2_simo", "NumericsError",
           "Tolerance", "optimal_profile", "expected_rate", "ergodic_capacity",
           "outage_capacity", "__version__"]
