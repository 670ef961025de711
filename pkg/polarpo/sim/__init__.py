"""
Polar coding and SC Monte Carlo harness.
"""

from polarpo.sim.construct import bec_exact_params, build_info_set
from polarpo.sim.montecarlo import genie_estimate, simulate
from polarpo.sim.polar import SCDecoder, polar_encode, sc_decode

__all__ = [
    "SCDecoder",
    "bec_exact_params",
    "build_info_set",
    "genie_estimate",
    "polar_encode",
    "sc_decode",
    "simulate",
]
