"""Quantum Metropolis-Hastings walks over integer linear programs."""
from .ilp import (
    DomainTooLargeError,
    IlpInstance,
    InfeasibleInstanceError,
    InstanceFormatError,
    LinearForm,
    Sense,
    classical_chain,
    gibbs_distribution,
    load_instance,
    parse_instance,
)
from .walk import AcceptanceMode, fit_acceptance, synth_W

__version__ = "0.1.0"
