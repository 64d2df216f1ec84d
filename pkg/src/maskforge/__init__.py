"""maskforge: verify and synthesize leakage-resilient Boolean circuits."""

from .circuit import (
    Circuit,
    CircuitError,
    Decoder,
    Encoder,
    Gate,
    build_decoder,
    build_encoder,
    dependent_inputs,
    evaluate,
    io_equivalent,
)
from .netlist import dump, load, parse, serialize
from .verify import DistTable, LeakWitness, Verdict, VerificationInfeasible, dist, verify_budgeted, verify_nlr

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CircuitError", "Decoder", "Encoder", "Gate",
    "build_decoder", "build_encoder", "dependent_inputs", "evaluate", "io_equivalent",
    "dump", "load", "parse", "serialize",
    "DistTable", "LeakWitness", "Verdict", "VerificationInfeasible", "dist", "verify_budgeted", "verify_nlr",
]
