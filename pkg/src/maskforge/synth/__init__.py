"""Constraint-based monolithic synthesis."""

from .backends import BackendError, ExhaustiveBackend, SmtLibBackend, make_backend
from .constraints import ConstraintSystem, TestSet, encode_phi_io, encode_phi_lr, full_testset
from .mono import MonoConfig, MonoStats, SynthesisBudgetExceeded, SynthesisTimeout, check_cand, find_cand, mono_synth
from .skeleton import ControlAssignment, Skeleton, build_skeleton, instantiate

__all__ = [
    "BackendError", "ExhaustiveBackend", "SmtLibBackend", "make_backend",
    "ConstraintSystem", "TestSet", "encode_phi_io", "encode_phi_lr", "full_testset",
    "MonoConfig", "MonoStats", "SynthesisBudgetExceeded", "SynthesisTimeout", "check_cand", "find_cand", "mono_synth",
    "ControlAssignment", "Skeleton", "build_skeleton", "instantiate",
]
