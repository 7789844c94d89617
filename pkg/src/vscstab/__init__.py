"""Frequency-domain stability workbench for grid-tied voltage-source converters.

Modules
-------
tf         complex-coefficient rational functions and the coefficient-
           conjugation operator
model      per-unit parameters, gain design, operating-point solve
sequence   coupled sequence impedances, augmented loop impedances, minor-
           loop eigenvalues, generalized network reduction
stability  loci, winding numbers, Argument-Principle / generalized-Nyquist
           verdicts, IOP damping, parameter sweeps
sim        nonlinear averaged time-domain simulator and sequence spectra
cli        configuration file parsing and CSV-emitting subcommands
"""

from .model import (
    BaseQuantities,
    Case,
    CircuitParams,
    ControllerParams,
    OperatingPoint,
    SystemParams,
    build_case,
    design_gains,
    solve_operating_point,
)
from .sequence import SequenceModel, build_model, dq_to_sequence
from .stability import (
    Locus,
    StabilityVerdict,
    SweepSettings,
    ap_verdict,
    critical,
    find_iop,
    gasin_verdict,
    gnc_verdict,
    sample_locus,
    sweep,
    verdict,
    winding_number,
)
from .sim import SimConfig, SimTrace, classify_trace, sequence_spectrum, simulate
from .tf import CPoly, CRational, arith, conj_coeff, evaluate

__all__ = [
    "BaseQuantities", "Case", "CircuitParams", "ControllerParams",
    "OperatingPoint", "SystemParams", "build_case", "design_gains",
    "solve_operating_point", "SequenceModel", "build_model", "dq_to_sequence",
    "Locus", "StabilityVerdict", "SweepSettings", "ap_verdict", "critical",
    "find_iop", "gasin_verdict", "gnc_verdict", "sample_locus", "sweep",
    "verdict", "winding_number", "SimConfig", "SimTrace", "classify_trace",
    "sequence_spectrum", "simulate", "CPoly", "CRational", "arith",
    "conj_coeff", "evaluate",
]

__version__ = "0.1.0"
