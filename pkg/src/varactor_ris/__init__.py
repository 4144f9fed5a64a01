"""Simulation and control planning for a varactor-tuned reflecting surface.

The pipeline runs unit-cell reflection modelling, beam-steering phase
synthesis, phase-to-voltage mapping, DAC control-chain emulation and
radiation-pattern evaluation.
"""

from .circuit import (
    ReflectionSample,
    ReflectionTable,
    UnitCellParams,
    VaractorModel,
    phase_span,
    reflection_coefficient,
    resonant_frequency,
    surface_impedance,
    sweep_response,
    varactor_capacitance,
)
from .config import default_params, load_params, save_params
from .mapping import PhaseLut, VoltagePlan, build_lut, phase_to_voltage, plan_voltages, quantize_voltage
from .radiation import (
    BeamMetrics,
    ObservationGrid,
    RadiationPattern,
    compute_pattern,
    directivity,
    half_power_beamwidth,
    main_lobe,
    side_lobe_level,
)
from .synthesis import ArrayLayout, BeamSpec, FeedSpec, PhaseProfile, incident_phase, required_phase, synthesize_profile

__version__ = "0.1.0"

__all__ = [
    "ReflectionSample",
    "ReflectionTable",
    "UnitCellParams",
    "VaractorModel",
    "phase_span",
    "reflection_coefficient",
    "resonant_frequency",
    "surface_impedance",
    "sweep_response",
    "varactor_capacitance",
    "default_params",
    "load_params",
    "save_params",
    "PhaseLut",
    "VoltagePlan",
    "build_lut",
    "phase_to_voltage",
    "plan_voltages",
    "quantize_voltage",
    "BeamMetrics",
    "ObservationGrid",
    "RadiationPattern",
    "compute_pattern",
    "directivity",
    "half_power_beamwidth",
    "main_lobe",
    "side_lobe_level",
    "ArrayLayout",
    "BeamSpec",
    "FeedSpec",
    "PhaseProfile",
    "incident_phase",
    "required_phase",
    "synthesize_profile",
]
