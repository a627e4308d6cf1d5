"""Ability-based keyboard personalization toolkit.

Characterize 2D pointing as direction-binned Fitts' law constants, solve a
quadratic assignment over digraph flows and predicted movement times to lay
out a personalized 27-key keyboard, and evaluate layouts with transcription
metrics.
"""

from .charact import (
    CharacterizationSession,
    SelectionEvent,
    TargetDemand,
    export_log,
    import_log,
    next_target,
    record_selection,
    refine,
    seed_initial_queue,
    simulate_characterization,
)
from .corpus import ALPHABET, DigraphMatrix, ingest_phrases, joint_probabilities
from .evaluation import (
    EvalReport,
    SimulatedUser,
    TranscriptionTrial,
    compute_metrics,
    simulate_transcription,
    wolpaw_itr,
)
from .fitts import (
    DirectionalFittsModel,
    FittsBinModel,
    MovementSample,
    anisotropic_model,
    fit_bins,
    generic_model,
    index_of_difficulty,
    predict_mt,
)
from .hexgeom import HexGrid, KeyPosition, angle_bin, angle_deg, build_grid, distance_px
from .layout import (
    KeyboardLayout,
    build_cost_matrix,
    fitts_digraph_energy,
    flip_vertical,
    generate_layout,
    qwerty_layout,
)
from .qap import Assignment, QapInstance, brute_force, objective, solve_faq, solve_lap

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "Assignment",
    "CharacterizationSession",
    "DigraphMatrix",
    "DirectionalFittsModel",
    "EvalReport",
    "FittsBinModel",
    "HexGrid",
    "KeyPosition",
    "KeyboardLayout",
    "MovementSample",
    "QapInstance",
    "SelectionEvent",
    "SimulatedUser",
    "TargetDemand",
    "TranscriptionTrial",
    "angle_bin",
    "angle_deg",
    "anisotropic_model",
    "brute_force",
    "build_cost_matrix",
    "build_grid",
    "compute_metrics",
    "distance_px",
    "export_log",
    "fit_bins",
    "fitts_digraph_energy",
    "flip_vertical",
    "generate_layout",
    "generic_model",
    "import_log",
    "index_of_difficulty",
    "ingest_phrases",
    "joint_probabilities",
    "next_target",
    "objective",
    "predict_mt",
    "qwerty_layout",
    "record_selection",
    "refine",
    "seed_initial_queue",
    "simulate_characterization",
    "simulate_transcription",
    "solve_faq",
    "solve_lap",
    "wolpaw_itr",
]
