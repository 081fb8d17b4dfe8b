from .integrate import (
    CompiledModel,
    ForceSnapshot,
    SimState,
    evaluate_forces,
    kinetic_energy,
    rest_state,
    step,
)
from .model import (
    Body,
    FacetContact,
    Joint,
    Scenario,
    SpineModel,
    apply_degeneration,
    bundled_model_path,
    bundled_scenario_path,
    degeneration_factor,
    load_model,
    load_scenario,
    model_from_json,
    model_to_json,
    scenario_from_json,
    scenario_to_json,
)
from .run import dataset_id, iterate_ticks, run

__all__ = [
    "Body",
    "CompiledModel",
    "FacetContact",
    "ForceSnapshot",
    "Joint",
    "Scenario",
    "SimState",
    "SpineModel",
    "apply_degeneration",
    "bundled_model_path",
    "bundled_scenario_path",
    "dataset_id",
    "degeneration_factor",
    "evaluate_forces",
    "iterate_ticks",
    "kinetic_energy",
    "load_model",
    "load_scenario",
    "model_from_json",
    "model_to_json",
    "rest_state",
    "run",
    "scenario_from_json",
    "scenario_to_json",
    "step",
]
