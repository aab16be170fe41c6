"""Synthetic scenes, oracle backend, J/F metrics, and comparison harness."""

from .compare import (RunMetrics, compare_gate_modes, compare_policies,
                      config_for_policy, run_scenario)
from .metrics import (boundary_pixels, evaluate_f, evaluate_j, frame_boundary_f,
                      frame_iou, jf_mean)
from .oracle import EmptyMemoryContextError, FidelityModel, OracleBackend
from .scenario import ScenarioError, load_scenario_file, parse_scenario
from .scene import FramePayload, GroundTruth, SceneScript, generate_stream

__all__ = [
    "RunMetrics", "compare_gate_modes", "compare_policies",
    "config_for_policy", "run_scenario",
    "boundary_pixels", "evaluate_f", "evaluate_j", "frame_boundary_f",
    "frame_iou", "jf_mean",
    "EmptyMemoryContextError", "FidelityModel", "OracleBackend",
    "ScenarioError", "load_scenario_file", "parse_scenario",
    "FramePayload", "GroundTruth", "SceneScript", "generate_stream",
]
