"""YAML scenario files -> scene script + oracle fidelity parameters.

Documented key set (all optional except ``length``):

    length: 500                 seed: 7
    grid: {height: 32, width: 32}
    trajectory:
      kind: ellipse             # or rectangle
      center: [16.0, 16.0]      # row, col at frame 0
      velocity: [0.0, 0.0]      # pixels per frame
      oscillation: {amplitude: [0.0, 0.0], period: 100}
      axes: [6.0, 4.0]
    presence: [[0, 499]]        # inclusive frame ranges; omit for always-on
    drift:
      rate: 0.004               # radians per frame, or:
      waypoints: [[0, 0.0], [499, 2.0]]
    detection:
      waypoints: [[0, 0.9]]     # detection-stage quality curve
    noise: {score: 0.02, embedding: 0.05}
    embedding_dim: 8
    fidelity: {base: 0.55, gain: 0.4, occ_scale: 8.0,
               corruption_angle: 2.0, absent_iou: 0.08}
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .oracle import FidelityModel
from .scene import SceneScript


class ScenarioError(ValueError):
    """Malformed scenario mapping."""


def _pair(value, name: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{name} must be a [a, b] pair")
    return (float(value[0]), float(value[1]))


def parse_scenario(data: dict) -> tuple[SceneScript, FidelityModel]:
    if not isinstance(data, dict) or "length" not in data:
        raise ScenarioError("scenario must be a mapping with a 'length' key")
    length = int(data["length"])
    kwargs: dict = {"length": length, "seed": int(data.get("seed", 0))}

    if "grid" in data:
        grid = data["grid"]
        kwargs["grid"] = (int(grid["height"]), int(grid["width"]))
    if "embedding_dim" in data:
        kwargs["embedding_dim"] = int(data["embedding_dim"])

    traj = data.get("trajectory", {})
    if "kind" in traj:
        kwargs["shape_kind"] = str(traj["kind"])
    if "center" in traj:
        kwargs["center"] = _pair(traj["center"], "trajectory.center")
    if "velocity" in traj:
        kwargs["velocity"] = _pair(traj["velocity"], "trajectory.velocity")
    if "axes" in traj:
        kwargs["axes"] = _pair(traj["axes"], "trajectory.axes")
    if "oscillation" in traj:
        osc = traj["oscillation"]
        kwargs["oscillation_amplitude"] = _pair(osc.get("amplitude", [0, 0]),
                                                "oscillation.amplitude")
        kwargs["oscillation_period"] = float(osc.get("period", 100.0))

    if "presence" in data and data["presence"] is not None:
        kwargs["presence"] = tuple(
            (int(lo), int(hi)) for lo, hi in data["presence"])

    drift = data.get("drift", {})
    if "waypoints" in drift:
        kwargs["drift_waypoints"] = tuple(
            (float(f), float(a)) for f, a in drift["waypoints"])
    elif "rate" in drift:
        rate = float(drift["rate"])
        end = max(length - 1, 0)
        kwargs["drift_waypoints"] = ((0.0, 0.0), (float(end), rate * end))

    detection = data.get("detection", {})
    if "waypoints" in detection:
        kwargs["detection_waypoints"] = tuple(
            (float(f), float(q)) for f, q in detection["waypoints"])

    noise = data.get("noise", {})
    if "score" in noise:
        kwargs["noise_score"] = float(noise["score"])
    if "embedding" in noise:
        kwargs["noise_embedding"] = float(noise["embedding"])

    try:
        script = SceneScript(**kwargs)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    fid_data = data.get("fidelity", {})
    unknown = set(fid_data) - {"base", "gain", "occ_scale",
                               "corruption_angle", "absent_iou"}
    if unknown:
        raise ScenarioError(f"unknown fidelity keys: {sorted(unknown)}")
    fidelity = FidelityModel(**{k: float(v) for k, v in fid_data.items()})
    return script, fidelity


def load_scenario_file(path: str | Path) -> tuple[SceneScript, FidelityModel, dict]:
    """Parse a YAML scenario file; returns (script, fidelity, raw mapping)."""
    raw = yaml.safe_load(Path(path).read_text())
    script, fidelity = parse_scenario(raw)
    return script, fidelity, raw
