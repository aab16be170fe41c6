"""Run manifests: enough resolved state to replay a command bit-for-bit.

A manifest records the command, its fully resolved parameters (scenario
content is inlined, so the original config file is not needed), the
engine version, and a sha256 per output file. Outputs are partitioned:
``deterministic_outputs`` must reproduce byte-identically on replay;
``measurement_outputs`` hold wall-clock data and are exempt. Manifests
contain no timestamps or absolute paths, so a replayed manifest is
byte-identical too.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__


@dataclass
class RunManifest:
    command: str
    params: dict
    engine_version: str = __version__
    deterministic_outputs: dict[str, str] = field(default_factory=dict)
    measurement_outputs: list[str] = field(default_factory=list)

    def record_output(self, out_dir: Path, name: str,
                      deterministic: bool = True) -> None:
        if deterministic:
            self.deterministic_outputs[name] = sha256_file(out_dir / name)
        else:
            self.measurement_outputs.append(name)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_text(path: Path, text: str) -> None:
    """LF-normalized, UTF-8 write used for every deterministic output."""
    path.write_text(text, encoding="utf-8", newline="\n")


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    path = Path(out_dir) / "manifest.json"
    write_text(path, json.dumps(asdict(manifest), indent=2, sort_keys=True)
               + "\n")
    return path


def load_manifest(path: Path) -> RunManifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunManifest(
        command=data["command"],
        params=data["params"],
        engine_version=data.get("engine_version", "unknown"),
        deterministic_outputs=data.get("deterministic_outputs", {}),
        measurement_outputs=data.get("measurement_outputs", []),
    )


def compare_outputs(manifest: RunManifest,
                    out_dir: Path) -> list[tuple[str, bool]]:
    """Per-file byte-identity versus the hashes a manifest recorded."""
    results = []
    for name, digest in sorted(manifest.deterministic_outputs.items()):
        path = Path(out_dir) / name
        ok = path.exists() and sha256_file(path) == digest
        results.append((name, ok))
    return results
