"""Run directories on disk: trial parameter files and the run manifest."""
import json
import os
import subprocess
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from app import __version__
from app.core.config import settings
from app.core.errors import ParameterFileError
from app.models.run import ModelKind, RunManifest, TrialArtifact
from app.models.training import N_CIRCUIT_PARAMS, MlpSpec
from app.services.exporter import export_records_jsonl, read_records_jsonl

PathLike = Union[str, Path]

MANIFEST_FILE = "manifest.jsonl"


def new_run_dir(model: ModelKind, out_dir: Optional[str] = None) -> Path:
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    return Path(out_dir or settings.out_dir) / f"{ModelKind(model).value}-{stamp}"


def build_id() -> str:
    """Package version plus the short git revision when available."""
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=os.path.dirname(__file__),
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    sha = rev.stdout.strip()
    return f"{__version__}+{sha}" if rev.returncode == 0 and sha else __version__


def save_params(path: PathLike, artifact: TrialArtifact) -> str:
    path = str(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(artifact.model_dump_json(indent=2))
    return path


def load_params(path: PathLike) -> TrialArtifact:
    path = str(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ParameterFileError(f"{path}: no such parameter file") from e
    except json.JSONDecodeError as e:
        raise ParameterFileError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from e
    try:
        artifact = TrialArtifact.model_validate(raw)
    except ValidationError as e:
        raise ParameterFileError(f"{path}: {e.error_count()} invalid field(s): {e}") from e
    if len(artifact.gen) != N_CIRCUIT_PARAMS:
        raise ParameterFileError(f"{path}: generator needs {N_CIRCUIT_PARAMS} angles, got {len(artifact.gen)}")
    size = artifact.model.mlp_size
    expected = N_CIRCUIT_PARAMS if size is None else MlpSpec.of_size(size).n_params
    if len(artifact.disc) != expected:
        raise ParameterFileError(f"{path}: {artifact.model.value} discriminator needs {expected} values, got {len(artifact.disc)}")
    return artifact


def write_manifest(run_dir: PathLike, manifest: RunManifest) -> str:
    return export_records_jsonl(Path(run_dir) / MANIFEST_FILE, manifest.to_records())


def get_manifest(run_id: str, out_dir: Optional[str] = None) -> Optional[RunManifest]:
    """Manifest of `run_id` under the output directory, or None if the run is unknown."""
    if not run_id or "/" in run_id or "\\" in run_id or run_id in (".", ".."):
        return None
    path = Path(out_dir or settings.out_dir) / run_id / MANIFEST_FILE
    if not path.is_file():
        return None
    return RunManifest.from_records(read_records_jsonl(path))
