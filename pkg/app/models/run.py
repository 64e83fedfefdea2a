from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from app.models.shower import DatasetStats, EncodingSpec
from app.models.training import HybridResult, MlpSize, TrainResult


class ModelKind(str, Enum):
    FULL = "full"
    HYBRID_S = "hybrid-s"
    HYBRID_M = "hybrid-m"
    HYBRID_L = "hybrid-l"

    @property
    def mlp_size(self) -> Optional[MlpSize]:
        if self is ModelKind.FULL:
            return None
        return MlpSize(self.value.split("-")[1].upper())


class TrialArtifact(BaseModel):
    """Trained parameters of one trial plus what inference needs to reuse them."""

    model: ModelKind
    trial: int
    seed: int
    gen: Tuple[float, ...] = Field(..., description="MERA-up angles")
    disc: Tuple[float, ...] = Field(..., description="MERA-down angles or MLP weights")
    stats: DatasetStats = Field(..., description="Training-set statistics that scale the noise")
    encoding: EncodingSpec = Field(default_factory=EncodingSpec)


class TrialRun(BaseModel):
    trial: int
    seed: int
    result: Optional[Union[TrainResult, HybridResult]] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.result is not None


class TrialOutcome(BaseModel):
    trial: int
    seed: int
    status: str = Field(..., description="ok or aborted")
    error: Optional[str] = None
    final_mse: Optional[float] = None
    files: List[str] = Field(default_factory=list)


class RunManifest(BaseModel):
    run_id: str
    model: ModelKind
    created_at: datetime
    build: str
    config: Dict[str, Any]
    seeds: List[int]
    layout: Dict[str, str] = Field(default_factory=dict, description="Artifact role -> relative path")
    trials: List[TrialOutcome] = Field(default_factory=list)

    def files(self) -> List[str]:
        out = list(self.layout.values())
        for t in self.trials:
            out.extend(t.files)
        return out

    def to_records(self) -> List[Dict[str, Any]]:
        head = self.model_dump(mode="json", exclude={"trials", "layout"})
        records: List[Dict[str, Any]] = [{"record": "run", **head}]
        records += [{"record": "trial", **t.model_dump(mode="json")} for t in self.trials]
        records += [{"record": "artifact", "role": k, "path": v} for k, v in self.layout.items()]
        return records

    @classmethod
    def from_records(cls, records: List[Dict[str, Any]]) -> "RunManifest":
        head: Dict[str, Any] = {}
        trials, layout = [], {}
        for r in records:
            kind = r.pop("record", None)
            if kind == "run":
                head = r
            elif kind == "trial":
                trials.append(TrialOutcome(**r))
            elif kind == "artifact":
                layout[r["role"]] = r["path"]
        return cls(**head, trials=trials, layout=layout)
