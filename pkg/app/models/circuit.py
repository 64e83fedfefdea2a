from enum import Enum
from typing import Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.quantum import Gate, GateKind


class ParamSlot(BaseModel):
    """Unbound RY rotation whose angle is taken from a parameter vector."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: GateKind = GateKind.RY
    target: int = Field(..., ge=0)
    param_id: int = Field(..., ge=0)

    @model_validator(mode="after")
    def ry_only(self) -> "ParamSlot":
        if self.kind is not GateKind.RY:
            raise ValueError("parameter slots are RY rotations")
        return self


Slot = Union[Gate, ParamSlot]


class CircuitSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(..., ge=1)
    slots: Tuple[Slot, ...] = Field(default_factory=tuple)

    @model_validator(mode="after")
    def check_slots(self) -> "CircuitSpec":
        ids = []
        for s in self.slots:
            top = s.target if isinstance(s, ParamSlot) else s.max_index
            if top >= self.n_qubits:
                raise ValueError(f"qubit index {top} out of range for {self.n_qubits} qubits")
            if isinstance(s, ParamSlot):
                ids.append(s.param_id)
        if sorted(ids) != list(range(len(ids))):
            raise ValueError("param ids must form the contiguous range 0..n_params-1")
        return self

    @property
    def n_params(self) -> int:
        return sum(1 for s in self.slots if isinstance(s, ParamSlot))

    @property
    def is_bound(self) -> bool:
        return self.n_params == 0

    def count(self, kind: GateKind, parametric: Optional[bool] = None) -> int:
        n = 0
        for s in self.slots:
            if s.kind is not kind:
                continue
            if parametric is None or parametric == isinstance(s, ParamSlot):
                n += 1
        return n


class MeraDirection(str, Enum):
    UP = "up"
    DOWN = "down"


class MeraLayout(BaseModel):
    model_config = ConfigDict(frozen=True)

    direction: MeraDirection
    blocks: Tuple[Tuple[int, int], ...]
    output_qubit: Optional[int] = Field(None, description="Measured qubit (down only)")


class NoiseVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    omegas: Tuple[float, ...] = Field(..., min_length=8, max_length=8, description="Noise RY angles in radians")
    shared_shift: float = Field(..., ge=-0.25, le=0.25, description="Shift common to all pixels")
