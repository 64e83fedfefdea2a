from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MAX_QUBITS = 12


class GateKind(str, Enum):
    H = "H"
    RY = "RY"
    CX = "CX"


class Gate(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: GateKind
    target: int = Field(..., ge=0, description="Target qubit index")
    control: Optional[int] = Field(None, ge=0, description="Control qubit (CX only)")
    angle: Optional[float] = Field(None, description="Rotation angle in radians (RY only)")

    @model_validator(mode="after")
    def check_operands(self) -> "Gate":
        if self.kind is GateKind.CX:
            if self.control is None:
                raise ValueError("CX requires a control qubit")
            if self.control == self.target:
                raise ValueError("CX control must differ from target")
            if self.angle is not None:
                raise ValueError("CX carries no angle")
        else:
            if self.control is not None:
                raise ValueError(f"{self.kind.value} carries no control")
            if self.kind is GateKind.RY and self.angle is None:
                raise ValueError("RY requires an angle")
            if self.kind is GateKind.H and self.angle is not None:
                raise ValueError("H carries no angle")
        return self

    @property
    def max_index(self) -> int:
        return max(self.target, self.control if self.control is not None else -1)


class ShotCounts(BaseModel):
    model_config = ConfigDict(frozen=True)

    qubit: int = Field(..., ge=0)
    zeros: int = Field(..., ge=0, description="Number of |0> outcomes")
    ones: int = Field(..., ge=0, description="Number of |1> outcomes")
    shots: int = Field(..., gt=0)

    @model_validator(mode="after")
    def check_total(self) -> "ShotCounts":
        if self.zeros + self.ones != self.shots:
            raise ValueError("zeros + ones must equal shots")
        return self


class StateVector(BaseModel):
    """Pure state of `n_qubits`; qubit 0 is the least-significant bit of the basis index."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_qubits: int = Field(..., ge=1, le=MAX_QUBITS)
    amps: np.ndarray

    @field_validator("amps", mode="before")
    @classmethod
    def as_complex(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.complex128).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_length(self) -> "StateVector":
        if self.amps.shape[0] != 2 ** self.n_qubits:
            raise ValueError(f"expected {2 ** self.n_qubits} amplitudes, got {self.amps.shape[0]}")
        return self

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))
