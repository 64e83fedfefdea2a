from typing import List

from pydantic import BaseModel, Field

from app.models.metrics import MseResult


class InferRequest(BaseModel):
    params_path: str = Field(..., description="Path to a trial params.json")
    n: int = Field(1000, ge=1, le=100_000)
    shots: int = Field(1024, ge=1)
    exact: bool = False
    seed: int = 0


class InferResponse(BaseModel):
    images: List[List[float]]
    average_image: List[float]


class EvalRequest(BaseModel):
    generated_csv: str = Field(..., description="Path to generated images CSV")
    reference_csv: str = Field(..., description="Path to reference images CSV")


class EvalResponse(BaseModel):
    mse: MseResult
    generated_average: List[float]
    reference_average: List[float]
    squared_errors: List[float]
    n_generated: int
    n_reference: int
