from typing import List, Optional

from pydantic import BaseModel, Field


class MseResult(BaseModel):
    mse: float = Field(..., ge=0, description="Mean per-pixel squared error of average images (MeV^2)")
    std: float = Field(..., ge=0, description="Sample std of the per-pixel squared errors (MeV^2)")


class TrialStats(BaseModel):
    curves: List[List[MseResult]]
    mean_curve: List[float]
    std_band: List[float]
    best_trial: int

    @property
    def n_epochs(self) -> int:
        return len(self.mean_curve)

    def final_summary(self) -> "StudySummary":
        finals = [c[-1].mse for c in self.curves]
        return StudySummary(
            mean_final_mse=self.mean_curve[-1],
            std_final_mse=self.std_band[-1],
            best_final_mse=finals[self.best_trial],
            best_trial=self.best_trial,
            n_trials=len(self.curves),
        )


class StudySummary(BaseModel):
    mean_final_mse: float
    std_final_mse: float
    best_final_mse: float
    best_trial: int
    n_trials: int
    test_mse: Optional[MseResult] = Field(None, description="Best trial generation vs the test set")
