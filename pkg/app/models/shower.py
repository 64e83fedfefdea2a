import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

N_PIXELS = 8
E_MAX = 0.6
PRIMARY_RANGE = (225.0, 275.0)

DEFAULT_PROFILE_MEANS = (0.02, 0.10, 0.30, 0.48, 0.42, 0.22, 0.08, 0.02)


class EncodingSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    e_min: float = Field(0.0, description="Energy mapped to |1> (MeV)")
    e_max: float = Field(E_MAX, description="Energy mapped to |0> (MeV)")
    theta_max: float = Field(math.pi / 2, description="Angle at e_max (radians)")

    @model_validator(mode="after")
    def check(self) -> "EncodingSpec":
        if self.e_max <= self.e_min:
            raise ValueError("e_max must exceed e_min")
        if self.theta_max != math.pi / 2:
            raise ValueError("theta_max is fixed at pi/2")
        return self

    @property
    def slope(self) -> float:
        """d(theta)/dE in radians per MeV."""
        return 2.0 * self.theta_max / self.e_max


class ShowerImage(BaseModel):
    model_config = ConfigDict(frozen=True)

    pixels: Tuple[float, ...] = Field(..., min_length=N_PIXELS, max_length=N_PIXELS, description="Pixel energies in MeV")
    primary_energy: Optional[float] = Field(None, description="Primary particle energy in GeV")

    @model_validator(mode="after")
    def check_ranges(self) -> "ShowerImage":
        for p in self.pixels:
            if not 0.0 <= p <= E_MAX:
                raise ValueError(f"pixel energy {p} outside [0, {E_MAX}] MeV")
        if self.primary_energy is not None:
            lo, hi = PRIMARY_RANGE
            if not lo <= self.primary_energy <= hi:
                raise ValueError(f"primary energy {self.primary_energy} outside [{lo}, {hi}] GeV")
        return self


class DatasetStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    means: Tuple[float, ...] = Field(..., min_length=N_PIXELS, max_length=N_PIXELS)
    stds: Tuple[float, ...] = Field(..., min_length=N_PIXELS, max_length=N_PIXELS)
    n: int = Field(..., ge=2)

    @model_validator(mode="after")
    def check_stds(self) -> "DatasetStats":
        if any(s < 0 for s in self.stds):
            raise ValueError("standard deviations must be non-negative")
        return self


class ShowerProfile(BaseModel):
    """Per-pixel mean and spread of the synthetic shower generator."""

    model_config = ConfigDict(frozen=True)

    means: Tuple[float, ...] = Field(DEFAULT_PROFILE_MEANS, min_length=N_PIXELS, max_length=N_PIXELS)
    stds: Tuple[float, ...] = Field(
        tuple(0.15 * m + 0.005 for m in DEFAULT_PROFILE_MEANS), min_length=N_PIXELS, max_length=N_PIXELS
    )
    primary_range: Tuple[float, float] = PRIMARY_RANGE
    reference_energy: float = Field(250.0, gt=0, description="Primary energy with scale factor 1")

    @model_validator(mode="after")
    def check(self) -> "ShowerProfile":
        if any(s < 0 for s in self.stds) or any(m < 0 for m in self.means):
            raise ValueError("profile means and stds must be non-negative")
        lo, hi = self.primary_range
        if lo > hi:
            raise ValueError("primary_range must be ordered")
        return self
