"""Average-image MSE and multi-trial aggregation."""
from typing import List, Sequence, Union

import numpy as np

from app.core.errors import InvalidInputError
from app.models.metrics import MseResult, TrialStats
from app.models.shower import ShowerImage
from app.services.data import images_to_array

Sample = Union[Sequence[ShowerImage], np.ndarray]


def _as_array(sample: Sample, name: str) -> np.ndarray:
    arr = sample if isinstance(sample, np.ndarray) else images_to_array(sample)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InvalidInputError(f"{name} sample is empty")
    return arr


def average_image(images: Sample) -> List[float]:
    return [float(v) for v in _as_array(images, "image").mean(axis=0)]


def squared_errors(gen_sample: Sample, ref_sample: Sample) -> np.ndarray:
    gen = _as_array(gen_sample, "generated")
    ref = _as_array(ref_sample, "reference")
    if gen.shape[1] != ref.shape[1]:
        raise InvalidInputError(f"pixel count mismatch: {gen.shape[1]} vs {ref.shape[1]}")
    return (gen.mean(axis=0) - ref.mean(axis=0)) ** 2


def mse_between(gen_sample: Sample, ref_sample: Sample) -> MseResult:
    """MSE between the two average images, pixel by pixel."""
    d = squared_errors(gen_sample, ref_sample)
    std = float(d.std(ddof=1)) if d.size > 1 else 0.0
    return MseResult(mse=float(d.mean()), std=std)


def aggregate_trials(curves: Sequence[Sequence[MseResult]]) -> TrialStats:
    if not curves:
        raise InvalidInputError("need at least one trial curve")
    lengths = {len(c) for c in curves}
    if len(lengths) != 1:
        raise InvalidInputError(f"ragged trial curves, lengths {sorted(lengths)}")
    if 0 in lengths:
        raise InvalidInputError("trial curves are empty")
    mse = np.array([[r.mse for r in c] for c in curves])
    std = mse.std(axis=0, ddof=1) if mse.shape[0] > 1 else np.zeros(mse.shape[1])
    return TrialStats(
        curves=[list(c) for c in curves],
        mean_curve=[float(v) for v in mse.mean(axis=0)],
        std_band=[float(v) for v in std],
        best_trial=int(np.argmin(mse[:, -1])),
    )
