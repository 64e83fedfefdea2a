import json
import os
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.models.metrics import MseResult, TrialStats
from app.models.training import LossRecord
from app.services.data import PIXEL_COLUMNS

PathLike = Union[str, Path]

CURVE_COLUMNS = ["epoch", "mse", "mse_std", "gen_loss", "disc_true_loss", "disc_fake_loss", "disc_total_loss"]


def _prepare(path: PathLike) -> str:
    path = str(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    return path


def export_curves_csv(path: PathLike, losses: Sequence[LossRecord], mse_curve: Sequence[MseResult]) -> str:
    """One row per epoch: MSE with its pixel spread, then the four loss curves."""
    path = _prepare(path)
    df = pd.DataFrame(
        [
            {
                "epoch": rec.epoch,
                "mse": m.mse,
                "mse_std": m.std,
                "gen_loss": rec.gen,
                "disc_true_loss": rec.disc_true,
                "disc_fake_loss": rec.disc_fake,
                "disc_total_loss": rec.disc_total,
            }
            for rec, m in zip(losses, mse_curve)
        ],
        columns=CURVE_COLUMNS,
    )
    df.to_csv(path, index=False)
    return path


def export_aggregate_csv(path: PathLike, stats: TrialStats) -> str:
    path = _prepare(path)
    best = [c.mse for c in stats.curves[stats.best_trial]]
    df = pd.DataFrame(
        {
            "epoch": np.arange(stats.n_epochs),
            "mean_mse": stats.mean_curve,
            "std_mse": stats.std_band,
            "best_trial_mse": best,
        }
    )
    df.to_csv(path, index=False)
    return path


def export_average_images_csv(
    path: PathLike, generated: Sequence[float], reference: Sequence[float]
) -> str:
    """Per-pixel table of both average images and their squared difference."""
    path = _prepare(path)
    gen = np.asarray(generated, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    df = pd.DataFrame(
        {
            "pixel": PIXEL_COLUMNS[: gen.size],
            "generated": gen,
            "reference": ref,
            "squared_error": (gen - ref) ** 2,
        }
    )
    df.to_csv(path, index=False)
    return path


def export_records_jsonl(path: PathLike, records: Iterable[Union[BaseModel, Mapping[str, Any]]]) -> str:
    path = _prepare(path)
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            line = r.model_dump_json() if isinstance(r, BaseModel) else json.dumps(dict(r), sort_keys=True)
            f.write(line + "\n")
    return path


def read_records_jsonl(path: PathLike) -> list:
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
