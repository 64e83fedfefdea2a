import math
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from app.core.errors import DataFormatError, InvalidInputError
from app.models.shower import E_MAX, N_PIXELS, DatasetStats, ShowerImage, ShowerProfile

PIXEL_COLUMNS = [f"e{i}" for i in range(N_PIXELS)]
PRIMARY_COLUMN = "primary_gev"
MAX_COLUMNS = 64


def synth_dataset(n: int, seed: int, profile: ShowerProfile = ShowerProfile()) -> List[ShowerImage]:
    """Longitudinal-shower-like images whose total deposit scales with the primary energy."""
    if n < 1:
        raise InvalidInputError(f"dataset size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    lo, hi = profile.primary_range
    primary = rng.uniform(lo, hi, size=n)
    scale = primary / profile.reference_energy
    mu = np.asarray(profile.means)
    sigma = np.asarray(profile.stds)
    pixels = np.clip(scale[:, None] * mu + rng.normal(0.0, 1.0, size=(n, N_PIXELS)) * sigma, 0.0, E_MAX)
    return [
        ShowerImage(pixels=tuple(float(v) for v in row), primary_energy=float(e))
        for row, e in zip(pixels, primary)
    ]


def images_to_array(images: Sequence[ShowerImage]) -> np.ndarray:
    return np.array([img.pixels for img in images], dtype=np.float64).reshape(-1, N_PIXELS)


def array_to_images(pixels: np.ndarray) -> List[ShowerImage]:
    clipped = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, E_MAX)
    return [ShowerImage(pixels=tuple(float(v) for v in row)) for row in clipped]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _cells(row) -> List[str]:
    """Cells by position, without the empty padding columns past the last value."""
    cells = [c.strip() if isinstance(c, str) else "" for c in row]
    while cells and cells[-1] == "":
        cells.pop()
    return cells


def load_csv(path: Union[str, Path]) -> List[ShowerImage]:
    """Read 8 pixel columns plus an optional primary-energy column; header row optional."""
    path = str(path)
    try:
        raw = pd.read_csv(
            path,
            header=None,
            names=range(MAX_COLUMNS),
            index_col=False,
            dtype=str,
            skip_blank_lines=False,
            keep_default_na=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise DataFormatError("empty file", path=path) from e
    except pd.errors.ParserError as e:
        raise DataFormatError(f"unparseable CSV ({e})", path=path) from e
    rows = [_cells(r) for r in raw.itertuples(index=False)]
    start = 0
    if rows and rows[0] and not any(_is_number(c) for c in rows[0]):
        start = 1
    images: List[ShowerImage] = []
    clamped = 0
    for i in range(start, len(rows)):
        cells = rows[i]
        line = i + 1
        if not cells:
            continue
        if len(cells) not in (N_PIXELS, N_PIXELS + 1):
            raise DataFormatError(f"expected {N_PIXELS} or {N_PIXELS + 1} columns, got {len(cells)}", line=line, path=path)
        if "" in cells:
            raise DataFormatError(f"empty value in column {cells.index('') + 1}", line=line, path=path)
        try:
            values = [float(c) for c in cells]
        except ValueError as e:
            raise DataFormatError(f"non-numeric value ({e})", line=line, path=path) from e
        if not all(math.isfinite(v) for v in values):
            raise DataFormatError("non-finite value", line=line, path=path)
        pixels = values[:N_PIXELS]
        fixed = [min(max(p, 0.0), E_MAX) for p in pixels]
        clamped += sum(1 for a, b in zip(pixels, fixed) if a != b)
        primary = values[N_PIXELS] if len(values) > N_PIXELS else None
        try:
            images.append(ShowerImage(pixels=tuple(fixed), primary_energy=primary))
        except ValueError as e:
            raise DataFormatError(str(e), line=line, path=path) from e
    if not images:
        raise DataFormatError("no data rows", path=path)
    if clamped:
        logger.warning("{}: clamped {} pixel values into [0, {}] MeV", path, clamped, E_MAX)
    logger.debug("loaded {} images from {}", len(images), path)
    return images


def images_frame(images: Sequence[ShowerImage]) -> pd.DataFrame:
    df = pd.DataFrame(images_to_array(images), columns=PIXEL_COLUMNS)
    if images and all(img.primary_energy is not None for img in images):
        df[PRIMARY_COLUMN] = [img.primary_energy for img in images]
    return df


def save_csv(images: Sequence[ShowerImage], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    images_frame(images).to_csv(path, index=False)
    return path


def compute_stats(images: Sequence[ShowerImage]) -> DatasetStats:
    if len(images) < 2:
        raise InvalidInputError(f"need at least 2 images for statistics, got {len(images)}")
    arr = images_to_array(images)
    return DatasetStats(
        means=tuple(float(v) for v in arr.mean(axis=0)),
        stds=tuple(float(v) for v in arr.std(axis=0, ddof=1)),
        n=len(images),
    )


def load_profile(path: Optional[Union[str, Path]]) -> ShowerProfile:
    """Profile file: CSV with columns `mean,std`, one row per pixel."""
    if path is None:
        return ShowerProfile()
    df = pd.read_csv(path)
    if list(df.columns[:2]) != ["mean", "std"] or len(df) != N_PIXELS:
        raise DataFormatError(f"profile needs columns mean,std and {N_PIXELS} rows", path=str(path))
    try:
        return ShowerProfile(means=tuple(df["mean"].astype(float)), stds=tuple(df["std"].astype(float)))
    except ValueError as e:
        raise DataFormatError(str(e), path=str(path)) from e
