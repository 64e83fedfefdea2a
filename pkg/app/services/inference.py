"""Inference and evaluation shared by the HTTP routes and the CLI."""
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from loguru import logger

from app.models.schemas import EvalResponse
from app.models.shower import ShowerImage
from app.services.data import load_csv
from app.services.metrics import average_image, mse_between, squared_errors
from app.services.qgan import generate_images
from app.storage.repo import load_params

PathLike = Union[str, Path]


class ShowerService:
    """Generates showers from trained parameter files and scores image files against each other."""

    def generate(self, params_path: PathLike, n: int, shots: int, exact: bool, seed: int) -> List[ShowerImage]:
        artifact = load_params(params_path)
        images = generate_images(
            artifact.gen, n, artifact.stats, shots, exact, np.random.default_rng(seed), artifact.encoding
        )
        logger.info("generated {} images from {} ({})", n, params_path, "exact" if exact else f"{shots} shots")
        return images

    def load_pair(self, generated_csv: PathLike, reference_csv: PathLike) -> Tuple[List[ShowerImage], List[ShowerImage]]:
        return load_csv(generated_csv), load_csv(reference_csv)

    def evaluate(self, generated: List[ShowerImage], reference: List[ShowerImage]) -> EvalResponse:
        return EvalResponse(
            mse=mse_between(generated, reference),
            generated_average=average_image(generated),
            reference_average=average_image(reference),
            squared_errors=[float(v) for v in squared_errors(generated, reference)],
            n_generated=len(generated),
            n_reference=len(reference),
        )
