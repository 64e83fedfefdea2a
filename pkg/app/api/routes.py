from fastapi import APIRouter, HTTPException
from loguru import logger

from app.core.config import settings
from app.models.run import RunManifest
from app.models.schemas import EvalRequest, EvalResponse, InferRequest, InferResponse
from app.services.data import images_to_array
from app.services.inference import ShowerService
from app.services.metrics import average_image
from app.storage.repo import get_manifest

router = APIRouter(prefix="/api", tags=["qgan"])

# Initialize services
shower_service = ShowerService()


@router.post("/infer", response_model=InferResponse)
def infer(request: InferRequest):
    """
    Generate images from a trained generator parameter file
    """
    try:
        images = shower_service.generate(request.params_path, request.n, request.shots, request.exact, request.seed)
        return InferResponse(images=images_to_array(images).tolist(), average_image=average_image(images))
    except ValueError as e:
        logger.warning("Invalid inference request: {}", e)
        raise HTTPException(status_code=400, detail=f"Invalid request: {e}")
    except Exception as e:
        logger.error("Inference failed: {}", e)
        raise HTTPException(status_code=500, detail="Inference service unavailable")


@router.post("/eval", response_model=EvalResponse)
def evaluate(request: EvalRequest):
    """
    Average-image MSE between generated and reference image files
    """
    try:
        generated, reference = shower_service.load_pair(request.generated_csv, request.reference_csv)
        return shower_service.evaluate(generated, reference)
    except (ValueError, FileNotFoundError) as e:
        logger.warning("Invalid evaluation request: {}", e)
        raise HTTPException(status_code=400, detail=f"Invalid input: {e}")
    except Exception as e:
        logger.error("Evaluation failed: {}", e)
        raise HTTPException(status_code=500, detail="Evaluation service unavailable")


@router.get("/runs/{run_id}", response_model=RunManifest)
def get_run(run_id: str):
    manifest = get_manifest(run_id, settings.out_dir)
    if manifest is None:
        raise HTTPException(status_code=404, detail=f"Run {run_id} not found")
    return manifest
