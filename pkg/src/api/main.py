"""FastAPI application main file."""
import logging
import os
import tempfile
import traceback
from pathlib import Path
from typing import List, Optional

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from src.config import LOG_FORMAT, LOG_LEVEL
from src.errors import NumericalFailureError
from src.evaluation.metrics import MetricsReport, clear_metrics
from src.mot_io.mot_files import MotRow, parse_gt_text
from src.services.tracking_service import TrackingService
from src.tracker.tracker_config import load_tracker_config

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger(__name__)

app = FastAPI(
    title="FACT",
    description="API for online multi-object tracking with a continually learned appearance model",
    version="1.0.0"
)

# WARNING: allow_origins=["*"] is permissive. For production, specify allowed origins.
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class ResultRow(BaseModel):
    frame: int
    id: int
    left: float
    top: float
    width: float
    height: float
    conf: float

    @classmethod
    def from_row(cls, row: MotRow) -> "ResultRow":
        return cls(frame=row.frame, id=row.id, left=row.left, top=row.top,
                   width=row.width, height=row.height, conf=row.conf)


class TrackResponse(BaseModel):
    """Response model for the tracking endpoint."""
    success: bool
    rows: List[ResultRow]
    metrics: Optional[MetricsReport] = None


class EvalResponse(BaseModel):
    """Response model for the evaluation endpoint."""
    success: bool
    metrics: MetricsReport


def _error_response(e: Exception) -> HTTPException:
    """Map pipeline exceptions onto HTTP status codes."""
    if isinstance(e, NumericalFailureError):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, ValueError):
        return HTTPException(status_code=400, detail=str(e))
    error_traceback = traceback.format_exc()
    logger.error(f"Unexpected error: {str(e)}")
    # Only include full traceback in debug mode to avoid leaking sensitive info
    is_debug = os.getenv("DEBUG", "false").lower() == "true"
    error_detail = f"Internal server error: {str(e)}"
    if is_debug:
        error_detail += f"\n\nTraceback:\n{error_traceback}"
    return HTTPException(status_code=500, detail=error_detail)


async def _save(upload: UploadFile, directory: Path, name: str) -> Path:
    path = directory / name
    path.write_bytes(await upload.read())
    return path


@app.post("/track", response_model=TrackResponse)
async def track(
    dets: UploadFile = File(...),
    embs: UploadFile = File(...),
    config: Optional[UploadFile] = File(None),
    cmc: Optional[UploadFile] = File(None),
    gt: Optional[UploadFile] = File(None),
    no_fac: bool = Form(False),
    interpolate: bool = Form(False),
):
    """
    Track one uploaded sequence.

    Args:
        dets: MOT detection file
        embs: Binary embedding sidecar
        config: Optional tracker config file (key = value lines)
        cmc: Optional per-frame camera motion file
        gt: Optional ground truth; when given the response carries metrics
        no_fac: Run the baseline tracker without the FAC learner
        interpolate: Fill short gaps inside tracks

    Returns:
        TrackResponse with the result rows sorted by (frame, id)
    """
    try:
        with tempfile.TemporaryDirectory() as tmp:
            directory = Path(tmp)
            logger.info(f"Tracking uploaded sequence: {dets.filename}")
            dets_path = await _save(dets, directory, "det.txt")
            embs_path = await _save(embs, directory, "emb.bin")
            config_path = await _save(config, directory, "tracker.cfg") if config is not None else None
            cmc_path = await _save(cmc, directory, "cmc.txt") if cmc is not None else None
            gt_path = await _save(gt, directory, "gt.txt") if gt is not None else None

            cfg = load_tracker_config(config_path, {"use_fac": False} if no_fac else None)
            result = TrackingService(cfg).track_files(
                dets_path,
                embs_path,
                cmc_path=cmc_path,
                gt_path=gt_path,
                interpolate_gaps=interpolate,
            )
        return TrackResponse(
            success=True,
            rows=[ResultRow.from_row(row) for row in result.rows],
            metrics=result.metrics,
        )
    except Exception as e:
        raise _error_response(e)


@app.post("/eval", response_model=EvalResponse)
async def evaluate(
    results: UploadFile = File(...),
    gt: UploadFile = File(...),
):
    """
    Score a result file against ground truth.

    Returns:
        EvalResponse with MOTA, IDF1 and the CLEAR counts
    """
    try:
        result_rows = parse_gt_text((await results.read()).decode("utf-8"), source=results.filename or "results")
        gt_rows = parse_gt_text((await gt.read()).decode("utf-8"), source=gt.filename or "gt")
        return EvalResponse(success=True, metrics=clear_metrics(result_rows, gt_rows))
    except Exception as e:
        raise _error_response(e)


@app.get("/health")
async def health():
    """Health check endpoint."""
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
