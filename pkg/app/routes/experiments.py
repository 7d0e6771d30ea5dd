import logging

from fastapi import APIRouter, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from app.controllers.experiments import ExperimentRunner
from app.models.experiment import ExperimentConfig
from app.utils.errors import WaveError

logger = logging.getLogger(__name__)

router = APIRouter()


def _run(config: ExperimentConfig) -> dict:
    return ExperimentRunner(config).run()


@router.post("/run", status_code=status.HTTP_201_CREATED)
async def run_experiment(config: ExperimentConfig):
    """
    Run one experiment into its output directory and return the manifest
    """
    try:
        return await run_in_threadpool(_run, config)
    except WaveError as e:
        logger.error(f"experiment {config.kind.value} failed: {e}")
        raise HTTPException(status_code=e.status_code, detail=e.to_record())
