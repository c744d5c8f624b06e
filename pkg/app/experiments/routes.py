"""
Experiments API Routes
Simulate, check and analyse a full experiment in one request
"""

from typing import Dict, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.cogarch.engine import increments
from app.experiments.config import config_hash, parse_experiment
from app.experiments.runner import EXIT_OK, run_check, run_coherence, run_simulate
from app.shared.errors import ParameterError, ToolkitError, http_status


router = APIRouter()

MAX_API_SAMPLES = 50_000


# ==================== REQUEST MODELS ====================

class ExperimentRunRequest(BaseModel):
    """Experiment file content as key/value pairs plus run options"""
    config: Dict[str, str] = Field(..., description="Experiment keys, e.g. {'tau': '6.5', ...}")
    seed: Optional[int] = Field(None, ge=0, description="Overrides the seed in the config")
    require_valid: bool = Field(False, description="Refuse to simulate unless every condition holds")
    analyze: bool = Field(True, description="Run the coherence analysis on the increments")
    M: Optional[int] = Field(None, ge=2, description="Coherence window (defaults to the config's M)")
    square: bool = False
    tail: Optional[int] = Field(None, ge=2)


# ==================== ENDPOINTS ====================

@router.get("/")
def experiments_info():
    """Get information about the Experiments module"""
    return {
        "module": "Experiments",
        "description": "End-to-end simulate, check and coherence runs",
        "endpoints": {
            "run": "POST /api/experiments/run",
        },
        "status": "ready",
    }


@router.post("/run")
def run_experiment(request: ExperimentRunRequest):
    """Condition report, simulation summary and coherence summary"""
    try:
        config = parse_experiment(request.config).with_seed(request.seed)
        if config.n_samples > MAX_API_SAMPLES:
            raise ParameterError(f"experiment has {config.n_samples} samples; the API limit is {MAX_API_SAMPLES}")

        check = run_check(config)
        simulation = run_simulate(config, require_valid=request.require_valid, report=check.report)
        response = {
            "success": simulation.exit_code == EXIT_OK,
            "seed": simulation.seed,
            "config_hash": config_hash(config),
            "conditions": check.report.to_key_values(),
        }
        if simulation.path is None:
            response["message"] = "Parameters fail the condition check; simulation skipped"
            return response

        path = simulation.path
        response["simulation"] = {
            "n_jumps": int(path.arrivals.shape[0]),
            "n_samples": path.n_samples,
            "samples_per_period": path.samples_per_period,
            "min_volatility": path.min_volatility,
        }
        M = request.M or config.analysis.M
        if request.analyze and M is not None:
            result = run_coherence(
                increments(path),
                M,
                config.analysis.alpha,
                stride=config.analysis.stride,
                square=request.square,
                tail=request.tail,
            )
            response["coherence"] = result.report.summary()
        return response
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Experiment failed: {str(e)}")
