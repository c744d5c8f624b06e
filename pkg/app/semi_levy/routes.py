"""
Semi-Lévy API Routes
Intensity, characteristic function and path simulation of the driving process
"""

from typing import List, Optional

import numpy as np
from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field, ValidationError

from app.semi_levy.distributions import parse_jump_dist
from app.semi_levy.process import (
    SemiLevyConfig,
    char_function,
    cumulative_intensity,
    intensity,
    simulate_driver,
)
from app.shared import settings
from app.shared.errors import ParameterError, ToolkitError, http_status


router = APIRouter()


# ==================== REQUEST MODELS ====================

class SemiLevyRequest(BaseModel):
    """Driving process law in request form"""
    tau: float = Field(..., gt=0, description="Period length")
    lengths: List[float] = Field(..., min_length=1, description="Partition lengths")
    rates: List[float] = Field(..., min_length=1, description="Poisson rate per partition")
    jump_dist: List[str] = Field(..., min_length=1, description="Jump laws, e.g. normal(2,4) or point(0)")
    delta: float = Field(0.0, description="Drift")

    def to_config(self) -> SemiLevyConfig:
        try:
            return SemiLevyConfig(
                period_tau=self.tau,
                lengths=tuple(self.lengths),
                rates=tuple(self.rates),
                jump_dists=tuple(parse_jump_dist(text) for text in self.jump_dist),
                drift_delta=self.delta,
            )
        except ValidationError as e:
            raise ParameterError(f"invalid semi-Lévy configuration: {e.errors()[0].get('msg')}") from e


class IntensityRequest(BaseModel):
    config: SemiLevyRequest
    times: List[float] = Field(..., min_length=1, description="Evaluation times")


class CharFnRequest(BaseModel):
    config: SemiLevyRequest
    t: float = Field(..., gt=0, description="Time of the marginal")
    u: List[float] = Field(..., min_length=1, description="Arguments of the characteristic function")


class DriverSimulationRequest(BaseModel):
    config: SemiLevyRequest
    periods: int = Field(..., ge=1, le=10_000, description="Number of periods")
    seed: Optional[int] = Field(None, ge=0, description="RNG seed")


# ==================== ENDPOINTS ====================

@router.get("/")
def semi_levy_info():
    """Get information about the Semi-Lévy module"""
    return {
        "module": "Semi-Lévy",
        "description": "Compound Poisson driver with periodic intensity and jump laws",
        "endpoints": {
            "intensity": "POST /api/semi_levy/intensity",
            "charfn": "POST /api/semi_levy/charfn",
            "simulate": "POST /api/semi_levy/simulate",
        },
        "status": "ready",
    }


@router.post("/intensity")
def evaluate_intensity(request: IntensityRequest):
    """lambda(t) and Lambda(t) at each requested time"""
    try:
        cfg = request.config.to_config()
        return {
            "success": True,
            "times": request.times,
            "intensity": [intensity(t, cfg) for t in request.times],
            "cumulative": [cumulative_intensity(t, cfg) for t in request.times],
            "mass_per_period": cfg.mass_per_period,
        }
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Intensity evaluation failed: {str(e)}")


@router.post("/charfn")
def evaluate_charfn(request: CharFnRequest):
    """E exp(iuS_t) on the requested u values"""
    try:
        cfg = request.config.to_config()
        phi = np.atleast_1d(char_function(np.asarray(request.u), request.t, cfg))
        return {
            "success": True,
            "t": request.t,
            "u": request.u,
            "re": phi.real.tolist(),
            "im": phi.imag.tolist(),
        }
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Characteristic function failed: {str(e)}")


@router.post("/simulate")
def simulate_semi_levy(request: DriverSimulationRequest):
    """Arrival times and jump sizes over the requested number of periods"""
    try:
        cfg = request.config.to_config()
        seed = settings.DEFAULT_SEED if request.seed is None else request.seed
        path = simulate_driver(cfg, request.periods, np.random.default_rng(seed))
        return {
            "success": True,
            "seed": seed,
            "horizon": path.horizon,
            "count": path.size,
            "arrivals": path.arrivals.tolist(),
            "jumps": path.jumps.tolist(),
        }
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Simulation failed: {str(e)}")
