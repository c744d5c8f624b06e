"""
COGARCH API Routes
Path simulation of the volatility, state and price processes
"""

from typing import List, Optional

import numpy as np
from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field, ValidationError

from app.cogarch.engine import CogarchParams, increments, simulate_path
from app.semi_levy.process import simulate_driver
from app.semi_levy.routes import SemiLevyRequest
from app.shared import settings
from app.shared.errors import ParameterError, ToolkitError, http_status


router = APIRouter()


# ==================== REQUEST MODELS ====================

class CogarchRequest(BaseModel):
    """COGARCH(p,q) coefficients"""
    p: int = Field(..., ge=1)
    q: int = Field(..., ge=1)
    alpha0: float = Field(..., gt=0)
    alpha: List[float] = Field(..., min_length=1, description="alpha_1..alpha_p")
    beta: List[float] = Field(..., min_length=1, description="beta_1..beta_q")
    y0: Optional[List[float]] = Field(None, description="Initial state, zeros if omitted")

    def to_params(self) -> CogarchParams:
        try:
            return CogarchParams(
                p=self.p,
                q=self.q,
                alpha0=self.alpha0,
                alphas=tuple(self.alpha),
                betas=tuple(self.beta),
                y0=tuple(self.y0) if self.y0 is not None else None,
            )
        except ValidationError as e:
            raise ParameterError(f"invalid COGARCH parameters: {e.errors()[0].get('msg')}") from e


class CogarchSimulationRequest(BaseModel):
    driver: SemiLevyRequest
    cogarch: CogarchRequest
    periods: int = Field(..., ge=1, le=5_000, description="Number of periods")
    sample_interval: float = Field(..., gt=0, description="Sampling interval l (tau/l must be an integer)")
    seed: Optional[int] = Field(None, ge=0, description="RNG seed")
    include_jumps: bool = Field(False, description="Also return the jump-time records")


# ==================== ENDPOINTS ====================

@router.get("/")
def cogarch_info():
    """Get information about the COGARCH module"""
    return {
        "module": "COGARCH",
        "description": "Jump-time simulation of COGARCH(p,q) driven by a semi-Lévy process",
        "endpoints": {
            "simulate": "POST /api/cogarch/simulate",
        },
        "status": "ready",
    }


@router.post("/simulate")
def simulate_cogarch(request: CogarchSimulationRequest):
    """Grid samples of V and G plus the increment series"""
    try:
        cfg = request.driver.to_config()
        params = request.cogarch.to_params()
        seed = settings.DEFAULT_SEED if request.seed is None else request.seed
        rng = np.random.default_rng(seed)
        path = simulate_path(simulate_driver(cfg, request.periods, rng), params, request.sample_interval)
        response = {
            "success": True,
            "seed": seed,
            "n_jumps": int(path.arrivals.shape[0]),
            "n_samples": path.n_samples,
            "samples_per_period": path.samples_per_period,
            "min_volatility": path.min_volatility,
            "time": path.grid_times.tolist(),
            "V": path.v_grid.tolist(),
            "G": path.g_grid.tolist(),
            "increments": increments(path).tolist(),
        }
        if request.include_jumps:
            response["jumps"] = {
                "arrival": path.arrivals.tolist(),
                "V_jump": path.v_jump.tolist(),
                "G_jump": path.g_jump.tolist(),
            }
        return response
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"COGARCH simulation failed: {str(e)}")
