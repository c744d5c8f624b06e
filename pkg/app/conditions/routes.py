"""
Conditions API Routes
Stationarity and non-negativity report for a parameterization
"""

from typing import Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.cogarch.routes import CogarchRequest
from app.conditions.checker import LOG_MOMENT_RULES, check_conditions
from app.semi_levy.routes import SemiLevyRequest
from app.shared.errors import ToolkitError, http_status


router = APIRouter()


# ==================== REQUEST MODELS ====================

class ConditionCheckRequest(BaseModel):
    driver: SemiLevyRequest
    cogarch: CogarchRequest
    rule: Optional[str] = Field(None, description="Log-moment rule: weighted or partition")


# ==================== ENDPOINTS ====================

@router.get("/")
def conditions_info():
    """Get information about the Conditions module"""
    return {
        "module": "Conditions",
        "description": "Eigenvalue, log-moment and non-negativity checks",
        "rules": list(LOG_MOMENT_RULES),
        "endpoints": {
            "check": "POST /api/conditions/check",
        },
        "status": "ready",
    }


@router.post("/check")
def check(request: ConditionCheckRequest):
    """Full condition report"""
    try:
        report = check_conditions(request.driver.to_config(), request.cogarch.to_params(), rule=request.rule)
        return {"success": True, "report": report.to_dict()}
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Condition check failed: {str(e)}")
