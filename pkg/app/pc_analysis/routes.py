"""
PC Analysis API Routes
Spectral coherence and sample autocorrelation of posted or uploaded series
"""

import tempfile
from pathlib import Path
from typing import List, Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from pydantic import BaseModel, Field

from app.experiments.runner import prepare_series, run_coherence
from app.experiments.series import load_series
from app.pc_analysis.coherence import CoherenceReport, acf_band, acf_robust_band, sample_acf
from app.shared.errors import ToolkitError, http_status


router = APIRouter()


# ==================== REQUEST MODELS ====================

class CoherenceRequest(BaseModel):
    values: List[float] = Field(..., min_length=2, description="Series to analyse")
    M: int = Field(..., ge=2, description="Coherence window")
    alpha: float = Field(0.05, gt=0, lt=1, description="Significance level")
    stride: Optional[int] = Field(None, ge=1, description="Row stride of the pair grid")
    square: bool = Field(False, description="Square the series first")
    tail: Optional[int] = Field(None, ge=2, description="Keep only the last values")
    center: bool = Field(True, description="Subtract the mean before the DFT")
    include_pairs: bool = Field(False, description="Return every significant (P, Q)")


class AcfRequest(BaseModel):
    values: List[float] = Field(..., min_length=2)
    max_lag: int = Field(..., ge=0)
    square: bool = False
    tail: Optional[int] = Field(None, ge=2)


# ==================== HELPER FUNCTIONS ====================

def _report_payload(report: CoherenceReport, include_pairs: bool) -> dict:
    estimate = report.estimate
    payload = {
        "success": True,
        "summary": report.summary(),
        "stride": report.stride,
        "pairs_evaluated": int(report.values.shape[0]),
        "pairs_significant": int(report.significant.sum()),
        "lines": list(estimate.lines) if estimate else [],
        "spacing": estimate.spacing if estimate else None,
        "line_mass_fraction": estimate.line_mass_fraction if estimate else None,
        "off_diagonal_rate": estimate.off_diagonal_rate if estimate else None,
        "comb_score": estimate.comb_score if estimate else None,
    }
    if include_pairs:
        payload["significant_pairs"] = report.significant_pairs.tolist()
    return payload


# ==================== ENDPOINTS ====================

@router.get("/")
def pc_analysis_info():
    """Get information about the PC Analysis module"""
    return {
        "module": "PC Analysis",
        "description": "Detect periodically correlated structure with the sample spectral coherence",
        "endpoints": {
            "coherence": "POST /api/pc_analysis/coherence",
            "coherence_upload": "POST /api/pc_analysis/coherence/upload",
            "acf": "POST /api/pc_analysis/acf",
        },
        "status": "ready",
    }


@router.post("/coherence")
def coherence_report(request: CoherenceRequest):
    """Coherence report for a posted series"""
    try:
        result = run_coherence(
            request.values,
            request.M,
            request.alpha,
            stride=request.stride,
            square=request.square,
            tail=request.tail,
            center=request.center,
        )
        return _report_payload(result.report, request.include_pairs)
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Coherence analysis failed: {str(e)}")


@router.post("/coherence/upload")
async def coherence_upload(
    file: UploadFile = File(...),
    M: int = Form(...),
    alpha: float = Form(0.05),
    stride: Optional[int] = Form(None),
    square: bool = Form(False),
    tail: Optional[int] = Form(None),
    kind: str = Form("auto"),
):
    """Coherence report for an uploaded CSV (prices, a simulated grid or a value column)"""
    try:
        content = await file.read()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "series.csv"
            path.write_bytes(content)
            values = load_series(path, kind=kind)
        result = run_coherence(values, M, alpha, stride=stride, square=square, tail=tail)
        payload = _report_payload(result.report, include_pairs=False)
        payload["filename"] = file.filename
        return payload
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Coherence upload failed: {str(e)}")


@router.post("/acf")
def autocorrelation(request: AcfRequest):
    """Sample autocorrelation with the white-noise band"""
    try:
        series = prepare_series(request.values, square=request.square, tail=request.tail)
        rho = sample_acf(series, request.max_lag)
        return {
            "success": True,
            "acf": rho.tolist(),
            "band": acf_band(series.shape[0]),
            "robust_band": acf_robust_band(series, request.max_lag).tolist(),
        }
    except HTTPException:
        raise
    except ToolkitError as e:
        raise HTTPException(status_code=http_status(e), detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"ACF failed: {str(e)}")
