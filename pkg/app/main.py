"""
Semi-Lévy COGARCH Toolkit - Main FastAPI Application
Simulation, condition checks and periodic-correlation analysis over HTTP
"""

from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app import __version__
from app.shared import settings
from app.shared.errors import ToolkitError, http_status

# Import all module routers
from app.semi_levy.routes import router as semi_levy_router
from app.cogarch.routes import router as cogarch_router
from app.conditions.routes import router as conditions_router
from app.pc_analysis.routes import router as pc_analysis_router
from app.experiments.routes import router as experiments_router

MODULES = {
    "semi_levy": "/api/semi_levy - Driving process intensity, characteristic function and simulation",
    "cogarch": "/api/cogarch - COGARCH path simulation",
    "conditions": "/api/conditions - Stationarity and non-negativity checks",
    "pc_analysis": "/api/pc_analysis - Spectral coherence and autocorrelation",
    "experiments": "/api/experiments - End-to-end experiment runs",
}


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Application lifespan manager
    Runs on startup and shutdown
    """
    settings.configure_logging()
    print("\n" + "="*60)
    print("🚀 Starting COGARCH Toolkit API...")
    print("="*60)
    print(f"📁 Output directory: {settings.OUTPUT_DIR}")
    print(f"🎲 Default seed: {settings.DEFAULT_SEED}")
    print("✅ All systems ready!")

    yield

    print("\n👋 Shutting down COGARCH Toolkit...")


# Create FastAPI application
app = FastAPI(
    title="COGARCH Toolkit API",
    description="COGARCH(p,q) processes driven by semi-Lévy compound Poisson noise",
    version=__version__,
    lifespan=lifespan,
    docs_url="/docs",
    redoc_url="/redoc"
)


# Configure CORS from ALLOWED_ORIGINS, local development origins otherwise
allowed_origin_regex = r"https://.*\.(vercel\.app|netlify\.app|onrender\.com)$"

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.get_allowed_origins(),
    allow_origin_regex=allowed_origin_regex,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# ==================== ROOT ENDPOINTS ====================

@app.get("/")
def root():
    """API welcome message and available endpoints"""
    return {
        "message": "Welcome to the COGARCH Toolkit API! 🎉",
        "status": "running",
        "version": __version__,
        "documentation": {
            "interactive": "/docs",
            "alternative": "/redoc"
        },
        "modules": MODULES,
    }


@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "message": "API is running",
        "version": __version__,
    }


# ==================== REGISTER MODULE ROUTERS ====================

# Semi-Lévy Module - Driving process
app.include_router(
    semi_levy_router,
    prefix="/api/semi_levy",
    tags=["Semi-Lévy"]
)

# COGARCH Module - Volatility and price paths
app.include_router(
    cogarch_router,
    prefix="/api/cogarch",
    tags=["COGARCH"]
)

# Conditions Module - Stationarity and non-negativity
app.include_router(
    conditions_router,
    prefix="/api/conditions",
    tags=["Conditions"]
)

# PC Analysis Module - Coherence and autocorrelation
app.include_router(
    pc_analysis_router,
    prefix="/api/pc_analysis",
    tags=["PC Analysis"]
)

# Experiments Module - End-to-end runs
app.include_router(
    experiments_router,
    prefix="/api/experiments",
    tags=["Experiments"]
)


# ==================== ERROR HANDLERS ====================

@app.exception_handler(ToolkitError)
async def toolkit_error_handler(request: Request, exc: ToolkitError):
    """Handle toolkit failures that escape a route"""
    return JSONResponse(
        status_code=http_status(exc),
        content={
            "error": type(exc).__name__,
            "message": str(exc)
        }
    )


@app.exception_handler(404)
async def not_found_handler(request, exc):
    """Handle 404 errors"""
    return JSONResponse(
        status_code=404,
        content={
            "error": "Endpoint not found",
            "message": "The requested endpoint does not exist",
            "docs": "/docs",
            "available_modules": [f"/api/{name}" for name in MODULES]
        }
    )


@app.exception_handler(500)
async def internal_error_handler(request, exc):
    """Handle 500 errors"""
    return JSONResponse(
        status_code=500,
        content={
            "error": "Internal server error",
            "message": "Something went wrong. Please try again later."
        }
    )


# ==================== RUN APPLICATION ====================

if __name__ == "__main__":
    print("\n" + "="*60)
    print("🎯 COGARCH TOOLKIT API")
    print("="*60)
    print("\n📍 Server starting at:")
    print(f"   http://localhost:{settings.API_PORT}")
    print("\n📚 API Documentation:")
    print(f"   http://localhost:{settings.API_PORT}/docs")
    print("\n🔗 Module Endpoints:")
    for name in MODULES:
        print(f"   • {name}: http://localhost:{settings.API_PORT}/api/{name}")
    print("\n" + "="*60 + "\n")

    uvicorn.run(
        "app.main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=settings.API_RELOAD
    )
