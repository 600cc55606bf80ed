"""
PRA Radar BCRB API
==================

FastAPI front end over the same operations as the command line: AO design,
scheme comparison at one noise power and the radiated power pattern.

Run with: uvicorn pra_radar.main:app
"""

import logging
import os
from datetime import datetime

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

# Use relative imports for package structure
try:
    # When run as module (uvicorn pra_radar.main:app)
    from . import config, schemas
    from .benchmarks import BenchmarkSuite
    from .experiments import beampattern_rows, prepare, received_snr_db
    from .bcrb import bcrb_from_objective
    from .optimizer import run_ao
    from .runner import runner_instance
except ImportError:
    # Fallback for direct execution (development)
    from pra_radar import config, schemas
    from pra_radar.benchmarks import BenchmarkSuite
    from pra_radar.experiments import beampattern_rows, prepare, received_snr_db
    from pra_radar.bcrb import bcrb_from_objective
    from pra_radar.optimizer import run_ao
    from pra_radar.runner import runner_instance

logging.basicConfig(level=config.LOG_LEVEL)
logger = logging.getLogger(__name__)

# FastAPI Application Instance
app = FastAPI(
    title=config.API_TITLE,
    description="Bayesian CRB evaluation and transceiver design for polarization-reconfigurable MIMO radar",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def startup_event():
    logger.info(f"{config.API_TITLE} ready ({config.MAX_WORKERS} worker(s))")


def _prepare(experiment: schemas.ExperimentConfig):
    try:
        return prepare(experiment)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))


# ========================================
# API ENDPOINTS
# ========================================

@app.get("/")
def root():
    """
    Root endpoint providing basic API information.

    Returns:
        dict: API status and version information
    """
    return {
        "message": config.API_TITLE,
        "status": "healthy",
        "version": "1.0.0",
        "documentation": "/docs",
    }


@app.get("/health")
def health_check():
    return {
        "status": "healthy",
        "timestamp": datetime.now().isoformat(),
        "workers": runner_instance.max_workers,
        "environment": os.getenv("RAILWAY_ENVIRONMENT_NAME", "local"),
    }


@app.post("/optimize", response_model=schemas.OptimizeResponse)
def optimize(experiment: schemas.ExperimentConfig):
    """
    Run the alternating optimization for the posted experiment.

    Raises:
        HTTPException: 400 on inconsistent input, 500 on numerical failure
    """
    prepared = _prepare(experiment)
    try:
        result = run_ao(prepared.scene, prepared.config, experiment.ao)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Optimization failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))

    return schemas.OptimizeResponse(
        objective=result.objective,
        bcrb=bcrb_from_objective(result.objective, prepared.scene, prepared.config),
        prior_only_bcrb=1.0 / prepared.scene.prior_fi,
        received_snr_db=received_snr_db(prepared.config, prepared.scene.gamma),
        xi=result.design.xi.tolist(),
        phi=result.design.phi.tolist(),
        outer_iters=result.outer_iters,
        termination=result.termination,
        degenerate=result.degenerate,
        restart_objectives=list(result.restart_objectives),
    )


@app.post("/compare", response_model=schemas.CompareResponse)
def compare(experiment: schemas.ExperimentConfig):
    """Every configured scheme at the configured noise power"""
    prepared = _prepare(experiment)
    suite = BenchmarkSuite(prepared.scene, prepared.config, experiment.ao, experiment.benchmarks)
    try:
        results = runner_instance.run_schemes(suite, experiment.schemes)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

    return schemas.CompareResponse(
        received_snr_db=received_snr_db(prepared.config, prepared.scene.gamma),
        prior_only_bcrb=1.0 / prepared.scene.prior_fi,
        schemes=[
            schemas.SchemeSummary(
                scheme=scheme,
                objective=r.objective,
                bcrb=r.bcrb,
                objective_std_error=r.objective_std_error,
                bcrb_std_error=r.bcrb_std_error,
                outer_iters=r.outer_iters,
            )
            for scheme, r in results.items()
        ],
    )


@app.post("/beampattern", response_model=schemas.BeampatternResponse)
def beampattern(experiment: schemas.ExperimentConfig):
    """Radiated power pattern of the AO design"""
    prepared = _prepare(experiment)
    try:
        design = run_ao(prepared.scene, prepared.config, experiment.ao).design
        rows = beampattern_rows(prepared, design.r_x, design.xi)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

    return schemas.BeampatternResponse(
        mode=experiment.beampattern_grid.mode,
        theta=[r.theta for r in rows],
        pattern=[r.pattern for r in rows],
        prior_pdf=[r.prior_pdf for r in rows],
        no_pra_pattern=[r.no_pra_pattern for r in rows],
    )


@app.get("/runner/status")
def get_runner_status():
    """Counters of the experiment runner"""
    return runner_instance.get_status()
