import math
from typing import Any, Dict

from fastapi import APIRouter, HTTPException, Query
from fastapi.concurrency import run_in_threadpool

from app.controllers.twode import (
    classify_equilibrium,
    critical_speeds,
    expected_connection,
    hopf_locus,
    integrate_orbit,
    inversion_speed,
    outer_eigenvalues,
    plateau_relations,
    slow_plateau_relation,
    unstable_start,
)
from app.models.requests import ClassifyRequest, OrbitRequest, OrbitResponse, PlateauResponse
from app.models.wave import ConnectionInfo, CriticalSpeeds, EigenSet, HopfPoint, InversionBracket, WaveSpec
from app.utils.errors import WaveError

router = APIRouter()


def _eigen_payload(eig: EigenSet) -> Dict[str, Any]:
    return {
        "region": eig.region.value,
        "signs": eig.signs,
        "real": [r.real for r in eig.roots],
        "imag": [r.imag for r in eig.roots],
        "residual": eig.residual,
    }


def _http_error(e: WaveError) -> HTTPException:
    return HTTPException(status_code=e.status_code, detail=e.to_record())


@router.post("/classify")
async def classify(body: ClassifyRequest):
    """
    Eigenvalue region and real-part signs of the non-polarized equilibrium
    """
    try:
        return _eigen_payload(classify_equilibrium(body.c, body.ag))
    except WaveError as e:
        raise _http_error(e)


@router.get("/critical-speeds", response_model=CriticalSpeeds)
async def get_critical_speeds(ag: float = Query(..., gt=0)):
    try:
        return await run_in_threadpool(critical_speeds, ag)
    except WaveError as e:
        raise _http_error(e)


@router.get("/hopf", response_model=HopfPoint)
async def get_hopf(c: float):
    try:
        return hopf_locus(c)
    except WaveError as e:
        raise _http_error(e)


@router.get("/connection", response_model=ConnectionInfo)
async def get_connection(c: float):
    try:
        return expected_connection(c)
    except WaveError as e:
        raise _http_error(e)


@router.get("/plateaus", response_model=PlateauResponse)
async def get_plateaus(c: float, U1: float = 1.0):
    """
    Plateau values behind a front of speed c running into (U1, 0)
    """
    try:
        if 0 < c < 1:
            return PlateauResponse(c=c, U1=U1, U2=slow_plateau_relation(c, U1))
        U2, U3 = plateau_relations(c, U1)
        return PlateauResponse(c=c, U1=U1, U2=U2, U3=U3)
    except WaveError as e:
        raise _http_error(e)


@router.get("/outer-eigenvalues")
async def get_outer_eigenvalues(c: float, a: float, U: float, beta: float = 0.0, side: int = 1):
    try:
        return _eigen_payload(outer_eigenvalues(c, a, U, beta, side))
    except WaveError as e:
        raise _http_error(e)


@router.post("/orbit", response_model=OrbitResponse)
async def orbit(body: OrbitRequest):
    """
    Orbit leaving the right-polarized saddle and its classification
    """
    try:
        spec = WaveSpec.normalized(c=body.c, a=body.a, U1=body.U1, beta=body.beta)
        start = unstable_start(spec, body.events)
        trajectory, outcome = await run_in_threadpool(integrate_orbit, spec, start, body.events)
    except WaveError as e:
        raise _http_error(e)
    stride = max(1, math.ceil(len(trajectory.xi) / body.max_points))
    states = trajectory.states[:, ::stride]
    return OrbitResponse(
        classification=outcome.classification.value,
        xi_end=outcome.xi,
        visited_opposite=outcome.visited_opposite,
        xi=trajectory.xi[::stride].tolist(),
        U=states[0].tolist(),
        W=states[1].tolist(),
        V=states[2].tolist(),
    )


@router.get("/inversion-speed", response_model=InversionBracket)
async def get_inversion_speed(a: float = Query(..., gt=0), beta: float = Query(0.0, ge=0),
                              U1: float = Query(1.0, gt=0), tol: float = Query(1e-7, gt=0)):
    try:
        return await run_in_threadpool(inversion_speed, a, beta, U1, tol)
    except WaveError as e:
        raise _http_error(e)
