from fastapi import APIRouter, HTTPException

from app.controllers.model import alignment, alignment_partials
from app.models.requests import AlignmentRequest, AlignmentResponse
from app.utils.errors import WaveError

router = APIRouter()


@router.post("/alignment", response_model=AlignmentResponse)
async def alignment_rate(body: AlignmentRequest):
    """
    Alignment rate f0 and its partial derivatives at (u, w)
    """
    try:
        f_u, f_w = alignment_partials(body.u, body.w, body.beta)
        return AlignmentResponse(rate=alignment(body.u, body.w, body.beta), f_U=f_u, f_W=f_w)
    except WaveError as e:
        raise HTTPException(status_code=e.status_code, detail=e.to_record())
