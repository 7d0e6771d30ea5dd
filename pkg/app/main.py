from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import configure_logging, settings
from app.routes import experiments, model, waves

configure_logging()

app = FastAPI(title="Alignment waves")
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


app.include_router(model.router, prefix="/api/model", tags=["Model"])
app.include_router(waves.router, prefix="/api/waves", tags=["Traveling waves"])
app.include_router(experiments.router, prefix="/api/experiments", tags=["Experiments"])


@app.get("/", response_model=dict)
async def read_root():
    return {"message": "Alignment waves API"}
