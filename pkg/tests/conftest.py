import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.config import settings
from app.models.params import ModelParams
from app.models.simulation import FieldPair, Grid, InitialData, SolverConfig, Snapshot


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "output"))
    monkeypatch.setattr(settings, "workers", 1)
    return tmp_path / "output"


@pytest.fixture
def client():
    from app.main import app

    return TestClient(app)


@pytest.fixture
def small_grid():
    return Grid(L=20.0, N=400)


@pytest.fixture
def small_config(small_grid):
    """Cheap dip run that stays well inside its domain."""
    return SolverConfig(
        params=ModelParams.from_diffusion(0.1),
        grid=small_grid,
        T=4.0,
        snapshot_every=1.0,
        initial=InitialData(kind="dip", u0=1.0, amplitude=0.5, sigma=1.0),
    )


def translating_snapshots(grid, speed, U_behind, W_behind, U_ahead=1.0, start=-20.0,
                          times=range(0, 17), width=0.5):
    """Rigid smoothed step from (U_behind, W_behind) to (U_ahead, 0) moving at `speed`."""
    x = grid.x
    snaps = []
    for t in times:
        s = 0.5 * (1.0 - np.tanh((x - start - speed * t) / width))
        u = U_ahead + (U_behind - U_ahead) * s
        w = W_behind * s
        snaps.append(Snapshot(time=float(t), fields=FieldPair.from_uw(u, w)))
    return snaps


@pytest.fixture
def translating():
    return translating_snapshots
