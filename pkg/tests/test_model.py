import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.controllers.model import alignment, alignment_field, alignment_partials
from app.models.params import ModelParams, PhysState
from app.utils.errors import DomainError


@pytest.mark.parametrize(
    "u, w, beta, expected",
    [
        (1.0, 0.0, 0.3, 0.0),
        (2.0, 2.0, 1.0, 0.0),
        (1.0, 0.5, 0.0, 0.375),
    ],
)
def test_alignment_values(u, w, beta, expected):
    assert alignment(u, w, beta) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "u, w, beta, expected",
    [
        (1.0, 0.0, 0.0, (0.0, 1.0)),
        (1.0, 1.0, 0.0, (2.0, -2.0)),
        (2.0, -2.0, 1.0, (-2.0 * math.exp(-4.0), -2.0 * math.exp(-4.0))),
    ],
)
def test_alignment_partials_closed_forms(u, w, beta, expected):
    f_u, f_w = alignment_partials(u, w, beta)
    assert f_u == pytest.approx(expected[0], abs=1e-14)
    assert f_w == pytest.approx(expected[1], abs=1e-14)


@pytest.mark.parametrize("u", [0.0, -1.0])
def test_alignment_rejects_non_positive_density(u):
    with pytest.raises(DomainError):
        alignment(u, 0.0)
    with pytest.raises(DomainError):
        alignment_partials(u, 0.0)


def test_alignment_is_odd_and_sign_definite():
    for beta in (0.0, 0.5, 1.0):
        for u in np.linspace(0.1, 5.0, 12):
            for w in np.linspace(0.0, u, 9):
                assert alignment(u, -w, beta) == pytest.approx(-alignment(u, w, beta), abs=1e-15)
                assert alignment(u, w, beta) >= 0.0


def test_partials_match_finite_differences():
    h = 1e-6
    for beta in (0.0, 0.5, 1.0):
        for u in np.linspace(0.1, 5.0, 8):
            for w in np.linspace(-0.9 * u, 0.9 * u, 7):
                f_u, f_w = alignment_partials(u, w, beta)
                fd_u = (alignment(u + h, w, beta) - alignment(u - h, w, beta)) / (2 * h)
                fd_w = (alignment(u, w + h, beta) - alignment(u, w - h, beta)) / (2 * h)
                scale = max(1.0, abs(f_u), abs(f_w))
                assert abs(f_u - fd_u) / scale < 1e-6
                assert abs(f_w - fd_w) / scale < 1e-6


def test_alignment_field_vanishes_in_depleted_cells():
    u = np.array([0.0, 1e-40, 1.0, 2.0])
    w = np.array([0.0, 1e-40, 0.5, -1.0])
    rate = alignment_field(u, w)
    assert rate[0] == 0.0 and rate[1] == 0.0
    assert rate[2] == pytest.approx(0.375)
    assert rate[3] == pytest.approx(alignment(2.0, -1.0))


def test_model_params_recompute_a():
    params = ModelParams(alpha=2.0, epsilon=0.05, beta=0.3)
    assert params.a == pytest.approx(0.1)
    assert ModelParams.from_diffusion(0.2).a == pytest.approx(0.2)
    assert ModelParams.model_validate_json(params.model_dump_json()) == params


@pytest.mark.parametrize("field", ["alpha", "epsilon", "beta"])
def test_model_params_reject_negative_and_infinite(field):
    with pytest.raises(ValidationError):
        ModelParams(**{field: -1.0})
    with pytest.raises(ValidationError):
        ModelParams(**{field: float("inf")})


def test_phys_state_invariant_domain():
    state = PhysState(u=1.0, w=0.5)
    assert state.u_right == pytest.approx(0.75)
    assert state.u_left == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        PhysState(u=1.0, w=1.5)
    with pytest.raises(ValidationError):
        PhysState(u=0.0, w=0.0)


def test_rescaling_round_trip():
    params = ModelParams(alpha=4.0, epsilon=0.01)
    t, x = params.to_rescaled(2.0, 3.0)
    assert (t, x) == (8.0, 12.0)
    assert params.to_physical(t, x) == (2.0, 3.0)
