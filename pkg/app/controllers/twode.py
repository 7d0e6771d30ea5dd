"""Traveling-wave ODE structure of the rescaled alignment system.

Wave profiles U(xi), W(xi) with xi = x - c t satisfy the first-order system

    U' = Z,  W' = V,  a Z' = V - c Z,  a V' = Z - c V - f0(U, W)

and, after integrating the U-equation once, the reduced system on the
invariant hyperplane a Z + c U - W = C1. The equilibria of the reduced system
are the non-polarized state (U1, 0), the left-polarized state (U2, -U2) and the
right-polarized state (U3, U3), with U1 = C1 / c.
"""

import cmath
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from app.controllers.model import alignment, alignment_partials
from app.models.wave import (
    Connection,
    ConnectionInfo,
    CriticalSpeeds,
    CubicSpec,
    EigenSet,
    Equilibria,
    FullState,
    HopfPoint,
    InversionBracket,
    OrbitClass,
    OrbitEvents,
    OrbitOutcome,
    ReducedState,
    RootRegion,
    Trajectory,
    WaveSpec,
)
from app.utils.errors import (
    ConfigurationError,
    DegenerateSpeedError,
    DomainError,
    SingularPerturbationError,
    SingularSpeedError,
    StiffnessError,
)

logger = logging.getLogger(__name__)

# relative size below which the cubic discriminant is not trusted
DISCRIMINANT_FLOOR = 1e-14
IMAG_TOLERANCE = 1e-6
SIGN_TOLERANCE = 1e-12


def _require_regular_speed(c: float):
    if abs(c) == 1.0:
        raise SingularSpeedError(f"wave speed |c| = 1 is singular, got c={c}", {"c": c})


def _require_nondegenerate_speed(c: float):
    if c in (-1.0, 0.0, 1.0):
        raise DegenerateSpeedError(f"wave speed c={c} is excluded", {"c": c})


def _require_diffusion(a: float):
    if not a > 0:
        raise SingularPerturbationError(
            f"the traveling-wave system needs a > 0 (got a={a}); use hyperbolic_rhs for a = 0",
            {"a": a},
        )


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------

def hyperbolic_rhs(U: float, W: float, c: float, beta: float = 0.0) -> Tuple[float, float]:
    """Slow flow of the hyperbolic limit: (U', W') = f0 / (1 - c^2) * (1, c)."""
    _require_regular_speed(c)
    rate = alignment(U, W, beta) / (1.0 - c * c)
    return rate, c * rate


def full_rhs(s: FullState, spec: WaveSpec) -> np.ndarray:
    """Right-hand side (U', W', Z', V') of the four-dimensional system."""
    _require_diffusion(spec.a)
    f0 = alignment(s.U, s.W, spec.beta)
    return np.array([
        s.Z,
        s.V,
        (s.V - spec.c * s.Z) / spec.a,
        (s.Z - spec.c * s.V - f0) / spec.a,
    ])


def _reduced_field(_: float, y: np.ndarray, c: float, a: float, C1: float, beta: float) -> np.ndarray:
    U, W, V = y
    # xi comes first for solve_ivp; outside U > 0 the event functions stop the integration
    f0 = W * (U - W) * (U + W) / (U * U) * math.exp(-(beta * U) ** 2) if U != 0 else 0.0
    drift = (-c * U + W + C1) / a
    return np.array([drift, V, drift / a - c * V / a - f0 / a])


def reduced_rhs(s: ReducedState, spec: WaveSpec) -> np.ndarray:
    """Right-hand side (U', W', V') of the system restricted to a Z + c U - W = C1."""
    _require_diffusion(spec.a)
    if not s.U > 0:
        raise DomainError("reduced system is defined for U > 0", {"U": s.U})
    return _reduced_field(0.0, s.as_array(), spec.c, spec.a, spec.C1, spec.beta)


def reduced_jacobian(s: ReducedState, spec: WaveSpec) -> np.ndarray:
    """Analytic Jacobian of the reduced system at s."""
    _require_diffusion(spec.a)
    c, a = spec.c, spec.a
    f_u, f_w = alignment_partials(s.U, s.W, spec.beta)
    return np.array([
        [-c / a, 1.0 / a, 0.0],
        [0.0, 0.0, 1.0],
        [-c / a ** 2 - f_u / a, 1.0 / a ** 2 - f_w / a, -c / a],
    ])


# ---------------------------------------------------------------------------
# critical manifold and layer problem
# ---------------------------------------------------------------------------

def slow_manifold_lift(U: float, W: float, c: float, beta: float = 0.0) -> Tuple[float, float]:
    """Point (Z, V) = h(U, W) of the critical manifold above (U, W)."""
    _require_regular_speed(c)
    rate = alignment(U, W, beta) / (1.0 - c * c)
    return rate, c * rate


def layer_equilibrium(Ubar: float, Wbar: float, c: float, beta: float = 0.0) -> Tuple[float, float]:
    """Equilibrium of the layer problem with frozen (Ubar, Wbar); it lies on the critical manifold."""
    return slow_manifold_lift(Ubar, Wbar, c, beta)


def layer_eigenvalues(c: float) -> Tuple[float, float]:
    return -c + 1.0, -c - 1.0


def layer_stability(c: float) -> str:
    """attracting for c > 1, repelling for c < -1, saddle for |c| < 1."""
    _require_regular_speed(c)
    plus, minus = layer_eigenvalues(c)
    if plus < 0 and minus < 0:
        return "attracting"
    if plus > 0 and minus > 0:
        return "repelling"
    return "saddle"


# ---------------------------------------------------------------------------
# linearization
# ---------------------------------------------------------------------------

def characteristic_cubic(c: float, a: float, f_U: float, f_W: float) -> CubicSpec:
    """Expand mu (mu + c)^2 + (a f_W - 1)(mu + c) + c + a f_U into monic coefficients."""
    return CubicSpec(
        c=c,
        a=a,
        f_U=f_U,
        f_W=f_W,
        b2=2.0 * c,
        b1=c * c - 1.0 + a * f_W,
        b0=a * (c * f_W + f_U),
    )


def _polish(root: complex, b2: float, b1: float, b0: float, steps: int = 3) -> complex:
    for _ in range(steps):
        value = ((root + b2) * root + b1) * root + b0
        slope = (3.0 * root + 2.0 * b2) * root + b1
        if slope == 0:
            break
        update = value / slope
        root -= update
        if abs(update) <= 1e-17 * max(1.0, abs(root)):
            break
    return root


def solve_cubic(b2: float, b1: float, b0: float) -> List[complex]:
    """Roots of mu^3 + b2 mu^2 + b1 mu + b0 in closed form, polished by Newton steps."""
    shift = b2 / 3.0
    p = b1 - b2 * b2 / 3.0
    q = 2.0 * b2 ** 3 / 27.0 - b2 * b1 / 3.0 + b0
    disc = -(4.0 * p ** 3 + 27.0 * q * q)

    if disc > 0 and p < 0:
        # three distinct real roots: trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift) for k in range(3)]
        return [complex(_polish(r, b2, b1, b0).real) for r in roots]

    # one real root (Cardano), the other two from the deflated quadratic
    inner = math.sqrt(max(q * q / 4.0 + p ** 3 / 27.0, 0.0))
    real_root = math.copysign(abs(-q / 2.0 + inner) ** (1.0 / 3.0), -q / 2.0 + inner)
    real_root += math.copysign(abs(-q / 2.0 - inner) ** (1.0 / 3.0), -q / 2.0 - inner)
    real_root = _polish(complex(real_root - shift), b2, b1, b0).real
    lin = b2 + real_root
    const = b1 + real_root * lin
    root = cmath.sqrt(lin * lin / 4.0 - const)
    first = _polish(-lin / 2.0 + root, b2, b1, b0)
    if abs(first.imag) > 0:
        second = first.conjugate()
    else:
        second = _polish(-lin / 2.0 - root, b2, b1, b0)
    return [complex(real_root), first, second]


def _all_real(cubic: CubicSpec, roots: Optional[Sequence[complex]] = None) -> bool:
    scale = max(abs(x) for x in cubic.coefficients) ** 4
    disc = cubic.discriminant
    if abs(disc) > DISCRIMINANT_FLOOR * scale:
        return disc > 0
    if roots is None:
        roots = solve_cubic(cubic.b2, cubic.b1, cubic.b0)
    return sum(abs(r.imag) for r in roots) <= IMAG_TOLERANCE * max(1.0, max(abs(r) for r in roots))


def _sign(x: float, scale: float) -> str:
    if abs(x) <= SIGN_TOLERANCE * scale:
        return "0"
    return "+" if x > 0 else "-"


def eigen_set(cubic: CubicSpec) -> EigenSet:
    """Roots of a cubic with region label, real-part sign pattern and scaled residual."""
    roots = solve_cubic(cubic.b2, cubic.b1, cubic.b0)
    real = _all_real(cubic, roots)
    scale = max(1.0, max(abs(r) for r in roots))
    if real:
        roots = sorted((complex(r.real) for r in roots), key=lambda r: -r.real)
        signs = "".join(_sign(r.real, scale) for r in roots)
    else:
        roots = sorted(roots, key=lambda r: (abs(r.imag) > 0, -r.real))
        single, pair = roots[0], roots[1:]
        signs = _sign(single.real, scale) + "(" + _sign(pair[0].real, scale) * 2 + ")"
    residual = max(abs(cubic.evaluate(r)) for r in roots) / max(abs(x) for x in cubic.coefficients)
    return EigenSet(
        roots=roots,
        region=RootRegion.ALL_REAL if real else RootRegion.COMPLEX_PAIR,
        signs=signs,
        residual=residual,
    )


def outer_eigenvalues(c: float, a: float, U: float, beta: float = 0.0, side: int = 1) -> EigenSet:
    """Closed-form scaled eigenvalues at the fully polarized states W = side * U.

    At W = U: 1 - c and -(1 + c +- sqrt((1 + c)^2 + 8 a g)) / 2; at W = -U:
    -(1 + c) and (1 - c +- sqrt((1 - c)^2 + 8 a g)) / 2, with g = exp(-beta^2 U^2).
    """
    if not U > 0:
        raise DomainError("outer equilibria need U > 0", {"U": U})
    _require_diffusion(a)
    if side not in (1, -1):
        raise DomainError("side must be +1 (W = U) or -1 (W = -U)", {"side": side})
    g = math.exp(-(beta * U) ** 2)
    if side == 1:
        root = math.sqrt((1.0 + c) ** 2 + 8.0 * a * g)
        values = [1.0 - c, -0.5 * (1.0 + c + root), -0.5 * (1.0 + c - root)]
    else:
        root = math.sqrt((1.0 - c) ** 2 + 8.0 * a * g)
        values = [-(1.0 + c), 0.5 * (1.0 - c + root), 0.5 * (1.0 - c - root)]
    f_u, f_w = alignment_partials(U, side * U, beta)
    cubic = characteristic_cubic(c, a, f_u, f_w)
    roots = sorted((complex(v) for v in values), key=lambda r: -r.real)
    scale = max(1.0, max(abs(v) for v in values))
    residual = max(abs(cubic.evaluate(r)) for r in roots) / max(abs(x) for x in cubic.coefficients)
    return EigenSet(
        roots=roots,
        region=RootRegion.ALL_REAL,
        signs="".join(_sign(r.real, scale) for r in roots),
        residual=residual,
    )


def central_cubic(c: float, ag: float) -> CubicSpec:
    """Cubic at W = 0, where f_U = 0 and f_W = g."""
    return characteristic_cubic(c, 1.0, 0.0, ag)


def classify_equilibrium(c: float, ag: float) -> EigenSet:
    """Region label and real-part signs of the non-polarized equilibrium for a g = ag."""
    _require_nondegenerate_speed(c)
    if ag < 0:
        raise DomainError("effective diffusion a*g must be non-negative", {"ag": ag})
    return eigen_set(central_cubic(c, ag))


def _is_real_at(c: float, ag: float) -> bool:
    return _all_real(central_cubic(c, ag))


def _bisect_boundary(real_side: float, complex_side: float, ag: float, tol: float = 1e-12) -> float:
    while abs(real_side - complex_side) > tol:
        mid = 0.5 * (real_side + complex_side)
        if _is_real_at(mid, ag):
            real_side = mid
        else:
            complex_side = mid
    return real_side


def critical_speeds(ag: float, samples: int = 4001) -> CriticalSpeeds:
    """Critical speeds c_* < 1 < c^* bounding the complex band of the W = 0 equilibrium.

    c^* is the smallest c > 1 with all-real roots for every larger speed, c_* the
    largest c < 1 with all-real roots on the whole of (0, c_*].
    """
    if not ag > 0:
        raise DomainError("critical speeds need a*g > 0; the limit a*g -> 0 gives (1, 1)", {"ag": ag})

    c_hi = 2.0
    while not _is_real_at(c_hi, ag):
        c_hi *= 2.0
    grid = np.linspace(1.0, c_hi, samples)
    flags = np.array([_is_real_at(c, ag) for c in grid])
    last_complex = int(np.nonzero(~flags)[0][-1]) if (~flags).any() else 0
    c_upper = _bisect_boundary(grid[last_complex + 1], grid[last_complex], ag)

    lower_grid = np.linspace(1.0 / samples, 1.0, samples)
    lower_flags = np.array([_is_real_at(c, ag) for c in lower_grid])
    complex_idx = np.nonzero(~lower_flags)[0]
    if len(complex_idx) == 0:
        c_lower = 1.0
    elif complex_idx[0] == 0:
        logger.warning(f"no lower critical speed for a*g={ag}: complex band reaches c -> 0")
        c_lower = None
    else:
        k = int(complex_idx[0])
        c_lower = _bisect_boundary(lower_grid[k - 1], lower_grid[k], ag)
    return CriticalSpeeds(ag=ag, c_lower=c_lower, c_upper=c_upper)


def hopf_locus(c: float) -> HopfPoint:
    """a = 2 (1 - c^2), where the W = 0 cubic (g = 1) has roots +-i sqrt(1 - c^2)."""
    if not 0 < c < 1:
        raise DomainError("the purely imaginary locus needs 0 < c < 1", {"c": c})
    a = 2.0 * (1.0 - c * c)
    omega = math.sqrt(1.0 - c * c)
    cubic = central_cubic(c, a)
    residual = abs(cubic.evaluate(1j * omega)) / max(abs(x) for x in cubic.coefficients)
    return HopfPoint(c=c, a=a, omega=omega, residual=residual)


# ---------------------------------------------------------------------------
# connections and plateau relations
# ---------------------------------------------------------------------------

_CONNECTIONS = {
    Connection.CASE_I: ("W=0", "W=U", True),
    Connection.CASE_II: ("W=U", "W=0", False),
    Connection.CASE_III: ("W=0", "W=-U", False),
    Connection.CASE_IV: ("W=-U", "W=0", True),
}

_MIRROR = {
    Connection.CASE_I: Connection.CASE_IV,
    Connection.CASE_IV: Connection.CASE_I,
    Connection.CASE_II: Connection.CASE_III,
    Connection.CASE_III: Connection.CASE_II,
}


def expected_connection(c: float) -> ConnectionInfo:
    """Which pair of steady states a small-diffusion front of speed c connects."""
    _require_nondegenerate_speed(c)
    if c < -1:
        case = Connection.CASE_I
    elif c < 0:
        case = Connection.CASE_II
    elif c < 1:
        case = Connection.CASE_III
    else:
        case = Connection.CASE_IV
    source, target, fast = _CONNECTIONS[case]
    return ConnectionInfo(case=case, source=source, target=target, fast=fast)


def mirror_connection(case: Connection) -> Connection:
    """Image of a connection under x -> -x."""
    return _MIRROR[case]


def plateau_relations(c: float, U1: float) -> Tuple[float, float]:
    """Plateaus (U2, U3) behind a fast front of speed c > 1 running into (U1, 0).

    U2 = U1 c / (c + 1) is the left-polarized state, U3 = U1 c / (c - 1) the
    right-polarized one: the front swallows c U1 particles per unit time and
    leaves (c - 1) U3 right-movers resp. (c + 1) U2 left-movers behind.
    """
    if not U1 > 0:
        raise DomainError("U1 must be positive", {"U1": U1})
    if not c > 1:
        raise DomainError(
            "fast-front plateaus need c > 1; use slow_plateau_relation for slow fronts", {"c": c}
        )
    if math.isinf(c):
        return U1, U1
    return U1 * c / (c + 1.0), U1 * c / (c - 1.0)


def slow_plateau_relation(c: float, U1: float) -> float:
    """Left-polarized state U2 = U1 c / (c + 1) reached by a slow front, 0 < c < 1."""
    if not U1 > 0:
        raise DomainError("U1 must be positive", {"U1": U1})
    if not 0 < c < 1:
        raise DomainError("slow fronts have 0 < c < 1", {"c": c})
    return U1 * c / (c + 1.0)


def inversion_relation(ctilde: float, U2: float) -> float:
    """U3 = U2 (ctilde - 1) / (ctilde + 1) across an inversion front of speed ctilde > 1.

    U2 is the co-polarized state behind the front (right-movers for a
    right-moving front), U3 the counter-polarized state ahead of it.
    """
    if not ctilde > 1:
        raise DomainError("inversion fronts have speed > 1", {"ctilde": ctilde})
    if not U2 > 0:
        raise DomainError("U2 must be positive", {"U2": U2})
    return U2 * (ctilde - 1.0) / (ctilde + 1.0)


def equilibria(spec: WaveSpec) -> Equilibria:
    """Zeros of f0 on the hyperplane fixed by C1; U2 / U3 are None where not positive."""
    _require_nondegenerate_speed(spec.c)
    c, C1 = spec.c, spec.C1
    U2 = C1 / (c + 1.0)
    U3 = C1 / (c - 1.0)
    return Equilibria(
        U1=C1 / c,
        U2=U2 if U2 > 0 else None,
        U3=U3 if U3 > 0 else None,
    )


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

def hyperbolic_orbit(U0: float, W0: float, c: float, beta: float = 0.0,
                     xi_span: Tuple[float, float] = (0.0, 50.0), samples: int = 200) -> Trajectory:
    """Trajectory of the hyperbolic-limit flow; it runs along U - W / c = const."""
    _require_regular_speed(c)

    def rhs(_, y):
        return list(hyperbolic_rhs(y[0], y[1], c, beta))

    sol = solve_ivp(rhs, xi_span, [U0, W0], method="RK45", rtol=1e-10, atol=1e-12,
                    t_eval=np.linspace(xi_span[0], xi_span[1], samples))
    if sol.status < 0:
        raise StiffnessError(f"hyperbolic-limit integration failed: {sol.message}")
    return Trajectory(xi=sol.t, states=sol.y)


def unstable_start(spec: WaveSpec, events: Optional[OrbitEvents] = None) -> ReducedState:
    """Start point on the unstable eigenvector of (U3, U3, 0), oriented towards decreasing W."""
    events = events or OrbitEvents()
    _require_diffusion(spec.a)
    if not spec.c > 1:
        raise DomainError("the right-polarized saddle is used for c > 1 only", {"c": spec.c})
    U3 = equilibria(spec).U3
    saddle = np.array([U3, U3, 0.0])
    values, vectors = np.linalg.eig(reduced_jacobian(ReducedState(U=U3, W=U3, V=0.0), spec))
    k = int(np.argmax(values.real))
    direction = np.real(vectors[:, k])
    direction /= np.linalg.norm(direction)
    if direction[1] > 0:
        direction = -direction
    return ReducedState.from_array(saddle + events.start_offset * np.linalg.norm(saddle) * direction)


def _ball_event(center: np.ndarray, radius: float, terminal: bool):
    def event(_, y, *_args):
        return float(np.linalg.norm(y - center) - radius)

    event.terminal = terminal
    event.direction = -1
    return event


def integrate_orbit(spec: WaveSpec, start: ReducedState,
                    events: Optional[OrbitEvents] = None) -> Tuple[Trajectory, OrbitOutcome]:
    """Integrate the reduced system from start until capture, escape or max xi."""
    events = events or OrbitEvents()
    _require_diffusion(spec.a)
    eq = equilibria(spec)
    U1 = eq.U1
    r_cap = events.capture_factor * U1
    R_esc = events.escape_factor * max(U1, eq.U2 or 0.0, eq.U3 or 0.0)

    center = np.array([U1, 0.0, 0.0])
    capture = _ball_event(center, r_cap, terminal=True)
    triggers = [capture]
    opposite = None
    if eq.U2 is not None:
        opposite_point = np.array([eq.U2, -eq.U2, 0.0])
        opposite = _ball_event(opposite_point, r_cap, terminal=events.terminal_on_opposite)
        triggers.append(opposite)

    def escape(_, y, *_args):
        return float(np.linalg.norm(y) - R_esc)

    escape.terminal = True
    escape.direction = 1

    def leave_half_space(_, y, *_args):
        return float(y[0] - events.half_space_floor * U1)

    leave_half_space.terminal = True
    leave_half_space.direction = -1
    triggers += [escape, leave_half_space]

    sol = solve_ivp(
        _reduced_field, (0.0, events.max_xi), start.as_array(), method="RK45",
        args=(spec.c, spec.a, spec.C1, spec.beta), rtol=events.rtol, atol=events.atol,
        events=triggers,
    )
    if sol.status < 0:
        raise StiffnessError(f"orbit integration failed: {sol.message}",
                             {"c": spec.c, "a": spec.a, "xi": float(sol.t[-1])})

    trajectory = Trajectory(xi=sol.t, states=sol.y)
    fired = {id(ev): len(times) > 0 for ev, times in zip(triggers, sol.t_events)}
    visited_opposite = opposite is not None and fired[id(opposite)]
    terminal = ReducedState(U=max(float(sol.y[0, -1]), 1e-300), W=float(sol.y[1, -1]), V=float(sol.y[2, -1]))
    xi_end = float(sol.t[-1])

    if sol.status == 1 and fired[id(capture)]:
        spirals = np.count_nonzero(np.diff(np.sign(sol.y[1])) != 0) > 0
        ag = spec.a * math.exp(-(spec.beta * U1) ** 2)
        center_complex = classify_equilibrium(spec.c, ag).region == RootRegion.COMPLEX_PAIR
        label = OrbitClass.SPIRAL_IN if (spirals or center_complex) else OrbitClass.MONOTONE_IN
    elif sol.status == 1 and (fired[id(escape)] or fired[id(leave_half_space)]):
        label = OrbitClass.ESCAPE
    elif sol.status == 1 and visited_opposite:
        label = OrbitClass.HIT_OPPOSITE
    elif visited_opposite and np.linalg.norm(sol.y[:, -1] - opposite_point) <= r_cap:
        label = OrbitClass.HIT_OPPOSITE
    else:
        label = OrbitClass.INCONCLUSIVE
        logger.warning(f"orbit c={spec.c} a={spec.a} reached xi={xi_end} without an event")

    return trajectory, OrbitOutcome(
        classification=label, terminal=terminal, xi=xi_end, visited_opposite=visited_opposite
    )


def shoot(c: float, a: float, beta: float = 0.0, U1: float = 1.0,
          events: Optional[OrbitEvents] = None) -> OrbitOutcome:
    """Fate of the unstable manifold of (U3, U3) for speed c; the opposite saddle is not terminal."""
    events = (events or OrbitEvents()).model_copy(update={"terminal_on_opposite": False})
    spec = WaveSpec.normalized(c=c, a=a, U1=U1, beta=beta)
    _, outcome = integrate_orbit(spec, unstable_start(spec, events), events)
    logger.debug(f"shoot c={c:.10f} a={a}: {outcome.classification.value}")
    return outcome


def inversion_speed(a: float, beta: float = 0.0, U1: float = 1.0, tol: float = 1e-7,
                    events: Optional[OrbitEvents] = None) -> InversionBracket:
    """Bracket the inversion-wave speed by bisection on the SpiralIn / Escape dichotomy."""
    _require_diffusion(a)
    ag = a * math.exp(-(beta * U1) ** 2)
    c_upper = critical_speeds(ag).c_upper

    c_hi = c_upper
    outcome_hi = shoot(c_hi, a, beta, U1, events).classification
    if not outcome_hi.returned:
        raise ConfigurationError(
            "orbit at the critical speed does not return to the central state",
            {"c": c_hi, "outcome": outcome_hi.value},
        )

    c_lo, outcome_lo = None, None
    for fraction in (0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005):
        c = 1.0 + fraction * (c_upper - 1.0)
        outcome = shoot(c, a, beta, U1, events).classification
        if outcome == OrbitClass.ESCAPE:
            c_lo, outcome_lo = c, outcome
            break
        if outcome.returned:
            c_hi, outcome_hi = c, outcome
    if c_lo is None:
        raise ConfigurationError(
            "no escaping orbit found below the critical speed",
            {"a": a, "c_hi": c_hi, "outcome_hi": outcome_hi.value},
        )

    while c_hi - c_lo > tol:
        mid = 0.5 * (c_lo + c_hi)
        outcome = shoot(mid, a, beta, U1, events).classification
        if outcome == OrbitClass.ESCAPE:
            c_lo, outcome_lo = mid, outcome
        elif outcome.returned:
            c_hi, outcome_hi = mid, outcome
        else:
            raise ConfigurationError(
                "shooting dichotomy lost inside the bracket",
                {"c": mid, "outcome": outcome.value, "c_lo": c_lo, "c_hi": c_hi},
            )

    logger.info(f"inversion speed for a={a}: {c_lo:.9f} < c~ < {c_hi:.9f}")
    return InversionBracket(
        a=a, beta=beta, U1=U1, c_lo=c_lo, c_hi=c_hi, width=c_hi - c_lo,
        outcome_lo=outcome_lo, outcome_hi=outcome_hi, c_upper=c_upper,
    )
