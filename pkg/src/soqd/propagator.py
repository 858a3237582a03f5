"""Closed-form mode transforms for the six-step interferometric schedule.

Each step evolves the two field modes under a constant bilinear Hamiltonian

    h = alpha1 * n1 + alpha2 * n2 + beta * (a1^+ a2 + a2^+ a1),

which acts on coherent amplitudes through the 2x2 matrix exp(-i*H*duration)
with H = [[alpha1, beta], [beta, alpha2]].  The decoherence factor of the
full measurement sequence is an overlap taken after six such steps whose
frequencies and couplings alternate in sign.

Composition order: step 1 acts first, so the combined transform is the
matrix product M6 @ M5 @ M4 @ M3 @ M2 @ M1.  Keep it that way; reversing
the product is a silent transpose bug that every cross-check downstream
is designed to catch.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    ModelParams,
    ModeTransform,
    NegativeTime,
    NonPositiveStep,
    StepParams,
    validate,
)

__all__ = [
    "Schedule",
    "build_schedule",
    "gamma",
    "step_transform",
    "step_transform_ode",
    "compose",
    "apply_to_coherent",
    "transform_over_tau",
]

#: treat sin(x)/x as 1 below this angle; the relative error of the
#: replacement is < x^2/6 ~ 1.7e-17, under double roundoff
_SMALL_ANGLE = 1e-8


@dataclass(frozen=True)
class Schedule:
    """The six evolution steps of one (t, t') measurement sequence."""

    steps: tuple

    def __post_init__(self):
        if len(self.steps) != 6:
            raise ValueError(f"a schedule holds exactly 6 steps, got {len(self.steps)}")


def build_schedule(params: ModelParams, t: float, t_prime: float) -> Schedule:
    """Six-step schedule for measurement times t and t' (both >= 0).

    Steps 1 and 6 carry the summed coupling d_e + d_g (with opposite
    signs), steps 2/3 carry d_e, steps 4/5 carry d_g; steps 3 and 4 last
    t', the rest last t.  Step 6 is step 1 with every coefficient negated.
    """
    validate(params)
    if t < 0 or t_prime < 0:
        raise NegativeTime(f"measurement times must be >= 0, got t={t}, t'={t_prime}")
    w1, w2 = params.omega1, params.omega2
    de, dg = params.d_e, params.d_g
    rows = (
        (w1, w2, de + dg, t),
        (-w1, -w2, -de, t),
        (w1, w2, de, t_prime),
        (-w1, -w2, -dg, t_prime),
        (w1, w2, dg, t),
        (-w1, -w2, -de - dg, t),
    )
    steps = tuple(StepParams(a1, a2, b, d, index=k + 1)
                  for k, (a1, a2, b, d) in enumerate(rows))
    return Schedule(steps)


def gamma(step: StepParams) -> float:
    """Precession rate sqrt(((alpha2 - alpha1)/2)^2 + beta^2) of one step."""
    return math.hypot(0.5 * (step.alpha2 - step.alpha1), step.beta)


def _mode_matrix(alpha1: float, alpha2: float, beta: float, duration):
    """exp(-i*H*duration) for H = [[alpha1, beta], [beta, alpha2]].

    ``duration`` may be a scalar or an ndarray; the result has shape
    duration.shape + (2, 2).  Uses the half-angle form

        exp(-i*(alpha1+alpha2)*d/2) * (cos(G*d) * I
            - i*sin(G*d)/G * [[-delta, beta], [beta, delta]])

    with delta = (alpha2 - alpha1)/2 and G = sqrt(delta^2 + beta^2); the
    sin(G*d)/G ratio is replaced by d itself for G*d below _SMALL_ANGLE so
    the degenerate G -> 0 limit is exact instead of 0/0.
    """
    d = np.asarray(duration, dtype=float)
    delta = 0.5 * (alpha2 - alpha1)
    rate = math.hypot(delta, beta)
    angle = rate * d
    phase = np.exp(-0.5j * (alpha1 + alpha2) * d)
    cos = np.cos(angle)
    denom = rate if rate > 0 else 1.0
    sin_ratio = np.where(np.abs(angle) < _SMALL_ANGLE, d, np.sin(angle) / denom)
    out = np.empty(d.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = phase * (cos + 1j * delta * sin_ratio)
    out[..., 1, 1] = phase * (cos - 1j * delta * sin_ratio)
    out[..., 0, 1] = -1j * beta * sin_ratio * phase
    out[..., 1, 0] = out[..., 0, 1]
    return out


def step_transform(step: StepParams) -> ModeTransform:
    """Closed-form mode transform of a single step."""
    return ModeTransform.from_array(
        _mode_matrix(step.alpha1, step.alpha2, step.beta, step.duration))


def step_transform_ode(step: StepParams, dt: float = 1e-3) -> ModeTransform:
    """Same transform, integrated numerically: the independent cross-check.

    Classical fixed-step 4th-order Runge-Kutta applied to the matrix system
    i dM/dt = H M, M(0) = I.  For a constant linear right-hand side the four
    RK stages collapse exactly to the quartic Taylor map
    R = sum_{j<=4} (-i*h*H)^j / j!, so n identical steps compose to R**n;
    the matrix power is bit-for-bit the sequential iteration up to
    float associativity.
    """
    if dt <= 0:
        raise NonPositiveStep(f"integrator step must be > 0, got {dt}")
    if step.duration == 0:
        return ModeTransform.identity()
    n = max(1, math.ceil(step.duration / dt))
    h = step.duration / n
    ham = np.array([[step.alpha1, step.beta], [step.beta, step.alpha2]],
                   dtype=complex)
    x = -1j * h * ham
    one_step = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for j in (1, 2, 3, 4):
        term = term @ x / j
        one_step = one_step + term
    return ModeTransform.from_array(np.linalg.matrix_power(one_step, n))


def compose(schedule: Schedule) -> ModeTransform:
    """Combined transform of a schedule, step 1 applied first."""
    total = np.eye(2, dtype=complex)
    for step in schedule.steps:
        total = _mode_matrix(step.alpha1, step.alpha2, step.beta, step.duration) @ total
    return ModeTransform.from_array(total)


def apply_to_coherent(m: ModeTransform, alpha: complex, beta: complex):
    """Map a coherent amplitude pair through a mode transform."""
    return (m.m11 * alpha + m.m12 * beta, m.m21 * alpha + m.m22 * beta)


def transform_over_tau(params: ModelParams, t: float, taus) -> np.ndarray:
    """Composed transforms for t' = t + tau over a whole tau grid at once.

    Returns an array of shape (len(taus), 2, 2).  This is the vectorized
    twin of compose(build_schedule(params, t, t + tau)) used by sweeps and
    threshold searches; steps 3 and 4 get the array duration, the four
    t-steps stay scalar and broadcast.
    """
    validate(params)
    taus = np.asarray(taus, dtype=float)
    if t < 0:
        raise NegativeTime(f"measurement time must be >= 0, got t={t}")
    if taus.size and float(np.min(taus)) < -t:
        raise NegativeTime("t + tau must stay >= 0 across the grid")
    t_prime = t + taus
    w1, w2 = params.omega1, params.omega2
    de, dg = params.d_e, params.d_g
    rows = (
        (w1, w2, de + dg, t),
        (-w1, -w2, -de, t),
        (w1, w2, de, t_prime),
        (-w1, -w2, -dg, t_prime),
        (w1, w2, dg, t),
        (-w1, -w2, -de - dg, t),
    )
    total = np.broadcast_to(np.eye(2, dtype=complex), taus.shape + (2, 2))
    for a1, a2, b, d in rows:
        total = _mode_matrix(a1, a2, b, d) @ total
    return np.ascontiguousarray(total)
