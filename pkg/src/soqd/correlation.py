"""Second-order correlation functions and decoherence factors.

The detector's two-time correlation is

    G(t, t') = 1/2 + Re[exp(i*omega_e*(t - t')) * F(t, t')] / 2

for an equal-weight internal superposition, where the decoherence factor
F is the overlap between the initial field state and the same state pushed
through the six-step schedule.  F is evaluated three independent ways:

* closed form  - compose the 2x2 mode transforms (production path),
* quadrature   - integrate the coherent-state resolution of the number
                 state over the complex plane,
* oracle       - dense sector products (see :mod:`soqd.oracle`).

The first two live here; routine agreement between all three is what the
test suite is built around.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .model import (
    ApparatusState,
    CoherentState,
    DecoherenceNotReached,
    FockState,
    InsufficientOrder,
    ModelParams,
    NotNormalized,
    SectorTooLarge,
    UnphysicalFactor,
)
from .propagator import apply_to_coherent, build_schedule, compose, transform_over_tau

__all__ = [
    "QUADRATURE_OCCUPATION_GUARD",
    "QuadratureSpec",
    "default_quadrature",
    "two_time_amplitude",
    "g2_free",
    "decoherence_factor_coherent",
    "decoherence_factor_fock_closed",
    "decoherence_factor_fock_quadrature",
    "factor_over_tau",
    "g2_interacting",
    "decoherence_time",
]

#: the quadrature path refuses occupations above this; the closed form
#: covers arbitrary n, so past a few hundred the integral is all cost
QUADRATURE_OCCUPATION_GUARD = 256

#: threshold search window for decoherence_time
TAU_MAX_DEFAULT = 200.0


# ---------------------------------------------------------------------------
# free two-level interference (no field coupling)
# ---------------------------------------------------------------------------

def _check_normalized(c_e: complex, c_g: complex) -> None:
    norm = abs(c_e) ** 2 + abs(c_g) ** 2
    if abs(norm - 1.0) > 1e-9:
        raise NotNormalized(f"|c_e|^2 + |c_g|^2 = {norm!r}, expected 1")


def two_time_amplitude(c_e: complex, c_g: complex, omega_e: float,
                       omega_g: float, t1: float, t2: float) -> complex:
    """Symmetrized two-time amplitude of a freely precessing two-level system."""
    _check_normalized(c_e, c_g)
    return (c_e * c_g * np.exp(-1j * (omega_e * t2 + omega_g * t1))
            + c_g * c_e * np.exp(-1j * (omega_g * t2 + omega_e * t1)))


def g2_free(c_e: complex, c_g: complex, omega_e: float, omega_g: float,
            t1: float, t2: float) -> float:
    """|two_time_amplitude|^2 in closed form: an undamped cosine fringe."""
    _check_normalized(c_e, c_g)
    return float(2.0 * abs(c_e * c_g) ** 2
                 * (1.0 + math.cos((omega_g - omega_e) * (t2 - t1))))


# ---------------------------------------------------------------------------
# decoherence factors (closed form)
# ---------------------------------------------------------------------------

def decoherence_factor_coherent(params: ModelParams, beta0: complex,
                                t: float, t_prime: float) -> complex:
    """Overlap of the coherent preparation (0, beta0) with its image.

    The schedule maps (0, beta0) to (a6, b6); the factor is the coherent
    overlap exp(-|a6|^2/2) * exp(-(|beta0|^2 + |b6|^2)/2 + conj(beta0)*b6).
    """
    m = compose(build_schedule(params, t, t_prime))
    a6, b6 = apply_to_coherent(m, 0j, beta0)
    return complex(np.exp(-0.5 * abs(a6) ** 2
                          - 0.5 * (abs(beta0) ** 2 + abs(b6) ** 2)
                          + np.conj(beta0) * b6))


def decoherence_factor_fock_closed(params: ModelParams, n: int,
                                   t: float, t_prime: float) -> complex:
    """Number-state factor m22**n, evaluated as exp(n*log(m22)).

    The log-power form survives n ~ 1e4: the magnitude just underflows
    smoothly toward zero instead of degrading term by term.
    """
    if n < 0:
        raise ValueError(f"occupation must be >= 0, got {n}")
    m22 = compose(build_schedule(params, t, t_prime)).m22
    if n == 0:
        return 1.0 + 0j
    if m22 == 0:
        return 0j
    return complex(np.exp(n * np.log(complex(m22))))


# ---------------------------------------------------------------------------
# decoherence factor (quadrature over the coherent resolution)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the polar phase-space integral."""

    radial_order: int
    angular_order: int

    def __post_init__(self):
        if self.radial_order < 1 or self.angular_order < 1:
            raise ValueError("quadrature orders must be >= 1")


def default_quadrature(n: int) -> QuadratureSpec:
    """Defaults that integrate the occupation-n case exactly with margin."""
    return QuadratureSpec(radial_order=max(64, n + 8), angular_order=64)


def _gauss_laguerre_log(order: int):
    """Gauss-Laguerre nodes and log-weights for weight exp(-u) on [0, inf).

    Nodes are the eigenvalues of the symmetrized Jacobi matrix (diagonal
    2k+1, off-diagonal k).  Weights do NOT come from the eigenvectors:
    the first components fall below the eigensolver's absolute accuracy
    long before the rule's tail does, which silently corrupts every
    weight under ~1e-14 -- exactly the ones a high-occupation integrand
    leans on.  Instead each log-weight is evaluated from the analytic
    form w = u / ((R+1) * L_{R+1}(u))^2, with L_{R+1} run up by the
    three-term recurrence and renormalized on the fly so the recursion
    stays finite while log(w) keeps full relative accuracy at any
    magnitude.
    """
    k = np.arange(order, dtype=float)
    nodes = eigh_tridiagonal(2.0 * k + 1.0, k[1:], eigvals_only=True)
    prev = np.ones_like(nodes)  # L_0
    cur = 1.0 - nodes  # L_1
    shift = np.zeros_like(nodes)  # accumulated log of the renormalizations
    for j in range(1, order + 1):
        prev, cur = cur, ((2.0 * j + 1.0 - nodes) * cur - j * prev) / (j + 1.0)
        big = np.abs(cur) > 1e100
        if big.any():
            factor = np.where(big, np.abs(cur), 1.0)
            cur /= factor
            prev /= factor
            shift += np.log(factor)
    log_tail = shift + np.log(np.abs(cur))
    log_w = np.log(nodes) - 2.0 * (math.log(order + 1.0) + log_tail)
    return nodes, log_w


def decoherence_factor_fock_quadrature(params: ModelParams, n: int, t: float,
                                       t_prime: float,
                                       quad: QuadratureSpec) -> complex:
    """Number-state factor by direct phase-space integration.

    Resolve |n> on coherent states: F = integral d^2beta/pi of
    <0,n | image of (0,beta)> <beta | n>.  In polar form with u = |beta|^2
    the radial integral carries weight exp(-u) (Gauss-Laguerre) and the
    phase integral is 2*pi-periodic with finite harmonic content (uniform
    trapezoid).  The non-weight radial factor is a degree-n polynomial in
    u, so radial_order >= n + 1 integrates it exactly; everything is
    assembled in log space (lgamma + complex log-powers) and exponentiated
    once per node.
    """
    if n < 0:
        raise ValueError(f"occupation must be >= 0, got {n}")
    if n > QUADRATURE_OCCUPATION_GUARD:
        raise SectorTooLarge(
            f"occupation {n} exceeds the quadrature guard {QUADRATURE_OCCUPATION_GUARD}")
    if quad.radial_order < n + 1:
        raise InsufficientOrder(
            f"radial_order {quad.radial_order} < n + 1 = {n + 1}")
    m = compose(build_schedule(params, t, t_prime))
    u, log_w = _gauss_laguerre_log(quad.radial_order)
    theta = 2.0 * math.pi * np.arange(quad.angular_order) / quad.angular_order
    beta = np.sqrt(u)[:, None] * np.exp(1j * theta)[None, :]
    # preparation has mode 1 empty, so the image of (0, beta) is:
    a6 = m.m12 * beta
    b6 = m.m22 * beta
    log_radial = (log_w + u)[:, None]
    exponent = (-0.5 * (np.abs(a6) ** 2 + np.abs(b6) ** 2)
                - 0.5 * u[:, None] + log_radial)
    if n > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            power = n * (np.log(b6) + np.log(np.conj(beta)))
        power = np.where(np.isfinite(power.real), power, -np.inf)
        exponent = exponent + power - gammaln(n + 1.0)
    total = np.exp(exponent)
    return complex(total.sum() / quad.angular_order)


# ---------------------------------------------------------------------------
# correlation assembly
# ---------------------------------------------------------------------------

def g2_interacting(f: complex, t: float, t_prime: float, omega_e: float) -> float:
    """Fold a decoherence factor into the two-time correlation.

    Equal internal weights are hard-wired: the fringe term enters with
    coefficient 1/2 on top of the 1/2 plateau.
    """
    if abs(f) > 1 + 1e-6:
        raise UnphysicalFactor(f"|f| = {abs(f)} exceeds 1 beyond roundoff")
    return float(0.5 + 0.5 * np.real(np.exp(1j * omega_e * (t - t_prime)) * f))


def factor_over_tau(params: ModelParams, state: ApparatusState, t: float,
                    taus) -> np.ndarray:
    """Decoherence factor on a whole tau grid (t' = t + tau), closed form.

    Vectorized companion of the scalar factor functions; sweeps, figures
    and the threshold search all run through here.
    """
    m = transform_over_tau(params, t, taus)
    if isinstance(state, FockState):
        if state.n == 0:
            return np.ones(m.shape[:-2], dtype=complex)
        m22 = m[..., 1, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(state.n * np.log(m22))
        return np.where(m22 == 0, 0j, out)
    a0, b0 = state.alpha0, state.beta0
    a6 = m[..., 0, 0] * a0 + m[..., 0, 1] * b0
    b6 = m[..., 1, 0] * a0 + m[..., 1, 1] * b0
    return np.exp(-0.5 * (abs(a0) ** 2 + np.abs(a6) ** 2) + np.conj(a0) * a6
                  - 0.5 * (abs(b0) ** 2 + np.abs(b6) ** 2) + np.conj(b0) * b6)


# ---------------------------------------------------------------------------
# decoherence time
# ---------------------------------------------------------------------------

def decoherence_time(params: ModelParams, state: ApparatusState, t: float,
                     threshold: float = 1.0 / math.e,
                     tau_max: float = TAU_MAX_DEFAULT) -> float:
    """Smallest tau > 0 with |F(t, t + tau)| below threshold.

    Scans |F| on grids of doubling resolution over (0, tau_max] until the
    first sub-threshold sample stops moving, then bisects the bracketing
    cell down to 1e-4 absolute width.  Raises DecoherenceNotReached when
    |F| stays above threshold across the whole window (equal couplings,
    empty preparations).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    if tau_max <= 0:
        raise ValueError(f"tau_max must be > 0, got {tau_max}")

    hit = None
    spacing = None
    points = 1024
    while points <= 131072:
        taus = np.linspace(0.0, tau_max, points + 1)[1:]
        absf = np.abs(factor_over_tau(params, state, t, taus))
        below = absf < threshold
        if below.any():
            idx = int(np.argmax(below))
            new_hit = taus[idx]
            new_spacing = tau_max / points
            if hit is not None and abs(new_hit - hit) <= new_spacing:
                hit, spacing = new_hit, new_spacing
                break
            hit, spacing = new_hit, new_spacing
        points *= 2
    if hit is None:
        raise DecoherenceNotReached(
            f"|F| stayed above {threshold:g} for tau in (0, {tau_max:g}]")

    def absf_at(tau: float) -> float:
        return float(np.abs(factor_over_tau(params, state, t, np.array([tau])))[0])

    lo = max(0.0, hit - spacing)
    hi = hit
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        if absf_at(mid) < threshold:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
