"""Shared parameter types, state descriptions and error taxonomy.

Everything downstream (propagator, correlation, oracle, cli) imports from
here.  Units: hbar = 1, so frequencies and couplings are inverse time and
all times are dimensionless.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

__all__ = [
    "SimulationError",
    "NonFiniteParameter",
    "NegativeTime",
    "NonPositiveStep",
    "NotNormalized",
    "InsufficientOrder",
    "UnphysicalFactor",
    "DecoherenceNotReached",
    "EigenFailure",
    "SectorTooLarge",
    "CutoffTooSmall",
    "ConfigError",
    "ToleranceExceeded",
    "ModelParams",
    "validate",
    "model_params_to_json",
    "model_params_from_json",
    "StepParams",
    "ModeTransform",
    "CoherentState",
    "FockState",
    "ApparatusState",
    "apparatus_to_json",
    "apparatus_from_json",
    "CorrelationPoint",
]


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class SimulationError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteParameter(SimulationError):
    """A model parameter is NaN or infinite."""


class NegativeTime(SimulationError):
    """A measurement time or step duration is negative."""


class NonPositiveStep(SimulationError):
    """An integrator step size is zero or negative."""


class NotNormalized(SimulationError):
    """Internal-state amplitudes do not have unit norm."""


class InsufficientOrder(SimulationError):
    """Quadrature order too low to integrate the requested occupation exactly."""


class UnphysicalFactor(SimulationError):
    """A decoherence factor left the unit disk by more than roundoff."""


class DecoherenceNotReached(SimulationError):
    """|F| never fell below threshold inside the search window."""


class EigenFailure(SimulationError):
    """Eigendecomposition of a sector matrix did not converge."""


class SectorTooLarge(SimulationError):
    """Occupation number exceeds the guard for the requested method."""


class CutoffTooSmall(SimulationError):
    """Mixture cutoff too small for the requested mean occupation."""


class ConfigError(SimulationError):
    """A config file or config dict is malformed."""


class ToleranceExceeded(SimulationError):
    """Cross-method comparison exceeded its agreement tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Frequencies and couplings of the field/detector system.

    omega1, omega2 are the two field-mode frequencies, d_e and d_g the
    exchange-coupling strengths selected by the excited and ground internal
    states, and omega_e the internal transition frequency.
    """

    omega1: float
    omega2: float
    d_e: float
    d_g: float
    omega_e: float


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged, or raise NonFiniteParameter."""
    bad = [f.name for f in fields(params)
           if not math.isfinite(getattr(params, f.name))]
    if bad:
        raise NonFiniteParameter(f"non-finite model parameters: {', '.join(bad)}")
    return params


def model_params_to_json(params: ModelParams) -> dict:
    return {
        "omega1": params.omega1,
        "omega2": params.omega2,
        "d_e": params.d_e,
        "d_g": params.d_g,
        "omega_e": params.omega_e,
    }


def model_params_from_json(obj: dict) -> ModelParams:
    """Build ModelParams from a plain dict, rejecting unknown keys."""
    if not isinstance(obj, dict):
        raise ConfigError("model parameters must be a JSON object")
    required = ("omega1", "omega2", "d_e", "d_g", "omega_e")
    unknown = set(obj) - set(required)
    if unknown:
        raise ConfigError(f"unknown model parameter keys: {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigError(f"missing model parameter keys: {missing}")
    vals = {}
    for key in required:
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"model parameter {key!r} must be a real number")
        vals[key] = float(v)
    try:
        return validate(ModelParams(**vals))
    except NonFiniteParameter as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class StepParams:
    """One piecewise-constant evolution step of the two-mode field.

    The step Hamiltonian is ``alpha1 n1 + alpha2 n2 + beta (exchange)``
    acting for ``duration``; ``index`` is the 1-based position of the step
    inside a six-step schedule.
    """

    alpha1: float
    alpha2: float
    beta: float
    duration: float
    index: int = 1

    def __post_init__(self):
        if self.duration < 0:
            raise NegativeTime(f"step duration must be >= 0, got {self.duration}")
        if self.index not in (1, 2, 3, 4, 5, 6):
            raise ValueError(f"step index must be in 1..6, got {self.index}")


# ---------------------------------------------------------------------------
# mode transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeTransform:
    """2x2 complex matrix acting on the pair of mode amplitudes.

    Entry layout is row-major: rows/columns 1 and 2 are field modes 1 and 2,
    so a coherent pair (alpha, beta) maps to
    (m11*alpha + m12*beta, m21*alpha + m22*beta).
    """

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    @classmethod
    def identity(cls) -> "ModeTransform":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def from_array(cls, a) -> "ModeTransform":
        a = np.asarray(a, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError(f"expected a 2x2 array, got shape {a.shape}")
        return cls(complex(a[0, 0]), complex(a[0, 1]),
                   complex(a[1, 0]), complex(a[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]],
                        dtype=complex)

    def unitarity_defect(self) -> float:
        """Max-norm of M^dagger M - I."""
        m = self.as_array()
        return float(np.max(np.abs(m.conj().T @ m - np.eye(2))))

    def __matmul__(self, other: "ModeTransform") -> "ModeTransform":
        return ModeTransform.from_array(self.as_array() @ other.as_array())


# ---------------------------------------------------------------------------
# apparatus preparations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoherentState:
    """Product coherent preparation (alpha0 in mode 1, beta0 in mode 2)."""

    alpha0: complex
    beta0: complex

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha0) ** 2 + abs(self.beta0) ** 2


@dataclass(frozen=True)
class FockState:
    """Number-state preparation: mode 1 empty, n quanta in mode 2."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 0:
            raise ValueError(f"occupation must be a non-negative integer, got {self.n!r}")

    @property
    def mean_photons(self) -> float:
        return float(self.n)


ApparatusState = CoherentState | FockState


def apparatus_to_json(state: ApparatusState) -> dict:
    """Serialize a preparation. The emitted form round-trips bit-exactly."""
    if isinstance(state, FockState):
        return {"kind": "fock", "n": state.n}
    return {
        "kind": "coherent",
        "alpha0": [state.alpha0.real, state.alpha0.imag],
        "beta0": [state.beta0.real, state.beta0.imag],
    }


def _complex_from_pair(value, key: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in value)):
        raise ConfigError(f"apparatus key {key!r} must be a [re, im] pair")
    z = complex(float(value[0]), float(value[1]))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"apparatus key {key!r} must be finite")
    return z


def apparatus_from_json(obj: dict) -> ApparatusState:
    """Parse a preparation from its JSON form.

    Two coherent spellings are accepted: the shorthand
    ``{"kind": "coherent", "n": <mean occupation>}`` which places
    sqrt(n) in mode 2 and leaves mode 1 empty, and the exact form with
    explicit ``alpha0``/``beta0`` amplitude pairs.
    """
    if not isinstance(obj, dict):
        raise ConfigError("apparatus must be a JSON object")
    kind = obj.get("kind")
    if kind == "fock":
        unknown = set(obj) - {"kind", "n"}
        if unknown:
            raise ConfigError(f"unknown apparatus keys: {sorted(unknown)}")
        n = obj.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ConfigError("fock apparatus needs a non-negative integer 'n'")
        return FockState(n)
    if kind == "coherent":
        unknown = set(obj) - {"kind", "n", "alpha0", "beta0"}
        if unknown:
            raise ConfigError(f"unknown apparatus keys: {sorted(unknown)}")
        if "n" in obj:
            if "alpha0" in obj or "beta0" in obj:
                raise ConfigError("coherent apparatus takes either 'n' or amplitudes, not both")
            n = obj["n"]
            if isinstance(n, bool) or not isinstance(n, (int, float)) or n < 0 or not math.isfinite(n):
                raise ConfigError("coherent apparatus 'n' must be a finite number >= 0")
            return CoherentState(0j, complex(math.sqrt(n)))
        if "alpha0" not in obj or "beta0" not in obj:
            raise ConfigError("coherent apparatus needs 'n' or both 'alpha0' and 'beta0'")
        return CoherentState(_complex_from_pair(obj["alpha0"], "alpha0"),
                             _complex_from_pair(obj["beta0"], "beta0"))
    raise ConfigError(f"apparatus kind must be 'coherent' or 'fock', got {kind!r}")


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationPoint:
    """One sweep sample: decoherence factor f and correlation g at (t, tau)."""

    t: float
    tau: float
    f: complex
    g: float

    def __post_init__(self):
        # physical bounds, allowing roundoff excursions only
        assert abs(self.f) <= 1 + 1e-9, f"|f| = {abs(self.f)} exceeds 1"
        assert -1e-9 <= self.g <= 1 + 1e-9, f"g = {self.g} outside [0, 1]"
