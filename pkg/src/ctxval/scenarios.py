"""Worked qubit measurement scenarios and their closed-form oracles.

Three setups: a variable-strength photon polarization measurement, a
pointer-based (von Neumann) detector with Gaussian or box pointer
distribution, and a quantum point contact (QPC) charge detector expressed in
dimensionless variables u = q/g and tau = (g/sigma)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .averaging import ConditionedSetup, conditioned_average
from .errors import DegenerateCoupling, DivergentPostselection, GridInadequate
from .operators import (
    SIGMA_X,
    DensityOperator,
    MeasurementContext,
    pure_state_density,
)

__all__ = [
    "psi_state",
    "f_state",
    "projective_context",
    "polarization_context",
    "polarization_conditioned_oracle",
    "DetectorModel",
    "detector_context",
    "detector_cv_analytic",
    "detector_cv_grid",
    "detector_conditioned_setup",
    "aav_conditioned_oracle",
    "QpcParams",
    "qpc_cv",
    "qpc_context",
    "qpc_conditioned_oracle",
    "qpc_full_pipeline",
]

GRID_ADEQUACY_TOL = 1e-6
GRID_DEFECT_LIMIT = 1e-3
DEFAULT_GRID_POINTS = 1201


def psi_state(alpha: float) -> np.ndarray:
    """Preparation state psi(alpha) = (cos(alpha/2), sin(alpha/2)) in the z basis."""
    return np.array([math.cos(alpha / 2), math.sin(alpha / 2)], dtype=complex)


def f_state(theta: float) -> np.ndarray:
    """Postselection state f(theta) = (cos(theta/2), sin(theta/2))."""
    return psi_state(theta)


def projective_context(psi_f) -> MeasurementContext:
    """Projective two-outcome context {|f><f|, 1 - |f><f|}, target at index 0."""
    psi_f = np.asarray(psi_f, dtype=complex).ravel()
    psi_f = psi_f / np.linalg.norm(psi_f)
    P = np.outer(psi_f, psi_f.conj())
    return MeasurementContext((P, np.eye(len(psi_f)) - P))


# --- photon polarization -------------------------------------------------


def polarization_context(gamma: float) -> MeasurementContext:
    """Variable-strength polarization measurement.

    Kraus operators gamma*Pi_H + gammabar*Pi_V and gammabar*Pi_H + gamma*Pi_V
    with gammabar = sqrt(1 - gamma^2); the POVM is (1 +- g sigma_z)/2 with
    g = gamma^2 - gammabar^2.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    gbar = math.sqrt(1.0 - gamma * gamma)
    M_plus = np.diag([gamma, gbar]).astype(complex)
    M_minus = np.diag([gbar, gamma]).astype(complex)
    return MeasurementContext((M_plus, M_minus))


def polarization_strength(gamma: float) -> float:
    """g = gamma^2 - gammabar^2."""
    return 2.0 * gamma * gamma - 1.0


def polarization_conditioned_oracle(alpha, beta, gamma: float) -> float:
    """Closed-form conditioned average for the polarization setup.

    Preparation alpha|H> + beta|V>, postselection (|H> - |V>)/sqrt(2):
    (|alpha|^2 - |beta|^2) / (1 - 4 gamma gammabar Re[alpha beta*]).
    """
    gbar = math.sqrt(1.0 - gamma * gamma)
    num = abs(alpha) ** 2 - abs(beta) ** 2
    den = 1.0 - 4.0 * gamma * gbar * (alpha * np.conj(beta)).real
    if abs(den) <= 1e-12:
        raise DivergentPostselection("oracle denominator vanishes")
    return float(num / den)


# --- pointer detector ----------------------------------------------------


@dataclass(frozen=True)
class DetectorModel:
    """Continuous pointer detector, discretized on a uniform midpoint grid.

    ``kind`` selects the pointer density: "gaussian" (width = standard
    deviation sigma) or "box" (width = full support w, uniform density 1/w).
    ``coupling`` is the position shift g applied per qubit z eigenvalue.
    """

    kind: str
    width: float
    coupling: float
    q_min: float
    q_max: float
    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.kind not in ("gaussian", "box"):
            raise ValueError(f"unknown pointer distribution {self.kind!r}")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.q_max <= self.q_min:
            raise ValueError("empty grid range")

    @classmethod
    def with_default_grid(
        cls, kind: str, width: float, coupling: float, n_points: int = DEFAULT_GRID_POINTS
    ) -> "DetectorModel":
        span = abs(coupling) + (6.0 * width if kind == "gaussian" else width)
        return cls(kind, width, coupling, -span, span, n_points)

    def grid(self):
        """Cell midpoints and the uniform cell width."""
        dq = (self.q_max - self.q_min) / self.n_points
        q = self.q_min + (np.arange(self.n_points) + 0.5) * dq
        return q, dq

    def density(self, q):
        """Pointwise pointer density P_D(q)."""
        q = np.asarray(q, dtype=float)
        if self.kind == "gaussian":
            s = self.width
            return np.exp(-(q**2) / (2 * s * s)) / (s * math.sqrt(2 * math.pi))
        w = self.width
        return np.where(np.abs(q) <= w / 2, 1.0 / w, 0.0)

    def cell_density(self, shift: float):
        """Mean of P_D(q - shift) over each grid cell.

        Gaussian cells use the midpoint value (the tails make the midpoint
        rule effectively exact here); box cells use the exact cell mass so
        that the support edges need not align with the grid.
        """
        q, dq = self.grid()
        if self.kind == "gaussian":
            return self.density(q - shift)
        w = self.width
        lo = q - dq / 2 - shift
        hi = q + dq / 2 - shift
        cdf = lambda x: np.clip((x + w / 2) / w, 0.0, 1.0)  # noqa: E731
        return (cdf(hi) - cdf(lo)) / dq

    def shifted_densities(self):
        """Cell densities of P_D(q -+ g): the (+z, -z) pointer branches."""
        return self.cell_density(self.coupling), self.cell_density(-self.coupling)

    def overlap_constants(self):
        """(a, b): norm constant int P^2 and overlap int P(q-g)P(q+g) dq.

        Closed form for both distributions.
        """
        g = abs(self.coupling)
        if self.kind == "gaussian":
            s = self.width
            a = 1.0 / (2 * s * math.sqrt(math.pi))
            b = a * math.exp(-((g / s) ** 2))
        else:
            w = self.width
            a = 1.0 / w
            b = max(0.0, w - 2 * g) / (w * w)
        return a, b

    def grid_overlap_constants(self):
        """(a, b) by quadrature on this grid, consistent with the discretization."""
        p_minus, p_plus = self.shifted_densities()
        _, dq = self.grid()
        a = float(np.sum(p_minus * p_minus) * dq)
        b = float(np.sum(p_minus * p_plus) * dq)
        return a, b


def detector_context(model: DetectorModel) -> MeasurementContext:
    """Discretized pointer measurement: one diagonal Kraus operator per cell.

    Completeness is checked against the grid-adequacy tolerance and then
    both pointer branches are renormalized to exact completeness.
    """
    p_minus, p_plus = model.shifted_densities()
    _, dq = model.grid()
    s_minus = float(np.sum(p_minus) * dq)
    s_plus = float(np.sum(p_plus) * dq)
    defect = max(abs(s_minus - 1.0), abs(s_plus - 1.0))
    if defect > GRID_DEFECT_LIMIT:
        raise GridInadequate(defect)
    m_h = np.sqrt(p_minus * dq / s_minus)
    m_v = np.sqrt(p_plus * dq / s_plus)
    kraus = np.zeros((model.n_points, 2, 2), dtype=complex)
    kraus[:, 0, 0] = m_h
    kraus[:, 1, 1] = m_v
    return MeasurementContext(tuple(kraus))


def detector_cv_analytic(model: DetectorModel, q) -> np.ndarray:
    """Pointwise contextual values sigma_z(q) = [P(q-g) - P(q+g)] / (a - b)."""
    a, b = model.overlap_constants()
    if abs(a - b) < 1e-12:
        raise DegenerateCoupling("overlap equals norm constant; coupling too weak")
    g = model.coupling
    q = np.asarray(q, dtype=float)
    return (model.density(q - g) - model.density(q + g)) / (a - b)


def detector_cv_grid(model: DetectorModel) -> np.ndarray:
    """Contextual values on the model grid, consistent with the discretization.

    Gaussian: the closed form, sqrt(2) exp(-q^2/2s^2) sinh(qg/s^2)/sinh(g^2/2s^2),
    evaluated at the midpoints.  Box: cell-averaged densities with (a, b)
    computed by quadrature on the same grid, which makes the discrete value
    identity hold to rounding regardless of edge alignment.
    """
    if model.kind == "gaussian":
        q, _ = model.grid()
        s, g = model.width, model.coupling
        denom = math.sinh(g * g / (2 * s * s))
        if denom == 0.0:
            raise DegenerateCoupling("coupling too weak")
        return (
            math.sqrt(2.0)
            * np.exp(-(q**2) / (2 * s * s))
            * np.sinh(q * g / (s * s))
            / denom
        )
    p_minus, p_plus = model.shifted_densities()
    a, b = model.grid_overlap_constants()
    if abs(a - b) < 1e-12:
        raise DegenerateCoupling("overlap equals norm constant; coupling too weak")
    return (p_minus - p_plus) / (a - b)


def detector_conditioned_setup(
    model: DetectorModel, psi_f, cv=None
) -> ConditionedSetup:
    """Detector context valued with its grid CV, postselected on |f><f|."""
    ctx = detector_context(model)
    if cv is None:
        cv = detector_cv_grid(model)
    return ConditionedSetup(ctx, cv, projective_context(psi_f), 0)


def aav_conditioned_oracle(alpha: float, g: float, sigma: float) -> float:
    """Closed-form Gaussian-pointer conditioned average.

    Preparation psi(alpha), postselection f(pi/2):
    cos(alpha) / (1 + sin(alpha) exp[-g^2/2 sigma^2]).
    """
    den = 1.0 + math.sin(alpha) * math.exp(-g * g / (2 * sigma * sigma))
    if abs(den) <= 1e-12:
        raise DivergentPostselection("denominator vanishes")
    return math.cos(alpha) / den


# --- quantum point contact -----------------------------------------------


@dataclass(frozen=True)
class QpcParams:
    """QPC detector parameters and their dimensionless reduction.

    Characteristic currents I1, I2 locate the qubit, S_I is the shot-noise
    power and t the current-averaging time.  Derived: I0 = (I1+I2)/2,
    g = (I1-I2)/2, sigma^2 = S_I/2t and tau = (g/sigma)^2 = t/T_m.
    """

    I1: float
    I2: float
    S_I: float
    t: float

    def __post_init__(self):
        if self.I1 == self.I2:
            raise ValueError("characteristic currents must differ")
        if self.S_I <= 0 or self.t <= 0:
            raise ValueError("S_I and t must be positive")

    @property
    def I0(self) -> float:
        return (self.I1 + self.I2) / 2

    @property
    def g(self) -> float:
        return (self.I1 - self.I2) / 2

    @property
    def sigma(self) -> float:
        return math.sqrt(self.S_I / (2 * self.t))

    @property
    def tau(self) -> float:
        return (self.g / self.sigma) ** 2


def qpc_cv(u, tau: float) -> np.ndarray:
    """QPC contextual values in dimensionless pointer position u = q/g.

    sigma_z(u) = sqrt(2) exp(-u^2 tau/2) sinh(u tau) / sinh(tau/2).
    Small tau: -> 2 sqrt(2) u; large tau: localizes at +-1.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    u = np.asarray(u, dtype=float)
    out = math.sqrt(2.0) * np.exp(-u * u * tau / 2) * np.sinh(u * tau) / math.sinh(tau / 2)
    return out if out.ndim else float(out)


def qpc_context(tau: float, n_points: int = DEFAULT_GRID_POINTS):
    """Dimensionless QPC detector model: Gaussian pointer, unit coupling."""
    return DetectorModel.with_default_grid(
        "gaussian", 1.0 / math.sqrt(tau), 1.0, n_points
    )


def qpc_conditioned_oracle(rho: DensityOperator, theta: float, tau: float) -> float:
    """Closed-form QPC conditioned average after a sigma_x rotation by theta.

    [c^2 rho11 - s^2 rho22] / [c^2 rho11 + s^2 rho22 - sin(theta) Im[rho12] e^(-tau/2)]
    with c = cos(theta/2), s = sin(theta/2).
    """
    r = rho.matrix
    c2 = math.cos(theta / 2) ** 2
    s2 = math.sin(theta / 2) ** 2
    num = c2 * r[0, 0].real - s2 * r[1, 1].real
    den = (
        c2 * r[0, 0].real
        + s2 * r[1, 1].real
        - math.sin(theta) * r[0, 1].imag * math.exp(-tau / 2)
    )
    if abs(den) <= 1e-12:
        raise DivergentPostselection("denominator vanishes")
    return num / den


def _x_rotation(theta: float) -> np.ndarray:
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * SIGMA_X


def qpc_pipeline_setup(tau: float, theta: float, n_points: int = DEFAULT_GRID_POINTS):
    """Discretized QPC measurement followed by rotation + strong z readout."""
    model = qpc_context(tau, n_points)
    ctx = detector_context(model)
    cv = detector_cv_grid(model)
    R = _x_rotation(theta)
    P_up = np.diag([1.0, 0.0]).astype(complex)
    P_dn = np.diag([0.0, 1.0]).astype(complex)
    second = MeasurementContext((P_up @ R, P_dn @ R))
    return ConditionedSetup(ctx, cv, second, 0)


def qpc_full_pipeline(
    params, rho: DensityOperator, theta: float, n_points: int = DEFAULT_GRID_POINTS
) -> float:
    """Conditioned average of the full QPC measurement chain.

    ``params`` may be a QpcParams instance or a bare dimensionless tau.
    """
    tau = params.tau if isinstance(params, QpcParams) else float(params)
    setup = qpc_pipeline_setup(tau, theta, n_points)
    return conditioned_average(setup, rho)


def polarization_conditioned_setup(gamma: float, cv) -> ConditionedSetup:
    """Polarization context postselected on (|H> - |V>)/sqrt(2)."""
    ctx = polarization_context(gamma)
    f = np.array([1.0, -1.0]) / math.sqrt(2.0)
    return ConditionedSetup(ctx, cv, projective_context(f), 0)


def detector_state(alpha: float) -> DensityOperator:
    """Density operator of the named preparation psi(alpha)."""
    return pure_state_density(psi_state(alpha))
