# Model Inti: Growth Law, Sensitivitas Kemotaksis, dan Equilibria
# ================================================================

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from config import Config

logger = logging.getLogger(__name__)

LOGISTIC = "logistic"
ALLEE = "allee"


class ModelParameterError(ValueError):
    """Parameter model di luar domain yang valid"""


class InvalidThresholdError(ModelParameterError):
    """Threshold Allee M >= 1"""


class DegenerateCouplingError(ModelParameterError):
    """beta = 0: tidak ada mekanisme Turing"""


class NumericalFailure(RuntimeError):
    """Kegagalan numerik (blow-up, Newton, eigen solver)"""


@dataclass(frozen=True)
class GrowthLaw:
    """Hukum aktivasi makrofag: logistik G1 atau Allee kubik G2"""

    kind: str = LOGISTIC
    M: float = 0.0
    Lambda: float = 1.0

    def __post_init__(self):
        if self.kind not in (LOGISTIC, ALLEE):
            raise ModelParameterError(f"Growth law tidak dikenal: {self.kind}")
        if self.kind == ALLEE:
            if not self.M < 1:
                raise InvalidThresholdError(f"Allee threshold M={self.M} harus < 1")
            if not self.Lambda > 0:
                raise ModelParameterError(f"Lambda={self.Lambda} harus > 0")

    @classmethod
    def logistic(cls) -> "GrowthLaw":
        return cls(LOGISTIC)

    @classmethod
    def allee(cls, M: float, Lambda: float) -> "GrowthLaw":
        return cls(ALLEE, M=M, Lambda=Lambda)

    @classmethod
    def case1(cls, M: float) -> "GrowthLaw":
        """Allee dengan Lambda = Lambda_1 (bifurcation value sama dengan logistik)"""
        return cls(ALLEE, M=M, Lambda=lambda_case1(M))

    @classmethod
    def case2(cls, M: float) -> "GrowthLaw":
        """Allee dengan Lambda = Lambda_2 (growth rate maksimal sama dengan logistik)"""
        return cls(ALLEE, M=M, Lambda=lambda_case2(M))

    @property
    def j(self) -> int:
        return 1 if self.kind == LOGISTIC else 2

    @property
    def a(self) -> float:
        """Laju decay linear di P*: a = [Lambda(1-M)]^(j-1)"""
        if self.kind == LOGISTIC:
            return 1.0
        return self.Lambda * (1.0 - self.M)

    @property
    def omega(self) -> float:
        """omega = (j-1)/(1-M)"""
        if self.kind == LOGISTIC:
            return 0.0
        return 1.0 / (1.0 - self.M)

    @property
    def is_strong_allee(self) -> bool:
        return self.kind == ALLEE and 0 < self.M < 1

    @property
    def is_weak_allee(self) -> bool:
        return self.kind == ALLEE and self.M <= 0

    def describe(self) -> str:
        if self.kind == LOGISTIC:
            return "logistic"
        strength = "strong" if self.is_strong_allee else "weak"
        return f"allee({strength}, M={self.M:g}, Lambda={self.Lambda:.6g})"


@dataclass(frozen=True)
class ModelParams:
    """Parameter nondimensional sistem (tau, eps, beta, r, delta, chi) + domain"""

    tau: float = 1.0
    eps: float = 0.08
    beta: float = 1.0
    r: float = 1.0
    delta: float = 1.0
    chi: float = 3.5
    L_domain: float = 12.0 * math.pi
    growth: GrowthLaw = field(default_factory=GrowthLaw)

    def __post_init__(self):
        for name in ("tau", "eps", "r", "chi", "L_domain"):
            value = getattr(self, name)
            if not value > 0:
                raise ModelParameterError(f"{name}={value} harus > 0")
        for name in ("beta", "delta"):
            value = getattr(self, name)
            if value < 0:
                raise ModelParameterError(f"{name}={value} tidak boleh negatif")

    @classmethod
    def defaults(cls, **overrides) -> "ModelParams":
        """Parameter standar dari Config.DEFAULT_PARAMS, dengan override"""
        base = {key: Config.DEFAULT_PARAMS[key]
                for key in ("tau", "eps", "beta", "r", "delta", "chi", "L_domain")}
        base.update(overrides)
        return cls(**base)

    @property
    def xi(self) -> float:
        """xi = sqrt(a * eps)"""
        return math.sqrt(self.growth.a * self.eps)

    @property
    def a(self) -> float:
        return self.growth.a

    @property
    def omega(self) -> float:
        return self.growth.omega

    def with_chi(self, chi: float) -> "ModelParams":
        return replace(self, chi=chi)

    def with_growth(self, growth: GrowthLaw) -> "ModelParams":
        return replace(self, growth=growth)

    def require_coupling(self):
        """Pastikan beta > 0 (tanpa coupling tidak ada instabilitas Turing)"""
        if self.beta <= 0:
            raise DegenerateCouplingError("beta = 0: no Turing mechanism (chemotactic coupling vanishes)")

    def as_dict(self) -> dict:
        return {
            "tau": self.tau, "eps": self.eps, "beta": self.beta, "r": self.r,
            "delta": self.delta, "chi": self.chi, "L_domain": self.L_domain,
            "growth": self.growth.kind, "M": self.growth.M, "Lambda": self.growth.Lambda,
            "xi": self.xi, "a": self.a, "omega": self.omega,
        }


@dataclass(frozen=True)
class Equilibrium:
    name: str
    state: Tuple[float, float, float]
    eigenvalues: Tuple[float, float, float]

    @property
    def stable(self) -> bool:
        return all(ev < 0 for ev in self.eigenvalues)


@dataclass(frozen=True)
class ZeroLine:
    """Garis steady state tanpa makrofag {(0, delta*d, d)}"""

    delta: float
    transverse_rate: float                        # G_j'(0)
    eigenvalues: Tuple[float, float, float]       # (G_j'(0), -1/tau, 0)

    @property
    def transverse_stable(self) -> bool:
        return self.transverse_rate < 0

    def point(self, d: float) -> Tuple[float, float, float]:
        return (0.0, self.delta * d, d)


@dataclass(frozen=True)
class EquilibriumSet:
    coexistence: Equilibrium
    sharp: Optional[Equilibrium]
    zero_line: ZeroLine


# === GROWTH LAW ===

def growth_rate(m, law: GrowthLaw):
    """G_j(m): m(1-m) atau Lambda*m(1-m)(m-M). Tidak ada clamping untuk m < 0."""
    if law.kind == LOGISTIC:
        return m * (1.0 - m)
    return law.Lambda * m * (1.0 - m) * (m - law.M)


def growth_derivative(m, law: GrowthLaw):
    """G_j'(m); di m=1 bernilai -a"""
    if law.kind == LOGISTIC:
        return 1.0 - 2.0 * m
    # d/dm [-m^3 + (1+M)m^2 - M m]
    return law.Lambda * (-3.0 * m * m + 2.0 * (1.0 + law.M) * m - law.M)


def lambda_case1(M: float) -> float:
    """Lambda_1 = 1/(1-M), sehingga a = 1 dan xi = sqrt(eps)"""
    if not M < 1:
        raise InvalidThresholdError(f"M={M} harus < 1")
    return 1.0 / (1.0 - M)


def case2_peak_location(M: float) -> float:
    """m_2 = ((M+1) + sqrt(M^2 - M + 1)) / 3, lokasi maksimum G_2 di [0, 1]"""
    if not M < 1:
        raise InvalidThresholdError(f"M={M} harus < 1")
    return ((M + 1.0) + math.sqrt(M * M - M + 1.0)) / 3.0


def lambda_case2(M: float) -> float:
    """Lambda_2 = (4 m_2 (1-m_2)(m_2-M))^-1, sehingga max G_2 = 1/4"""
    m2 = case2_peak_location(M)
    return 1.0 / (4.0 * m2 * (1.0 - m2) * (m2 - M))


def growth_maximum(law: GrowthLaw) -> Tuple[float, float]:
    """
    Maksimum numerik G_j di [0, 1]

    Returns:
        Tuple (m_max, G_max)
    """
    # Strong Allee: G < 0 di (0, M), maksimum ada di (M, 1)
    lower = max(0.0, law.M) if law.kind == ALLEE else 0.0
    result = minimize_scalar(lambda m: -growth_rate(m, law), bounds=(lower, 1.0),
                             method="bounded", options={"xatol": 1e-12})
    return float(result.x), float(-result.fun)


def growth_profile_table(M: float, n_points: int = 201) -> np.ndarray:
    """
    Tabel profil G_1, G_2(Lambda_1), G_2(Lambda_2) di [0, 1]

    Returns:
        Array kolom (m, G1, G2_case1, G2_case2)
    """
    m = np.linspace(0.0, 1.0, n_points)
    return np.column_stack([
        m,
        growth_rate(m, GrowthLaw.logistic()),
        growth_rate(m, GrowthLaw.case1(M)),
        growth_rate(m, GrowthLaw.case2(M)),
    ])


# === KEMOTAKSIS DAN DESTRUKSI ===

def chemotaxis_sensitivity(m, chi: float):
    """Phi(m) = chi*m/(1+m)"""
    return chi * m / (1.0 + m)


def chemotaxis_sensitivity_derivative(m, chi: float):
    return chi / ((1.0 + m) * (1.0 + m))


def destruction_factor(m):
    """F(m) = m/(1+m) pada persamaan oligodendrosit"""
    return m / (1.0 + m)


# === EQUILIBRIA ===

def equilibria(params: ModelParams) -> EquilibriumSet:
    """
    Equilibria sistem homogen beserta eigenvalue linearisasinya

    Returns:
        EquilibriumSet dengan P*, P# (hanya strong Allee) dan zero line
    """
    law = params.growth
    tau, r = params.tau, params.r

    coexistence = Equilibrium(
        name="P*",
        state=(1.0, params.beta + params.delta, 1.0),
        eigenvalues=(-law.a, -1.0 / tau, -r / 2.0),
    )

    sharp = None
    if law.is_strong_allee:
        M = law.M
        sharp = Equilibrium(
            name="P#",
            state=(M, params.beta * M + params.delta, 1.0),
            eigenvalues=(float(growth_derivative(M, law)), -1.0 / tau,
                         -r * float(destruction_factor(M)) * M),
        )

    transverse = float(growth_derivative(0.0, law))
    zero_line = ZeroLine(delta=params.delta, transverse_rate=transverse,
                         eigenvalues=(transverse, -1.0 / tau, 0.0))

    logger.debug(f"Equilibria {law.describe()}: P*={coexistence.state}, "
                 f"P#={'ada' if sharp else 'tidak ada'}, G'(0)={transverse:+.4g}")
    return EquilibriumSet(coexistence=coexistence, sharp=sharp, zero_line=zero_line)
