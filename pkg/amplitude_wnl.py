# Analisis Weakly Nonlinear: Koefisien Stuart-Landau
# ==================================================

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from config import Config
from linear_stability import reduced_matrices, thresholds
from model_core import GrowthLaw, ModelParameterError, ModelParams

logger = logging.getLogger(__name__)


class BelowCriticalError(ModelParameterError):
    """chi_target <= chi_c: eta tidak terdefinisi"""

    def __init__(self, chi_target: float, chi_c: float):
        super().__init__(f"chi_target={chi_target:.10g} tidak di atas chi_c={chi_c:.10g}")
        self.chi_target = chi_target
        self.chi_c = chi_c


class Criticality(str, Enum):
    SUPERCRITICAL = "supercritical"
    SUBCRITICAL = "subcritical"
    DEGENERATE = "degenerate"


class RegionCase(str, Enum):
    LOGISTIC = "logistic"
    CASE1 = "case1"
    CASE2 = "case2"


@dataclass(frozen=True)
class SecondOrderResponse:
    mu_m: float
    theta_m: float
    mu_c: float
    theta_c: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.mu_m, self.theta_m, self.mu_c, self.theta_c)


@dataclass(frozen=True)
class ThirdOrderCoefficients:
    """Koefisien cos(k_c x) pada RHS orde tiga: G0 dA/dT2 + G1 A + G2 A^3"""

    G0: Tuple[float, float]
    G1: Tuple[float, float]
    G2: Tuple[float, float]


@dataclass(frozen=True)
class StuartLandauData:
    rho: Tuple[float, float]
    psi: Tuple[float, float]
    second_order: SecondOrderResponse
    chi_c: float
    chi2: float
    sigma: float
    L: float
    sigma_closed: float
    L_closed: float
    p_value: float
    criticality: Criticality
    eta: Optional[float] = None

    @property
    def mu_m(self) -> float:
        return self.second_order.mu_m

    @property
    def theta_m(self) -> float:
        return self.second_order.theta_m

    @property
    def mu_c(self) -> float:
        return self.second_order.mu_c

    @property
    def theta_c(self) -> float:
        return self.second_order.theta_c

    def as_dict(self) -> dict:
        return {
            "rho_m": self.rho[0], "rho_c": self.rho[1],
            "psi_1": self.psi[0], "psi_2": self.psi[1],
            "mu_m": self.mu_m, "theta_m": self.theta_m, "mu_c": self.mu_c, "theta_c": self.theta_c,
            "chi_c": self.chi_c, "chi2": self.chi2, "eta": self.eta,
            "sigma": self.sigma, "L": self.L,
            "sigma_closed": self.sigma_closed, "L_closed": self.L_closed,
            "p_value": self.p_value, "criticality": self.criticality.value,
        }


@dataclass(frozen=True)
class CriticalityRegionMap:
    M_grid: np.ndarray
    eps_grid: np.ndarray
    case: RegionCase
    p_values: np.ndarray                          # shape (len(M_grid), len(eps_grid))
    signs: np.ndarray                             # verdict string (Criticality.value) per sel

    def rows(self):
        """Iterasi (M, eps, case, p_value, verdict) dalam urutan M lalu eps"""
        for i, M in enumerate(self.M_grid):
            for j, eps in enumerate(self.eps_grid):
                yield float(M), float(eps), self.case.value, float(self.p_values[i, j]), str(self.signs[i, j])


@dataclass(frozen=True)
class PatternPrediction:
    valid: bool
    eta: float
    amplitude: Optional[float] = None             # A_inf = sqrt(sigma/L)
    perturbation_amplitude: Optional[float] = None  # eta * rho_m * A_inf
    kc: Optional[float] = None
    reason: str = ""

    def profile(self, x: np.ndarray) -> Optional[np.ndarray]:
        """m(x) ~ 1 + eta rho_m A_inf cos(k_c x)"""
        if not self.valid:
            return None
        return 1.0 + self.perturbation_amplitude * np.cos(self.kc * x)


# === NULL VECTORS ===

def first_order_null_vector(params: ModelParams) -> Tuple[float, float]:
    """rho = (1, beta/(1+xi)), dinormalisasi rho_m = 1"""
    params.require_coupling()
    return 1.0, params.beta / (1.0 + params.xi)


def adjoint_null_vector(params: ModelParams) -> Tuple[float, float]:
    """psi = (1, tau xi (1+xi)/(beta eps)), dinormalisasi psi_1 = 1"""
    params.require_coupling()
    xi = params.xi
    return 1.0, params.tau * xi * (1.0 + xi) / (params.beta * params.eps)


def critical_operator(params: ModelParams) -> np.ndarray:
    """J - k_c^2 D(chi_c)"""
    th = thresholds(params)
    lin = reduced_matrices(params.with_chi(th.chi_c))
    return lin.operator(th.kc2)


# === ORDE DUA ===

def second_order_response(params: ModelParams, rho_m: float = 1.0) -> SecondOrderResponse:
    """Koefisien closed form w2 = A^2 [mu + theta cos(2 k_c x)]"""
    xi, omega, beta = params.xi, params.omega, params.beta
    r2 = rho_m * rho_m
    mu_m = -(r2 / 2.0) * (1.0 + omega)
    theta_m = -(r2 / 18.0) * (omega - 1.0 / xi) * (1.0 + 4.0 * xi)
    mu_c = -beta * (r2 / 2.0) * (1.0 + omega)
    theta_c = -beta * (r2 / 18.0) * (omega - 1.0 / xi)
    return SecondOrderResponse(mu_m, theta_m, mu_c, theta_c)


def second_order_forcing(params: ModelParams, rho_m: float = 1.0) -> Tuple[float, float]:
    """
    Forcing orde dua F pada baris m, dipecah ke mode {konstan, cos 2k_c x}

    Returns:
        Tuple (F_const, F_cos2) untuk baris m (baris c nol)
    """
    th = thresholds(params)
    rho_c = rho_m * params.beta / (1.0 + params.xi)
    quad = params.a * (1.0 + params.omega) * rho_m * rho_m
    f_const = quad / 2.0
    f_cos2 = quad / 2.0 - th.chi_c * th.kc2 * rho_m * rho_c / 4.0
    return f_const, f_cos2


def second_order_numeric(params: ModelParams, rho_m: float = 1.0) -> SecondOrderResponse:
    """Solve L_{chi_c} w2 = F langsung sebagai dua sistem 2x2 (mode 0 dan 2k_c)"""
    th = thresholds(params)
    lin = reduced_matrices(params.with_chi(th.chi_c))
    f_const, f_cos2 = second_order_forcing(params, rho_m)
    mu = np.linalg.solve(lin.J, np.array([f_const, 0.0]))
    theta = np.linalg.solve(lin.operator(4.0 * th.kc2), np.array([f_cos2, 0.0]))
    return SecondOrderResponse(float(mu[0]), float(theta[0]), float(mu[1]), float(theta[1]))


def _period_grid(params: ModelParams, n_points: int) -> Tuple[np.ndarray, float]:
    kc = thresholds(params).kc
    x = np.linspace(0.0, 2.0 * math.pi / kc, n_points)
    return x, kc


def second_order_residual(params: ModelParams, n_points: Optional[int] = None) -> float:
    """Max-norm residual L_{chi_c} w2 - F di grid satu periode (closed form w2)"""
    n_points = n_points or Config.WNL["residual_points"]
    th = thresholds(params)
    lin = reduced_matrices(params.with_chi(th.chi_c))
    x, kc = _period_grid(params, n_points)
    resp = second_order_response(params)
    rho_m, rho_c = first_order_null_vector(params)

    cos2 = np.cos(2.0 * kc * x)
    w2 = np.vstack([resp.mu_m + resp.theta_m * cos2, resp.mu_c + resp.theta_c * cos2])
    w2_xx = np.vstack([-4.0 * th.kc2 * resp.theta_m * cos2, -4.0 * th.kc2 * resp.theta_c * cos2])
    Lw2 = lin.J @ w2 + lin.D @ w2_xx

    # F dievaluasi langsung dari nonlinearitas dengan turunan eksak w1
    u1 = rho_m * np.cos(kc * x)
    flux_x = -kc * kc * rho_m * rho_c * np.cos(2.0 * kc * x)  # d/dx (u1 * v1_x)
    F_m = params.a * (1.0 + params.omega) * u1 * u1 + th.chi_c * flux_x / 4.0
    F = np.vstack([F_m, np.zeros_like(x)])
    return float(np.max(np.abs(Lw2 - F)))


def solvability_projection(params: ModelParams, n_points: Optional[int] = None) -> float:
    """<F, psi> di satu periode (trapezoid); seharusnya nol secara identik"""
    n_points = n_points or Config.WNL["residual_points"]
    x, kc = _period_grid(params, n_points)
    psi1, _ = adjoint_null_vector(params)
    f_const, f_cos2 = second_order_forcing(params)
    F_m = f_const + f_cos2 * np.cos(2.0 * kc * x)
    return float(trapezoid(F_m * psi1 * np.cos(kc * x), x))


# === ORDE TIGA DAN STUART-LANDAU ===

def p_polynomial(xi: float, omega: float) -> float:
    """p(xi, omega) = 4w(8w+9)xi^3 + (152w^2+122w+63)xi^2 - (46w+55)xi + 2"""
    c3 = 4.0 * omega * (8.0 * omega + 9.0)
    c2 = 152.0 * omega * omega + 122.0 * omega + 63.0
    c1 = -(46.0 * omega + 55.0)
    return ((c3 * xi + c2) * xi + c1) * xi + 2.0


def sigma_closed_form(params: ModelParams, chi2: float) -> float:
    xi, eps, tau = params.xi, params.eps, params.tau
    return 0.5 * params.beta * chi2 * xi / ((1.0 + xi) * (eps + tau * xi))


def landau_closed_form(params: ModelParams, rho_m: float = 1.0) -> float:
    xi, eps, tau = params.xi, params.eps, params.tau
    return -rho_m * rho_m * p_polynomial(xi, params.omega) / (144.0 * (eps + tau * xi))


def third_order_coefficients(params: ModelParams, chi2: float, rho_m: float = 1.0,
                             second: Optional[SecondOrderResponse] = None) -> ThirdOrderCoefficients:
    """Koefisien G0, G1, G2 dari RHS orde tiga (bagian G* ~ cos 3k_c x tidak dirakit)"""
    th = thresholds(params)
    xi, eps, omega, beta = params.xi, params.eps, params.omega, params.beta
    rho_c = rho_m * beta / (1.0 + xi)
    s = second or second_order_response(params, rho_m)

    G0 = (rho_m, rho_m * beta / (1.0 + xi))
    G1 = (-rho_m * (chi2 / 2.0) * (beta / eps) * (xi / (1.0 + xi)), 0.0)
    G2_m = (2.0 * (xi * xi / eps) * (1.0 + omega) * rho_m * (s.mu_m + s.theta_m / 2.0)
            + (3.0 / (4.0 * eps)) * omega * xi * xi * rho_m ** 3
            - 0.25 * th.chi_c * th.kc2 * (rho_m * s.theta_c
                                          + rho_c * (s.mu_m - s.theta_m / 2.0)
                                          - rho_m * rho_m * rho_c / 8.0))
    return ThirdOrderCoefficients(G0=G0, G1=G1, G2=(G2_m, 0.0))


def classify(p_value: float, tol: Optional[float] = None) -> Criticality:
    """sign(L) = -sign(p); |p| < tol => Degenerate"""
    tol = Config.WNL["degenerate_tol"] if tol is None else tol
    if abs(p_value) < tol:
        return Criticality.DEGENERATE
    return Criticality.SUPERCRITICAL if p_value < 0 else Criticality.SUBCRITICAL


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def stuart_landau(params: ModelParams, chi_target: Optional[float] = None) -> StuartLandauData:
    """
    Koefisien Stuart-Landau dA/dT2 = sigma A - L A^3 di chi_c

    Args:
        params: Parameter model (chi di params diabaikan, dipakai chi_c)
        chi_target: Nilai chi target (> chi_c) untuk menghitung eta; None = tanpa eta

    Returns:
        StuartLandauData (sigma dan L via proyeksi Fredholm, plus closed form)
    """
    th = thresholds(params)
    eta = None
    if chi_target is not None:
        if chi_target <= th.chi_c:
            raise BelowCriticalError(chi_target, th.chi_c)
        eta = math.sqrt((chi_target - th.chi_c) / th.chi_c)
    chi2 = th.chi_c

    rho = first_order_null_vector(params)
    psi = adjoint_null_vector(params)

    second = second_order_response(params, rho[0])
    numeric = second_order_numeric(params, rho[0])
    rtol = Config.WNL["consistency_rtol"]
    gaps = [_relative_gap(a, b) for a, b in zip(second.as_tuple(), numeric.as_tuple())]
    if max(gaps) > rtol:
        logger.warning(f"⚠️ Koefisien orde dua closed form berbeda dari solusi numerik "
                       f"(gap relatif {max(gaps):.2e}); memakai solusi numerik")
        second = numeric

    G = third_order_coefficients(params, chi2, rho[0], second)
    denom = G.G0[0] * psi[0] + G.G0[1] * psi[1]
    sigma = -(G.G1[0] * psi[0] + G.G1[1] * psi[1]) / denom
    L = (G.G2[0] * psi[0] + G.G2[1] * psi[1]) / denom

    sigma_closed = sigma_closed_form(params, chi2)
    L_closed = landau_closed_form(params, rho[0])
    p_value = p_polynomial(params.xi, params.omega)

    if _relative_gap(sigma, sigma_closed) > rtol:
        logger.warning(f"⚠️ sigma proyeksi={sigma:.12g} vs closed form={sigma_closed:.12g}")
    if _relative_gap(L, L_closed) > rtol and abs(p_value) > Config.WNL["degenerate_tol"]:
        logger.warning(f"⚠️ L proyeksi={L:.12g} vs closed form={L_closed:.12g}")

    criticality = classify(p_value)
    logger.debug(f"Stuart-Landau {params.growth.describe()} eps={params.eps:g}: "
                 f"sigma={sigma:.6g}, L={L:.6g}, p={p_value:.6g} -> {criticality.value}")

    return StuartLandauData(
        rho=rho, psi=psi, second_order=second, chi_c=th.chi_c, chi2=chi2,
        sigma=sigma, L=L, sigma_closed=sigma_closed, L_closed=L_closed,
        p_value=p_value, criticality=criticality, eta=eta,
    )


def supercritical_interval_logistic() -> Tuple[float, float]:
    """
    Interval eps supercritical untuk logistik: root 63 eps - 55 sqrt(eps) + 2 = 0

    Returns:
        Tuple (eps_low, eps_high) ~ (0.001445, 0.697220)
    """
    disc = math.sqrt(55.0 * 55.0 - 4.0 * 63.0 * 2.0)   # sqrt(2521)
    s_high = (55.0 + disc) / 126.0
    s_low = 2.0 / (63.0 * s_high)                      # produk akar = 2/63
    return s_low * s_low, s_high * s_high


def _case_growth_factory(case: RegionCase) -> Callable[[float], GrowthLaw]:
    if case == RegionCase.LOGISTIC:
        return lambda M: GrowthLaw.logistic()
    if case == RegionCase.CASE1:
        return GrowthLaw.case1
    return GrowthLaw.case2


def criticality_region_map(M_range: Tuple[float, float], eps_range: Tuple[float, float],
                           resolution: Tuple[int, int], case,
                           base_params: Optional[ModelParams] = None,
                           tol: Optional[float] = None) -> CriticalityRegionMap:
    """
    Peta verdict criticality di bidang (M, eps)

    Args:
        M_range: (M_min, M_max), M_max < 1
        eps_range: (eps_min, eps_max), eps_min > 0
        resolution: (n_M, n_eps)
        case: RegionCase atau string 'logistic' | 'case1' | 'case2'
        base_params: Parameter lain (default tau=beta=r=delta=1)

    Returns:
        CriticalityRegionMap
    """
    case = RegionCase(case)
    if not M_range[1] < 1:
        raise ModelParameterError(f"M_range harus di bawah 1, diterima {M_range}")
    if not eps_range[0] > 0:
        raise ModelParameterError(f"eps_range harus positif, diterima {eps_range}")

    base = base_params or ModelParams.defaults()
    M_grid = np.linspace(M_range[0], M_range[1], resolution[0])
    eps_grid = np.linspace(eps_range[0], eps_range[1], resolution[1])

    p_values = sample_region_cases(M_grid, eps_grid, case)
    signs = np.array([[classify(p, tol).value for p in row] for row in p_values]).reshape(p_values.shape)

    n_super = int(np.count_nonzero(signs == Criticality.SUPERCRITICAL.value))
    logger.info(f"Region map {case.value}: {n_super}/{signs.size} sel supercritical "
                f"(tau={base.tau:g}, beta={base.beta:g})")
    return CriticalityRegionMap(M_grid=M_grid, eps_grid=eps_grid, case=case,
                                p_values=p_values, signs=signs)


def predicted_pattern(params: ModelParams, chi_target: float) -> PatternPrediction:
    """
    Prediksi amplitudo pola dari kesetimbangan Stuart-Landau A_inf = sqrt(sigma/L)

    Returns:
        PatternPrediction; valid=False bila L <= 0 (orde tiga tidak menangkap amplitudo)
    """
    data = stuart_landau(params, chi_target)
    th = thresholds(params)
    if data.L <= 0:
        return PatternPrediction(valid=False, eta=data.eta, kc=th.kc,
                                 reason=f"subcritical/degenerate (L={data.L:.4g}); third order cannot capture the amplitude")
    amplitude = math.sqrt(data.sigma / data.L)
    return PatternPrediction(valid=True, eta=data.eta, amplitude=amplitude,
                             perturbation_amplitude=data.eta * data.rho[0] * amplitude, kc=th.kc)


def sample_region_cases(M_values: Sequence[float], eps_values: Sequence[float], case) -> np.ndarray:
    """Nilai p untuk kombinasi (M, eps) sembarang (tanpa grid linspace)"""
    factory = _case_growth_factory(RegionCase(case))
    out = np.empty((len(M_values), len(eps_values)))
    for i, M in enumerate(M_values):
        law = factory(float(M))
        for j, eps in enumerate(eps_values):
            out[i, j] = p_polynomial(math.sqrt(law.a * eps), law.omega)
    return out
