# Analisis Stabilitas Linear (Instabilitas Turing)
# ================================================

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from model_core import ModelParameterError, ModelParams

logger = logging.getLogger(__name__)

DEFAULT_DISPERSION_SAMPLES = 400


@dataclass(frozen=True)
class ReducedLinearization:
    """Matriks J (reaksi) dan D (difusi/kemotaksis) sistem tereduksi (m, c) di P*"""

    J: np.ndarray
    D: np.ndarray

    def operator(self, k2: float) -> np.ndarray:
        """J - k^2 D"""
        return self.J - k2 * self.D


class DispersionSample(NamedTuple):
    k2: float
    g: float
    h: float
    lambda_max: float


@dataclass(frozen=True)
class DispersionCurve:
    samples: List[DispersionSample]

    def as_array(self) -> np.ndarray:
        return np.array([tuple(s) for s in self.samples], dtype=float)


@dataclass(frozen=True)
class TuringThresholds:
    chi_bar: float
    chi_c: float
    kc2: float
    kc: float


class AdmissibleMode(NamedTuple):
    n: int
    k: float
    k2: float


class UnstableBand(NamedTuple):
    k2_low: float
    k2_high: float

    @property
    def degenerate(self) -> bool:
        return self.k2_low == self.k2_high

    def contains(self, k2: float) -> bool:
        return self.k2_low <= k2 <= self.k2_high


def reduced_matrices(params: ModelParams) -> ReducedLinearization:
    """J = [[-a, 0], [beta/tau, -1/tau]], D = [[1, -chi/2], [0, eps/tau]]"""
    tau = params.tau
    J = np.array([[-params.a, 0.0],
                  [params.beta / tau, -1.0 / tau]])
    D = np.array([[1.0, -params.chi / 2.0],
                  [0.0, params.eps / tau]])
    return ReducedLinearization(J=J, D=D)


def dispersion_coefficients(k2, params: ModelParams) -> Tuple:
    """
    Koefisien relasi dispersi lambda^2 + g lambda + h = 0

    Args:
        k2: Squared wavenumber (skalar atau array, >= 0)
        params: Parameter model

    Returns:
        Tuple (g, h)
    """
    tau, eps, a = params.tau, params.eps, params.a
    xi2 = a * eps
    q = (2.0 * (1.0 + xi2) - params.chi * params.beta) / (2.0 * tau)
    g = k2 * (1.0 + eps / tau) + a + 1.0 / tau
    h = (eps / tau) * k2 * k2 + q * k2 + a / tau
    return g, h


def mode_growth_rates(k2: float, params: ModelParams) -> Tuple[complex, complex]:
    """Dua akar lambda (kompleks jika perlu), urut berdasarkan real part"""
    g, h = dispersion_coefficients(k2, params)
    root = np.emath.sqrt(g * g - 4.0 * h)
    lam_plus = complex((-g + root) / 2.0)
    lam_minus = complex((-g - root) / 2.0)
    return tuple(sorted((lam_minus, lam_plus), key=lambda z: (z.real, z.imag)))


def lambda_max(k2, params: ModelParams):
    """Real part terbesar dari akar relasi dispersi (vectorized)"""
    g, h = dispersion_coefficients(k2, params)
    root = np.emath.sqrt(g * g - 4.0 * h)
    return np.real((-g + root) / 2.0)


def thresholds(params: ModelParams) -> TuringThresholds:
    """
    Threshold Turing closed form

    chi_bar = 2(1+xi^2)/beta, chi_c = 2(1+xi)^2/beta, k_c^2 = xi/eps
    """
    params.require_coupling()
    xi = params.xi
    chi_bar = 2.0 * (1.0 + xi * xi) / params.beta
    chi_c = 2.0 * (1.0 + xi) ** 2 / params.beta
    kc2 = xi / params.eps
    return TuringThresholds(chi_bar=chi_bar, chi_c=chi_c, kc2=kc2, kc=math.sqrt(kc2))


def chi_at_mode(k2, params: ModelParams):
    """
    Nilai chi di mana mode k^2 menjadi tidak stabil (solusi h(k^2) = 0)

    chi = [2 eps k^4 + 2(1 + a eps) k^2 + 2a] / (beta k^2), independen dari tau.
    """
    params.require_coupling()
    k2_arr = np.asarray(k2, dtype=float)
    if np.any(k2_arr <= 0):
        raise ModelParameterError(f"k^2 harus > 0, diterima {k2}")
    eps, a = params.eps, params.a
    value = 2.0 * (eps * k2_arr * k2_arr + (1.0 + a * eps) * k2_arr + a) / (params.beta * k2_arr)
    return float(value) if np.ndim(value) == 0 else value


def critical_mode_numeric(params: ModelParams) -> Tuple[float, float]:
    """
    Minimum numerik chi_at_mode: root dari d chi / d k^2 = 2(eps - a/k^4)/beta

    Returns:
        Tuple (k2_min, chi_min)
    """
    params.require_coupling()
    eps, a = params.eps, params.a

    def slope(k2):
        return eps - a / (k2 * k2)

    lower, upper = 1e-12, 1.0
    while slope(upper) < 0:
        upper *= 2.0
    k2_min = brentq(slope, lower, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return k2_min, chi_at_mode(k2_min, params)


def admissible_modes(L_domain: float, n_max: int) -> List[AdmissibleMode]:
    """Mode cosinus Neumann k_n = n*pi/L, n = 1..n_max"""
    modes = []
    for n in range(1, n_max + 1):
        k = n * math.pi / L_domain
        modes.append(AdmissibleMode(n=n, k=k, k2=k * k))
    return modes


def discrete_wavenumber2(n, grid):
    """
    Eigenvalue Laplacian diskret (Neumann, ghost cermin) untuk mode n

    k_n^2 = 2(1 - cos(n pi/(N-1)))/h^2; grid cukup punya atribut N dan h.
    """
    n = np.asarray(n, dtype=float)
    value = 2.0 * (1.0 - np.cos(n * math.pi / (grid.N - 1))) / (grid.h * grid.h)
    return float(value) if np.ndim(value) == 0 else value


def mode_table(params: ModelParams, n_max: int) -> List[Tuple[int, float, float]]:
    """Tabel (n, k_n^2, chi_n) untuk mode admissible di domain params.L_domain"""
    return [(mode.n, mode.k2, chi_at_mode(mode.k2, params))
            for mode in admissible_modes(params.L_domain, n_max)]


def unstable_band(chi: float, params: ModelParams) -> Optional[UnstableBand]:
    """
    Interval k^2 dengan h < 0 (root polinomial kuadrat h dalam k^2)

    Returns:
        UnstableBand, atau None jika chi < chi_c (band kosong)
    """
    params.require_coupling()
    eps, a = params.eps, params.a
    # tau*h = eps X^2 + B X + a
    B = 1.0 + a * eps - chi * params.beta / 2.0
    disc = B * B - 4.0 * eps * a
    scale = max(B * B, 4.0 * eps * a)
    if disc < -1e-12 * scale or B >= 0:
        return None
    if disc <= 1e-12 * scale:
        k2 = -B / (2.0 * eps)
        return UnstableBand(k2, k2)
    root = math.sqrt(disc)
    # Bentuk stabil untuk akar kecil
    k2_high = (-B + root) / (2.0 * eps)
    k2_low = a / (eps * k2_high)
    return UnstableBand(k2_low, k2_high)


def dispersion_curve(params: ModelParams, n_samples: int = DEFAULT_DISPERSION_SAMPLES,
                     k2_max: Optional[float] = None) -> DispersionCurve:
    """Sampling relasi dispersi di [0, 4 k_c^2] (default)"""
    if k2_max is None:
        k2_max = 4.0 * thresholds(params).kc2
    k2 = np.linspace(0.0, k2_max, n_samples)
    g, h = dispersion_coefficients(k2, params)
    lam = lambda_max(k2, params)
    samples = [DispersionSample(float(a), float(b), float(c), float(d))
               for a, b, c, d in zip(k2, g, h, lam)]
    return DispersionCurve(samples=samples)
