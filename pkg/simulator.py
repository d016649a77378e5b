# Simulator Finite Difference 1D Sistem Tiga Field (m, c, d)
# ===========================================================

import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.fft import dct
from scipy.integrate import trapezoid
from tqdm import tqdm

from config import Config
from model_core import (ModelParameterError, ModelParams, NumericalFailure,
                        chemotaxis_sensitivity, destruction_factor, growth_rate)

logger = logging.getLogger(__name__)


class BlowUpError(NumericalFailure):
    """Nilai non-finite setelah update eksplisit"""

    def __init__(self, step_index: int, t: float):
        super().__init__(f"Blow-up pada step {step_index} (t={t:.6g})")
        self.step_index = step_index
        self.t = t


@dataclass(frozen=True)
class Grid1D:
    """Grid node-centered di [0, L], x_0 = 0 dan x_{N-1} = L"""

    N: int
    L_domain: float

    def __post_init__(self):
        min_nodes = Config.SIMULATION["min_nodes"]
        if self.N < min_nodes:
            raise ModelParameterError(f"Grid butuh minimal {min_nodes} node, diterima N={self.N}")
        if not self.L_domain > 0:
            raise ModelParameterError(f"L_domain={self.L_domain} harus > 0")

    @property
    def h(self) -> float:
        return self.L_domain / (self.N - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L_domain, self.N)

    def mode_vector(self, n: int) -> np.ndarray:
        """cos(n pi x / L) di node grid"""
        return np.cos(n * math.pi * np.arange(self.N) / (self.N - 1))

    @classmethod
    def for_params(cls, params: ModelParams, N: Optional[int] = None) -> "Grid1D":
        return cls(N or Config.SIMULATION["N"], params.L_domain)


@dataclass
class FieldState:
    t: float
    m: np.ndarray
    c: np.ndarray
    d: np.ndarray
    n_steps: int = 0

    @property
    def N(self) -> int:
        return len(self.m)

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.m.copy(), self.c.copy(), self.d.copy(), self.n_steps)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.m)) and np.all(np.isfinite(self.c))
                    and np.all(np.isfinite(self.d)))


@dataclass(frozen=True)
class SimConfig:
    dt: Optional[float] = None                    # None = stable_dt
    t_end: float = 2000.0
    steady_tol: float = 1e-8
    perturb_amp: float = 1e-2
    seed: int = 0
    check_every: int = 200
    N: int = 512

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ModelParameterError(f"dt={self.dt} harus > 0")
        if self.perturb_amp < 0:
            raise ModelParameterError(f"perturb_amp={self.perturb_amp} tidak boleh negatif")
        if self.check_every < 1:
            raise ModelParameterError("check_every minimal 1")

    @classmethod
    def from_config(cls, **overrides) -> "SimConfig":
        base = {key: Config.SIMULATION[key]
                for key in ("dt", "t_end", "steady_tol", "perturb_amp", "check_every", "N")}
        base.update(overrides)
        return cls(**base)

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)


class SteadyDiagnostics(NamedTuple):
    steps: int
    residual: float
    reached_steady: bool
    t: float
    dt: float


class DominantMode(NamedTuple):
    n: int
    degenerate: bool


@dataclass
class SeedResult:
    seed: int
    peaks: Optional[float] = None
    dominant_mode: Optional[int] = None
    degenerate: bool = False
    reached_steady: bool = False
    residual: Optional[float] = None
    steps: int = 0
    t: float = 0.0
    state: Optional[FieldState] = field(default=None, repr=False)
    error: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.error is None

    def summary(self) -> dict:
        return {
            "seed": self.seed, "peaks": self.peaks, "dominant_mode": self.dominant_mode,
            "degenerate": self.degenerate, "reached_steady": self.reached_steady,
            "residual": self.residual, "steps": self.steps, "t": self.t, "error": self.error,
        }


# === STENCIL (dipakai bersama dengan continuation) ===

def laplacian_neumann(u: np.ndarray, h: float) -> np.ndarray:
    """Laplacian 3 titik dengan ghost node cermin u_{-1} = u_1, u_N = u_{N-2}"""
    lap = np.empty_like(u)
    lap[1:-1] = u[:-2] - 2.0 * u[1:-1] + u[2:]
    lap[0] = 2.0 * (u[1] - u[0])
    lap[-1] = 2.0 * (u[-2] - u[-1])
    return lap / (h * h)


def chemotaxis_flux(m: np.ndarray, c: np.ndarray, chi: float, h: float) -> np.ndarray:
    """Flux di face i+1/2: Phi((m_i + m_{i+1})/2) (c_{i+1} - c_i)/h, panjang N-1"""
    m_face = 0.5 * (m[:-1] + m[1:])
    return chemotaxis_sensitivity(m_face, chi) * (c[1:] - c[:-1]) / h


def chemotaxis_divergence(m: np.ndarray, c: np.ndarray, chi: float, h: float) -> np.ndarray:
    """
    (Phi(m) c_x)_x dalam bentuk flux konservatif

    Flux ghost cermin F_{-1/2} = -F_{1/2} sehingga flux batas nol dan
    massa trapezoid tertutup.
    """
    flux = chemotaxis_flux(m, c, chi, h)
    div = np.empty_like(m)
    div[1:-1] = flux[1:] - flux[:-1]
    div[0] = 2.0 * flux[0]
    div[-1] = -2.0 * flux[-1]
    return div / h


def total_mass(u: np.ndarray, h: float) -> float:
    """Integral trapezoid di [0, L]"""
    return float(trapezoid(u, dx=h))


def time_derivative(state: FieldState, params: ModelParams, include_growth: bool = True,
                    h: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Ruas kanan diskret (m_t, c_t, d_t)

    Args:
        state: State saat ini
        params: Parameter model
        include_growth: False = paksa G = 0 (hook uji konservasi massa)
        h: Spasi grid (default L/(N-1))
    """
    h = h or params.L_domain / (state.N - 1)
    m, c, d = state.m, state.c, state.d

    m_t = laplacian_neumann(m, h) - chemotaxis_divergence(m, c, params.chi, h)
    if include_growth:
        m_t += growth_rate(m, params.growth)
    c_t = (params.eps * laplacian_neumann(c, h) + params.delta * d - c + params.beta * m) / params.tau
    d_t = params.r * destruction_factor(m) * m * (1.0 - d)
    return m_t, c_t, d_t


def derivative_norm(state: FieldState, params: ModelParams) -> float:
    """Max-norm turunan waktu diskret di ketiga field"""
    return float(max(np.max(np.abs(part)) for part in time_derivative(state, params)))


# === TIME STEPPING ===

def stable_dt(params: ModelParams, grid: Grid1D, safety: Optional[float] = None) -> float:
    """dt = safety * h^2 / (2 max(1, eps/tau) (1 + chi/2))"""
    safety = Config.SIMULATION["safety"] if safety is None else safety
    diffusivity = max(1.0, params.eps / params.tau)
    return safety * grid.h * grid.h / (2.0 * diffusivity * (1.0 + params.chi / 2.0))


def initial_state(grid: Grid1D, params: ModelParams, perturb_amp: float, seed: int) -> FieldState:
    """P* + noise uniform di [-amp, amp] pada m, deterministik terhadap seed"""
    if perturb_amp < 0:
        raise ModelParameterError(f"perturb_amp={perturb_amp} tidak boleh negatif")
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-perturb_amp, perturb_amp, size=grid.N) if perturb_amp > 0 else np.zeros(grid.N)
    return FieldState(
        t=0.0,
        m=1.0 + noise,
        c=np.full(grid.N, params.beta + params.delta),
        d=np.ones(grid.N),
    )


def mode_state(grid: Grid1D, params: ModelParams, n: int, amplitude: float) -> FieldState:
    """P* + amplitude * cos(n pi x / L) pada m"""
    return FieldState(
        t=0.0,
        m=1.0 + amplitude * grid.mode_vector(n),
        c=np.full(grid.N, params.beta + params.delta),
        d=np.ones(grid.N),
    )


def step(state: FieldState, params: ModelParams, dt: float, include_growth: bool = True) -> FieldState:
    """Satu update forward Euler; BlowUpError jika hasil non-finite"""
    m_t, c_t, d_t = time_derivative(state, params, include_growth)
    new = FieldState(
        t=state.t + dt,
        m=state.m + dt * m_t,
        c=state.c + dt * c_t,
        d=state.d + dt * d_t,
        n_steps=state.n_steps + 1,
    )
    if not new.is_finite():
        logger.error(f"❌ Blow-up terdeteksi pada step {new.n_steps}")
        raise BlowUpError(new.n_steps, new.t)
    return new


def run_to_steady(state: FieldState, params: ModelParams, config: SimConfig,
                  show_progress: bool = False) -> Tuple[FieldState, SteadyDiagnostics]:
    """
    Integrasi sampai max-norm turunan waktu < steady_tol atau t_end tercapai

    Returns:
        Tuple (state akhir, SteadyDiagnostics)
    """
    grid = Grid1D(state.N, params.L_domain)
    dt = config.dt or stable_dt(params, grid)
    remaining = max(0, math.ceil((config.t_end - state.t) / dt - 1e-9))

    residual = derivative_norm(state, params)
    if residual < config.steady_tol:
        logger.info(f"✅ State awal sudah steady (residual={residual:.2e})")
        return state, SteadyDiagnostics(0, residual, True, state.t, dt)

    logger.debug(f"Integrasi eksplisit: dt={dt:.3e}, maksimal {remaining} step")
    steps = 0
    reached = False
    with tqdm(total=remaining, desc="simulate", unit="step",
              disable=not show_progress or not sys.stderr.isatty(), mininterval=1.0, leave=False) as bar:
        while steps < remaining:
            chunk = min(config.check_every, remaining - steps)
            for _ in range(chunk):
                state = step(state, params, dt)
            steps += chunk
            bar.update(chunk)
            residual = derivative_norm(state, params)
            if residual < config.steady_tol:
                reached = True
                break

    if reached:
        logger.info(f"✅ Steady state di t={state.t:.2f} ({steps} step, residual={residual:.2e})")
    else:
        logger.warning(f"⚠️ t_end={config.t_end:g} tercapai tanpa steady state (residual={residual:.2e})")
    return state, SteadyDiagnostics(steps, residual, reached, state.t, dt)


# === DIAGNOSTIK POLA ===

def _collapse_plateaus(profile: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(profile))))
    keep = np.ones(len(profile), dtype=bool)
    keep[1:] = np.abs(np.diff(profile)) > 1e-12 * scale
    return profile[keep]


def count_peaks(profile) -> float:
    """Maksimum interior dihitung 1, maksimum di batas dihitung 1/2"""
    values = np.asarray(profile, dtype=float)
    if len(values) < 3:
        raise ModelParameterError("Profil butuh minimal 3 titik")
    p = _collapse_plateaus(values)
    if len(p) < 2:
        return 0.0
    interior = int(np.sum((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:])))
    boundary = int(p[0] > p[1]) + int(p[-1] > p[-2])
    return interior + 0.5 * boundary


def dominant_mode(profile, L_domain: Optional[float] = None) -> DominantMode:
    """
    Indeks n >= 1 dengan koefisien DCT-I terbesar dari (profile - mean)

    L_domain tidak mempengaruhi indeks (grid node-centered memetakan mode n
    ke koefisien DCT-I ke-n); diterima untuk kelengkapan pemanggil.
    """
    values = np.asarray(profile, dtype=float)
    if len(values) < 8:
        raise ModelParameterError("Profil butuh minimal 8 titik")
    fluctuation = values - values.mean()
    coeffs = np.abs(dct(fluctuation, type=1))
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(coeffs[1:]) <= 1e-12 * scale * len(values):
        return DominantMode(0, True)
    return DominantMode(int(np.argmax(coeffs[1:])) + 1, False)


def mode_amplitude(profile: np.ndarray, n: int) -> float:
    """Amplitudo mode cosinus n (normalisasi DCT-I sehingga cos(n pi x/L) -> 1)"""
    coeffs = dct(np.asarray(profile, dtype=float) - np.mean(profile), type=1)
    return float(coeffs[n] / (len(profile) - 1))


# === SWEEP SEED DAN OUTPUT ===

def _simulate_one(params: ModelParams, grid: Grid1D, config: SimConfig) -> SeedResult:
    result = SeedResult(seed=config.seed)
    try:
        state = initial_state(grid, params, config.perturb_amp, config.seed)
        final, diag = run_to_steady(state, params, config)
        mode = dominant_mode(final.m, grid.L_domain)
        result.peaks = count_peaks(final.m)
        result.dominant_mode = mode.n
        result.degenerate = mode.degenerate
        result.reached_steady = diag.reached_steady
        result.residual = diag.residual
        result.steps = diag.steps
        result.t = final.t
        result.state = final
    except NumericalFailure as e:
        logger.error(f"❌ Seed {config.seed} gagal: {e}")
        result.error = str(e)
    return result


def simulate_seeds(params: ModelParams, config: SimConfig, seeds: Iterable[int],
                   grid: Optional[Grid1D] = None, max_workers: Optional[int] = None,
                   show_progress: bool = True) -> List[SeedResult]:
    """
    Jalankan simulasi untuk beberapa seed secara paralel (RNG independen per seed)

    Returns:
        List SeedResult dalam urutan seed input; kegagalan dicatat di field error
    """
    seeds = list(seeds)
    grid = grid or Grid1D(config.N, params.L_domain)
    max_workers = max_workers or Config.PERFORMANCE["max_workers"]
    logger.info(f"🚀 Simulasi {len(seeds)} seed (N={grid.N}, chi={params.chi:g}, "
                f"{params.growth.describe()}), {max_workers} worker")

    results = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(_simulate_one, params, grid, config.with_seed(seed)): seed
                   for seed in seeds}
        for future in tqdm(as_completed(futures), total=len(futures), desc="seeds",
                           disable=not show_progress or not sys.stderr.isatty()):
            seed = futures[future]
            results[seed] = future.result()
            logger.info(f"  seed {seed}: peaks={results[seed].peaks}, mode={results[seed].dominant_mode}")

    return [results[seed] for seed in seeds]


def _provenance_header(params: ModelParams, extra: dict) -> str:
    lines = [f"# {key} = {value!r}" for key, value in params.as_dict().items()]
    lines += [f"# {key} = {value!r}" for key, value in extra.items()]
    return "\n".join(lines)


def write_snapshot_csv(path: Path, grid: Grid1D, state: FieldState, params: ModelParams,
                       seed: Optional[int] = None) -> Path:
    """CSV kolom x,m,c,d dengan header parameter, seed, dan waktu"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _provenance_header(params, {"seed": seed, "t": state.t, "N": grid.N})
    data = np.column_stack([grid.x, state.m, state.c, state.d])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header=header + "\nx,m,c,d", comments="")
    return path


def write_summary_json(path: Path, params: ModelParams, config: SimConfig,
                       results: List[SeedResult]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "params": params.as_dict(),
        "sim": {"dt": config.dt, "t_end": config.t_end, "steady_tol": config.steady_tol,
                "perturb_amp": config.perturb_amp, "N": config.N},
        "runs": [r.summary() for r in results],
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
    return path
