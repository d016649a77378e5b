# Continuation Steady State: Newton, Pseudo-Arclength, Branch Switching, Stabilitas
# ==================================================================================

import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.integrate import trapezoid
from scipy.sparse import bmat, csc_matrix, csr_matrix, diags, identity
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigs, splu
from tqdm import tqdm

from config import Config
from linear_stability import chi_at_mode, discrete_wavenumber2
from model_core import (ModelParameterError, ModelParams, NumericalFailure,
                        chemotaxis_sensitivity, chemotaxis_sensitivity_derivative,
                        destruction_factor, growth_derivative, growth_rate)
from simulator import FieldState, Grid1D, chemotaxis_divergence, dominant_mode, laplacian_neumann

logger = logging.getLogger(__name__)

TAG_NONE = "none"
TAG_FOLD = "fold"
TAG_BRANCH_POINT = "branch_point"
HOMOGENEOUS_LABEL = "homogeneous"


class NewtonFailure(NumericalFailure):
    """Newton tidak konvergen atau Jacobian singular"""

    def __init__(self, reason: str, residual: float, iterations: int,
                 condition: Optional[float] = None):
        detail = f", condition~{condition:.3e}" if condition is not None else ""
        super().__init__(f"Newton gagal ({reason}): residual={residual:.3e} "
                         f"setelah {iterations} iterasi{detail}")
        self.reason = reason
        self.residual = residual
        self.iterations = iterations
        self.condition = condition


class EigenSolverError(NumericalFailure):
    """Eigen solver gagal pada operator linearisasi"""


@dataclass(frozen=True)
class ContinuationSettings:
    ds: float = 1e-2
    ds_min: float = 1e-6
    ds_max: float = 0.25
    chi_range: Tuple[float, float] = (0.0, 12.0)
    max_points: int = 2000
    newton_tol: float = 1e-10
    newton_max_iter: int = 20
    corrector_max_iter: int = 8
    grow_factor: float = 1.3
    fast_convergence_iter: int = 3
    switch_ds: float = 1e-2
    switch_halvings: int = 6

    def __post_init__(self):
        if not 0 < self.ds_min <= self.ds_max:
            raise ModelParameterError(f"ds_min={self.ds_min} dan ds_max={self.ds_max} tidak konsisten")
        if self.chi_range[0] >= self.chi_range[1]:
            raise ModelParameterError(f"chi_range tidak valid: {self.chi_range}")

    @classmethod
    def from_config(cls, **overrides) -> "ContinuationSettings":
        keys = ("ds", "ds_min", "ds_max", "max_points", "newton_tol", "newton_max_iter",
                "corrector_max_iter", "grow_factor", "fast_convergence_iter",
                "switch_ds", "switch_halvings")
        base = {key: Config.CONTINUATION[key] for key in keys}
        base.update(overrides)
        return cls(**base)

    def with_range(self, chi_range: Tuple[float, float]) -> "ContinuationSettings":
        return replace(self, chi_range=(float(chi_range[0]), float(chi_range[1])))


class NewtonResult(NamedTuple):
    X: np.ndarray
    iterations: int
    residual: float


class SettledState(NamedTuple):
    U: np.ndarray
    iterations: int
    residual: float                               # residual setelah Newton
    initial_residual: float                       # residual state simulasi
    shift: float                                  # max |U - U_simulasi|
    d_gap: float                                  # max |d - 1| pada state simulasi


class StabilityInfo(NamedTuple):
    n_unstable: int
    leading: np.ndarray                           # eigenvalue terurut dari Re terbesar
    d_eigenvalues: np.ndarray                     # -r F(m_i) m_i per node

    @property
    def stable(self) -> bool:
        return self.n_unstable == 0


class HomogeneousBifurcation(NamedTuple):
    n: int
    chi: float
    k2: float


@dataclass
class BranchPoint:
    chi: float
    U: np.ndarray = field(repr=False)
    norm: float
    n_unstable: int
    tag: str = TAG_NONE
    leading: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def stable(self) -> bool:
        return self.n_unstable == 0


@dataclass
class Branch:
    label: object                                 # indeks mode n atau "homogeneous"
    points: List[BranchPoint] = field(default_factory=list)
    detected_bifurcations: List[Tuple[float, str]] = field(default_factory=list)
    status: str = "ok"
    origin_chi: Optional[float] = None

    @property
    def truncated(self) -> bool:
        return self.status == "step_underflow"

    @property
    def chi_values(self) -> np.ndarray:
        return np.array([p.chi for p in self.points])

    @property
    def norms(self) -> np.ndarray:
        return np.array([p.norm for p in self.points])

    @property
    def min_chi(self) -> float:
        return float(np.min(self.chi_values))

    def folds(self) -> List[float]:
        return [chi for chi, kind in self.detected_bifurcations if kind == TAG_FOLD]

    def is_subcritical(self) -> bool:
        """Cabang yang keluar ke chi < chi_n (ada fold dengan minimum chi di bawah titik bifurkasi)"""
        return self.origin_chi is not None and self.min_chi < self.origin_chi - 1e-9


class BranchCrossing(NamedTuple):
    chi: float
    norm: float
    n_unstable: int

    @property
    def stable(self) -> bool:
        return self.n_unstable == 0


@dataclass
class BifurcationDiagram:
    params: ModelParams
    chi_range: Tuple[float, float]
    homogeneous: Branch
    branches: Dict[int, Branch] = field(default_factory=dict)
    failures: Dict[int, str] = field(default_factory=dict)
    bifurcation_points: List[HomogeneousBifurcation] = field(default_factory=list)

    def all_branches(self) -> List[Branch]:
        return [self.homogeneous] + [self.branches[n] for n in sorted(self.branches)]

    def branch_point_chi(self, n: int) -> Optional[float]:
        for bp in self.bifurcation_points:
            if bp.n == n:
                return bp.chi
        return None


# === MASALAH STEADY TEREDUKSI (m, c) dengan d = 1 ===

def _laplacian_matrix(N: int, h: float) -> csr_matrix:
    upper = np.ones(N - 1)
    lower = np.ones(N - 1)
    upper[0] = 2.0
    lower[-1] = 2.0
    return diags([lower, np.full(N, -2.0), upper], [-1, 0, 1], format="csr") / (h * h)


def _divergence_matrix(N: int, h: float) -> csr_matrix:
    """Face (N-1) -> node (N) dengan ghost flux cermin"""
    main = np.ones(N - 1)
    sub = -np.ones(N - 1)
    main[0] = 2.0
    sub[-1] = -2.0
    return diags([sub, main], [-1, 0], shape=(N, N - 1), format="csr") / h


class SteadyProblem:
    """
    Residual steady sistem tereduksi dengan chi sebagai parameter bebas

    Baris m: m_xx + G(m) - (Phi(m) c_x)_x
    Baris c: eps c_xx + delta - c + beta m   (tanpa faktor 1/tau)
    """

    def __init__(self, grid: Grid1D, params: ModelParams):
        params.require_coupling()
        self.grid = grid
        self.params = params
        self.N = grid.N
        self.h = grid.h

        N = self.N
        self._lap = _laplacian_matrix(N, self.h)
        self._div = _divergence_matrix(N, self.h)
        self._face_mean = diags([0.5, 0.5], [0, 1], shape=(N - 1, N), format="csr")
        self._face_diff = diags([-1.0, 1.0], [0, 1], shape=(N - 1, N), format="csr")
        self._eye = identity(N, format="csr")
        self._c_row = params.eps * self._lap - self._eye
        self.weights = np.concatenate([np.full(2 * N, 1.0 / N), [1.0]])

    @property
    def dimension(self) -> int:
        return 2 * self.N

    def split(self, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return U[:self.N], U[self.N:]

    def homogeneous_state(self) -> np.ndarray:
        p = self.params
        return np.concatenate([np.ones(self.N), np.full(self.N, p.beta + p.delta)])

    def reflect(self, U: np.ndarray) -> np.ndarray:
        """Refleksi x -> L - x"""
        m, c = self.split(U)
        return np.concatenate([m[::-1], c[::-1]])

    def residual(self, U: np.ndarray, chi: float) -> np.ndarray:
        m, c = self.split(U)
        p, h = self.params, self.h
        r_m = laplacian_neumann(m, h) + growth_rate(m, p.growth) - chemotaxis_divergence(m, c, chi, h)
        r_c = p.eps * laplacian_neumann(c, h) + p.delta - c + p.beta * m
        return np.concatenate([r_m, r_c])

    def jacobian(self, U: np.ndarray, chi: float) -> csc_matrix:
        """Turunan eksak residual diskret (sparse 2N x 2N)"""
        m, c = self.split(U)
        p, h = self.params, self.h

        m_face = self._face_mean @ m
        dc = (self._face_diff @ c) / h
        dflux_dm = self._div @ diags(chemotaxis_sensitivity_derivative(m_face, chi) * dc) @ self._face_mean
        dflux_dc = self._div @ diags(chemotaxis_sensitivity(m_face, chi) / h) @ self._face_diff

        J_mm = self._lap + diags(growth_derivative(m, p.growth)) - dflux_dm
        J_mc = -dflux_dc
        J_cm = p.beta * self._eye
        return bmat([[J_mm, J_mc], [J_cm, self._c_row]], format="csc")

    def jacobian_chi(self, U: np.ndarray, chi: float = None) -> np.ndarray:
        """d residual / d chi (Phi linear dalam chi)"""
        m, c = self.split(U)
        return np.concatenate([-chemotaxis_divergence(m, c, 1.0, self.h), np.zeros(self.N)])

    def norm_L2(self, U: np.ndarray) -> float:
        """||m||_{L2} = sqrt((1/L) int m^2 dx), trapezoid"""
        m, _ = self.split(U)
        return math.sqrt(trapezoid(m * m, dx=self.h) / self.grid.L_domain)

    def deviation(self, U: np.ndarray) -> float:
        """max |m - 1|"""
        m, _ = self.split(U)
        return float(np.max(np.abs(m - 1.0)))

    def weighted_dot(self, X: np.ndarray, Y: np.ndarray) -> float:
        return float(np.dot(self.weights * X, Y))


def steady_residual(U: np.ndarray, chi: float, problem: SteadyProblem) -> np.ndarray:
    return problem.residual(U, chi)


def steady_jacobian(U: np.ndarray, chi: float, problem: SteadyProblem) -> csc_matrix:
    return problem.jacobian(U, chi)


# === NEWTON ===

def _lu_condition_proxy(lu) -> float:
    """Rasio max/min |diag(U)| dari faktor LU"""
    diag = np.abs(lu.U.diagonal())
    smallest = float(np.min(diag))
    return math.inf if smallest == 0 else float(np.max(diag)) / smallest


def _newton(fun: Callable[[np.ndarray], np.ndarray], jac: Callable[[np.ndarray], csc_matrix],
            X0: np.ndarray, tol: float, max_iter: int) -> NewtonResult:
    if not tol > 0:
        raise ModelParameterError(f"Toleransi Newton harus > 0, diterima {tol}")
    X = np.array(X0, dtype=float)
    F = fun(X)
    residual = float(np.max(np.abs(F)))
    condition = None

    for iteration in range(max_iter + 1):
        if not np.isfinite(residual):
            raise NewtonFailure("non-finite residual", residual, iteration, condition)
        if residual < tol:
            return NewtonResult(X, iteration, residual)
        if iteration == max_iter:
            break
        try:
            lu = splu(jac(X).tocsc())
        except RuntimeError as e:
            raise NewtonFailure(f"singular Jacobian ({e})", residual, iteration, math.inf)
        condition = _lu_condition_proxy(lu)
        X = X - lu.solve(F)
        F = fun(X)
        residual = float(np.max(np.abs(F)))
        logger.debug(f"  Newton iterasi {iteration + 1}: residual={residual:.3e}")

    raise NewtonFailure("no convergence", residual, max_iter, condition)


def newton_correct(U0: np.ndarray, chi: float, problem: SteadyProblem,
                   tol: Optional[float] = None, max_iter: Optional[int] = None) -> NewtonResult:
    """
    Koreksi Newton pada chi tetap

    Returns:
        NewtonResult (X = U terkoreksi)

    Raises:
        NewtonFailure: Jacobian singular atau tidak konvergen
    """
    tol = Config.CONTINUATION["newton_tol"] if tol is None else tol
    max_iter = Config.CONTINUATION["newton_max_iter"] if max_iter is None else max_iter
    return _newton(lambda U: steady_residual(U, chi, problem),
                   lambda U: steady_jacobian(U, chi, problem), U0, tol, max_iter)


def settle_state(state: FieldState, chi: float, problem: SteadyProblem,
                 tol: Optional[float] = None, max_iter: Optional[int] = None) -> SettledState:
    """
    Polish state simulator menjadi steady state diskretisasi continuation

    Pola yang sudah terbentuk tapi belum steady sampai toleransi (t_end habis)
    dikoreksi Newton pada (m, c) dengan d = 1.

    Raises:
        ModelParameterError: Grid state tidak sama dengan grid problem
        NewtonFailure: Newton tidak konvergen dari state simulasi
    """
    if state.N != problem.N:
        raise ModelParameterError(f"State N={state.N} tidak cocok dengan problem N={problem.N}")
    U0 = np.concatenate([state.m, state.c])
    initial = float(np.max(np.abs(steady_residual(U0, chi, problem))))
    result = newton_correct(U0, chi, problem, tol, max_iter)
    shift = float(np.max(np.abs(result.X - U0)))
    d_gap = float(np.max(np.abs(state.d - 1.0)))
    logger.debug(f"Settle chi={chi:.6g}: residual {initial:.2e} -> {result.residual:.2e}, "
                 f"shift={shift:.2e}, |d-1|={d_gap:.2e}")
    return SettledState(result.X, result.iterations, result.residual, initial, shift, d_gap)


# === STABILITAS ===

def _cayley_eigenvalues(operator: csc_matrix, shift: float, k0: int) -> Optional[np.ndarray]:
    """
    Eigenvalue A dengan Re > 0 lewat C = (A - aI)^-1 (A + aI)

    Re(lambda) > 0 tepat bila |mu| > 1, sehingga 'LM' pada C menemukan semua mode
    tak stabil. k digandakan sampai |mu| terkecil yang dikembalikan <= 1; None bila
    k melewati dim/4 (pakai dense).
    """
    dim = operator.shape[0]
    eye = identity(dim, format="csc")
    lu = splu((operator - shift * eye).tocsc())
    plus = (operator + shift * eye).tocsr()
    cayley = LinearOperator((dim, dim), matvec=lambda x: lu.solve(plus @ x), dtype=float)

    k = min(k0, dim - 2)
    while k <= dim // 4:
        mu = eigs(cayley, k=k, which="LM", return_eigenvectors=False)
        if np.min(np.abs(mu)) <= 1.0:
            return shift * (1.0 + mu) / (mu - 1.0)
        logger.debug(f"  Cayley k={k}: semua |mu| > 1, k digandakan")
        k *= 2
    return None


def stability_of(U: np.ndarray, chi: float, problem: SteadyProblem,
                 n_eigs: Optional[int] = None) -> StabilityInfo:
    """
    Eigenvalue S*A, S = diag(1 untuk baris m, 1/tau untuk baris c)

    Dense untuk dimensi kecil; untuk grid besar transformasi Cayley + ARPACK
    yang menghitung semua eigenvalue dengan Re > 0 (leading hanya memuat
    eigenvalue yang dikembalikan ARPACK).
    """
    cfg = Config.CONTINUATION
    n_eigs = n_eigs or cfg["n_eigs"]
    N, tau = problem.N, problem.params.tau
    scale = diags(np.concatenate([np.ones(N), np.full(N, 1.0 / tau)]))
    operator = (scale @ problem.jacobian(U, chi)).tocsc()
    dim = operator.shape[0]

    try:
        values = None
        if dim > cfg["dense_eig_limit"]:
            values = _cayley_eigenvalues(operator, cfg["cayley_shift"], n_eigs)
        if values is None:
            values = scipy.linalg.eigvals(operator.toarray())
    except (ArpackNoConvergence, ArpackError, scipy.linalg.LinAlgError, RuntimeError) as e:
        raise EigenSolverError(f"Eigen solver gagal (dim={dim}, nnz={operator.nnz}, "
                               f"chi={chi:.8g}): {e}")

    if not np.all(np.isfinite(values)):
        raise EigenSolverError(f"Eigenvalue non-finite (dim={dim}, chi={chi:.8g})")

    ordered = values[np.argsort(-values.real)]
    n_unstable = int(np.sum(ordered.real > cfg["eig_tol"]))
    m, _ = problem.split(U)
    d_eigs = -problem.params.r * destruction_factor(m) * m
    return StabilityInfo(n_unstable=n_unstable, leading=ordered[:min(len(ordered), 8)],
                         d_eigenvalues=d_eigs)


def _make_point(U: np.ndarray, chi: float, problem: SteadyProblem, tag: str = TAG_NONE) -> BranchPoint:
    info = stability_of(U, chi, problem)
    return BranchPoint(chi=float(chi), U=U, norm=problem.norm_L2(U),
                       n_unstable=info.n_unstable, tag=tag, leading=info.leading)


# === CABANG HOMOGEN ===

def homogeneous_bifurcation_points(problem: SteadyProblem, chi_max: float) -> List[HomogeneousBifurcation]:
    """Nilai chi_n pada eigenvalue Laplacian diskret untuk mode n = 1..N-1, chi_n <= chi_max"""
    if not chi_max > 0:
        raise ModelParameterError(f"chi_max={chi_max} harus > 0")
    n = np.arange(1, problem.N)
    k2 = discrete_wavenumber2(n, problem.grid)
    chi_n = chi_at_mode(k2, problem.params)
    points = [HomogeneousBifurcation(int(i), float(c), float(k)) for i, c, k in zip(n, chi_n, k2)
              if c <= chi_max]
    return sorted(points, key=lambda bp: bp.chi)


def homogeneous_branch(problem: SteadyProblem, chi_range: Tuple[float, float],
                       n_points: int = 200) -> Branch:
    """
    Cabang homogen dengan jumlah mode tak stabil dihitung analitik

    Mode n tidak stabil tepat bila chi > chi_n (g > 0 selalu sehingga tidak ada Hopf).
    """
    U_h = problem.homogeneous_state()
    all_points = homogeneous_bifurcation_points(problem, max(chi_range[1], 1e-12))
    thresholds_sorted = np.array([bp.chi for bp in all_points])

    chi_values = set(np.linspace(chi_range[0], chi_range[1], n_points).tolist())
    crossings = {bp.chi for bp in all_points if chi_range[0] <= bp.chi <= chi_range[1]}
    chi_values |= crossings

    branch = Branch(label=HOMOGENEOUS_LABEL, status="analytic")
    for chi in sorted(chi_values):
        n_unstable = int(np.sum(thresholds_sorted < chi))
        tag = TAG_BRANCH_POINT if chi in crossings else TAG_NONE
        branch.points.append(BranchPoint(chi=float(chi), U=U_h, norm=problem.norm_L2(U_h),
                                         n_unstable=n_unstable, tag=tag))
        if tag == TAG_BRANCH_POINT:
            branch.detected_bifurcations.append((float(chi), TAG_BRANCH_POINT))
    return branch


# === BRANCH SWITCHING ===

def _null_vector(problem: SteadyProblem, k2: float) -> Tuple[float, float]:
    """Null vector (rho_m, rho_c) dari J - k^2 D pada baris steady: rho_c = beta/(1 + eps k^2)"""
    p = problem.params
    return 1.0, p.beta / (1.0 + p.eps * k2)


def branch_switch(n: int, chi_n: float, problem: SteadyProblem, s0: Optional[float] = None,
                  settings: Optional[ContinuationSettings] = None) -> BranchPoint:
    """
    Titik awal cabang yang bercabang dari homogen pada mode n

    Corrector menahan proyeksi (U - U_h) pada arah prediktor sama dengan s0,
    sehingga arah null di titik bifurkasi tereliminasi.
    """
    settings = settings or ContinuationSettings.from_config()
    s0 = settings.switch_ds if s0 is None else s0
    U_h = problem.homogeneous_state()
    k2 = discrete_wavenumber2(n, problem.grid)
    rho_m, rho_c = _null_vector(problem, k2)
    mode = problem.grid.mode_vector(n)
    phi = np.concatenate([rho_m * mode, rho_c * mode])
    phi_row = csr_matrix((phi / phi.dot(phi))[None, :])
    dim = problem.dimension

    last_error = None
    for attempt in range(settings.switch_halvings + 1):
        amplitude = s0 / (2 ** attempt)

        def fun(X, amplitude=amplitude):
            U, chi = X[:dim], X[dim]
            constraint = phi.dot(U - U_h) / phi.dot(phi) - amplitude
            return np.concatenate([problem.residual(U, chi), [constraint]])

        def jac(X):
            U, chi = X[:dim], X[dim]
            J_chi = csc_matrix(problem.jacobian_chi(U, chi)[:, None])
            return bmat([[problem.jacobian(U, chi), J_chi], [phi_row, None]], format="csc")

        X0 = np.concatenate([U_h + amplitude * phi, [chi_n]])
        try:
            result = _newton(fun, jac, X0, settings.newton_tol, settings.newton_max_iter)
        except NewtonFailure as e:
            last_error = e
            logger.debug(f"Branch switch mode {n} dengan s0={amplitude:.2e} gagal: {e}")
            continue

        U, chi = result.X[:dim], float(result.X[dim])
        detected = dominant_mode(problem.split(U)[0])
        if detected.n != n:
            logger.warning(f"⚠️ Branch switch mode {n} mendarat di mode dominan {detected.n}")
        logger.info(f"🔀 Branch switch mode {n}: chi_n={chi_n:.6f} -> chi={chi:.6f} (s0={amplitude:.2e})")
        return _make_point(U, chi, problem)

    raise last_error


# === PSEUDO-ARCLENGTH ===

def _bordered(problem: SteadyProblem, U: np.ndarray, chi: float, row: np.ndarray) -> csc_matrix:
    dim = problem.dimension
    J_chi = csc_matrix(problem.jacobian_chi(U, chi)[:, None])
    border = problem.weights * row
    return bmat([[problem.jacobian(U, chi), J_chi],
                 [csr_matrix(border[None, :dim]), csr_matrix([[border[dim]]])]], format="csc")


def _tangent(problem: SteadyProblem, U: np.ndarray, chi: float, guess: np.ndarray) -> np.ndarray:
    """Tangent ternormalisasi (bobot) dengan orientasi <t, guess> > 0"""
    rhs = np.zeros(problem.dimension + 1)
    rhs[-1] = 1.0
    try:
        t = splu(_bordered(problem, U, chi, guess)).solve(rhs)
    except RuntimeError as e:
        raise NewtonFailure(f"singular bordered system ({e})", math.nan, 0, math.inf)
    return t / math.sqrt(problem.weighted_dot(t, t))


def continue_branch(start: BranchPoint, problem: SteadyProblem,
                    settings: Optional[ContinuationSettings] = None,
                    direction: Optional[np.ndarray] = None, label=None,
                    show_progress: bool = False) -> Branch:
    """
    Pseudo-arclength predictor-corrector dengan step adaptif

    Args:
        start: Titik awal yang sudah konvergen
        problem: SteadyProblem
        settings: ContinuationSettings (ds, ds_min, ds_max, chi_range, ...)
        direction: Arah awal di ruang (U, chi); default chi naik
        label: Label cabang

    Returns:
        Branch; status 'chi_range' | 'max_points' | 'step_underflow' | 'rejoined_homogeneous'
    """
    settings = settings or ContinuationSettings.from_config()
    dim = problem.dimension
    chi_lo, chi_hi = settings.chi_range
    homogeneous_tol = Config.CONTINUATION["homogeneous_tol"]

    if direction is None:
        direction = np.zeros(dim + 1)
        direction[-1] = 1.0
    direction = direction / math.sqrt(problem.weighted_dot(direction, direction))

    branch = Branch(label=label, points=[start])
    X = np.concatenate([start.U, [start.chi]])
    t = _tangent(problem, start.U, start.chi, direction)
    ds = settings.ds
    start_is_pattern = problem.deviation(start.U) > homogeneous_tol

    with tqdm(total=settings.max_points, desc=f"branch {label}",
              disable=not show_progress or not sys.stderr.isatty(), leave=False) as bar:
        while True:
            if len(branch.points) >= settings.max_points:
                branch.status = "max_points"
                break

            X_prev, t_prev = X, t

            def fun(Y):
                return np.concatenate([problem.residual(Y[:dim], Y[dim]),
                                       [problem.weighted_dot(t_prev, Y - X_prev) - ds]])

            def jac(Y):
                return _bordered(problem, Y[:dim], Y[dim], t_prev)

            try:
                result = _newton(fun, jac, X_prev + ds * t_prev,
                                 settings.newton_tol, settings.corrector_max_iter)
            except NewtonFailure as e:
                ds *= 0.5
                logger.debug(f"Corrector gagal ({e.reason}); ds -> {ds:.3e}")
                if ds < settings.ds_min:
                    branch.status = "step_underflow"
                    logger.warning(f"⚠️ Cabang {label}: step underflow di chi={X_prev[dim]:.6f}")
                    break
                continue

            X_new = result.X
            U_new, chi_new = X_new[:dim], float(X_new[dim])
            if not chi_lo <= chi_new <= chi_hi:
                branch.status = "chi_range"
                break

            t_new = _tangent(problem, U_new, chi_new, t_prev)
            point = _make_point(U_new, chi_new, problem)
            previous = branch.points[-1]
            if t_new[-1] * t_prev[-1] < 0:
                point.tag = TAG_FOLD
            elif point.n_unstable != previous.n_unstable:
                point.tag = TAG_BRANCH_POINT
            if point.tag != TAG_NONE:
                branch.detected_bifurcations.append((chi_new, point.tag))
                logger.info(f"📍 Cabang {label}: {point.tag} di chi={chi_new:.6f} "
                            f"(n_unstable {previous.n_unstable} -> {point.n_unstable})")

            branch.points.append(point)
            bar.update(1)
            X, t = X_new, t_new

            if start_is_pattern and problem.deviation(U_new) < homogeneous_tol:
                branch.status = "rejoined_homogeneous"
                break

            if result.iterations <= settings.fast_convergence_iter:
                ds = min(ds * settings.grow_factor, settings.ds_max)

    logger.info(f"Cabang {label}: {len(branch.points)} titik, chi in "
                f"[{branch.min_chi:.4f}, {float(np.max(branch.chi_values)):.4f}], status={branch.status}")
    return branch


def branch_state_at(branch: Branch, chi: float) -> List[BranchCrossing]:
    """
    Semua perpotongan cabang dengan garis chi (interpolasi linear norm)

    n_unstable diambil dari titik ujung segmen yang lebih dekat.
    """
    crossings = []
    pts = branch.points
    for a, b in zip(pts[:-1], pts[1:]):
        lo, hi = min(a.chi, b.chi), max(a.chi, b.chi)
        if not lo <= chi <= hi or hi == lo:
            continue
        w = (chi - a.chi) / (b.chi - a.chi)
        norm = a.norm + w * (b.norm - a.norm)
        nearest = a if w < 0.5 else b
        crossings.append(BranchCrossing(chi=chi, norm=norm, n_unstable=nearest.n_unstable))
    return crossings


# === DIAGRAM ===

def _continue_mode(n: int, chi_n: float, problem: SteadyProblem,
                   settings: ContinuationSettings) -> Branch:
    start = branch_switch(n, chi_n, problem, settings=settings)
    direction = np.concatenate([start.U - problem.homogeneous_state(), [start.chi - chi_n]])
    branch = continue_branch(start, problem, settings, direction=direction, label=n)
    branch.origin_chi = chi_n
    return branch


def bifurcation_diagram(params: ModelParams, chi_range: Tuple[float, float], mode_set: Iterable[int],
                        grid: Optional[Grid1D] = None,
                        settings: Optional[ContinuationSettings] = None,
                        max_workers: Optional[int] = None,
                        show_progress: bool = True) -> BifurcationDiagram:
    """
    Cabang homogen plus satu cabang per mode yang diminta

    Kegagalan per cabang dicatat di diagram.failures; diagram tetap dikembalikan.
    """
    modes = sorted(set(int(n) for n in mode_set))
    if not modes:
        raise ModelParameterError("mode_set tidak boleh kosong")
    grid = grid or Grid1D(Config.CONTINUATION["N"], params.L_domain)
    settings = (settings or ContinuationSettings.from_config()).with_range(chi_range)
    problem = SteadyProblem(grid, params)
    max_workers = max_workers or Config.PERFORMANCE["max_workers"]

    points = homogeneous_bifurcation_points(problem, chi_range[1])
    diagram = BifurcationDiagram(params=params, chi_range=settings.chi_range,
                                 homogeneous=homogeneous_branch(problem, settings.chi_range),
                                 bifurcation_points=points)
    lookup = {bp.n: bp for bp in points}

    logger.info(f"🌿 Diagram bifurkasi {params.growth.describe()}, eps={params.eps:g}, "
                f"N={grid.N}, mode {modes}, chi in {settings.chi_range}")

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {}
        for n in modes:
            bp = lookup.get(n)
            if bp is None or bp.chi < settings.chi_range[0]:
                diagram.failures[n] = f"mode {n} tidak bercabang di dalam chi_range {settings.chi_range}"
                logger.warning(f"⚠️ {diagram.failures[n]}")
                continue
            futures[executor.submit(_continue_mode, n, bp.chi, problem, settings)] = n

        for future in tqdm(as_completed(futures), total=len(futures), desc="branches",
                           disable=not show_progress or not sys.stderr.isatty()):
            n = futures[future]
            try:
                diagram.branches[n] = future.result()
            except NumericalFailure as e:
                diagram.failures[n] = str(e)
                logger.error(f"❌ Cabang mode {n} gagal: {e}")

    return diagram


# === OUTPUT ===

def _branch_filename(label) -> str:
    return f"branch_{label}" if label == HOMOGENEOUS_LABEL else f"branch_mode{int(label):03d}"


def write_branch_files(out_dir: Path, branch: Branch, problem: SteadyProblem) -> Tuple[Path, Path]:
    """CSV (chi,norm_m_L2,n_unstable,tag) + sidecar JSON snapshot di titik bertag"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _branch_filename(branch.label)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}_snapshots.json"

    with open(csv_path, "w") as f:
        f.write("chi,norm_m_L2,n_unstable,tag\n")
        for p in branch.points:
            f.write(f"{p.chi!r},{p.norm!r},{p.n_unstable},{p.tag}\n")

    snapshots = []
    for index, p in enumerate(branch.points):
        if p.tag == TAG_NONE and index not in (0, len(branch.points) - 1):
            continue
        m, c = problem.split(p.U)
        snapshots.append({"index": index, "chi": p.chi, "tag": p.tag, "norm_m_L2": p.norm,
                          "n_unstable": p.n_unstable, "m": m.tolist(), "c": c.tolist()})
    with open(json_path, "w") as f:
        json.dump({"label": str(branch.label), "status": branch.status,
                   "x": problem.grid.x.tolist(), "snapshots": snapshots}, f)
    return csv_path, json_path


def write_diagram(out_dir: Path, diagram: BifurcationDiagram, grid: Grid1D) -> Path:
    """Tulis semua file cabang plus manifest JSON"""
    out_dir = Path(out_dir)
    problem = SteadyProblem(grid, diagram.params)
    entries = []
    for branch in diagram.all_branches():
        csv_path, json_path = write_branch_files(out_dir, branch, problem)
        entries.append({
            "label": str(branch.label), "file": csv_path.name, "snapshots": json_path.name,
            "status": branch.status, "truncated": branch.truncated, "n_points": len(branch.points),
            "origin_chi": branch.origin_chi,
            "detected_bifurcations": [[chi, kind] for chi, kind in branch.detected_bifurcations],
        })
    manifest = {
        "params": diagram.params.as_dict(),
        "N": grid.N,
        "chi_range": list(diagram.chi_range),
        "bifurcation_points": [bp._asdict() for bp in diagram.bifurcation_points],
        "branches": entries,
        "failures": {str(n): msg for n, msg in diagram.failures.items()},
    }
    manifest_path = out_dir / "diagram_manifest.json"
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2)
    return manifest_path
