# Konfigurasi Sistem Analisis Pola Turing (Model Kemotaksis MS)
# ==============================================================

import logging
import math
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

import colorlog
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Konfigurasi utama untuk analisis model kemotaksis"""

    # === DIREKTORI SYSTEM ===
    BASE_DIR = Path(__file__).parent.absolute()

    OUTPUT_DIR = Path(os.getenv("MS_TURING_OUTPUT_DIR", str(BASE_DIR / "output")))
    LOGS_DIR = BASE_DIR / "logs"                  # Log files
    RUNS_DIR = BASE_DIR / "runs"                  # File konfigurasi run (key = value)

    # === PARAMETER MODEL (nondimensional) ===
    # Set parameter standar: tau = beta = r = delta = 1, L = 12*pi
    DEFAULT_PARAMS = {
        "tau": 1.0,
        "eps": 0.08,
        "beta": 1.0,
        "r": 1.0,
        "delta": 1.0,
        "chi": 3.5,
        "L_domain": 12.0 * math.pi,
        "growth": "logistic",                     # logistic | allee
        "M": 0.0,
        "Lambda": 1.0,
        "Lambda_case": "explicit",                # explicit | case1 | case2
    }

    # === SIMULASI FINITE DIFFERENCE ===
    SIMULATION = {
        "N": 512,                                 # Jumlah node grid
        "dt": None,                               # None = pakai stable_dt
        "t_end": 2000.0,
        "steady_tol": 1e-8,                       # Max-norm turunan waktu diskret
        "perturb_amp": 1e-2,                      # Amplitudo noise uniform awal
        "check_every": 200,                       # Cek steady state setiap N step
        "safety": 0.2,
        "min_nodes": 16,
    }

    # === CONTINUATION ===
    CONTINUATION = {
        "N": 512,
        "ds": 1e-2,
        "ds_min": 1e-6,
        "ds_max": 0.25,
        "grow_factor": 1.3,
        "max_points": 2000,
        "newton_tol": 1e-10,
        "newton_max_iter": 20,
        "corrector_max_iter": 8,
        "fast_convergence_iter": 3,
        "switch_ds": 1e-2,                        # s0 untuk branch switching
        "switch_halvings": 6,
        "n_eigs": 24,                             # k awal ARPACK, digandakan sampai semua |mu| > 1 tertangkap
        "cayley_shift": 1.0,                      # a pada (A - aI)^-1 (A + aI)
        "dense_eig_limit": 800,                   # Dimensi maksimum untuk eig dense
        "homogeneous_tol": 1e-6,
        "eig_tol": 1e-9,                          # Re(lambda) > tol => unstable
    }

    # === WEAKLY NONLINEAR ANALYSIS ===
    WNL = {
        "degenerate_tol": 1e-8,                   # |p| < tol => Degenerate
        "residual_points": 512,
        "consistency_rtol": 1e-10,
    }

    # === PERFORMANCE SETTINGS ===
    PERFORMANCE = {
        "max_workers": int(os.getenv("MS_TURING_MAX_WORKERS", "2")),
    }

    # === LOGGING SETTINGS ===
    LOGGING = {
        "level": os.getenv("MS_TURING_LOG_LEVEL", "INFO"),  # DEBUG | INFO | WARNING | ERROR
        "file": "ms_turing.log",
        "max_size_mb": 10,
        "backup_count": 5,
        "format": "%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    }

    @classmethod
    def create_directories(cls):
        """Buat semua direktori yang dibutuhkan"""
        for directory in (cls.OUTPUT_DIR, cls.LOGS_DIR, cls.RUNS_DIR):
            directory.mkdir(parents=True, exist_ok=True)

    @classmethod
    def validate_config(cls):
        """Validasi konfigurasi default, return list error (kosong = valid)"""
        errors = []

        if cls.SIMULATION["N"] < cls.SIMULATION["min_nodes"]:
            errors.append(f"SIMULATION.N harus >= {cls.SIMULATION['min_nodes']}")
        if cls.SIMULATION["perturb_amp"] < 0:
            errors.append("SIMULATION.perturb_amp tidak boleh negatif")
        if not 0 < cls.SIMULATION["safety"] <= 1:
            errors.append("SIMULATION.safety harus di (0, 1]")
        if cls.CONTINUATION["ds_min"] > cls.CONTINUATION["ds_max"]:
            errors.append("CONTINUATION.ds_min lebih besar dari ds_max")
        if cls.PERFORMANCE["max_workers"] < 1:
            errors.append("PERFORMANCE.max_workers minimal 1")
        if cls.LOGGING["level"].upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"Level logging tidak dikenal: {cls.LOGGING['level']}")

        return errors

    @classmethod
    def setup_logging(cls, level=None, to_file=True):
        """
        Setup logging: console berwarna (colorlog) + rotating file di logs/

        Args:
            level: Override level logging (optional)
            to_file: Tulis juga ke file log
        """
        level_name = (level or cls.LOGGING["level"]).upper()

        console = colorlog.StreamHandler(sys.stderr)
        console.setFormatter(colorlog.ColoredFormatter(
            "%(log_color)s" + cls.LOGGING["format"],
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        ))
        handlers = [console]

        if to_file:
            cls.LOGS_DIR.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(
                cls.LOGS_DIR / cls.LOGGING["file"],
                maxBytes=cls.LOGGING["max_size_mb"] * 1024 * 1024,
                backupCount=cls.LOGGING["backup_count"],
            )
            file_handler.setFormatter(logging.Formatter(cls.LOGGING["format"]))
            handlers.append(file_handler)

        logging.basicConfig(level=getattr(logging, level_name), handlers=handlers, force=True)


if __name__ == "__main__":
    # Test konfigurasi
    print("Testing konfigurasi sistem...")
    Config.create_directories()

    errors = Config.validate_config()
    if errors:
        print("❌ Error dalam konfigurasi:")
        for error in errors:
            print(f"  - {error}")
    else:
        print("✅ Konfigurasi valid!")
