#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Analisis Pola Turing Model Kemotaksis MS
========================================

Front end command line untuk semua analisis:
1. Threshold Turing dan tabel mode (thresholds)
2. Relasi dispersi (dispersion)
3. Koefisien Stuart-Landau dan peta criticality (landau, region-map)
4. Simulasi finite difference dengan beberapa seed (simulate)
5. Diagram bifurkasi via continuation (bifurcate)
6. Perbandingan growth law logistik vs Allee (growth)

Exit code: 0 sukses, 2 error konfigurasi/parameter, 3 kegagalan numerik.
"""

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from amplitude_wnl import criticality_region_map, predicted_pattern, stuart_landau
from config import Config
from continuation import ContinuationSettings, bifurcation_diagram, write_diagram
from linear_stability import dispersion_curve, mode_table, thresholds, unstable_band
from model_core import (GrowthLaw, ModelParameterError, NumericalFailure, growth_maximum,
                        growth_profile_table)
from run_config import ConfigError, RunConfig
from simulator import Grid1D, SimConfig, simulate_seeds, write_snapshot_csv, write_summary_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
    return path


def _write_csv(path: Path, header: List[str], rows) -> Path:
    """CSV presisi penuh (repr float), tanpa ketergantungan locale"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


class AnalysisRunner:
    """Orkestrator command: membaca RunConfig, menjalankan analisis, menulis file output"""

    def __init__(self, run_config: RunConfig, out_dir: Optional[Path] = None):
        self.config = run_config.require_valid()
        self.out_dir = Path(out_dir or run_config["run"]["out"])
        self.params = run_config.model_params()
        self.partial_failure = False
        logger.info(f"Runner siap: {self.params.growth.describe()}, eps={self.params.eps:g}, "
                    f"chi={self.params.chi:g}, output -> {self.out_dir}")

    def _command_dir(self, name: str) -> Path:
        path = self.out_dir / name
        path.mkdir(parents=True, exist_ok=True)
        self.config.save(path / "effective_config.env")
        return path

    # === COMMANDS ===

    def cmd_thresholds(self) -> dict:
        th = thresholds(self.params)
        table = mode_table(self.params, self.config["run"]["n_max"])
        band = unstable_band(self.params.chi, self.params)
        report = {
            "chi_bar": th.chi_bar, "chi_c": th.chi_c, "kc2": th.kc2, "kc": th.kc,
            "unstable_band": None if band is None else [band.k2_low, band.k2_high],
            "modes": [{"n": n, "k2": k2, "chi_n": chi_n} for n, k2, chi_n in table],
            "config": self.config.as_dict(),
        }
        _write_json(self._command_dir("thresholds") / "thresholds.json", report)
        logger.info(f"✅ chi_bar={th.chi_bar:.6f}, chi_c={th.chi_c:.6f}, k_c^2={th.kc2:.6f}")
        return report

    def cmd_dispersion(self) -> Path:
        curve = dispersion_curve(self.params, self.config["run"]["dispersion_samples"])
        path = _write_csv(self._command_dir("dispersion") / "dispersion.csv",
                          ["k2", "g", "h", "lambda_max"], curve.samples)
        logger.info(f"✅ Relasi dispersi ({len(curve.samples)} sampel) -> {path}")
        return path

    def cmd_landau(self) -> dict:
        chi_target = self.config["wnl"]["chi_target"]
        data = stuart_landau(self.params, chi_target)
        report = data.as_dict()
        if chi_target is not None:
            prediction = predicted_pattern(self.params, chi_target)
            report["prediction"] = {
                "valid": prediction.valid, "eta": prediction.eta,
                "amplitude": prediction.amplitude,
                "perturbation_amplitude": prediction.perturbation_amplitude,
                "reason": prediction.reason,
            }
        report["config"] = self.config.as_dict()
        _write_json(self._command_dir("landau") / "landau.json", report)
        logger.info(f"✅ sigma={data.sigma:.6g}, L={data.L:.6g}, p={data.p_value:.6g} -> "
                    f"{data.criticality.value}")
        return report

    def cmd_region_map(self) -> Path:
        wnl = self.config["wnl"]
        region = criticality_region_map((wnl["M_min"], wnl["M_max"]), (wnl["eps_min"], wnl["eps_max"]),
                                        (wnl["n_M"], wnl["n_eps"]), wnl["case"],
                                        base_params=self.params, tol=wnl["degenerate_tol"])
        path = _write_csv(self._command_dir("region_map") / f"region_map_{region.case.value}.csv",
                          ["M", "eps", "case", "p_value", "verdict"], region.rows())
        logger.info(f"✅ Peta criticality -> {path}")
        return path

    def cmd_simulate(self, seeds: List[int]) -> dict:
        sim = self.config["sim"]
        sim_config = SimConfig(dt=sim["dt"], t_end=sim["t_end"], steady_tol=sim["steady_tol"],
                               perturb_amp=sim["perturb_amp"], check_every=sim["check_every"],
                               N=sim["N"])
        grid = Grid1D(sim["N"], self.params.L_domain)
        results = simulate_seeds(self.params, sim_config, seeds, grid,
                                 max_workers=self.config["run"]["max_workers"])

        out = self._command_dir("simulate")
        for result in results:
            if result.state is not None:
                write_snapshot_csv(out / f"snapshot_seed{result.seed}.csv", grid, result.state,
                                   self.params, result.seed)
        write_summary_json(out / "summary.json", self.params, sim_config, results)

        failed = [r.seed for r in results if not r.success]
        if failed:
            self.partial_failure = True
            logger.error(f"❌ Seed gagal: {failed} (output parsial disimpan)")
        for r in results:
            logger.info(f"  seed {r.seed}: {r.peaks} peak, mode {r.dominant_mode}, "
                        f"steady={r.reached_steady}")
        return {"runs": [r.summary() for r in results]}

    def cmd_bifurcate(self) -> Path:
        cont = self.config["cont"]
        settings = ContinuationSettings.from_config(
            ds=cont["ds"], ds_min=cont["ds_min"], ds_max=cont["ds_max"],
            max_points=cont["max_points"], newton_tol=cont["newton_tol"],
            newton_max_iter=cont["newton_max_iter"], corrector_max_iter=cont["corrector_max_iter"],
            grow_factor=cont["grow_factor"], fast_convergence_iter=cont["fast_convergence_iter"],
            switch_ds=cont["switch_ds"], switch_halvings=cont["switch_halvings"],
        )
        grid = Grid1D(cont["N"], self.params.L_domain)
        diagram = bifurcation_diagram(self.params, self.config.chi_range(), cont["modes"], grid,
                                      settings, max_workers=self.config["run"]["max_workers"])
        manifest = write_diagram(self._command_dir("bifurcate"), diagram, grid)
        if diagram.failures:
            self.partial_failure = True
            logger.error(f"❌ Cabang gagal: {sorted(diagram.failures)} (output parsial disimpan)")
        logger.info(f"✅ Diagram bifurkasi -> {manifest}")
        return manifest

    def cmd_growth(self) -> Path:
        M = self.config["model"]["M"]
        table = growth_profile_table(M, self.config["run"]["growth_points"])
        out = self._command_dir("growth")
        path = _write_csv(out / "growth_profiles.csv", ["m", "G1", "G2_case1", "G2_case2"], table)
        maxima = {}
        for name, law in (("logistic", GrowthLaw.logistic()), ("case1", GrowthLaw.case1(M)),
                          ("case2", GrowthLaw.case2(M))):
            m_max, g_max = growth_maximum(law)
            maxima[name] = {"m_max": m_max, "G_max": g_max, "Lambda": law.Lambda, "a": law.a}
        _write_json(out / "growth_maxima.json", {"M": M, "maxima": maxima})
        logger.info(f"✅ Profil growth law (M={M:g}) -> {path}")
        return path


# === ARGUMENT PARSING ===

def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="Analisis Pola Turing Model Kemotaksis MS",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Contoh penggunaan:
  python3 cli_io.py thresholds --override model.eps=0.08
  python3 cli_io.py landau --override wnl.chi_target=3.4
  python3 cli_io.py region-map --override wnl.case=case2 --override wnl.eps_min=0.5
  python3 cli_io.py simulate --seed 0,1,2,3,4 --out output/fig3
  python3 cli_io.py bifurcate --config runs/fig4_case1.env
  python3 cli_io.py growth --override model.M=-0.5
        """
    )
    parser.add_argument("command",
                        choices=["thresholds", "dispersion", "landau", "region-map",
                                 "simulate", "bifurcate", "growth"],
                        help="Analisis yang dijalankan")
    parser.add_argument("--config", type=str, help="File konfigurasi run (section.key = value)")
    parser.add_argument("--out", type=str, help="Direktori output (override run.out)")
    parser.add_argument("--seed", type=str, help="Daftar seed dipisah koma, contoh 0,1,2")
    parser.add_argument("--override", action="append", default=[],
                        help="Override section.key=value (boleh berulang)")
    parser.add_argument("--log-level", type=str, default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Level logging (default dari Config.LOGGING)")
    return parser.parse_args(argv)


def build_run_config(args: argparse.Namespace) -> RunConfig:
    run_config = RunConfig.from_file(args.config) if args.config else RunConfig()
    run_config.apply_overrides(args.override)
    if args.seed:
        run_config.apply_overrides([f"run.seeds={args.seed}"])
    if args.out:
        run_config.apply_overrides([f"run.out={args.out}"])
    return run_config


def main(argv: Optional[List[str]] = None) -> int:
    """Main function; return exit code"""
    args = parse_arguments(argv)
    Config.setup_logging(args.log_level)

    try:
        run_config = build_run_config(args)
        runner = AnalysisRunner(run_config)
        commands: Dict[str, Callable[[], object]] = {
            "thresholds": runner.cmd_thresholds,
            "dispersion": runner.cmd_dispersion,
            "landau": runner.cmd_landau,
            "region-map": runner.cmd_region_map,
            "simulate": lambda: runner.cmd_simulate(run_config.seeds()),
            "bifurcate": runner.cmd_bifurcate,
            "growth": runner.cmd_growth,
        }
        start = time.time()
        commands[args.command]()
        logger.info(f"⏱️  {args.command} selesai dalam {time.time() - start:.2f} detik")
        return EXIT_NUMERICAL if runner.partial_failure else EXIT_OK

    except (ConfigError, ModelParameterError) as e:
        logger.error(f"❌ Error konfigurasi/parameter: {e}")
        return EXIT_CONFIG
    except NumericalFailure as e:
        logger.error(f"❌ Kegagalan numerik: {e}")
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        logger.warning("🛑 Dihentikan oleh pengguna")
        return 130


if __name__ == "__main__":
    sys.exit(main())
