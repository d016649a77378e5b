#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Test Command Line dan File Konfigurasi Run
==========================================

Test parsing RunConfig (section.key = value), override, validasi,
semua command lewat main() di direktori sementara, dan exit code.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import csv
import json
import logging
import tempfile
from pathlib import Path

from cli_io import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main, parse_arguments
from model_core import ALLEE
from run_config import ConfigError, RunConfig, default_run_file

# Setup logging untuk test
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def _read_csv(path: Path):
    with open(path) as f:
        return list(csv.reader(f))


class CliIoTester:
    """Test front end command line"""

    def __init__(self):
        self.test_results = {}
        self.temp_dir = Path(tempfile.mkdtemp(prefix="ms_turing_cli_"))
        print("🖥️  CLI / RUN CONFIG TESTER")
        print("=" * 50)

    def _run(self, name: str, *args: str) -> int:
        return main(list(args) + ["--out", str(self.temp_dir / name), "--log-level", "WARNING"])

    def test_run_config_round_trip(self) -> bool:
        """serialize -> parse menghasilkan konfigurasi yang sama"""
        try:
            print("\n🔁 Testing RunConfig Round Trip...")
            config = RunConfig()
            config.apply_overrides(["model.eps=0.25", "run.seeds=0,1,2", "wnl.chi_target=3.4",
                                    "model.Lambda_case=case2", "model.M=-0.5"])
            restored = RunConfig.from_text(config.serialize())
            assert restored == config, "Round trip tidak identik"
            assert restored["model"]["eps"] == 0.25 and restored.seeds() == [0, 1, 2]
            assert RunConfig.from_text(default_run_file()) == RunConfig()

            path = config.save(self.temp_dir / "saved.env")
            assert RunConfig.from_file(path) == config
            assert "# [model]" in path.read_text()
            print("  ✅ Round trip file konfigurasi identik")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_run_config_errors(self) -> bool:
        """Key/section tidak dikenal, nilai rusak, dan validasi"""
        try:
            print("\n🛡️  Testing RunConfig Errors...")
            bad_inputs = [
                lambda: RunConfig.from_text("model.foo = 1\n"),
                lambda: RunConfig.from_text("physics.eps = 1\n"),
                lambda: RunConfig.from_text("eps = 0.1\n"),
                lambda: RunConfig.from_text("model.eps = abc\n"),
                lambda: RunConfig().apply_overrides(["model.eps"]),
                lambda: RunConfig.from_file(self.temp_dir / "missing.env"),
            ]
            for factory in bad_inputs:
                try:
                    factory()
                    raise AssertionError("Input rusak tidak ditolak")
                except ConfigError:
                    pass

            config = RunConfig()
            config.apply_overrides(["model.eps=-1", "sim.N=4", "cont.ds_min=1", "cont.ds_max=0.1"])
            errors = config.validate()
            assert len(errors) >= 2, errors
            try:
                config.require_valid()
                raise AssertionError("Konfigurasi invalid lolos")
            except ConfigError:
                pass

            model_only = RunConfig()
            model_only.apply_overrides(["model.tau=0"])
            assert model_only.validate(), "tau = 0 tidak terdeteksi"

            for overrides in (["model.M=1.0"], ["model.M=1.5", "model.growth=allee", "model.Lambda_case=explicit"]):
                bad_M = RunConfig()
                bad_M.apply_overrides(overrides)
                assert any("model.M" in e for e in bad_M.validate()), f"{overrides} lolos validasi"
            print(f"  ✅ {len(bad_inputs)} input rusak ditolak, {len(errors)} error validasi")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_growth_law_selection(self) -> bool:
        """Lambda_case memaksa growth Allee dengan Lambda terkalibrasi"""
        try:
            print("\n🌱 Testing Growth Law Selection...")
            config = RunConfig()
            assert config.growth_law().kind == "logistic"
            config.apply_overrides(["model.Lambda_case=case1", "model.M=-0.5"])
            law = config.growth_law()
            assert law.kind == ALLEE and abs(law.Lambda - 1 / 1.5) < 1e-15
            config.apply_overrides(["model.Lambda_case=explicit", "model.growth=allee", "model.Lambda=2.0"])
            assert config.model_params().growth.Lambda == 2.0
            print("  ✅ case1/case2/explicit dipetakan ke GrowthLaw yang benar")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_analysis_commands(self) -> bool:
        """thresholds, dispersion, landau, region-map, growth"""
        try:
            print("\n📐 Testing Analysis Commands...")
            assert self._run("thr", "thresholds") == EXIT_OK
            report = json.loads((self.temp_dir / "thr" / "thresholds" / "thresholds.json").read_text())
            assert abs(report["chi_c"] - 3.29137) < 1e-5
            assert report["unstable_band"] is not None and len(report["modes"]) == 40
            effective = RunConfig.from_file(self.temp_dir / "thr" / "thresholds" / "effective_config.env")
            assert effective["run"]["out"] == str(self.temp_dir / "thr")
            print(f"  ✅ thresholds: chi_c={report['chi_c']:.5f}")

            assert self._run("disp", "dispersion") == EXIT_OK
            rows = _read_csv(self.temp_dir / "disp" / "dispersion" / "dispersion.csv")
            assert rows[0] == ["k2", "g", "h", "lambda_max"] and len(rows) == 401

            assert self._run("landau", "landau", "--override", "model.eps=0.25",
                             "--override", "wnl.chi_target=4.6") == EXIT_OK
            landau = json.loads((self.temp_dir / "landau" / "landau" / "landau.json").read_text())
            assert landau["criticality"] == "supercritical" and landau["prediction"]["valid"]
            assert abs(landau["p_value"] + 9.75) < 1e-12

            assert self._run("region", "region-map", "--override", "wnl.n_M=3",
                             "--override", "wnl.n_eps=5", "--override", "wnl.case=case1") == EXIT_OK
            rows = _read_csv(self.temp_dir / "region" / "region_map" / "region_map_case1.csv")
            assert rows[0] == ["M", "eps", "case", "p_value", "verdict"] and len(rows) == 16

            assert self._run("growth", "growth", "--override", "model.M=-0.5") == EXIT_OK
            maxima = json.loads((self.temp_dir / "growth" / "growth" / "growth_maxima.json").read_text())
            assert abs(maxima["maxima"]["case2"]["G_max"] - 0.25) < 1e-9
            assert abs(maxima["maxima"]["case1"]["a"] - 1.0) < 1e-14
            print("  ✅ dispersion, landau, region-map, growth menulis output yang benar")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_simulate_command(self) -> bool:
        """simulate beberapa seed, deterministik antar run"""
        try:
            print("\n🧪 Testing simulate Command...")
            config_path = self.temp_dir / "small.env"
            config_path.write_text("sim.N = 32\nsim.t_end = 2.0\n")
            for name in ("sim_a", "sim_b"):
                code = self._run(name, "simulate", "--config", str(config_path), "--seed", "0,1")
                assert code == EXIT_OK, f"exit code {code}"

            summary = json.loads((self.temp_dir / "sim_a" / "simulate" / "summary.json").read_text())
            assert [run["seed"] for run in summary["runs"]] == [0, 1]
            for seed in (0, 1):
                a = (self.temp_dir / "sim_a" / "simulate" / f"snapshot_seed{seed}.csv").read_bytes()
                b = (self.temp_dir / "sim_b" / "simulate" / f"snapshot_seed{seed}.csv").read_bytes()
                assert a == b, f"Snapshot seed {seed} tidak deterministik"
            print("  ✅ Snapshot byte-identik antar run")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_bifurcate_command(self) -> bool:
        """bifurcate pada grid kecil menulis manifest dan file cabang"""
        try:
            print("\n🌿 Testing bifurcate Command...")
            code = self._run("bif", "bifurcate", "--override", "cont.N=64", "--override", "cont.max_points=4",
                             "--override", "cont.chi_min=3.0", "--override", "cont.chi_max=3.6",
                             "--override", "cont.modes=23")
            assert code == EXIT_OK, f"exit code {code}"
            out = self.temp_dir / "bif" / "bifurcate"
            manifest = json.loads((out / "diagram_manifest.json").read_text())
            assert manifest["N"] == 64 and not manifest["failures"]
            assert (out / "branch_homogeneous.csv").exists() and (out / "branch_mode023.csv").exists()
            print(f"  ✅ Manifest dengan {len(manifest['branches'])} cabang")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_exit_codes(self) -> bool:
        """2 untuk konfigurasi/parameter, 3 untuk kegagalan numerik"""
        try:
            print("\n🚦 Testing Exit Codes...")
            assert self._run("beta0", "thresholds", "--override", "model.beta=0") == EXIT_CONFIG
            assert self._run("badkey", "thresholds", "--override", "model.kappa=1") == EXIT_CONFIG
            assert self._run("nofile", "thresholds", "--config", str(self.temp_dir / "none.env")) == EXIT_CONFIG
            assert self._run("below", "landau", "--override", "wnl.chi_target=3.0") == EXIT_CONFIG

            code = self._run("blowup", "simulate", "--override", "sim.N=32", "--override", "sim.dt=10",
                             "--override", "sim.t_end=100000", "--seed", "0")
            assert code == EXIT_NUMERICAL, f"exit code {code}"
            summary = json.loads((self.temp_dir / "blowup" / "simulate" / "summary.json").read_text())
            assert summary["runs"][0]["error"]

            try:
                parse_arguments(["explode"])
                raise AssertionError("Command tidak dikenal diterima")
            except SystemExit as e:
                assert e.code == 2
            print("  ✅ Exit code 2/3 sesuai jenis kegagalan")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def run_all_tests(self) -> bool:
        """Jalankan semua test CLI"""
        print("🚀 Starting CLI / Run Config Tests...\n")

        tests = [
            ("RunConfig Round Trip", self.test_run_config_round_trip),
            ("RunConfig Errors", self.test_run_config_errors),
            ("Growth Law Selection", self.test_growth_law_selection),
            ("Analysis Commands", self.test_analysis_commands),
            ("simulate Command", self.test_simulate_command),
            ("bifurcate Command", self.test_bifurcate_command),
            ("Exit Codes", self.test_exit_codes),
        ]

        passed = 0
        total = len(tests)

        for test_name, test_func in tests:
            try:
                result = test_func()
                self.test_results[test_name] = result
                if result:
                    passed += 1
            except Exception as e:
                print(f"  ❌ Fatal error in {test_name}: {e}")
                self.test_results[test_name] = False

        # Summary
        print(f"\n{'='*50}")
        print("📊 CLI TEST SUMMARY")
        print(f"{'='*50}")

        for test_name, result in self.test_results.items():
            status = "✅ PASS" if result else "❌ FAIL"
            print(f"{test_name:35} : {status}")

        print(f"\nTotal: {passed}/{total} tests passed")

        if passed == total:
            print("🎉 ALL CLI TESTS PASSED!")
            return True
        print("⚠️  Some tests failed.")
        return False


def main_test():
    """Main function untuk CLI testing"""
    try:
        tester = CliIoTester()
        return tester.run_all_tests()
    except KeyboardInterrupt:
        print("\n🛑 Test cancelled by user")
        return False


if __name__ == "__main__":
    success = main_test()
    sys.exit(0 if success else 1)
