#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Test Model Inti: Growth Law, Kemotaksis, Equilibria
===================================================

Test growth law logistik/Allee, kalibrasi Lambda (Case 1 dan Case 2),
sensitivitas kemotaksis, dan equilibria sistem homogen.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import logging

import numpy as np

from model_core import (GrowthLaw, InvalidThresholdError, ModelParameterError, ModelParams,
                        case2_peak_location, chemotaxis_sensitivity,
                        chemotaxis_sensitivity_derivative, destruction_factor, equilibria,
                        growth_derivative, growth_maximum, growth_profile_table, growth_rate,
                        lambda_case1, lambda_case2)

# Setup logging untuk test
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


class ModelCoreTester:
    """Test growth law dan equilibria"""

    def __init__(self):
        self.test_results = {}
        print("🧬 MODEL CORE TESTER")
        print("=" * 50)

    def test_growth_law_constants(self) -> bool:
        """a, omega, dan xi untuk logistik dan Allee"""
        try:
            print("\n🌱 Testing Growth Law Constants...")

            logistic = GrowthLaw.logistic()
            assert logistic.j == 1 and logistic.a == 1.0 and logistic.omega == 0.0

            allee = GrowthLaw.allee(M=0.3, Lambda=2.0)
            assert allee.j == 2
            assert abs(allee.a - 1.4) < 1e-15
            assert abs(allee.omega - 1.0 / 0.7) < 1e-15
            assert allee.is_strong_allee and not allee.is_weak_allee
            assert GrowthLaw.allee(M=-0.5, Lambda=1.0).is_weak_allee

            params = ModelParams.defaults(eps=0.25)
            assert abs(params.xi - 0.5) < 1e-15
            print(f"  ✅ logistic a=1, allee(M=0.3, Lambda=2) a={allee.a:.3f}, omega={allee.omega:.4f}")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_taylor_expansion(self) -> bool:
        """G(1+u) = -a u - a(1+omega) u^2 - a omega u^3 (eksak untuk polinomial)"""
        try:
            print("\n📐 Testing Taylor Expansion about m = 1...")
            u = np.linspace(-0.5, 0.5, 41)
            for law in (GrowthLaw.logistic(), GrowthLaw.allee(0.02, 1.7), GrowthLaw.case2(-0.5)):
                a, w = law.a, law.omega
                expected = -a * u - a * (1 + w) * u ** 2 - a * w * u ** 3
                error = np.max(np.abs(growth_rate(1.0 + u, law) - expected))
                assert error < 1e-13, f"{law.describe()}: error {error:.2e}"
                assert abs(growth_derivative(1.0, law) + a) < 1e-14
                print(f"  ✅ {law.describe()}: max error {error:.1e}")

            # Phi(1+u) = chi (1/2 + u/4 - u^2/8 + u^3/16) + O(u^4)
            chi, small = 3.0, 1e-3
            series = chi * (0.5 + small / 4 - small ** 2 / 8 + small ** 3 / 16)
            assert abs(chemotaxis_sensitivity(1.0 + small, chi) - series) < chi * small ** 4
            print("  ✅ Ekspansi Phi cocok sampai orde tiga")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_lambda_calibration(self) -> bool:
        """Case 1 memberi a = 1; Case 2 memberi max G = 1/4 dan Lambda_2 (1-M) > 1"""
        try:
            print("\n⚖️  Testing Lambda Calibration...")

            for M in (-0.5, -0.1, 0.02, 0.5):
                law = GrowthLaw.case1(M)
                assert abs(law.a - 1.0) < 1e-14, f"Case 1 a={law.a} untuk M={M}"
                assert abs(lambda_case1(M) * (1 - M) - 1.0) < 1e-14

            assert abs(lambda_case2(-0.5) - 0.9466) < 1e-3, f"Lambda_2(-0.5)={lambda_case2(-0.5)}"
            print(f"  ✅ Lambda_2(M=-0.5) = {lambda_case2(-0.5):.6f}")

            for M in np.linspace(-1.0, 0.9, 20):
                law = GrowthLaw.case2(float(M))
                m_max, g_max = growth_maximum(law)
                assert abs(g_max - 0.25) < 1e-9, f"max G_2 = {g_max} untuk M={M}"
                assert abs(m_max - case2_peak_location(float(M))) < 1e-5
                assert law.Lambda * (1 - M) > 1.0, f"Lambda_2 (1-M) <= 1 untuk M={M}"

            m_log, g_log = growth_maximum(GrowthLaw.logistic())
            assert abs(m_log - 0.5) < 1e-6 and abs(g_log - 0.25) < 1e-12
            print("  ✅ max G_2(Lambda_2) = 1/4 = max G_1 dan Lambda_2 (1-M) > 1")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_parameter_validation(self) -> bool:
        """M >= 1, tau/eps/r <= 0, beta/delta < 0 ditolak"""
        try:
            print("\n🛡️  Testing Parameter Validation...")
            rejected = 0
            cases = [
                lambda: GrowthLaw.allee(M=1.0, Lambda=1.0),
                lambda: GrowthLaw.case1(1.2),
                lambda: GrowthLaw.case2(1.0),
                lambda: ModelParams.defaults(tau=0.0),
                lambda: ModelParams.defaults(eps=-0.1),
                lambda: ModelParams.defaults(r=0.0),
                lambda: ModelParams.defaults(beta=-1.0),
                lambda: ModelParams.defaults(delta=-0.5),
            ]
            for factory in cases:
                try:
                    factory()
                except ModelParameterError:
                    rejected += 1
            assert rejected == len(cases), f"Hanya {rejected}/{len(cases)} kasus ditolak"

            try:
                GrowthLaw.allee(M=1.0, Lambda=1.0)
                raise AssertionError("M = 1 tidak ditolak")
            except InvalidThresholdError:
                pass

            # beta = 0 valid untuk model, tapi tanpa mekanisme Turing
            assert ModelParams.defaults(beta=0.0).beta == 0.0
            print(f"  ✅ {rejected} parameter invalid ditolak")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_equilibria(self) -> bool:
        """P*, P# (strong Allee saja) dan zero line"""
        try:
            print("\n⚖️  Testing Equilibria...")

            logistic = equilibria(ModelParams.defaults())
            assert logistic.coexistence.state == (1.0, 2.0, 1.0)
            assert logistic.coexistence.stable
            assert logistic.sharp is None
            assert not logistic.zero_line.transverse_stable
            print("  ✅ Logistik: P* stabil, tidak ada P#, zero line tidak stabil transversal")

            params = ModelParams.defaults(growth=GrowthLaw.allee(0.3, 2.0))
            strong = equilibria(params)
            assert strong.sharp is not None
            assert strong.sharp.state[0] == 0.3
            assert abs(strong.sharp.eigenvalues[0] - 2.0 * 0.3 * 0.7) < 1e-14
            assert not strong.sharp.stable
            assert strong.zero_line.transverse_stable
            assert strong.zero_line.point(0.5) == (0.0, 0.5, 0.5)
            print(f"  ✅ Strong Allee: P# tidak stabil (G'(M)={strong.sharp.eigenvalues[0]:.3f}), "
                  f"zero line stabil transversal")

            weak = equilibria(ModelParams.defaults(growth=GrowthLaw.case1(-0.5)))
            assert weak.sharp is None
            assert weak.zero_line.transverse_rate > 0
            assert abs(weak.coexistence.eigenvalues[0] + 1.0) < 1e-14
            assert weak.coexistence.eigenvalues[1:] == (-1.0, -0.5)
            print("  ✅ Weak Allee: tanpa P#, P* stabil")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_chemotaxis_and_destruction(self) -> bool:
        """Phi, Phi' (cek finite difference) dan F(m)"""
        try:
            print("\n🧲 Testing Chemotaxis Sensitivity...")
            m = np.linspace(0.0, 3.0, 31)
            chi, h = 4.0, 1e-6
            fd = (chemotaxis_sensitivity(m + h, chi) - chemotaxis_sensitivity(m - h, chi)) / (2 * h)
            assert np.max(np.abs(fd - chemotaxis_sensitivity_derivative(m, chi))) < 1e-7
            assert chemotaxis_sensitivity(1.0, chi) == chi / 2
            assert destruction_factor(1.0) == 0.5
            assert np.all(np.diff(destruction_factor(m)) > 0)
            print("  ✅ Phi' cocok dengan finite difference, F monoton")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def test_growth_profile_table(self) -> bool:
        """Tabel profil G1, G2(Lambda_1), G2(Lambda_2)"""
        try:
            print("\n📊 Testing Growth Profile Table...")
            table = growth_profile_table(-0.5, 101)
            assert table.shape == (101, 4)
            m = table[:, 0]
            assert np.allclose(table[:, 1], m * (1 - m), atol=1e-15)
            # Profil Allee lebih rendah dari logistik di dekat m = 0 (Case 1)
            assert table[5, 2] < table[5, 1]
            assert abs(np.max(table[:, 3]) - 0.25) < 1e-3
            print("  ✅ Profil growth law konsisten")
            return True

        except AssertionError as e:
            print(f"  ❌ Assertion gagal: {e}")
            return False

    def run_all_tests(self) -> bool:
        """Jalankan semua test model inti"""
        print("🚀 Starting Model Core Tests...\n")

        tests = [
            ("Growth Law Constants", self.test_growth_law_constants),
            ("Taylor Expansion", self.test_taylor_expansion),
            ("Lambda Calibration", self.test_lambda_calibration),
            ("Parameter Validation", self.test_parameter_validation),
            ("Equilibria", self.test_equilibria),
            ("Chemotaxis & Destruction", self.test_chemotaxis_and_destruction),
            ("Growth Profile Table", self.test_growth_profile_table),
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
        print("📊 MODEL CORE TEST SUMMARY")
        print(f"{'='*50}")

        for test_name, result in self.test_results.items():
            status = "✅ PASS" if result else "❌ FAIL"
            print(f"{test_name:35} : {status}")

        print(f"\nTotal: {passed}/{total} tests passed")

        if passed == total:
            print("🎉 ALL MODEL CORE TESTS PASSED!")
            return True
        print("⚠️  Some tests failed.")
        return False


def main():
    """Main function untuk model core testing"""
    try:
        tester = ModelCoreTester()
        return tester.run_all_tests()
    except KeyboardInterrupt:
        print("\n🛑 Test cancelled by user")
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
