import math

import numpy as np
import pytest
from scipy import linalg

from gfdm.errors import FilterDomainError
from gfdm.models.params import GeneratorFunction, GfdmParams, PrototypeFilter
from gfdm.models.signals import ZakGrid
from gfdm.services.filters import eval_f, sample_gtilde, time_filter
from gfdm.services.metrics import (
    closed_form_condition,
    cond_closed_caseA,
    cond_closed_caseB,
    cond_numeric,
    metrics_report,
    nef,
    optimal_lambda,
    shift_function,
    sir_asymptotic,
    sir_limit,
    sir_metric,
    to_db,
    unit_roots,
    zak_from_samples,
    zak_spectrum,
)
from gfdm.services.modem import build_dense_A

RC = GeneratorFunction(name="rc")


def flat_grid(K=4, M=2, value=1.0):
    return ZakGrid(
        z=np.full((K, M), value, dtype=complex), params=GfdmParams(K=K, M=M)
    )


class TestZakSpectrum:
    """Test the closed-form Zak spectrum"""

    def test_hand_example(self, hand_params, rc_filter):
        """Test K=4, M=2, RC alpha=1, lambda=0.5"""
        zak = zak_spectrum(hand_params, rc_filter)
        assert zak.z[0, 0] == pytest.approx(1.0)
        for m in range(2):
            assert np.allclose(
                zak.sigma_sq[:, m], [1.0, 0.75, 0.5, 0.75], atol=1e-12
            )

    def test_agrees_with_dzt(self, rng, all_filters):
        """Test the closed form equals the DZT of the sampled filter"""
        for prototype in all_filters:
            for K, M in [(4, 2), (8, 5), (16, 8)]:
                params = GfdmParams(K=K, M=M, lam=float(rng.uniform()))
                closed = zak_spectrum(params, prototype).z
                sampled = zak_from_samples(
                    params, sample_gtilde(params, prototype)
                ).z
                assert np.allclose(closed, sampled, atol=1e-12)

    def test_rejects_what_sampling_rejects(self):
        """Test odd case B phases with K=6 fail like sample_gtilde"""
        params = GfdmParams(K=6, M=4, lam=0.5)
        prototype = PrototypeFilter.rrc(0.5, beta=1)
        with pytest.raises(FilterDomainError):
            sample_gtilde(params, prototype)
        with pytest.raises(FilterDomainError):
            zak_spectrum(params, prototype)

    def test_flat_band_subsymbols(self):
        """Test sigma^2 = 1 for subsymbols on the flat band"""
        params = GfdmParams(K=8, M=16, lam=0.5)
        zak = zak_spectrum(params, PrototypeFilter.rc(0.1))
        # Only the middle subsymbols touch the transition band
        assert np.allclose(zak.sigma_sq[:, :6], 1.0)
        assert np.allclose(zak.sigma_sq[:, -6:], 1.0)

    def test_case_a_singular_value_law(self, rng):
        """Test sigma^2 = (1+f^2)/2 + (1-f^2)/2 cos(2 pi k/K)"""
        K, M = 8, 8
        params = GfdmParams(K=K, M=M, lam=float(rng.uniform()))
        prototype = PrototypeFilter.rc(0.7, generator="linear")
        f = eval_f(
            (np.arange(M) + params.lam) / params.N, 0.7, K,
            prototype.generator,
        )
        cos = np.cos(2 * np.pi * np.arange(K) / K)[:, None]
        expected = (1 + f**2) / 2 + (1 - f**2) / 2 * cos
        zak = zak_spectrum(params, prototype)
        assert np.allclose(zak.sigma_sq, expected, atol=1e-12)

    @pytest.mark.parametrize("beta", [0, 1, 2, 3])
    def test_case_b_singular_value_law(self, rng, beta):
        """Test sigma^2 = 1 + sqrt(1-f^2) cos(2 pi (k - beta K/4)/K)"""
        K, M = 8, 8
        params = GfdmParams(K=K, M=M, lam=float(rng.uniform()))
        prototype = PrototypeFilter.rrc(0.6, beta=beta)
        f = eval_f((np.arange(M) + params.lam) / params.N, 0.6, K, RC)
        k = np.arange(K)[:, None]
        expected = 1 + np.sqrt(1 - f**2) * np.cos(
            2 * np.pi * (k - beta * K / 4) / K
        )
        zak = zak_spectrum(params, prototype)
        assert np.allclose(zak.sigma_sq, expected, atol=1e-12)

    def test_lambda_symmetry(self, rng, all_filters):
        """Test sigma^2_{k,m}(1-lambda) = sigma^2_{k,M-1-m}(lambda)"""
        for prototype in all_filters:
            lam = float(rng.uniform(0.01, 0.99))
            params = GfdmParams(K=8, M=5, lam=lam)
            grid = zak_spectrum(params, prototype).sigma_sq
            mirrored = zak_spectrum(
                params.with_lambda(1 - lam), prototype
            ).sigma_sq
            assert np.allclose(mirrored, grid[:, ::-1], atol=1e-12)

    def test_exact_unit_roots(self):
        """Test quarter-turn roots are exact"""
        roots = unit_roots(8)
        assert roots[0] == 1
        assert roots[2] == 1j
        assert roots[4] == -1
        assert roots[6] == -1j

    def test_unshifted_zero_is_exact(self, rc_filter):
        """Test lambda=0 with even M and K hits an exact zero"""
        zak = zak_spectrum(GfdmParams(K=8, M=8, lam=0.0), rc_filter)
        assert zak.z[4, 4] == 0
        assert np.count_nonzero(zak.z == 0) == 1


class TestConditionNumber:
    """Test numeric and closed-form condition numbers"""

    def test_flat_spectrum(self):
        """Test all |z| equal gives 1"""
        assert cond_numeric(flat_grid(value=0.3 + 0.4j)) == 1.0

    def test_hand_example(self, hand_params, rc_filter, rrc_filter):
        """Test sqrt(2) for RC and 1/tan(pi/8) for RRC"""
        assert cond_numeric(
            zak_spectrum(hand_params, rc_filter)
        ) == pytest.approx(math.sqrt(2), rel=1e-10)
        assert cond_numeric(
            zak_spectrum(hand_params, rrc_filter)
        ) == pytest.approx(1 / math.tan(math.pi / 8), rel=1e-10)
        assert cond_closed_caseA(hand_params, RC, 1.0) == pytest.approx(
            math.sqrt(2)
        )
        assert cond_closed_caseB(hand_params, RC, 1.0) == pytest.approx(
            2.414213562373095
        )

    def test_unshifted_singularity(self, rc_filter):
        """Test lambda=0 with even M and K is singular"""
        params = GfdmParams(K=8, M=8, lam=0.0)
        assert math.isinf(cond_numeric(zak_spectrum(params, rc_filter)))
        assert math.isinf(cond_closed_caseA(params, RC, 1.0))

    def test_dense_matrix_has_one_zero(self, rc_filter):
        """Test the dense A at K=M=8, lambda=0 has one null direction"""
        params = GfdmParams(K=8, M=8, lam=0.0)
        g = time_filter(sample_gtilde(params, rc_filter))
        sigma = linalg.svdvals(build_dense_A(params, g))
        assert np.count_nonzero(sigma < 1e-10 * sigma.max()) == 1

    def test_relative_threshold(self, mocker):
        """Test sigma_min below singular_rtol * sigma_max is singular"""
        grid = ZakGrid(
            z=np.array([[1.0, 1e-13], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]),
            params=GfdmParams(K=4, M=2),
        )
        assert math.isinf(cond_numeric(grid))
        settings = mocker.patch("gfdm.services.metrics.settings")
        settings.singular_rtol = 1e-15
        assert cond_numeric(grid) == pytest.approx(1e13)

    def test_flat_band_clamp(self):
        """Test M alpha <= S gives exactly 1"""
        params = GfdmParams(K=8, M=4, lam=0.5)
        assert cond_closed_caseA(params, RC, 0.1) == 1.0
        assert cond_closed_caseB(params, RC, 0.1) == 1.0
        numeric = cond_numeric(zak_spectrum(params, PrototypeFilter.rc(0.1)))
        assert numeric == pytest.approx(1.0)

    @pytest.mark.parametrize("K", [16, 32])
    @pytest.mark.parametrize("M", [8, 16])
    @pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.9])
    @pytest.mark.parametrize("lam", [0.1, 0.25, 0.5])
    def test_closed_forms_match_numeric(self, K, M, alpha, lam):
        """Test the RC and RRC closed forms against the spectrum"""
        params = GfdmParams(K=K, M=M, lam=lam)
        S = shift_function(lam, M)
        ratio = S / (alpha * M)
        expected_a = 1.0 if ratio >= 1 else 1 / math.sin(math.pi / 2 * ratio)
        expected_b = 1.0 if ratio >= 1 else 1 / math.tan(math.pi / 4 * ratio)

        rc = PrototypeFilter.rc(alpha)
        rrc = PrototypeFilter.rrc(alpha)
        numeric_a = cond_numeric(zak_spectrum(params, rc))
        numeric_b = cond_numeric(zak_spectrum(params, rrc))

        assert numeric_a == pytest.approx(expected_a, rel=1e-8)
        assert numeric_b == pytest.approx(expected_b, rel=1e-8)
        assert closed_form_condition(params, rc) == pytest.approx(
            numeric_a, rel=1e-8
        )
        assert closed_form_condition(params, rrc) == pytest.approx(
            numeric_b, rel=1e-8
        )
        assert numeric_a <= numeric_b * (1 + 1e-12)

    @pytest.mark.parametrize(
        "prototype",
        [
            PrototypeFilter.rc(0.6, generator="linear"),
            PrototypeFilter.rrc(0.6, beta=1),
            PrototypeFilter.rrc(0.6, beta=2, generator="linear"),
            PrototypeFilter.rrc(0.6, beta=3),
            PrototypeFilter.xia(0.6),
        ],
    )
    def test_other_families_match_numeric(self, prototype):
        """Test closed forms for other generators, phases and Xia"""
        for M in (4, 5, 8):
            for lam in (0.1, 0.3, 0.5, 0.8):
                params = GfdmParams(K=8, M=M, lam=lam)
                numeric = cond_numeric(zak_spectrum(params, prototype))
                closed = closed_form_condition(params, prototype)
                assert closed == pytest.approx(numeric, rel=1e-8)

    def test_closed_form_not_applicable(self):
        """Test None for odd K and odd phase sums with K not 4-divisible"""
        odd = GfdmParams(K=5, M=4, lam=0.5)
        assert closed_form_condition(odd, PrototypeFilter.rc(0.5)) is None
        six = GfdmParams(K=6, M=4, lam=0.5)
        assert closed_form_condition(six, PrototypeFilter.xia(0.5)) is None
        assert (
            closed_form_condition(six, PrototypeFilter.rrc(0.5, beta=1))
            is None
        )
        assert closed_form_condition(six, PrototypeFilter.rrc(0.5)) > 1

    def test_independent_of_K(self):
        """Test the closed form does not depend on K"""
        values = {
            cond_closed_caseA(GfdmParams(K=K, M=8, lam=0.3), RC, 0.5)
            for K in (4, 8, 16, 32)
        }
        assert len(values) == 1
        numeric = [
            cond_numeric(
                zak_spectrum(
                    GfdmParams(K=K, M=8, lam=0.3), PrototypeFilter.rc(0.5)
                )
            )
            for K in (4, 8, 16, 32)
        ]
        assert np.allclose(numeric, numeric[0], rtol=1e-10)

    def test_monotone_in_alpha_m(self):
        """Test the closed form grows with alpha M at fixed S"""
        params = GfdmParams(K=8, M=8, lam=0.25)
        values = [
            cond_closed_caseA(params, RC, alpha)
            for alpha in np.linspace(0.05, 1.0, 40)
        ]
        assert np.all(np.diff(values) >= 0)


class TestNoiseAndInterference:
    """Test NEF, SIR metric and the asymptotic interference"""

    def test_hand_example(self, hand_params, rc_filter):
        """Test NEF = 1.0625 and SIR = 1/18"""
        zak = zak_spectrum(hand_params, rc_filter)
        assert nef(zak) == pytest.approx(1.0625, abs=1e-10)
        assert sir_metric(zak) == pytest.approx(1 / 18, abs=1e-10)

    def test_flat_spectrum(self):
        """Test NEF = 1 and SIR = 0 for equal singular values"""
        assert nef(flat_grid()) == pytest.approx(1.0)
        assert sir_metric(flat_grid()) == 0.0
        assert math.isinf(to_db(0.0))

    def test_singular(self, rc_filter):
        """Test NEF is infinite on a singular spectrum"""
        zak = zak_spectrum(GfdmParams(K=8, M=8, lam=0.0), rc_filter)
        assert math.isinf(nef(zak))
        assert sir_metric(zak) > 0

    def test_lower_bounds(self, rng, all_filters):
        """Test NEF >= 1 and SIR >= 0"""
        for prototype in all_filters:
            params = GfdmParams(K=8, M=6, lam=float(rng.uniform(0.05, 0.95)))
            zak = zak_spectrum(params, prototype)
            assert nef(zak) >= 1 - 1e-12
            assert sir_metric(zak) >= 0

    def test_dense_oracles(self, rc_filter):
        """Test NEF and SIR against Frobenius norms of the dense A"""
        params = GfdmParams(K=8, M=4, lam=0.3)
        N = params.N
        g = time_filter(sample_gtilde(params, rc_filter))
        A = build_dense_A(params, g)
        zak = zak_spectrum(params, rc_filter)

        dense_nef = (
            np.linalg.norm(A) ** 2 * np.linalg.norm(np.linalg.inv(A)) ** 2
        ) / N**2
        energy = np.vdot(g, g).real
        dense_sir = (
            np.linalg.norm(A.conj().T @ A / energy - np.eye(N)) ** 2 / N
        )
        assert nef(zak) == pytest.approx(dense_nef, rel=1e-8)
        assert sir_metric(zak) == pytest.approx(dense_sir, rel=1e-8)

    def test_asymptotic_hand_value(self, rc_filter):
        """Test the RC alpha=1, K=4 interference integral"""
        expected = 3 / 32 - 1 / (4 * math.pi)
        assert sir_asymptotic(rc_filter, 4) == pytest.approx(
            expected, abs=1e-8
        )

    def test_asymptotic_vanishes_with_rolloff(self):
        """Test the integral tends to zero as alpha shrinks"""
        assert sir_asymptotic(PrototypeFilter.rc(0.01), 4) < 1e-3

    def test_limit_values(self):
        """Test the large-M limit for RC at alpha=1 and 0.5"""
        assert sir_limit(PrototypeFilter.rc(1.0), 4) == pytest.approx(
            5 / 36, rel=1e-8
        )
        assert sir_limit(PrototypeFilter.rc(0.5), 16) == pytest.approx(
            1 / 14, rel=1e-8
        )

    def test_limit_independent_of_K(self):
        """Test the limit does not change with K"""
        values = [sir_limit(PrototypeFilter.rc(0.5), K) for K in (4, 8, 16)]
        assert np.allclose(values, values[0], rtol=1e-8)

    def test_sir_metric_approaches_limit(self):
        """Test M=64, K=16, alpha=0.5 is within 5% of the limit"""
        prototype = PrototypeFilter.rc(0.5)
        params = GfdmParams(K=16, M=64, lam=optimal_lambda(64))
        value = sir_metric(zak_spectrum(params, prototype))
        assert value == pytest.approx(sir_limit(prototype, 16), rel=0.05)

    def test_sir_metric_independent_of_K(self):
        """Test the metric does not change with K"""
        prototype = PrototypeFilter.rc(0.5)
        values = [
            sir_metric(zak_spectrum(GfdmParams(K=K, M=8, lam=0.5), prototype))
            for K in (4, 8, 16)
        ]
        assert np.allclose(values, values[0], rtol=1e-10)


class TestShiftAndOptimum:
    """Test the shift function and the optimal shift"""

    def test_shift_function(self):
        """Test S for even and odd M, with folding"""
        assert shift_function(0.25, 4) == 0.5
        assert shift_function(0.25, 5) == 0.5
        assert shift_function(0.5, 4) == 1.0
        assert shift_function(0.5, 5) == 0.0
        assert shift_function(0.75, 4) == shift_function(0.25, 4)

    def test_shift_function_domain(self):
        """Test lambda outside [0, 1) is rejected"""
        with pytest.raises(FilterDomainError):
            shift_function(1.0, 4)

    def test_optimal_lambda(self):
        """Test 0.5 for even M and 0 for odd M"""
        assert optimal_lambda(16) == 0.5
        assert optimal_lambda(15) == 0.0
        with pytest.raises(FilterDomainError):
            optimal_lambda(1)

    @pytest.mark.parametrize("M", [4, 5, 8, 9])
    def test_optimum_beats_grid(self, M):
        """Test cond at the optimal shift is minimal over a lambda grid"""
        prototype = PrototypeFilter.rc(0.5)
        best = cond_numeric(
            zak_spectrum(
                GfdmParams(K=8, M=M, lam=optimal_lambda(M)), prototype
            )
        )
        for lam in np.linspace(0.0, 0.5, 20):
            params = GfdmParams(K=8, M=M, lam=float(lam))
            assert best <= cond_numeric(zak_spectrum(params, prototype))


class TestMetricsReport:
    """Test the combined report"""

    def test_hand_example(self, hand_params, rc_filter):
        """Test every field of the hand-derived configuration"""
        report = metrics_report(hand_params, rc_filter)
        assert report.cond_numeric == pytest.approx(math.sqrt(2))
        assert report.cond_closed == pytest.approx(math.sqrt(2))
        assert report.nef == pytest.approx(1.0625)
        assert report.sir_metric == pytest.approx(1 / 18)
        assert report.sir_metric_db == pytest.approx(10 * math.log10(18))
        assert report.sigma_min_sq == pytest.approx(0.5)
        assert report.sigma_max_sq == pytest.approx(1.0)
        assert report.cond_numeric == pytest.approx(
            math.sqrt(report.sigma_max_sq / report.sigma_min_sq)
        )

    def test_singular_report(self, rc_filter):
        """Test infinite values are kept as infinities"""
        report = metrics_report(GfdmParams(K=8, M=8, lam=0.0), rc_filter)
        assert math.isinf(report.cond_numeric)
        assert math.isinf(report.cond_closed)
        assert math.isinf(report.nef)
        assert math.isinf(report.nef_db)

    @pytest.mark.parametrize("M", [4, 5])
    def test_symmetry_over_lambda_grid(self, M):
        """Test metrics at lambda and 1 - lambda agree on 21 points"""
        prototype = PrototypeFilter.rc(0.5)
        for lam in np.linspace(0.01, 0.46, 21):
            params = GfdmParams(K=8, M=M, lam=float(lam))
            report = metrics_report(params, prototype)
            mirrored = metrics_report(
                params.with_lambda(1.0 - float(lam)), prototype
            )
            for name in ("cond_numeric", "nef", "sir_metric"):
                a, b = getattr(report, name), getattr(mirrored, name)
                if math.isinf(a) or math.isinf(b):
                    assert a == b
                else:
                    assert a == pytest.approx(b, rel=1e-10)
