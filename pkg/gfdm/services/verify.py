"""Cross-module oracle suite.

Every check compares a fast or closed-form result against a brute-force
dense computation over seeded random configurations.
"""

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog
from scipy import linalg

from ..config.settings import settings
from ..models.params import FilterFamily, GfdmParams, PrototypeFilter
from ..models.reports import CheckResult
from .filters import sample_gtilde, time_filter
from .metrics import (
    closed_form_condition,
    cond_numeric,
    metrics_report,
    zak_spectrum,
)
from .modem import (
    ModulationMatrix,
    demodulate_vectors,
    factorize_A,
    modulate_vectors,
)
from .tensor import (
    block_circulant_build,
    block_circulant_factorize,
    block_circulant_reconstruct,
    u_matrix,
    unvec,
)

logger = structlog.get_logger(__name__)

Config = Tuple[GfdmParams, PrototypeFilter]


def _relative_error(actual, expected) -> float:
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(actual - expected))) / scale


def _random_filter(rng: np.random.Generator, K: int) -> PrototypeFilter:
    family = FilterFamily(rng.choice(["a", "b", "xia"]))
    alpha = float(rng.uniform(0.1, 1.0))
    generator = str(rng.choice(["rc", "linear"]))
    beta = 0
    if family == FilterFamily.CASE_B:
        beta = int(rng.choice([0, 1, 2, 3] if K % 4 == 0 else [0, 2]))
    return PrototypeFilter(
        family=family, alpha=alpha, beta=beta, generator=generator
    )


def _random_configs(
    rng: np.random.Generator,
    cases: int,
    quick: bool,
    lam_range: Tuple[float, float] = (0.0, 1.0),
) -> List[Config]:
    sizes_k = [4, 8] if quick else [4, 8, 16]
    sizes_m = [2, 3, 4, 5, 8] if quick else [2, 3, 4, 5, 8, 16]
    configs = []
    for _ in range(cases):
        K = int(rng.choice(sizes_k))
        M = int(rng.choice(sizes_m))
        lam = float(rng.uniform(*lam_range))
        params = GfdmParams(K=K, M=M, lam=lam)
        configs.append((params, _random_filter(rng, K)))
    return configs


def _matrix(config: Config) -> ModulationMatrix:
    params, prototype = config
    return factorize_A(params, sample_gtilde(params, prototype))


def check_dense_vs_frequency(rng, cases, quick) -> Tuple[int, float]:
    errors = [
        _relative_error(m.reconstruct("frequency"), m.dense)
        for m in map(_matrix, _random_configs(rng, cases, quick))
    ]
    return len(errors), max(errors)


def check_dense_vs_time(rng, cases, quick) -> Tuple[int, float]:
    errors = [
        _relative_error(m.reconstruct("time"), m.dense)
        for m in map(_matrix, _random_configs(rng, cases, quick))
    ]
    return len(errors), max(errors)


def check_appendix(rng, cases, quick) -> Tuple[int, float]:
    errors = []
    for _ in range(20 if quick else 50):
        L, Q = (int(v) for v in rng.integers(1, 9, size=2))
        V = rng.standard_normal((L, Q)) + 1j * rng.standard_normal((L, Q))
        permutation, diagonal = block_circulant_factorize(V)
        errors.append(
            _relative_error(
                block_circulant_reconstruct(permutation, diagonal),
                block_circulant_build(V),
            )
        )

    for config in _random_configs(rng, cases, quick):
        params = config[0]
        K, M, N = params.K, params.M, params.N
        matrix = _matrix(config)
        g = time_filter(matrix.gtilde)
        generator = np.sqrt(K) * unvec(g, K, M)

        _, lambda_g = block_circulant_factorize(generator)
        _, lambda_gt = block_circulant_factorize(
            np.sqrt(M) * unvec(matrix.gtilde, M, K)
        )
        dense = block_circulant_build(generator) @ u_matrix(M, K).conj().T
        errors.extend(
            [
                _relative_error(lambda_g, matrix.lambda_g),
                _relative_error(lambda_gt / np.sqrt(N), matrix.lambda_gtilde),
                _relative_error(dense, matrix.dense),
            ]
        )
    return len(errors), max(errors)


def check_svd_vs_zak(rng, cases, quick) -> Tuple[int, float]:
    errors = []
    for config in _random_configs(rng, cases, quick):
        params, prototype = config
        numeric = np.sort(linalg.svdvals(_matrix(config).dense))
        zak = zak_spectrum(params, prototype)
        closed = np.sort(np.abs(zak.z).reshape(-1)) / np.sqrt(params.K)
        errors.append(_relative_error(numeric, closed))
    return len(errors), max(errors)


def check_closed_vs_numeric(rng, cases, quick) -> Tuple[int, float]:
    sizes_k = [8] if quick else [16, 32]
    sizes_m = [4, 8] if quick else [8, 16]
    prototypes = [
        PrototypeFilter.rc(alpha, generator)
        for alpha in (0.1, 0.3, 0.5, 0.9)
        for generator in ("rc", "linear")
    ]
    prototypes += [
        PrototypeFilter.rrc(p.alpha, 0, p.generator.name) for p in prototypes
    ]
    prototypes += [PrototypeFilter.xia(0.5), PrototypeFilter.rrc(0.5, 1)]

    errors = []
    for K in sizes_k:
        for M in sizes_m:
            for lam in (0.0, 0.1, 0.25, 0.5, 0.75):
                params = GfdmParams(K=K, M=M, lam=lam)
                for prototype in prototypes:
                    closed = closed_form_condition(params, prototype)
                    if closed is None:
                        continue
                    numeric = cond_numeric(zak_spectrum(params, prototype))
                    if np.isinf(closed) or np.isinf(numeric):
                        errors.append(0.0 if closed == numeric else np.inf)
                    else:
                        errors.append(abs(numeric - closed) / closed)
    return len(errors), max(errors)


def check_lambda_symmetry(rng, cases, quick) -> Tuple[int, float]:
    errors = []
    for params, prototype in _random_configs(
        rng, cases, quick, lam_range=(0.01, 0.99)
    ):
        mirrored = params.with_lambda(1.0 - params.lam)
        grid = zak_spectrum(params, prototype).sigma_sq
        mirrored_grid = zak_spectrum(mirrored, prototype).sigma_sq
        errors.append(_relative_error(mirrored_grid, grid[:, ::-1]))

        report = metrics_report(params, prototype)
        mirrored_report = metrics_report(mirrored, prototype)
        for name in ("cond_numeric", "nef", "sir_metric"):
            a = getattr(report, name)
            b = getattr(mirrored_report, name)
            if np.isinf(a) or np.isinf(b):
                errors.append(0.0 if a == b else np.inf)
            else:
                errors.append(abs(a - b) / max(1.0, abs(b)))
    return len(errors), max(errors)


def check_fast_modulation(rng, cases, quick) -> Tuple[int, float]:
    errors = []
    for config in _random_configs(rng, cases, quick):
        matrix = _matrix(config)
        N = config[0].N
        d = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        expected = matrix.dense @ d
        matched = matrix.dense.conj().T @ d / matrix.filter_energy
        errors.extend(
            [
                _relative_error(modulate_vectors(matrix, d), expected),
                _relative_error(
                    modulate_vectors(matrix, d, "time"), expected
                ),
                _relative_error(demodulate_vectors(matrix, d, "mf"), matched),
            ]
        )
    return len(errors), max(errors)


def check_zf_round_trip(rng, cases, quick) -> Tuple[int, float]:
    errors = []
    for config in _random_configs(rng, cases, quick):
        matrix = _matrix(config)
        sigma = matrix.singular_values
        if sigma.min() * 1e6 <= sigma.max():
            continue
        N = config[0].N
        d = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        y = modulate_vectors(matrix, d)
        errors.append(_relative_error(demodulate_vectors(matrix, y), d))
    return len(errors), max(errors, default=0.0)


CheckFunction = Callable[
    [np.random.Generator, int, bool], Tuple[int, float]
]

CHECKS: Dict[str, Tuple[CheckFunction, float]] = {
    "dense_vs_frequency_factorization": (check_dense_vs_frequency, 1e-10),
    "dense_vs_time_factorization": (check_dense_vs_time, 1e-10),
    "appendix_block_circulant": (check_appendix, 1e-10),
    "svd_vs_zak": (check_svd_vs_zak, 1e-9),
    "closed_vs_numeric_cond": (check_closed_vs_numeric, 1e-8),
    "lambda_symmetry": (check_lambda_symmetry, 1e-10),
    "fast_modulation_vs_dense": (check_fast_modulation, 1e-10),
    "zf_round_trip": (check_zf_round_trip, 1e-9),
}


def run_verification(
    quick: bool = False,
    seed: Optional[int] = None,
    cases: Optional[int] = None,
) -> List[CheckResult]:
    """Run every oracle check; each one gets its own seeded generator"""
    seed = settings.verify_seed if seed is None else seed
    cases = settings.verify_cases if cases is None else cases

    results = []
    for offset, (name, (check, tolerance)) in enumerate(CHECKS.items()):
        rng = np.random.default_rng(seed + offset)
        count, max_error = check(rng, cases, quick)
        result = CheckResult(
            name=name,
            cases=count,
            max_error=float(max_error),
            tolerance=tolerance,
            passed=bool(max_error <= tolerance),
        )
        log = logger.info if result.passed else logger.warning
        log(
            "Check finished",
            check=name,
            cases=count,
            max_error=result.max_error,
            passed=result.passed,
        )
        results.append(result)
    return results
