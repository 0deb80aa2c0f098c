"""Zak spectrum, condition numbers, NEF and self-interference metrics.

The squared singular values of the modulation matrix are
``|z_{k,m}|^2 / K`` with

    z_{k,m} = H((m + lambda)/N) + H*((M - m - lambda)/N) exp(j 2 pi k/K)

Every metric below is invariant to the common factor 1/K, so the grid
keeps ``|z|^2`` unscaled.
"""

import math
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy import integrate

from ..config.settings import settings
from ..errors import FilterDomainError
from ..models.params import (
    FilterFamily,
    GeneratorFunction,
    GfdmParams,
    PrototypeFilter,
)
from ..models.reports import MetricsReport
from ..models.signals import ZakGrid
from .filters import eval_H
from .tensor import dzt

logger = structlog.get_logger(__name__)

# Exact values of exp(j pi q / 2)
_QUARTER_ROOTS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def unit_roots(K: int) -> np.ndarray:
    """exp(j 2 pi k / K) for k < K, exact at multiples of pi/2"""
    k = np.arange(K)
    roots = np.exp(2j * np.pi * k / K)
    for i in k[(4 * k) % K == 0]:
        roots[i] = _QUARTER_ROOTS[(4 * i // K) % 4]
    return roots


def shift_function(lam: float, M: int) -> float:
    """S(lambda): 2 lambda for even M, 1 - 2 lambda for odd M

    lambda in (1/2, 1) is folded to 1 - lambda.
    """
    if not 0.0 <= lam < 1.0:
        raise FilterDomainError(f"lambda must lie in [0, 1), got {lam}")
    folded = min(lam, 1.0 - lam)
    return 2.0 * folded if M % 2 == 0 else 1.0 - 2.0 * folded


def _zak_frequencies(params: GfdmParams) -> Tuple[np.ndarray, np.ndarray]:
    m = np.arange(params.M)
    nu_a = (m + params.lam) / params.N
    nu_b = (params.M - m - params.lam) / params.N
    return nu_a, nu_b


def zak_spectrum(params: GfdmParams, prototype: PrototypeFilter) -> ZakGrid:
    """Closed-form K x M Zak grid of the shifted, sampled filter"""
    prototype.check_subcarriers(params.K)
    nu_a, nu_b = _zak_frequencies(params)
    head = np.asarray(eval_H(nu_a, prototype, params.K))
    tail = np.conj(np.asarray(eval_H(nu_b, prototype, params.K)))
    z = head[None, :] + tail[None, :] * unit_roots(params.K)[:, None]
    return ZakGrid(z=z, params=params)


def zak_from_samples(params: GfdmParams, gtilde) -> ZakGrid:
    """Zak grid computed from the sampled filter by the DZT"""
    return ZakGrid(z=dzt(gtilde, params.K, params.M), params=params)


def cond_numeric(zak: ZakGrid) -> float:
    """sigma_max / sigma_min, infinite for a singular spectrum"""
    sigma = np.abs(zak.z)
    sigma_max, sigma_min = float(sigma.max()), float(sigma.min())
    if sigma_min < 1e-300 or sigma_min <= settings.singular_rtol * sigma_max:
        return math.inf
    return sigma_max / sigma_min


def _closest_f(
    params: GfdmParams, generator: GeneratorFunction, alpha: float
) -> Optional[float]:
    # f at the sample nearest the transition centre, None on the flat band
    S = shift_function(params.lam, params.M)
    if alpha * params.M <= S:
        return None
    return float(generator(S / (alpha * params.M)))


def cond_closed_caseA(
    params: GfdmParams, generator: GeneratorFunction, alpha: float
) -> float:
    """1 / |f^a(S / (alpha M))|, or 1 when alpha M <= S"""
    f = _closest_f(params, generator, alpha)
    if f is None:
        return 1.0
    if f == 0.0:
        return math.inf
    return 1.0 / abs(f)


def cond_closed_caseB(
    params: GfdmParams, generator: GeneratorFunction, alpha: float
) -> float:
    """(1 + sqrt(1 - f^2)) / |f|, equal to |f| / (1 - sqrt(1 - f^2))"""
    f = _closest_f(params, generator, alpha)
    if f is None:
        return 1.0
    if f == 0.0:
        return math.inf
    return (1.0 + math.sqrt(max(0.0, 1.0 - f * f))) / abs(f)


def closed_form_condition(
    params: GfdmParams, prototype: PrototypeFilter
) -> Optional[float]:
    """Closed-form condition number, or None where it does not apply"""
    if params.K % 2 == 1:
        return None

    if prototype.family == FilterFamily.CASE_A:
        return cond_closed_caseA(params, prototype.generator, prototype.alpha)

    # Xia phases add up to pi/2, which behaves like beta = 1
    odd_phase = (
        prototype.family == FilterFamily.XIA or prototype.beta % 2 == 1
    )
    if odd_phase and params.K % 4 != 0:
        return None
    return cond_closed_caseB(params, prototype.generator, prototype.alpha)


def nef(zak: ZakGrid) -> float:
    """(1/N^2) sum(sigma^2) sum(1/sigma^2)"""
    if math.isinf(cond_numeric(zak)):
        return math.inf
    sigma_sq = zak.sigma_sq
    return float(np.mean(sigma_sq) * np.mean(1.0 / sigma_sq))


def sir_metric(zak: ZakGrid) -> float:
    """(1/N) sum (sigma^2 / mean(sigma^2) - 1)^2"""
    sigma_sq = zak.sigma_sq
    mean = np.mean(sigma_sq)
    if mean == 0.0:
        return math.inf
    return float(np.mean((sigma_sq / mean - 1.0) ** 2))


def to_db(value: float) -> float:
    """-10 log10(value) with the limits mapped to +-inf"""
    if value == 0.0:
        return math.inf
    if math.isinf(value):
        return -math.inf
    return -10.0 * math.log10(value)


def sir_asymptotic(prototype: PrototypeFilter, K: int) -> float:
    """2 * integral of |H|^2 from 1/(2K) to 1/2"""
    if K < 1:
        raise FilterDomainError(f"K must be positive, got {K}")

    def energy(nu: float) -> float:
        return abs(eval_H(nu, prototype, K)) ** 2

    # H vanishes beyond 1/K
    upper = min(1.0 / K, 0.5)
    lower = 0.5 / K
    edge = (1.0 + prototype.alpha) / (2.0 * K)
    value, _ = integrate.quad(
        energy,
        lower,
        upper,
        points=[edge] if lower < edge < upper else None,
        limit=settings.quad_limit,
        epsabs=1e-13,
        epsrel=1e-10,
    )
    return 2.0 * value


def sir_limit(prototype: PrototypeFilter, K: int) -> float:
    """Large-M limit of sir_metric

    The subsymbol index becomes a continuous position t in [0, 1] and the
    grid mean is replaced by integrals over t, averaged over k.
    """
    roots = unit_roots(K)
    alpha = prototype.alpha
    breaks = [0.5 * (1.0 - alpha), 0.5 * (1.0 + alpha)]
    breaks = [b for b in breaks if 0.0 < b < 1.0] or None

    def sigma_sq(t: float) -> np.ndarray:
        head = eval_H(t / K, prototype, K)
        tail = np.conj(eval_H((1.0 - t) / K, prototype, K))
        return np.abs(head + tail * roots) ** 2

    def quad(func) -> float:
        value, _ = integrate.quad(
            func,
            0.0,
            1.0,
            points=breaks,
            limit=settings.quad_limit,
            epsabs=1e-13,
            epsrel=1e-10,
        )
        return value

    mean = quad(lambda t: float(np.mean(sigma_sq(t))))
    return quad(lambda t: float(np.mean((sigma_sq(t) / mean - 1.0) ** 2)))


def optimal_lambda(M: int) -> float:
    """Shift that minimises the condition number"""
    if M < 2:
        raise FilterDomainError(f"M must be at least 2, got {M}")
    return 0.5 if M % 2 == 0 else 0.0


def metrics_report(
    params: GfdmParams, prototype: PrototypeFilter
) -> MetricsReport:
    """All spectrum metrics of one configuration"""
    zak = zak_spectrum(params, prototype)
    sigma_sq = zak.sigma_sq
    sir = sir_metric(zak)
    report = MetricsReport(
        cond_numeric=cond_numeric(zak),
        cond_closed=closed_form_condition(params, prototype),
        nef=nef(zak),
        sir_metric=sir,
        sir_metric_db=to_db(sir),
        sigma_min_sq=float(sigma_sq.min()),
        sigma_max_sq=float(sigma_sq.max()),
    )
    logger.debug(
        "Computed metrics",
        K=params.K,
        M=params.M,
        lam=params.lam,
        filter=prototype.label,
        cond=report.cond_numeric,
    )
    return report
