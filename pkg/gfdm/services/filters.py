"""Frequency-sampled prototype filters with a fractional sampling shift."""

import numpy as np
import structlog

from ..errors import DimensionMismatch, FilterDomainError
from ..models.params import (
    FilterFamily,
    GeneratorFunction,
    GfdmParams,
    PrototypeFilter,
)
from .tensor import ifft

logger = structlog.get_logger(__name__)

# Slack on the support edges of eval_f for values computed in floating point
_EDGE_TOL = 1e-12


def eval_f(nu, alpha: float, K: int, generator: GeneratorFunction):
    """Piecewise generator response f(nu) on [0, 1/K]

    f is 1 on the flat band, follows the generator on the transition band
    of width alpha/K centred at 1/(2K) and is -1 above it. It satisfies
    f(nu) = -f(1/K - nu).
    """
    if not 0.0 < alpha <= 1.0:
        raise FilterDomainError(f"Roll-off must lie in (0, 1], got {alpha}")

    nu = np.asarray(nu, dtype=float)
    upper = 1.0 / K
    if np.any(nu < -_EDGE_TOL) or np.any(nu > upper + _EDGE_TOL):
        raise FilterDomainError(
            f"eval_f is defined on [0, 1/K] = [0, {upper}]"
        )

    nu = np.clip(nu, 0.0, upper)
    x = np.clip((2.0 * K / alpha) * (nu - 0.5 / K), -1.0, 1.0)
    lower_edge = (1.0 - alpha) / (2.0 * K)
    upper_edge = (1.0 + alpha) / (2.0 * K)

    f = np.where(nu <= lower_edge, 1.0, np.where(nu >= upper_edge, -1.0, 0.0))
    band = (nu > lower_edge) & (nu < upper_edge)
    f = np.where(band, generator(x), f)
    return f if f.ndim else float(f)


def _phase(f, nu, prototype: PrototypeFilter, K: int):
    if prototype.family == FilterFamily.CASE_B:
        return 0.5 * np.pi * prototype.beta * K * nu
    # Principal branch keeps the phase in [0, pi/2]
    return 0.5 * np.arccos(np.clip(f, -1.0, 1.0))


def eval_H(nu, prototype: PrototypeFilter, K: int):
    """Frequency response H(nu), periodic with period 1

    Negative frequencies use the Hermitian extension H(-nu) = H*(nu); the
    response vanishes for 1/K <= |nu| <= 1/2.
    """
    nu = np.asarray(nu, dtype=float)
    wrapped = nu - np.floor(nu + 0.5)
    magnitude = np.abs(wrapped)
    inside = magnitude < 1.0 / K

    f = eval_f(np.where(inside, magnitude, 0.0), prototype.alpha, K,
               prototype.generator)
    f = np.asarray(f, dtype=float)

    if prototype.family == FilterFamily.CASE_A:
        H = (0.5 * (1.0 + f)).astype(complex)
    else:
        amplitude = np.sqrt(np.clip(0.5 * (1.0 + f), 0.0, None))
        H = amplitude * np.exp(1j * _phase(f, magnitude, prototype, K))

    H = np.where(wrapped < 0.0, np.conj(H), H)
    H = np.where(inside, H, 0.0)
    return H if H.ndim else complex(H)


def sample_gtilde(
    params: GfdmParams, prototype: PrototypeFilter
) -> np.ndarray:
    """Sample H with shift lambda into the length-N frequency filter

    Entries n < M - lambda take H((n + lambda)/N), entries
    n > N - M - lambda take H*((N - n - lambda)/N) and the first branch wins
    where both apply. All other entries are zero.
    """
    prototype.check_subcarriers(params.K)

    K, M, N, lam = params.K, params.M, params.N, params.lam
    n = np.arange(N)
    first = n < M - lam
    second = (n > N - M - lam) & ~first

    gtilde = np.zeros(N, dtype=complex)
    gtilde[first] = eval_H((n[first] + lam) / N, prototype, K)
    gtilde[second] = np.conj(eval_H((N - n[second] - lam) / N, prototype, K))

    logger.debug(
        "Sampled prototype filter",
        K=K,
        M=M,
        lam=lam,
        filter=prototype.label,
        nonzeros=int(np.count_nonzero(gtilde)),
    )
    return gtilde


def time_filter(gtilde) -> np.ndarray:
    """g = W_N^H g~ / N, so that W_N g = g~"""
    gtilde = np.asarray(gtilde, dtype=complex)
    if gtilde.ndim != 1 or gtilde.size == 0:
        raise DimensionMismatch(
            f"Expected a non-empty filter vector, got {gtilde.shape}"
        )
    return ifft(gtilde)
