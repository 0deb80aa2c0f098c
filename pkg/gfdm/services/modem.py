"""GFDM modulation matrix: dense construction, factorizations and receivers.

The dense matrix ``A[n, k + m*K] = g[<n - m*K>_N] * exp(j*2*pi*k*n/K)`` is
the single source of truth. Both factorizations are normalised to
reproduce it:

* time domain
  ``A = Pi_{M,K} U_{K,M}^H diag(lam_g) U_{K,M} Pi_{K,M} U_{M,K}^H``
* frequency domain
  ``A = (W_N^H/sqrt(N)) Pi_{K,M} U_{M,K}^H diag(lam_gt) U_{M,K} Pi_{M,K}
  U_{K,M} Pi_{K,M}``

with ``lam_g = sqrt(K) vec(Z_{M,K}(g))`` and
``lam_gt = vec(Z_{K,M}(g~)) / sqrt(K)``. The outer factors are unitary, so
``|lam_gt|`` are the singular values of ``A``.
"""

import math
from functools import cached_property
from typing import Any, Literal, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config.settings import settings
from ..errors import ConfigError, DimensionMismatch, SingularModulation
from ..models.params import GfdmParams
from ..models.signals import DataGrid, GfdmSignal, frozen_complex
from .filters import time_filter
from .tensor import (
    StridePermutation,
    apply_stride_permutation,
    apply_u,
    apply_u_h,
    dft_matrix,
    dzt,
    fft,
    ifft,
    u_matrix,
    vec,
)

logger = structlog.get_logger(__name__)

Domain = Literal["frequency", "time"]
Receiver = Literal["zf", "mf"]


def build_dense_A(params: GfdmParams, g) -> np.ndarray:
    """Dense N x N modulation matrix from the time-domain filter g"""
    g = np.asarray(g, dtype=complex)
    K, M, N = params.K, params.M, params.N
    if g.shape != (N,):
        raise DimensionMismatch(
            f"Filter of shape {g.shape} does not match N={N}"
        )

    n = np.arange(N)[:, None]
    column = np.arange(N)[None, :]
    k, m = column % K, column // K
    carrier = np.exp(2j * np.pi * ((k * n) % K) / K)
    return g[(n - m * K) % N] * carrier


class ModulationMatrix(BaseModel):
    """Factorized modulation matrix of one filter and block geometry"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: GfdmParams
    gtilde: np.ndarray = Field(..., description="Frequency-domain filter")
    lambda_gtilde: np.ndarray = Field(
        ..., description="Diagonal of the frequency-domain factorization"
    )
    lambda_g: np.ndarray = Field(
        ..., description="Diagonal of the time-domain factorization"
    )
    filter_energy: float = Field(..., ge=0.0, description="||g||^2")

    @model_validator(mode="before")
    @classmethod
    def coerce_arrays(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            for name in ("gtilde", "lambda_gtilde", "lambda_g"):
                if name in data:
                    data[name] = frozen_complex(data[name], 1)
        return data

    @model_validator(mode="after")
    def check_lengths(self) -> "ModulationMatrix":
        N = self.params.N
        for name in ("gtilde", "lambda_gtilde", "lambda_g"):
            if getattr(self, name).shape != (N,):
                raise DimensionMismatch(f"{name} must have length N={N}")
        return self

    @cached_property
    def dense(self) -> np.ndarray:
        """Dense A built from g = time_filter(g~); N^2 memory"""
        return build_dense_A(self.params, time_filter(self.gtilde))

    @property
    def singular_values(self) -> np.ndarray:
        return np.abs(self.lambda_gtilde)

    def factors(
        self, domain: Domain = "frequency"
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense (U, lam, V^H) with A = U diag(lam) V^H (oracle use only)"""
        K, M, N = self.params.K, self.params.M, self.params.N
        P_km = StridePermutation(L=K, Q=M).matrix()
        P_mk = StridePermutation(L=M, Q=K).matrix()
        U_km = u_matrix(K, M)
        U_mk = u_matrix(M, K)

        if domain == "time":
            U = P_km.T @ U_km.conj().T
            VH = U_km @ P_km @ U_mk.conj().T
            return U, np.array(self.lambda_g), VH
        if domain == "frequency":
            F_H = dft_matrix(N).conj().T / np.sqrt(N)
            U = F_H @ P_km @ U_mk.conj().T
            VH = U_mk @ P_mk @ U_km @ P_km
            return U, np.array(self.lambda_gtilde), VH
        raise ConfigError(f"Unknown factorization domain: {domain}")

    def reconstruct(self, domain: Domain = "frequency") -> np.ndarray:
        U, diagonal, VH = self.factors(domain)
        return (U * diagonal) @ VH

    def check_params(self, params: GfdmParams) -> None:
        if params != self.params:
            raise ConfigError(
                f"Modulation matrix was built for {self.params}, got {params}"
            )


def factorize_A(params: GfdmParams, gtilde) -> ModulationMatrix:
    """Compute both factorization diagonals from the frequency filter g~"""
    gtilde = np.asarray(gtilde, dtype=complex)
    K, M, N = params.K, params.M, params.N
    if gtilde.shape != (N,):
        raise DimensionMismatch(
            f"Filter of shape {gtilde.shape} does not match N={N}"
        )

    g = time_filter(gtilde)
    lambda_gtilde = vec(dzt(gtilde, K, M)) / np.sqrt(K)
    lambda_g = np.sqrt(K) * vec(dzt(g, M, K))
    energy = float(np.vdot(gtilde, gtilde).real) / N

    logger.debug("Factorized modulation matrix", K=K, M=M, lam=params.lam)
    return ModulationMatrix(
        params=params,
        gtilde=gtilde,
        lambda_gtilde=lambda_gtilde,
        lambda_g=lambda_g,
        filter_energy=energy,
    )


def _check_vectors(x: np.ndarray, N: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim not in (1, 2) or x.shape[-1] != N:
        raise DimensionMismatch(
            f"Expected vectors of length N={N}, got shape {x.shape}"
        )
    return x


def modulate_vectors(
    matrix: ModulationMatrix, d, domain: Domain = "frequency"
) -> np.ndarray:
    """A d for one vector or a (blocks, N) batch, without forming A"""
    K, M, N = matrix.params.K, matrix.params.M, matrix.params.N
    v = _check_vectors(d, N)

    if domain == "frequency":
        v = apply_stride_permutation(v, K, M)
        v = apply_u(v, K, M)
        v = apply_stride_permutation(v, M, K)
        v = apply_u(v, M, K)
        v = v * matrix.lambda_gtilde
        v = apply_u_h(v, M, K)
        v = apply_stride_permutation(v, K, M)
        return ifft(v) * np.sqrt(N)

    if domain == "time":
        # No N-point transform on this path
        v = apply_u_h(v, M, K)
        v = apply_stride_permutation(v, K, M)
        v = apply_u(v, K, M)
        v = v * matrix.lambda_g
        v = apply_u_h(v, K, M)
        return apply_stride_permutation(v, M, K)

    raise ConfigError(f"Unknown factorization domain: {domain}")


def _receive(matrix: ModulationMatrix, y, weights: np.ndarray) -> np.ndarray:
    K, M, N = matrix.params.K, matrix.params.M, matrix.params.N
    v = fft(_check_vectors(y, N)) / np.sqrt(N)
    v = apply_stride_permutation(v, M, K)
    v = apply_u(v, M, K)
    v = v * weights
    v = apply_u_h(v, M, K)
    v = apply_stride_permutation(v, K, M)
    v = apply_u_h(v, K, M)
    return apply_stride_permutation(v, M, K)


def zf_weights(
    matrix: ModulationMatrix, tol: Optional[float] = None
) -> np.ndarray:
    """Inverse diagonal, or SingularModulation when A is (near) singular"""
    tol = settings.zf_tolerance if tol is None else tol
    sigma = matrix.singular_values
    sigma_min, sigma_max = float(sigma.min()), float(sigma.max())
    if not sigma_min > tol * sigma_max:
        params = matrix.params
        raise SingularModulation(
            sigma_min, sigma_max, params.K, params.M, params.lam
        )
    return 1.0 / matrix.lambda_gtilde


def demodulate_vectors(
    matrix: ModulationMatrix,
    y,
    receiver: Receiver = "zf",
    tol: Optional[float] = None,
) -> np.ndarray:
    """A^{-1} y (zf) or A^H y / ||g||^2 (mf) for one vector or a batch"""
    if receiver == "zf":
        weights = zf_weights(matrix, tol)
    elif receiver == "mf":
        weights = np.conj(matrix.lambda_gtilde) / matrix.filter_energy
    else:
        raise ConfigError(f"Unknown receiver: {receiver}")
    return _receive(matrix, y, weights)


def modulate_fast(
    params: GfdmParams,
    matrix: ModulationMatrix,
    d: DataGrid,
    domain: Domain = "frequency",
) -> GfdmSignal:
    """Transmit signal A vec(D) in O(N log N)"""
    matrix.check_params(params)
    d.check_params(params)
    return GfdmSignal(samples=modulate_vectors(matrix, d.vec(), domain))


def demodulate_zf(
    params: GfdmParams,
    matrix: ModulationMatrix,
    y: GfdmSignal,
    tol: Optional[float] = None,
) -> DataGrid:
    """Zero-forcing receiver by diagonal inversion inside the factorization"""
    matrix.check_params(params)
    y.check_params(params)
    d = demodulate_vectors(matrix, y.samples, "zf", tol)
    return DataGrid.from_vec(d, params)


def demodulate_mf(
    params: GfdmParams, matrix: ModulationMatrix, y: GfdmSignal
) -> DataGrid:
    """Matched-filter receiver A^H y / ||g||^2"""
    matrix.check_params(params)
    y.check_params(params)
    d = demodulate_vectors(matrix, y.samples, "mf")
    return DataGrid.from_vec(d, params)


def add_noise(samples, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Circular Gaussian noise at the given per-block SNR"""
    samples = np.asarray(samples, dtype=complex)
    if math.isinf(snr_db) and snr_db > 0:
        return samples.copy()
    if not math.isfinite(snr_db):
        raise ConfigError(f"SNR must be finite or +inf, got {snr_db}")

    N = samples.shape[-1]
    power = np.sum(np.abs(samples) ** 2, axis=-1, keepdims=True) / N
    variance = power / 10.0 ** (snr_db / 10.0)
    noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(
        samples.shape
    )
    return samples + np.sqrt(variance / 2.0) * noise


def awgn(
    x: GfdmSignal, snr_db: float = math.inf, seed: int = 0
) -> GfdmSignal:
    """Add noise with variance ||x||^2 / (N 10^(snr/10)); +inf is a no-op"""
    rng = np.random.default_rng(seed)
    return GfdmSignal(samples=add_noise(x.samples, snr_db, rng))


def random_qpsk(params: GfdmParams, rng: np.random.Generator) -> DataGrid:
    """Unit-energy QPSK grid"""
    bits = rng.integers(0, 2, size=(2, params.K, params.M))
    symbols = ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / np.sqrt(2.0)
    return DataGrid(symbols=symbols)
