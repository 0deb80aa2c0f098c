"""Structured linear algebra on flat complex vectors.

Conventions follow the modulation-matrix algebra used throughout the
package:

* ``vec`` stacks columns, so for an ``L x Q`` matrix ``X`` entry ``(i, j)``
  lands at index ``i + j*L``;
* the DFT matrix is unnormalised, ``[W_N]_{i,j} = exp(-2j*pi*i*j/N)``, and
  ``ifft`` divides by ``N``;
* ``U_{L,Q} = I_L (x) W_Q / sqrt(Q)`` acts on ``L`` contiguous blocks of
  length ``Q``.

Fast paths never materialise permutation or Kronecker matrices; the dense
builders (``dft_matrix``, ``u_matrix``, ``StridePermutation.matrix``,
``block_circulant_build``) exist for oracle checks.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DimensionMismatch

logger = structlog.get_logger(__name__)


def _as_complex(x) -> np.ndarray:
    array = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(array)):
        raise ValueError("Input entries must be finite")
    return array


def _check_length(x: np.ndarray, expected: int) -> None:
    if x.shape[-1] != expected:
        raise DimensionMismatch(
            f"Expected trailing length {expected}, got {x.shape[-1]}"
        )


def vec(X) -> np.ndarray:
    """Column-stacking vectorisation of an L x Q matrix"""
    X = _as_complex(X)
    if X.ndim != 2:
        raise DimensionMismatch(f"vec expects a matrix, got {X.shape}")
    return X.T.reshape(-1)


def unvec(x, L: int, Q: int) -> np.ndarray:
    """Inverse of vec: length-LQ vector to an L x Q matrix"""
    x = _as_complex(x)
    if x.shape != (L * Q,):
        raise DimensionMismatch(
            f"unvec_{L},{Q} expects length {L * Q}, got {x.shape}"
        )
    return x.reshape(Q, L).T


def apply_stride_permutation(x, L: int, Q: int) -> np.ndarray:
    """Pi_{L,Q} x = vec(unvec_{L,Q}(x)^T), batched over leading axes"""
    x = _as_complex(x)
    _check_length(x, L * Q)
    lead = x.shape[:-1]
    blocks = x.reshape(*lead, Q, L)
    return np.swapaxes(blocks, -1, -2).reshape(*lead, L * Q)


class StridePermutation(BaseModel):
    """Stride permutation Pi_{L,Q} as an index map"""

    model_config = ConfigDict(frozen=True)

    L: int = Field(..., ge=1)
    Q: int = Field(..., ge=1)

    @property
    def size(self) -> int:
        return self.L * self.Q

    @property
    def indices(self) -> np.ndarray:
        """perm such that (Pi x)[i] = x[perm[i]]"""
        return np.arange(self.size).reshape(self.Q, self.L).T.reshape(-1)

    def apply(self, x) -> np.ndarray:
        return apply_stride_permutation(x, self.L, self.Q)

    def inverse(self) -> "StridePermutation":
        return StridePermutation(L=self.Q, Q=self.L)

    def matrix(self) -> np.ndarray:
        """Dense permutation matrix (oracle use only)"""
        return np.eye(self.size)[self.indices]


@lru_cache(maxsize=64)
def _dft_matrix(n: int) -> np.ndarray:
    i = np.arange(n)
    W = np.exp(-2j * np.pi * (np.outer(i, i) % n) / n)
    W.flags.writeable = False
    return W


def dft_matrix(N: int) -> np.ndarray:
    """Unnormalised N-point DFT matrix"""
    if N < 1:
        raise DimensionMismatch(f"DFT size must be positive, got {N}")
    return _dft_matrix(int(N))


@lru_cache(maxsize=64)
def _twiddles(half: int) -> np.ndarray:
    factors = np.exp(-1j * np.pi * np.arange(half) / half)
    factors.flags.writeable = False
    return factors


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _radix2(x: np.ndarray) -> np.ndarray:
    # Iterative decimation in time. Rows hold the DFT bins of the
    # sub-sequences x[c::C] stored in column c.
    n = x.shape[-1]
    lead = x.shape[:-1]
    X = x.reshape(*lead, 1, n)
    while X.shape[-2] < n:
        half = X.shape[-1] // 2
        even = X[..., :half]
        odd = X[..., half:] * _twiddles(X.shape[-2])[:, None]
        X = np.concatenate((even + odd, even - odd), axis=-2)
    return X.reshape(*lead, n)


def fft(x, axis: int = -1) -> np.ndarray:
    """W_N x along ``axis``; radix-2 for powers of two, direct otherwise"""
    x = np.moveaxis(_as_complex(x), axis, -1)
    n = x.shape[-1]
    if n < 1:
        raise DimensionMismatch("Cannot transform an empty axis")
    if is_power_of_two(n):
        y = _radix2(x)
    else:
        y = x @ dft_matrix(n)
    return np.moveaxis(y, -1, axis)


def ifft(x, axis: int = -1) -> np.ndarray:
    """Inverse of fft: W_N^H x / N"""
    x = _as_complex(x)
    n = x.shape[axis]
    return np.conj(fft(np.conj(x), axis=axis)) / n


def u_matrix(L: int, Q: int) -> np.ndarray:
    """Dense U_{L,Q} = I_L (x) W_Q / sqrt(Q) (oracle use only)"""
    if L < 1 or Q < 1:
        raise DimensionMismatch(f"Invalid U size ({L}, {Q})")
    return np.kron(np.eye(L), dft_matrix(Q)) / np.sqrt(Q)


def apply_u(x, L: int, Q: int) -> np.ndarray:
    """U_{L,Q} x as Q-point FFTs on L contiguous blocks"""
    x = _as_complex(x)
    _check_length(x, L * Q)
    lead = x.shape[:-1]
    blocks = fft(x.reshape(*lead, L, Q), axis=-1) / np.sqrt(Q)
    return blocks.reshape(*lead, L * Q)


def apply_u_h(x, L: int, Q: int) -> np.ndarray:
    """U_{L,Q}^H x"""
    x = _as_complex(x)
    _check_length(x, L * Q)
    lead = x.shape[:-1]
    blocks = ifft(x.reshape(*lead, L, Q), axis=-1) * np.sqrt(Q)
    return blocks.reshape(*lead, L * Q)


def dzt(x, Q: int, L: int) -> np.ndarray:
    """(Q, L) discrete Zak transform: W_Q applied to V_{Q,L}(x)"""
    x = _as_complex(x)
    if x.shape != (Q * L,):
        raise DimensionMismatch(
            f"DZT ({Q}, {L}) expects length {Q * L}, got {x.shape}"
        )
    # V_{Q,L}(x) = unvec_{L,Q}(x)^T is a row-major reshape
    return fft(x.reshape(Q, L), axis=0)


def block_circulant_build(V) -> np.ndarray:
    """Block circulant matrix whose (i, j) block is diag(V[:, <i-j>_Q])"""
    V = _as_complex(V)
    if V.ndim != 2:
        raise DimensionMismatch(f"Expected an L x Q matrix, got {V.shape}")
    L, Q = V.shape
    S = np.zeros((L * Q, L * Q), dtype=complex)
    diagonal = np.arange(L)
    for i in range(Q):
        for j in range(Q):
            rows = i * L + diagonal
            cols = j * L + diagonal
            S[rows, cols] = V[:, (i - j) % Q]
    return S


def block_circulant_factorize(V) -> Tuple[StridePermutation, np.ndarray]:
    """S = Pi^T U^H diag(lam) U Pi with lam = vec(W_Q V^T)"""
    V = _as_complex(V)
    if V.ndim != 2:
        raise DimensionMismatch(f"Expected an L x Q matrix, got {V.shape}")
    L, Q = V.shape
    diagonal = vec(fft(V.T, axis=0))
    logger.debug("Factorized block circulant matrix", L=L, Q=Q)
    return StridePermutation(L=L, Q=Q), diagonal


def block_circulant_reconstruct(
    permutation: StridePermutation, diagonal: np.ndarray
) -> np.ndarray:
    """Dense Pi^T U^H diag(lam) U Pi (oracle use only)"""
    P = permutation.matrix()
    U = u_matrix(permutation.L, permutation.Q)
    return P.T @ U.conj().T @ np.diag(diagonal) @ U @ P
