from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import DimensionMismatch
from .params import GfdmParams


def frozen_complex(value: Any, ndim: int) -> np.ndarray:
    """Copy into a read-only complex128 array with finite entries"""
    array = np.array(value, dtype=complex)
    if array.ndim != ndim:
        raise DimensionMismatch(
            f"Expected a {ndim}-D array, got shape {array.shape}"
        )
    if array.size == 0:
        raise DimensionMismatch("Array must not be empty")
    if not np.all(np.isfinite(array)):
        raise ValueError("Array entries must be finite")
    array.flags.writeable = False
    return array


class DataGrid(BaseModel):
    """K x M grid of data symbols d_{k,m}; vec index is k + m*K"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    symbols: np.ndarray = Field(..., description="K x M complex symbols")

    @model_validator(mode="before")
    @classmethod
    def coerce_symbols(cls, data: Any) -> Any:
        if isinstance(data, dict) and "symbols" in data:
            data = {**data, "symbols": frozen_complex(data["symbols"], 2)}
        return data

    @property
    def K(self) -> int:
        return self.symbols.shape[0]

    @property
    def M(self) -> int:
        return self.symbols.shape[1]

    def vec(self) -> np.ndarray:
        """Column-stacked symbol vector d"""
        return self.symbols.T.reshape(-1)

    @classmethod
    def from_vec(cls, d: np.ndarray, params: GfdmParams) -> "DataGrid":
        d = np.asarray(d)
        if d.shape != (params.N,):
            raise DimensionMismatch(
                f"Symbol vector of length {d.shape} does not match "
                f"N={params.N}"
            )
        return cls(symbols=d.reshape(params.M, params.K).T)

    def check_params(self, params: GfdmParams) -> None:
        if self.symbols.shape != (params.K, params.M):
            raise DimensionMismatch(
                f"Data grid of shape {self.symbols.shape} does not match "
                f"K={params.K}, M={params.M}"
            )


class GfdmSignal(BaseModel):
    """One transmitted or received block of N samples"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray = Field(..., description="Complex baseband samples")

    @model_validator(mode="before")
    @classmethod
    def coerce_samples(cls, data: Any) -> Any:
        if isinstance(data, dict) and "samples" in data:
            data = {**data, "samples": frozen_complex(data["samples"], 1)}
        return data

    def __len__(self) -> int:
        return self.samples.shape[0]

    def check_params(self, params: GfdmParams) -> None:
        if len(self) != params.N:
            raise DimensionMismatch(
                f"Signal of length {len(self)} does not match N={params.N}"
            )


class ZakGrid(BaseModel):
    """Zak spectrum z_{k,m}(lambda) of the sampled filter"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    z: np.ndarray = Field(..., description="K x M complex Zak grid")
    params: GfdmParams

    @model_validator(mode="before")
    @classmethod
    def coerce_grid(cls, data: Any) -> Any:
        if isinstance(data, dict) and "z" in data:
            data = {**data, "z": frozen_complex(data["z"], 2)}
        return data

    @model_validator(mode="after")
    def check_shape(self) -> "ZakGrid":
        if self.z.shape != (self.params.K, self.params.M):
            raise DimensionMismatch(
                f"Zak grid of shape {self.z.shape} does not match "
                f"K={self.params.K}, M={self.params.M}"
            )
        return self

    @property
    def sigma_sq(self) -> np.ndarray:
        """Squared singular values of A, scaled by K"""
        return np.abs(self.z) ** 2
