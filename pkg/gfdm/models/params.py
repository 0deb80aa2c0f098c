from enum import Enum
from typing import Literal, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

from ..errors import FilterDomainError


class GfdmParams(BaseModel):
    """Block geometry: K subcarriers, M subsymbols and sampling shift"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    K: int = Field(..., ge=4, description="Number of subcarriers")
    M: int = Field(..., ge=2, description="Number of subsymbols")
    lam: float = Field(
        0.0,
        ge=0.0,
        lt=1.0,
        alias="lambda",
        description="Frequency sampling shift",
    )

    @computed_field
    @property
    def N(self) -> int:
        """Samples per block"""
        return self.K * self.M

    def with_lambda(self, lam: float) -> "GfdmParams":
        return GfdmParams(K=self.K, M=self.M, lam=lam)

    def with_m(self, M: int) -> "GfdmParams":
        return GfdmParams(K=self.K, M=M, lam=self.lam)


class GeneratorFunction(BaseModel):
    """Anti-symmetric generator f^a decreasing from 1 to -1 on [-1, 1]"""

    model_config = ConfigDict(frozen=True)

    name: Literal["rc", "linear"] = Field(
        "rc", description="Generator tag"
    )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "rc":
            return -np.sin(0.5 * np.pi * x)
        return -x

    def check_shape(self, samples: int = 1001) -> None:
        """Verify anti-symmetry, monotonicity and endpoints on a grid"""
        x = np.linspace(-1.0, 1.0, samples)
        y = self(x)
        if not np.allclose(self(-x), -y, atol=1e-12):
            raise ValueError(f"Generator {self.name} is not anti-symmetric")
        if np.any(np.diff(y) > 1e-12):
            raise ValueError(f"Generator {self.name} is not decreasing")
        if not (np.isclose(y[0], 1.0) and np.isclose(y[-1], -1.0)):
            raise ValueError(
                f"Generator {self.name} must map -1 to 1 and 1 to -1"
            )

    @model_validator(mode="after")
    def validate_shape(self) -> "GeneratorFunction":
        self.check_shape()
        return self


class FilterFamily(str, Enum):
    """Prototype filter families"""

    CASE_A = "a"  # ISI-free without matched filtering
    CASE_B = "b"  # ISI-free after matched filtering
    XIA = "xia"  # ISI-free with and without matched filtering


class PrototypeFilter(BaseModel):
    """Band-limited prototype filter H(nu) described by its generator"""

    model_config = ConfigDict(frozen=True)

    family: FilterFamily = Field(
        FilterFamily.CASE_A, description="Filter family"
    )
    alpha: float = Field(..., gt=0.0, le=1.0, description="Roll-off factor")
    beta: int = Field(
        0, ge=0, le=3, description="Case B phase offset in units of pi/2"
    )
    generator: GeneratorFunction = Field(
        default_factory=GeneratorFunction,
        description="Generator function f^a",
    )

    @field_validator("generator", mode="before")
    @classmethod
    def coerce_generator(cls, v):
        """Accept a bare generator name"""
        if isinstance(v, str):
            return {"name": v}
        return v

    @model_validator(mode="after")
    def check_beta(self) -> "PrototypeFilter":
        if self.family != FilterFamily.CASE_B and self.beta != 0:
            raise ValueError("beta only applies to case B filters")
        return self

    def check_subcarriers(self, K: int) -> None:
        """Odd case B phase offsets need K to be a multiple of 4"""
        if (
            self.family == FilterFamily.CASE_B
            and self.beta % 2 == 1
            and K % 4 != 0
        ):
            raise FilterDomainError(
                f"Case B with beta={self.beta} requires K to be a multiple "
                f"of 4, got K={K}"
            )

    @property
    def label(self) -> str:
        """Short tag used in result tables"""
        base = {
            FilterFamily.CASE_A: "a",
            FilterFamily.CASE_B: f"b{self.beta}",
            FilterFamily.XIA: "xia",
        }[self.family]
        return f"{base}-{self.generator.name}-{self.alpha:g}"

    @classmethod
    def rc(cls, alpha: float, generator: str = "rc") -> "PrototypeFilter":
        return cls(
            family=FilterFamily.CASE_A, alpha=alpha, generator=generator
        )

    @classmethod
    def rrc(
        cls, alpha: float, beta: int = 0, generator: str = "rc"
    ) -> "PrototypeFilter":
        return cls(
            family=FilterFamily.CASE_B,
            alpha=alpha,
            beta=beta,
            generator=generator,
        )

    @classmethod
    def xia(cls, alpha: float, generator: str = "rc") -> "PrototypeFilter":
        return cls(family=FilterFamily.XIA, alpha=alpha, generator=generator)

    @classmethod
    def from_name(
        cls,
        name: str,
        alpha: float,
        family: Optional[str] = None,
        beta: int = 0,
        generator: str = "rc",
    ) -> "PrototypeFilter":
        """Build a filter from the CLI vocabulary (rc, rrc, xia)"""
        default_family = {"rc": "a", "rrc": "b", "xia": "xia"}
        if name not in default_family:
            raise ValueError(f"Unknown filter: {name}")
        chosen = FilterFamily(family or default_family[name])
        return cls(
            family=chosen,
            alpha=alpha,
            beta=beta if chosen == FilterFamily.CASE_B else 0,
            generator=generator,
        )
