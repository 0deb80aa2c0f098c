"""Exception hierarchy; every error carries the CLI exit code it maps to."""

from typing import Iterable


class GfdmError(Exception):
    """Base class for all library errors"""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(GfdmError):
    """Invalid configuration, flags or grid specification"""

    exit_code = 2


class DimensionMismatch(ConfigError, ValueError):
    """Vector, matrix or file length does not match the block geometry"""


class FilterDomainError(ConfigError, ValueError):
    """Filter evaluated outside its domain or with incompatible geometry"""


class SingularModulation(GfdmError):
    """The modulation matrix cannot be inverted by the ZF receiver"""

    exit_code = 3

    def __init__(
        self,
        sigma_min: float,
        sigma_max: float,
        K: int,
        M: int,
        lam: float,
    ):
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        self.K = K
        self.M = M
        self.lam = lam
        super().__init__(
            f"SingularModulation: modulation matrix is singular for "
            f"lambda={lam}, M={M}, K={K} "
            f"(sigma_min={sigma_min:.3e}, sigma_max={sigma_max:.3e})"
        )


class VerificationFailed(GfdmError):
    """One or more oracle checks failed"""

    exit_code = 4

    def __init__(self, failed: Iterable[str]):
        self.failed = list(failed)
        super().__init__(
            "Verification failed: " + ", ".join(self.failed)
        )
