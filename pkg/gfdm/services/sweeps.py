import asyncio
import threading
from typing import Dict, List, Optional, Sequence, Tuple

import structlog
from pydantic import ValidationError

from ..config.settings import settings
from ..errors import ConfigError, GfdmError
from ..models.params import GfdmParams, PrototypeFilter
from ..models.reports import GridSpec, MetricsReport, SweepPoint
from .metrics import metrics_report, optimal_lambda

logger = structlog.get_logger(__name__)

GridPoint = Tuple[GfdmParams, PrototypeFilter]

# Reports are pure functions of the configuration; insertion order is
# recency order
_cache: Dict[str, MetricsReport] = {}
_cache_lock = threading.Lock()


def _cache_key(params: GfdmParams, prototype: PrototypeFilter) -> str:
    return params.model_dump_json() + prototype.model_dump_json()


class SweepService:
    """Evaluates metric reports over parameter grids"""

    def __init__(self, concurrency: Optional[int] = None):
        self.concurrency = concurrency or settings.sweep_concurrency
        self.cache_size = settings.sweep_cache_size

    def _get_from_cache(self, key: str) -> Optional[MetricsReport]:
        with _cache_lock:
            report = _cache.pop(key, None)
            if report is not None:
                # Re-insert so eviction drops the least recently used entry
                _cache[key] = report
        logger.debug("Cache hit" if report else "Cache miss", cache_key=key)
        return report

    def _set_cache(self, key: str, report: MetricsReport) -> None:
        evicted = []
        with _cache_lock:
            _cache[key] = report
            while len(_cache) > self.cache_size:
                oldest = next(iter(_cache))
                del _cache[oldest]
                evicted.append(oldest)
        for oldest in evicted:
            logger.debug("Cache evict", cache_key=oldest)

    def evaluate(
        self, params: GfdmParams, prototype: PrototypeFilter
    ) -> MetricsReport:
        """Metrics of one grid point, memoised"""
        key = _cache_key(params, prototype)
        cached = self._get_from_cache(key)
        if cached is not None:
            return cached
        report = metrics_report(params, prototype)
        self._set_cache(key, report)
        return report

    async def _evaluate_point(
        self, semaphore: asyncio.Semaphore, point: GridPoint
    ) -> MetricsReport:
        async with semaphore:
            return await asyncio.to_thread(self.evaluate, *point)

    async def sweep(self, points: Sequence[GridPoint]) -> List[SweepPoint]:
        """One row per grid point in grid order; failures become error rows"""
        logger.info(
            "Starting sweep",
            points=len(points),
            concurrency=self.concurrency,
        )
        semaphore = asyncio.Semaphore(self.concurrency)
        results = await asyncio.gather(
            *(self._evaluate_point(semaphore, point) for point in points),
            return_exceptions=True,
        )

        rows = []
        for index, ((params, prototype), result) in enumerate(
            zip(points, results)
        ):
            if isinstance(result, BaseException):
                if not isinstance(result, (GfdmError, ValueError)):
                    raise result
                logger.warning(
                    "Grid point failed",
                    index=index,
                    K=params.K,
                    M=params.M,
                    lam=params.lam,
                    error=str(result),
                )
                rows.append(
                    SweepPoint(
                        index=index,
                        params=params,
                        filter=prototype,
                        error=str(result),
                    )
                )
                continue
            rows.append(
                SweepPoint(
                    index=index, params=params, filter=prototype, report=result
                )
            )

        failed = sum(1 for row in rows if not row.ok)
        logger.info("Sweep complete", points=len(rows), failed=failed)
        return rows


sweep_service = SweepService()


async def sweep(points: Sequence[GridPoint]) -> List[SweepPoint]:
    return await sweep_service.sweep(points)


def run_sweep(points: Sequence[GridPoint]) -> List[SweepPoint]:
    """Blocking wrapper around sweep"""
    return asyncio.run(sweep(points))


def lambda_grid(
    params: GfdmParams, prototype: PrototypeFilter, grid: GridSpec
) -> List[GridPoint]:
    """Vary lambda with K, M and the filter fixed"""
    try:
        return [(params.with_lambda(lam), prototype) for lam in grid.values()]
    except ValidationError as exc:
        raise ConfigError(
            f"Invalid lambda grid {grid.start}:{grid.step}:{grid.stop}: "
            f"lambda must lie in [0, 1)"
        ) from exc


def m_grid(
    params: GfdmParams, prototype: PrototypeFilter, grid: GridSpec
) -> List[GridPoint]:
    """Vary M with lambda set to the optimal shift of each M"""
    points = []
    for value in grid.values():
        M = int(round(value))
        if abs(value - M) > 1e-9 or M < 2:
            raise ConfigError(
                f"M grid values must be integers >= 2, got {value}"
            )
        points.append(
            (
                GfdmParams(K=params.K, M=M, lam=optimal_lambda(M)),
                prototype,
            )
        )
    return points
