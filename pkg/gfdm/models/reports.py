import csv
import io
import json
import math
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .params import GfdmParams, PrototypeFilter

Cell = Union[float, int, str, None]


class MetricsReport(BaseModel):
    """Conditioning and receiver metrics of one configuration"""

    model_config = ConfigDict(frozen=True)

    cond_numeric: float = Field(..., ge=1.0, description="sigma_max/min")
    cond_closed: Optional[float] = Field(
        None, description="Closed-form condition number, when it applies"
    )
    nef: float = Field(..., description="ZF noise-enhancement factor")
    sir_metric: float = Field(..., ge=0.0, description="MF self-interference")
    sir_metric_db: float = Field(..., description="-10 log10(sir_metric)")
    sigma_min_sq: float = Field(..., ge=0.0)
    sigma_max_sq: float = Field(..., ge=0.0)

    @property
    def nef_db(self) -> float:
        return 10.0 * math.log10(self.nef)


class SweepPoint(BaseModel):
    """One evaluated grid point; exactly one of report and error is set"""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0)
    params: GfdmParams
    filter: PrototypeFilter
    report: Optional[MetricsReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.report is not None


class CheckResult(BaseModel):
    """Outcome of one oracle check over several random cases"""

    model_config = ConfigDict(frozen=True)

    name: str
    cases: int = Field(..., ge=0)
    max_error: float = Field(..., ge=0.0)
    tolerance: float = Field(..., gt=0.0)
    passed: bool


class GridSpec(BaseModel):
    """Inclusive arithmetic grid written as start:step:stop"""

    model_config = ConfigDict(frozen=True)

    start: float
    step: float = Field(..., gt=0.0)
    stop: float

    @model_validator(mode="after")
    def check_order(self) -> "GridSpec":
        if self.stop < self.start:
            raise ValueError("Grid stop must not be smaller than start")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"Grid must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        return cls(start=start, step=step, stop=stop)

    def values(self) -> List[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        points = self.start + self.step * np.arange(count + 1)
        return [float(v) for v in np.round(points, 12)]


class RunConfig(BaseModel):
    """Resolved configuration of one CLI invocation"""

    model_config = ConfigDict(frozen=True)

    command: Literal[
        "design",
        "spectrum",
        "cond-sweep",
        "nef-sweep",
        "metrics-vs-m",
        "modulate",
        "demodulate",
        "verify",
    ]
    params: GfdmParams
    filter: PrototypeFilter
    grid: Optional[GridSpec] = None
    input: Optional[str] = None
    out: Optional[str] = None
    binary: bool = False
    receiver: Literal["zf", "mf"] = "zf"
    seed: int = Field(0, ge=0)
    snr_db: Optional[float] = None
    quick: bool = False

    def echo(self) -> Dict[str, Any]:
        """JSON-safe dump used in table metadata"""
        return self.model_dump(mode="json", by_alias=True)


def format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


class ResultTable(BaseModel):
    """Rectangular table with a metadata header"""

    columns: List[str]
    rows: List[List[Cell]] = Field(default_factory=list)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_rectangular(self) -> "ResultTable":
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(
                    f"Row {i} has {len(row)} cells, expected {width}"
                )
        return self

    def add_row(self, row: List[Cell]) -> None:
        if len(row) != len(self.columns):
            raise ValueError(
                f"Row has {len(row)} cells, expected {len(self.columns)}"
            )
        self.rows.append(list(row))

    def column(self, name: str) -> List[Cell]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(
            "# " + json.dumps(self.metadata, sort_keys=True) + "\n"
        )
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(cell) for cell in row])
        return buffer.getvalue()
