import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel

from ..exceptions import ArgumentError

METRICS_SCHEMA = "spryfed-metrics v1"
METRICS_COLUMNS = ["round", "method", "acc_gen", "acc_pers", "loss", "grad_norm_proxy"]


def _fmt(value: float) -> str:
    return repr(float(value))


def _json_float(value: float) -> Optional[float]:
    return None if math.isnan(value) else float(value)


class RoundMetrics(BaseModel):
    round: int
    method: str
    acc_gen: float
    acc_pers: float
    loss: float
    grad_norm_proxy: float

    def csv_row(self) -> str:
        return ",".join([str(self.round), self.method, _fmt(self.acc_gen), _fmt(self.acc_pers),
                         _fmt(self.loss), _fmt(self.grad_norm_proxy)])


class MetricsTrace(BaseModel):
    """Per-round metrics of one federation run."""
    method: str
    rows: List[RoundMetrics] = []

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: RoundMetrics) -> None:
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        if name not in METRICS_COLUMNS or name == "method":
            raise ArgumentError(f"Unknown numeric column: {name}")
        return np.asarray([getattr(row, name) for row in self.rows], dtype=np.float64)

    def final(self) -> Optional[RoundMetrics]:
        return self.rows[-1] if self.rows else None

    def best(self, column: str = "acc_gen") -> Optional[RoundMetrics]:
        values = self.column(column)
        if not len(values) or np.all(np.isnan(values)):
            return None
        return self.rows[int(np.nanargmax(values))]

    def rounds_to_reach(self, accuracy: float, column: str = "acc_gen") -> Optional[int]:
        """First round whose ``column`` is at least ``accuracy``."""
        for row in self.rows:
            if getattr(row, column) >= accuracy:
                return row.round
        return None

    def min_so_far(self, column: str = "grad_norm_proxy") -> np.ndarray:
        values = self.column(column)
        return np.minimum.accumulate(values) if len(values) else values

    def to_csv_text(self, config_hash: str, seed: int) -> str:
        lines = [f"# {METRICS_SCHEMA} config_hash={config_hash} seed={seed}", ",".join(METRICS_COLUMNS)]
        lines.extend(row.csv_row() for row in self.rows)
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Union[str, Path], config_hash: str, seed: int) -> None:
        Path(path).write_text(self.to_csv_text(config_hash, seed))

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "MetricsTrace":
        lines = [line for line in Path(path).read_text().splitlines() if line and not line.startswith("#")]
        if not lines or lines[0].split(",") != METRICS_COLUMNS:
            raise ArgumentError(f"{path}: not a metrics file")
        rows = []
        for line in lines[1:]:
            r, method, *numbers = line.split(",")
            acc_gen, acc_pers, loss, proxy = (float(x) for x in numbers)
            rows.append(RoundMetrics(round=int(r), method=method, acc_gen=acc_gen, acc_pers=acc_pers,
                                     loss=loss, grad_norm_proxy=proxy))
        method = rows[0].method if rows else ""
        return cls(method=method, rows=rows)

    def summary(self, config_hash: str, seed: int) -> Dict:
        final = self.final()
        best = self.best()
        return {
            "schema": METRICS_SCHEMA,
            "config_hash": config_hash,
            "seed": seed,
            "method": self.method,
            "rounds": len(self.rows),
            "final": None if final is None else {
                key: _json_float(getattr(final, key)) for key in ("acc_gen", "acc_pers", "loss", "grad_norm_proxy")
            },
            "best_acc_gen": None if best is None else _json_float(best.acc_gen),
            "best_round": None if best is None else best.round,
        }
