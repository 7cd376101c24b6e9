import logging
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np
import pandas as pd

from app.schemas.run_schemas import LOSS_HISTORY_COLUMNS, METRICS_COLUMNS, LossRecord, MetricsRow

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every float64
FLOAT_FORMAT = "%.17g"


def write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_frame(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def metrics_frame(rows: Iterable[MetricsRow]) -> pd.DataFrame:
    records = [row.model_dump() for row in rows]
    frame = pd.DataFrame.from_records(records, columns=METRICS_COLUMNS)
    for column in ("sigma", "rel_l2", "improvement_pct", "ms_per_iter", "best_loss"):
        frame[column] = frame[column].astype(np.float64)
    return frame


def write_metrics_csv(rows: Union[pd.DataFrame, Iterable[MetricsRow]], path: Union[str, Path]) -> Path:
    frame = rows if isinstance(rows, pd.DataFrame) else metrics_frame(rows)
    return write_frame(frame[METRICS_COLUMNS], path)


def read_metrics_csv(path: Union[str, Path]) -> List[MetricsRow]:
    frame = read_frame(path)
    missing = set(METRICS_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"{path} lacks metrics columns {sorted(missing)}")
    frame = frame.astype(object).where(frame.notna(), None)
    return [MetricsRow(**record) for record in frame[METRICS_COLUMNS].to_dict(orient="records")]


def loss_history_frame(records: Iterable[LossRecord]) -> pd.DataFrame:
    return pd.DataFrame.from_records([record.model_dump() for record in records], columns=LOSS_HISTORY_COLUMNS)


def write_loss_history(records: Iterable[LossRecord], path: Union[str, Path]) -> Path:
    return write_frame(loss_history_frame(records), path)
