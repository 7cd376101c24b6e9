import numpy as np
import pandas as pd
import pytest

from app.schemas.run_schemas import METRICS_COLUMNS, LossRecord, MetricsRow
from app.utils.csv_io import (read_frame, read_metrics_csv, write_frame, write_loss_history,
                              write_metrics_csv)


def sample_rows():
    return [
        MetricsRow(problem="low_frequency", strategy="soft", embedding_kind="identity", n_freq=0, sigma=None,
                   seed_w=0, seed_c=1, seed_f=2, iters=20000, ms_per_iter=13.123456789012345,
                   best_loss=1.0 / 3.0, rel_l2=4.14e-5, improvement_pct=0.0),
        MetricsRow(problem="low_frequency", strategy="new_hc", embedding_kind="hc_cosine", n_freq=50, sigma=20.0,
                   seed_w=0, seed_c=1, seed_f=2, iters=20000, ms_per_iter=np.nextafter(14.6, 15.0),
                   best_loss=2.0 ** -60, rel_l2=np.pi * 1e-5, improvement_pct=-100.0 / 7.0),
    ]


# Test metrics survive a CSV round trip at full float64 precision
def test_metrics_round_trip(tmp_path):
    rows = sample_rows()
    path = write_metrics_csv(rows, tmp_path / "out" / "metrics.csv")
    assert read_metrics_csv(path) == rows


# Test the header follows the documented column order
def test_metrics_header(tmp_path):
    path = write_metrics_csv(sample_rows(), tmp_path / "metrics.csv")
    assert path.read_text().splitlines()[0].split(",") == METRICS_COLUMNS


# Test a missing relative error is written as an empty cell and read back as None
def test_missing_rel_l2(tmp_path):
    row = sample_rows()[0].model_copy(update={"rel_l2": None, "improvement_pct": None})
    path = write_metrics_csv([row], tmp_path / "metrics.csv")
    assert read_metrics_csv(path)[0].rel_l2 is None


# Test files lacking metrics columns are rejected
def test_read_metrics_missing_columns(tmp_path):
    path = write_frame(pd.DataFrame({"problem": ["x"]}), tmp_path / "bad.csv")
    with pytest.raises(ValueError):
        read_metrics_csv(path)


# Test the loss history layout
def test_loss_history(tmp_path):
    records = [LossRecord(iteration=i, total=1.0 / (i + 1), pde=0.5, ic=0.25, bc=0.0) for i in range(4)]
    frame = read_frame(write_loss_history(records, tmp_path / "history.csv"))
    assert list(frame.columns) == ["iteration", "total", "pde", "ic", "bc"]
    assert frame["total"].tolist() == [1.0, 0.5, 1.0 / 3.0, 0.25]
