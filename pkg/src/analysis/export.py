"""
CSV export of maps and curves (Hz headers)
"""

from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

FLOAT_FORMAT = "%.10g"


def write_grid_csv(path: Union[str, Path], values: np.ndarray, row_freqs: Optional[Sequence[float]] = None,
                   col_freqs: Optional[Sequence[float]] = None, row_name: str = "af_hz") -> Path:
    """Grid with one header row of column frequencies and a leading frequency column."""
    values = np.asarray(values)
    rows = np.arange(values.shape[0]) if row_freqs is None else np.asarray(row_freqs)
    cols = np.arange(values.shape[1]) if col_freqs is None else np.asarray(col_freqs)
    frame = pd.DataFrame(values, index=pd.Index([f"{r:g}" for r in rows], name=row_name),
                         columns=[f"{c:g}" for c in cols])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, float_format=FLOAT_FORMAT)
    return path


def write_curve_csv(path: Union[str, Path], freqs: Sequence[float], values: Sequence[float],
                    value_name: str = "value", freq_name: str = "freq_hz") -> Path:
    frame = pd.DataFrame({freq_name: np.asarray(freqs), value_name: np.asarray(values)})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
