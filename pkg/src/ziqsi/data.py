"""CSV ingestion into the numeric covariate matrix and response vector."""

from dataclasses import dataclass

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class Dataset:
    columns: list          # covariate column names after dummy expansion
    X: np.ndarray          # n x p, float
    y: np.ndarray          # n, non-negative
    response: str
    n_dropped: int         # rows removed for missing values


def ingest_csv(path, response_column, covariate_columns=None,
               dummy_columns=()):
    """Load a modeling dataset from a CSV file.

    ``dummy_columns`` are expanded to indicator columns with the first
    level dropped as the reference; rows with any missing value among the
    used columns are dropped and counted.  Non-numeric cells in numeric
    columns and negative responses are errors.
    """
    frame = pd.read_csv(path)
    if response_column not in frame.columns:
        raise ValueError(f"response column {response_column!r} not in file")
    dummy_columns = list(dummy_columns)
    if covariate_columns is None:
        covariate_columns = [c for c in frame.columns if c != response_column]
    covariate_columns = list(covariate_columns)
    for col in covariate_columns + dummy_columns:
        if col not in frame.columns:
            raise ValueError(f"column {col!r} not in file")
    for col in dummy_columns:
        if col not in covariate_columns:
            covariate_columns.append(col)

    used = frame[covariate_columns + [response_column]]
    keep = ~used.isna().any(axis=1)
    n_dropped = int((~keep).sum())
    used = used.loc[keep]

    numeric_cols = [c for c in covariate_columns if c not in dummy_columns]
    parts = []
    names = []
    for col in numeric_cols:
        vals = pd.to_numeric(used[col], errors="raise")
        parts.append(np.asarray(vals, dtype=float))
        names.append(col)
    for col in dummy_columns:
        dummies = pd.get_dummies(used[col].astype(str), prefix=col,
                                 drop_first=True)
        for dcol in dummies.columns:
            parts.append(dummies[dcol].to_numpy(dtype=float))
            names.append(dcol)

    y = np.asarray(pd.to_numeric(used[response_column], errors="raise"),
                   dtype=float)
    if np.any(y < 0):
        raise ValueError("response contains negative values")
    X = np.column_stack(parts) if parts else np.empty((len(y), 0))
    return Dataset(columns=names, X=X, y=y, response=response_column,
                   n_dropped=n_dropped)
