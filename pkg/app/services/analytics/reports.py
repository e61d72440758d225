"""
Deterministic artifact writers for the analytics tables.
"""

import json
from pathlib import Path
from typing import Union

import pandas as pd

PathLike = Union[str, Path]


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """Write frame without index and with LF line endings."""
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n", na_rep="")
    return path


def write_json(payload: dict, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
