# reporting.py - JSON/CSV output through fsspec, plus per-seed aggregation
import dataclasses
import json
import logging
import math
from enum import Enum

import fsspec
import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


# Custom JSON encoder to handle numpy arrays, dataclasses and enums
class CustomJSONEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, Enum):
            return obj.value
        elif hasattr(obj, "to_dict"):
            return obj.to_dict()
        elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return dataclasses.asdict(obj)
        elif isinstance(obj, (set, frozenset)):
            return sorted(obj)
        elif hasattr(obj, "isoformat"):
            return obj.isoformat()
        else:
            return str(obj)


def safe_json_dumps(obj, indent=None) -> str:
    """Serialize with numpy awareness; falls back to an error document instead of raising."""
    try:
        return json.dumps(obj, cls=CustomJSONEncoder, indent=indent)
    except Exception as e:
        logger.warning(f"⚠️ JSON serialization warning: {e}")
        return json.dumps({"error": f"Serialization issue: {str(e)}", "data": str(obj)})


def join(base: str, *parts: str) -> str:
    base = str(base).rstrip("/")
    return "/".join([base] + [p.strip("/") for p in parts])


def _fs_and_path(path: str):
    fs, _, paths = fsspec.get_fs_token_paths(str(path))
    return fs, paths[0]


def write_json(path: str, obj, overwrite: bool = True) -> bool:
    fs, p = _fs_and_path(path)
    if fs.exists(p) and not overwrite:
        logger.info(f"Skip (exists): {path}")
        return False
    parent = p.rsplit("/", 1)[0] if "/" in p else ""
    if parent:
        fs.makedirs(parent, exist_ok=True)
    with fs.open(p, "w") as f:
        f.write(safe_json_dumps(obj, indent=2))
    return True


def read_json(path: str) -> dict:
    with fsspec.open(str(path), "r") as f:
        return json.load(f)


def write_csv(path: str, frame: pd.DataFrame) -> None:
    fs, p = _fs_and_path(path)
    parent = p.rsplit("/", 1)[0] if "/" in p else ""
    if parent:
        fs.makedirs(parent, exist_ok=True)
    with fs.open(p, "w") as f:
        frame.to_csv(f, index=False)
    logger.info(f"📊 Wrote {len(frame)} rows to {path}")


def list_json(directory: str, pattern: str = "**/*.json") -> list:
    fs, p = _fs_and_path(directory)
    if not fs.exists(p):
        return []
    protocol = fs.protocol if isinstance(fs.protocol, str) else fs.protocol[0]
    found = sorted(fs.glob(join(p, pattern)))
    if protocol in ("file", "local"):
        return found
    return [f"{protocol}://{f}" for f in found]


def aggregate(rows: list, group_by: list, metrics: list) -> pd.DataFrame:
    """Mean and sample standard deviation (n - 1) of each metric per group."""
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=group_by + ["n_seeds"] + [f"{m}_{s}" for m in metrics for s in ("mean", "std")])
    out = []
    for key, part in frame.groupby(group_by, sort=True, dropna=False):
        key = key if isinstance(key, tuple) else (key,)
        row = dict(zip(group_by, key))
        row["n_seeds"] = len(part)
        for m in metrics:
            values = part[m].to_numpy(dtype=float)
            row[f"{m}_mean"] = float(np.mean(values))
            row[f"{m}_std"] = float(np.std(values, ddof=1)) if len(values) > 1 else math.nan
        out.append(row)
    return pd.DataFrame(out)
