"""Deterministic report serialization and plot emission.

JSON output is byte-stable across runs: keys sorted, floats at a fixed
precision via repr of a 12-significant-digit round, arrays emitted as
lists.  Plots are written as SVG files and never displayed.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from pathlib import Path

import numpy as np

__all__ = [
    "OUTPUT_ROOT_ENV",
    "output_root",
    "fixed_float",
    "to_jsonable",
    "dump_json",
    "dump_csv",
    "save_line_plot",
]

OUTPUT_ROOT_ENV = "CONESOLITON_OUTPUT_ROOT"


def output_root(default: str = "runs") -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, default))
    root.mkdir(parents=True, exist_ok=True)
    return root


def fixed_float(x: float):
    """Round-trip-stable float at 12 significant digits; keeps JSON output
    byte-identical across platforms and run orders."""
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        return fixed_float(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(obj[k]) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__} deterministically")


def dump_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    return path


def dump_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v
                             for v in row])
    return path


def save_line_plot(path, curves, xlabel: str, ylabel: str, title: str = "",
                   logx: bool = False, logy: bool = False) -> Path:
    """Write a simple multi-curve line plot as SVG; curves is a list of
    (x, y, label) triples."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for x, y, label in curves:
        ax.plot(np.asarray(x), np.asarray(y), label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if curves and any(lbl for _, _, lbl in curves):
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
