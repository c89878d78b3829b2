"""Deterministic result persistence: CSV, JSON, SVG figures, manifests.

Rerunning an identical configuration reproduces CSV, JSON, and SVG outputs
byte for byte.  Figures are rendered without timestamps and with a fixed
hash salt; the run manifest carries wall-clock timestamps and is the one
file excluded from the byte-identity guarantee.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, is_dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ParameterError

LIBRARY_VERSION = "0.1.0"


def _jsonable(obj):
    """Recursively convert numpy containers and dataclasses to JSON types."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and (obj != obj or obj in (float("inf"), float("-inf"))):
        return repr(obj)
    return obj


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows) -> Path:
    """RFC-4180-style CSV: header row, CRLF, floats at 17 significant digits."""
    path = Path(path)
    header = list(header)
    if not header:
        raise ParameterError("CSV header row is mandatory")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != len(header):
                raise ParameterError(
                    "row width %d does not match header width %d"
                    % (len(row), len(header))
                )
            writer.writerow([_format_cell(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """(header, rows) of a CSV written by write_csv; cells stay strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ParameterError("CSV file %s is empty" % path)
    return rows[0], rows[1:]


def write_json(path, obj) -> Path:
    """Canonical JSON: UTF-8, sorted keys, trailing newline."""
    path = Path(path)
    payload = json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(payload + "\n", encoding="utf-8")
    return path


def config_hash(config: dict) -> str:
    """SHA-256 over the canonical serialization of a configuration dict."""
    canon = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def save_line_plot(
    path,
    x,
    series: dict,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    logy: bool = False,
    logx: bool = False,
    vlines=(),
) -> Path:
    """One SVG line plot, rendered deterministically (no timestamp metadata)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "locword"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for label, y in series.items():
            ax.plot(np.asarray(x), np.asarray(y), marker="o", markersize=3,
                    linewidth=1.2, label=str(label))
        for v in vlines:
            ax.axvline(float(v), color="gray", linestyle="--", linewidth=0.8)
        if logy:
            ax.set_yscale("log")
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False, fontsize=9)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


@dataclass
class RunManifest:
    """Per-run record: configuration hash, seed, outputs, timing, errors.

    Written exactly once per run directory and never rewritten."""

    config_hash: str
    base_seed: int | None
    version: str = LIBRARY_VERSION
    started: str = ""
    finished: str = ""
    outputs: list = field(default_factory=list)
    error: dict | None = None
    _written: bool = field(default=False, repr=False)

    def mark_started(self):
        self.started = datetime.now(timezone.utc).isoformat()

    def record_output(self, path):
        name = Path(path).name
        if name not in self.outputs:
            self.outputs.append(name)

    def record_error(self, kind: str, message: str, exit_code: int):
        self.error = {"kind": kind, "message": message, "exit_code": exit_code}

    def write(self, out_dir) -> Path:
        if self._written:
            raise ParameterError("manifest already written for this run")
        self.finished = datetime.now(timezone.utc).isoformat()
        self._written = True
        path = Path(out_dir) / "manifest.json"
        write_json(
            path,
            {
                "config_hash": self.config_hash,
                "base_seed": self.base_seed,
                "version": self.version,
                "started": self.started,
                "finished": self.finished,
                "outputs": sorted(self.outputs),
                "error": self.error,
            },
        )
        return path
