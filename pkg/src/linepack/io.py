"""Frame files (JSON, CSV) and run records.

Frame JSON: ``{"d": int, "N": int, "columns": [[re, im, re, im, ...], ...]}``
with one list of ``2d`` numbers per column.

Frame CSV: ``2d`` rows by ``N`` columns, rows alternating real and imaginary
parts of each coordinate (row ``2i`` is Re of coordinate ``i``, row ``2i+1``
is Im), no header.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .frames import Frame, coherence

SCHEMA_VERSION = 1


class FrameFileError(ValueError):
    pass


def frame_to_dict(frame: Frame) -> dict:
    cols = [[float(v) for z in frame.entries[:, j] for v in (z.real, z.imag)] for j in range(frame.N)]
    return {"d": frame.d, "N": frame.N, "columns": cols}


def frame_from_dict(data: dict) -> Frame:
    try:
        d, N, cols = int(data["d"]), int(data["N"]), data["columns"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FrameFileError(f"malformed frame object: {exc}") from exc
    if d < 1 or N < 1 or len(cols) != N or any(len(c) != 2 * d for c in cols):
        raise FrameFileError(f"frame object does not describe a {d}x{N} frame")
    arr = np.asarray(cols, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise FrameFileError("frame contains non-finite numbers")
    mat = (arr[:, 0::2] + 1j * arr[:, 1::2]).T
    norms = np.linalg.norm(mat, axis=0)
    return Frame(mat, normalized=bool(np.all(np.abs(norms - 1.0) <= 1e-12)))


def write_frame_csv(frame: Frame, path) -> None:
    rows = np.empty((2 * frame.d, frame.N))
    rows[0::2] = frame.entries.real
    rows[1::2] = frame.entries.imag
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def read_frame_csv(path) -> Frame:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows or len(rows) % 2 or len({len(r) for r in rows}) != 1:
        raise FrameFileError("CSV frame needs an even number of equal-length rows")
    arr = np.asarray(rows)
    mat = arr[0::2] + 1j * arr[1::2]
    norms = np.linalg.norm(mat, axis=0)
    return Frame(mat, normalized=bool(np.all(np.abs(norms - 1.0) <= 1e-12)))


def load_frame(path) -> Frame:
    """Read a frame from ``.csv`` or JSON (a bare frame object or a run record)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            return read_frame_csv(path)
        data = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        if isinstance(exc, FrameFileError):
            raise
        raise FrameFileError(f"cannot read frame from {path}: {exc}") from exc
    if isinstance(data, dict) and "best_frame" in data:
        data = data["best_frame"]
    if not isinstance(data, dict):
        raise FrameFileError(f"{path} does not contain a frame object")
    return frame_from_dict(data)


def save_frame(frame: Frame, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_frame_csv(frame, path)
    else:
        path.write_text(json.dumps(frame_to_dict(frame)))


@dataclass
class RunRecord:
    method: str
    config: dict
    per_restart: list[dict]
    best_frame: Frame
    best_coherence: float
    bounds: dict
    certificates: dict
    seed: int | None
    started_at: str
    finished_at: str
    wall_time: float
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "method": self.method,
            "config": self.config,
            "seed": self.seed,
            "best_coherence": self.best_coherence,
            "best_frame": frame_to_dict(self.best_frame),
            "bounds": self.bounds,
            "certificates": self.certificates,
            "per_restart": self.per_restart,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "wall_time": self.wall_time,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(method=data["method"], config=data["config"], per_restart=data["per_restart"],
                   best_frame=frame_from_dict(data["best_frame"]),
                   best_coherence=data["best_coherence"], bounds=data["bounds"],
                   certificates=data["certificates"], seed=data["seed"],
                   started_at=data["started_at"], finished_at=data["finished_at"],
                   wall_time=data["wall_time"], schema_version=data["schema_version"],
                   extra=data.get("extra", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=True)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "RunRecord":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def consistent(self, tol: float = 1e-12) -> bool:
        return math.isclose(coherence(self.best_frame), self.best_coherence, rel_tol=0, abs_tol=tol)


def fmt(x) -> str:
    """Locale-independent, 9 significant digits; empty string for a missing value."""
    if x is None:
        return ""
    return format(float(x), ".9g")
