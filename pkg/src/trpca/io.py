"""Reading CSV matrices and PGM frame stacks; writing fit/sweep/bgsub results."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import SubspaceModel, TrimmedFitReport
from .errors import DataError
from .evaluation import BackgroundSplit, SweepResult
from .pca import PcaModel

PathLike = Union[str, os.PathLike]

SWEEP_HEADER = ["lambda", "method", "mean_tre", "std_tre", "runs", "seed"]
BGSUB_HEADER = ["frame_index", "reconstruction_error"]


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def _parse_row(fields: list, lineno: int, path) -> list:
    try:
        return [float(f) for f in fields]
    except ValueError:
        raise DataError(f"{path}:{lineno}: could not parse {','.join(fields)!r} as numbers") from None


def load_csv(path: PathLike) -> np.ndarray:
    """Comma-separated real matrix; a non-numeric first line is taken as header."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            lines = [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: no data")

    _, first = lines[0]
    try:
        [float(f) for f in first]
    except ValueError:
        lines = lines[1:]
        if not lines:
            raise DataError(f"{path}: header only, no data rows")

    width = len(lines[0][1])
    rows = []
    for lineno, fields in lines:
        if len(fields) != width:
            raise DataError(
                f"{path}:{lineno}: expected {width} values, found {len(fields)} (ragged row)"
            )
        rows.append(_parse_row(fields, lineno, path))
    X = np.array(rows, dtype=float)
    bad = ~np.isfinite(X)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise DataError(f"{path}: non-finite value in data row {i + 1}, column {j + 1}")
    return X


def save_csv(path: PathLike, X) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in X:
            writer.writerow([fmt(v) for v in row])


@dataclass
class FrameSequence:
    data: np.ndarray
    height: int
    width: int
    paths: list

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    def image(self, i: int) -> np.ndarray:
        return self.data[i].reshape(self.height, self.width)


def read_pgm(path: PathLike) -> np.ndarray:
    """8-bit PGM (P2 or P5) as a float array scaled to [0, 1]."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            magic = fh.read(2)
            if magic not in (b"P2", b"P5"):
                raise DataError(f"{path}: unsupported magic number {magic!r}, expected P2 or P5")
            fh.seek(0)
            with Image.open(fh) as im:
                if im.mode != "L":
                    raise DataError(f"{path}: only 8-bit grayscale (max value 255) is supported")
                pixels = np.asarray(im, dtype=float)
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"cannot read PGM {path}: {exc}") from exc
    return pixels / 255.0


def write_pgm(path: PathLike, image) -> None:
    """Write a [0, 1] image as binary 8-bit PGM; values outside are clipped."""
    pixels = np.clip(np.rint(np.asarray(image, dtype=float) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(pixels, mode="L").save(path, format="PPM")


def _frame_paths(source) -> list:
    if isinstance(source, (str, os.PathLike)):
        source = Path(source)
        if source.is_dir():
            paths = sorted(p for p in source.iterdir() if p.suffix.lower() == ".pgm")
            if not paths:
                raise DataError(f"{source}: no .pgm files found")
            return paths
        return [source]
    return sorted(Path(p) for p in source)


def load_frames(source: Union[PathLike, Iterable[PathLike]]) -> FrameSequence:
    """Stack PGM frames (directory or list of files, lexicographic order) as rows."""
    paths = _frame_paths(source)
    images = []
    for path in paths:
        img = read_pgm(path)
        if images and img.shape != images[0].shape:
            raise DataError(
                f"frame size mismatch: {paths[0]} is {images[0].shape[1]}x{images[0].shape[0]}, "
                f"{path} is {img.shape[1]}x{img.shape[0]}"
            )
        images.append(img)
    h, w = images[0].shape
    data = np.stack([img.ravel() for img in images])
    return FrameSequence(data=data, height=h, width=w, paths=[str(p) for p in paths])


def _dump_json(doc: dict, path: PathLike) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=False, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return repr(value)


def fit_document(result: Union[TrimmedFitReport, PcaModel], config: Optional[dict] = None) -> dict:
    if isinstance(result, TrimmedFitReport):
        model = result.model
        doc = {
            "method": "trpca",
            "config": config or {},
            "objective": result.objective,
            "objective_trace": list(result.objective_trace),
            "termination": result.termination,
            "iterations": result.iterations,
            "t": result.t,
            "restart": result.restart,
            "restart_objectives": list(result.restart_objectives),
            "selected_indices": [int(i) for i in result.selected_indices],
        }
    else:
        model = result
        doc = {
            "method": "pca",
            "config": config or {},
            "spectrum": result.spectrum.tolist(),
            "reconstruction_error": result.reconstruction_error(),
        }
    doc["center"] = model.center.tolist()
    doc["basis"] = model.basis.tolist()
    return _jsonable(doc)


def write_fit(result, path: PathLike, config: Optional[dict] = None) -> None:
    """JSON document with config echo, model, and (for TRPCA) trace and selection."""
    _dump_json(fit_document(result, config), path)


def load_fit(path: PathLike) -> tuple[SubspaceModel, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read fit document {path}: {exc}") from exc
    return SubspaceModel(np.array(doc["center"]), np.array(doc["basis"])), doc


def _write_rows(path: PathLike, header: list, rows: Iterable[list]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def config_path(path: PathLike) -> Path:
    """Sidecar path holding the config echo for a CSV artifact."""
    path = Path(path)
    return path.with_name(path.name + ".config.json")


def write_sweep(result: SweepResult, path: PathLike, config: Optional[dict] = None) -> None:
    """``lambda,method,mean_tre,std_tre,runs,seed`` rows plus a JSON config sidecar."""
    seed = result.config.get("seed")
    _write_rows(
        path,
        SWEEP_HEADER,
        ([fmt(r.lam), r.method, fmt(r.mean_tre), fmt(r.std_tre), r.runs, seed] for r in result.rows),
    )
    sidecar = {"config": config or {}, "sweep": result.config,
               "values": [{"lambda": r.lam, "method": r.method, "tre": r.values} for r in result.rows]}
    _dump_json(_jsonable(sidecar), config_path(path))


def write_bgsub(
    split: BackgroundSplit,
    path: PathLike,
    config: Optional[dict] = None,
    shape: Optional[tuple] = None,
    dump_dir: Optional[PathLike] = None,
) -> None:
    """Per-frame reconstruction errors as CSV; optional PGM background/foreground dumps.

    Foreground dumps store ``|x_f|`` clipped to [0, 1].
    """
    _write_rows(path, BGSUB_HEADER, ([i, fmt(e)] for i, e in enumerate(split.frame_errors)))
    _dump_json(_jsonable({"config": config or {}}), config_path(path))
    if dump_dir is not None:
        if shape is None:
            raise ValueError("frame shape is required for PGM dumps")
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
        for i in range(split.background.shape[0]):
            write_pgm(dump_dir / f"background_{i:05d}.pgm", split.background[i].reshape(shape))
            write_pgm(dump_dir / f"foreground_{i:05d}.pgm", np.abs(split.foreground[i]).reshape(shape))


def write_results(result, path: PathLike, config: Optional[dict] = None, **kwargs) -> None:
    """Write any result object, choosing the format from its type."""
    if isinstance(result, SweepResult):
        write_sweep(result, path, config)
    elif isinstance(result, BackgroundSplit):
        write_bgsub(result, path, config, **kwargs)
    else:
        write_fit(result, path, config)
