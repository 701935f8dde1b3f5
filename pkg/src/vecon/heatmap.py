"""Binned bivariate densities with separable Gaussian smoothing."""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import IoFailure, NegativeSigma, NoPoints, NonFiniteCoordinate

DEFAULT_BINS = 1000
DEFAULT_SIGMA = 8.0
TRUNCATE = 4.0
_PAD_FRACTION = 0.005


@dataclass(frozen=True)
class HeatmapGrid:
    """``counts[row, col]``: row is the y bin, col the x bin, origin lower-left."""

    bins: int
    counts: np.ndarray
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    x_mean: float
    y_mean: float
    sigma: float = 0.0
    x_label: str = "x"
    y_label: str = "y"

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def _axis_range(values: np.ndarray) -> Tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        pad = abs(lo) * _PAD_FRACTION if lo != 0 else _PAD_FRACTION
        lo, hi = lo - pad, hi + pad
    return lo, hi


def histogram2d(points: Sequence, bins: int = DEFAULT_BINS, x_label="x", y_label="y") -> HeatmapGrid:
    """Count ``(x, y)`` points into a ``bins x bins`` grid.

    Bins are half-open ``[lo, hi)`` except the last on each axis, which also
    takes the maximum. A collapsed axis (all values equal) is widened by
    0.5% on each side.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise NoPoints("histogram needs at least one point")
    pts = pts.reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise NonFiniteCoordinate("points contain NaN or infinite coordinates")
    if not isinstance(bins, (int, np.integer)) or bins < 1:
        raise ValueError(f"bins must be a positive integer, got {bins!r}")
    xs = np.ascontiguousarray(pts[:, 0])
    ys = np.ascontiguousarray(pts[:, 1])
    x_range, y_range = _axis_range(xs), _axis_range(ys)
    counts = kernels.bin_points(xs, ys, int(bins), *x_range, *y_range)
    return HeatmapGrid(
        bins=int(bins),
        counts=counts,
        x_range=x_range,
        y_range=y_range,
        x_mean=float(xs.mean()),
        y_mean=float(ys.mean()),
        x_label=x_label,
        y_label=y_label,
    )


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian truncated at ``ceil(4 sigma)`` and normalised to sum 1."""
    radius = int(math.ceil(TRUNCATE * sigma))
    k = np.arange(-radius, radius + 1, dtype=float)
    w = np.exp(-0.5 * (k / sigma) ** 2)
    return w / w.sum()


def gaussian_blur(grid: HeatmapGrid, sigma: float = DEFAULT_SIGMA) -> HeatmapGrid:
    """Separable Gaussian smoothing with mirrored boundaries.

    Mirroring at the edges with a normalised symmetric kernel conserves the
    total mass of the grid.
    """
    if sigma < 0 or not math.isfinite(sigma):
        raise NegativeSigma(f"sigma must be a non-negative finite number, got {sigma}")
    if sigma == 0:
        return replace(grid, counts=grid.counts.copy(), sigma=0.0)
    w = gaussian_kernel(sigma)
    out = kernels.convolve_rows(np.ascontiguousarray(grid.counts), w)
    out = kernels.convolve_rows(np.ascontiguousarray(out.T), w).T
    return replace(grid, counts=np.ascontiguousarray(out), sigma=float(sigma))


def density(points, bins: int = DEFAULT_BINS, sigma: float = DEFAULT_SIGMA, x_label="x", y_label="y") -> HeatmapGrid:
    return gaussian_blur(histogram2d(points, bins, x_label, y_label), sigma)


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def grid_csv_bytes(grid: HeatmapGrid) -> bytes:
    lines = [",".join(format(v, ".9g") for v in row) for row in grid.counts.tolist()]
    return ("\n".join(lines) + "\n").encode("ascii")


def grid_pgm_bytes(grid: HeatmapGrid) -> bytes:
    """16-bit binary PGM; highest y bin on the top row."""
    c = grid.counts
    lo, hi = float(c.min()), float(c.max())
    if hi > lo:
        scaled = np.rint((c - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.zeros_like(c)
    img = scaled[::-1].astype(">u2")
    header = f"P5\n{grid.bins} {grid.bins}\n65535\n".encode("ascii")
    return header + img.tobytes()


def grid_metadata(grid: HeatmapGrid) -> dict:
    return {
        "bins": grid.bins,
        "x_label": grid.x_label,
        "y_label": grid.y_label,
        "x_range": list(grid.x_range),
        "y_range": list(grid.y_range),
        "x_mean": grid.x_mean,
        "y_mean": grid.y_mean,
        "sigma": grid.sigma,
        "kernel_truncation_sigmas": TRUNCATE,
        "kernel_normalised": True,
        "boundary": "mirror (half-sample symmetric)",
        "csv_layout": "row i = y bin i (lowest y first), column j = x bin j",
        "pgm_layout": "16-bit, min-max normalised, highest y bin on the top row",
        "total": grid.total,
    }


def export_grid(grid: HeatmapGrid, path_base) -> list:
    """Write ``<base>.csv``, ``<base>.json`` and ``<base>.pgm``; return the paths."""
    base = Path(path_base)
    outputs = [
        (base.with_name(base.name + ".csv"), grid_csv_bytes(grid)),
        (base.with_name(base.name + ".json"),
         (json.dumps(grid_metadata(grid), indent=2, sort_keys=True) + "\n").encode()),
        (base.with_name(base.name + ".pgm"), grid_pgm_bytes(grid)),
    ]
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        for path, data in outputs:
            _atomic_write(path, data)
    except OSError as exc:
        raise IoFailure(f"cannot write heatmap {base}: {exc}") from exc
    return [p for p, _ in outputs]


def mirrored(points: Iterable) -> np.ndarray:
    """Swap the x and y coordinate of every point."""
    return np.asarray(points, dtype=float).reshape(-1, 2)[:, ::-1].copy()
