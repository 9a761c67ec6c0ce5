"""CSV grids and float TIFF dumps for centered spectrum maps."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from src.engine.errors import LayoutError


def write_grid_csv(grid: np.ndarray, path: Path, layout: str = "centered") -> Path:
    """Row-major grid with a `# layout=...` header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = grid.shape
    np.savetxt(
        path,
        grid,
        delimiter=",",
        fmt="%.9e",
        header=f"layout={layout},rows={h},cols={w}",
        comments="# ",
    )
    return path


def read_grid_csv(path: Path, expect_layout: str | None = "centered") -> np.ndarray:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().lstrip("# ").strip()
    fields = dict(item.split("=", 1) for item in header.split(",") if "=" in item)
    if expect_layout is not None and fields.get("layout") != expect_layout:
        raise LayoutError(f"{path}: layout {fields.get('layout')!r}, expected {expect_layout!r}")
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)


def write_float_image(grid: np.ndarray, path: Path) -> Path:
    """32-bit float single-channel TIFF (mode 'F')."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(grid, dtype=np.float32)).save(path, format="TIFF")
    return path
