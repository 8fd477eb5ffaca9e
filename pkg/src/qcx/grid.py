"""Evaluation grids in the upper half-plane and row-partitioned evaluation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from qcx.errors import MapSpecError


@dataclass(frozen=True)
class GridSpec:
    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    spacing: str = "uniform"   # or "dyadic": geometric in y

    def __post_init__(self):
        if not (self.x0 < self.x1 and 0 < self.y0 < self.y1):
            raise MapSpecError("grid needs x0 < x1 and 0 < y0 < y1", "--grid")
        if self.nx < 2 or self.ny < 2:
            raise MapSpecError("grid needs nx, ny >= 2", "--grid")
        if self.spacing not in ("uniform", "dyadic"):
            raise MapSpecError(f"unknown spacing {self.spacing!r}", "--grid")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (6, 7):
            raise MapSpecError("expected x0,x1,y0,y1,nx,ny[,uniform|dyadic]", "--grid")
        try:
            x0, x1, y0, y1 = (float(p) for p in parts[:4])
            nx, ny = int(parts[4]), int(parts[5])
        except ValueError:
            raise MapSpecError(f"unreadable grid {text!r}", "--grid") from None
        return cls(x0, x1, y0, y1, nx, ny, parts[6] if len(parts) == 7 else "uniform")

    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    def ys(self) -> np.ndarray:
        if self.spacing == "dyadic":
            return np.geomspace(self.y0, self.y1, self.ny)
        return np.linspace(self.y0, self.y1, self.ny)

    def mesh(self):
        """(X, Y) of shape (ny, nx): one row per y value."""
        return np.meshgrid(self.xs(), self.ys())


def map_rows(fn, grid: GridSpec, threads: int = 1) -> dict:
    """Apply ``fn(x_row, y_row) -> dict of arrays`` to each grid row and stack
    the rows in order. Rows are split into contiguous blocks across threads;
    every point is computed independently, so the result does not depend on
    the thread count."""
    X, Y = grid.mesh()
    blocks = np.array_split(np.arange(grid.ny), max(1, min(threads, grid.ny)))

    def run(rows):
        return fn(X[rows].ravel(), Y[rows].ravel())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return {k: np.concatenate([np.asarray(p[k]).ravel() for p in parts]) for k in parts[0]}
