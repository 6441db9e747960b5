"""Deterministic heatmap rendering to binary P6 pixmaps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ColorMap:
    """Piecewise-linear RGB ramp with optional value anchors.

    ``kind`` 'sequential' anchors at the data range; 'diverging' centers the
    ramp on zero with symmetric anchors.  Explicit ``vmin``/``vmax`` override
    the automatic anchors; values outside are clipped to the end colors.
    """

    kind: str
    stops: tuple[tuple[float, tuple[int, int, int]], ...]
    vmin: float | None = None
    vmax: float | None = None

    def __post_init__(self):
        if self.kind not in ("sequential", "diverging"):
            raise DomainError(f"colormap kind must be 'sequential' or 'diverging', got {self.kind!r}")
        pos = [p for p, _ in self.stops]
        if len(pos) < 2 or pos[0] != 0.0 or pos[-1] != 1.0 or np.any(np.diff(pos) <= 0.0):
            raise DomainError("colormap stops must increase strictly from 0 to 1")
        for _, rgb in self.stops:
            if len(rgb) != 3 or any(ch < 0 or ch > 255 for ch in rgb):
                raise DomainError("colormap colors must be 8-bit RGB triples")
        for name in ("vmin", "vmax"):
            v = getattr(self, name)
            if v is not None and not np.isfinite(v):
                raise DomainError(f"colormap {name} must be finite")

    def anchors(self, values: np.ndarray) -> tuple[float, float]:
        lo = float(values.min()) if self.vmin is None else self.vmin
        hi = float(values.max()) if self.vmax is None else self.vmax
        if self.kind == "diverging" and (self.vmin is None or self.vmax is None):
            a = max(abs(lo), abs(hi))
            lo, hi = -a, a
        return lo, hi


SEQUENTIAL = ColorMap(
    kind="sequential",
    stops=(
        (0.00, (0, 0, 140)),
        (0.12, (0, 60, 255)),
        (0.38, (0, 220, 255)),
        (0.62, (255, 230, 0)),
        (0.88, (255, 60, 0)),
        (1.00, (150, 0, 0)),
    ),
)

DIVERGING = ColorMap(
    kind="diverging",
    stops=(
        (0.00, (0, 40, 255)),
        (0.50, (245, 245, 245)),
        (1.00, (255, 30, 0)),
    ),
)


def render_heatmap(values: np.ndarray, cmap: ColorMap = SEQUENTIAL) -> bytes:
    """Render a 2-D field as a binary pixmap (P6, 8-bit), bottom row first.

    Identical inputs produce byte-identical output.  Non-finite values are
    rejected with their indices listed.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.size == 0:
        raise DomainError("heatmap needs a non-empty 2-D array")
    finite = np.isfinite(v)
    if not finite.all():
        where = [(int(i), int(j)) for i, j in zip(*np.nonzero(~finite))][:8]
        raise DomainError(f"non-finite heatmap values at indices {where}")

    lo, hi = cmap.anchors(v)
    if hi > lo:
        u = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    else:
        u = np.full_like(v, 0.5)

    pos = np.array([p for p, _ in cmap.stops])
    rgb = np.array([c for _, c in cmap.stops], dtype=float)
    channels = [np.interp(u, pos, rgb[:, i]) for i in range(3)]
    img = np.stack(channels, axis=-1)[::-1]  # first data row at the bottom
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    height, width = v.shape
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + pixels.tobytes()
