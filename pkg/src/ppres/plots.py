"""Static SVG figures with byte-reproducible output."""
from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import DomainError, MissingSeriesError  # noqa: E402

_RC = {"svg.hashsalt": "ppres", "svg.fonttype": "path", "figure.dpi": 72}


@dataclass(frozen=True)
class Series:
    x: str
    y: str
    label: str = ""
    z: str | None = None
    optional: bool = False
    style: str = "-"


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    series: tuple
    x_label: str
    x_unit: str
    y_label: str
    y_unit: str
    title: str = ""
    z_label: str = ""
    guides: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("heatmap", "line", "loglog"):
            raise DomainError(f"unknown plot kind {self.kind!r}")
        if not self.series:
            raise DomainError("a plot needs at least one series")
        if not self.x_unit or not self.y_unit:
            raise DomainError("both axes need units")


def _column(table, key, required):
    if key not in table:
        if required:
            raise MissingSeriesError(f"series column {key!r} not in table")
        return None
    return np.asarray(table[key], dtype=float)


def emit_plot(spec: PlotSpec, table, path):
    """Render ``spec`` from ``table`` (column name -> values) into an SVG file.

    Optional series whose columns are absent or empty are skipped.  ``guides``
    are ``(label, x0, y0, slope)`` reference lines on log-log plots.
    """
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        drawn = 0
        for s in spec.series:
            x = _column(table, s.x, not s.optional)
            y = _column(table, s.y, not s.optional)
            if x is None or y is None or x.size == 0 or y.size == 0:
                if s.optional:
                    continue
                raise MissingSeriesError(f"series {s.y!r} against {s.x!r} is empty")
            if x.shape != y.shape:
                raise DomainError(f"series {s.y!r} and {s.x!r} differ in length")
            if spec.kind == "heatmap":
                z = _column(table, s.z, True)
                xs, ys = np.unique(x), np.unique(y)
                grid = np.full((ys.size, xs.size), np.nan)
                grid[np.searchsorted(ys, y), np.searchsorted(xs, x)] = z
                mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis",
                                     rasterized=False)
                fig.colorbar(mesh, ax=ax, label=spec.z_label)
            else:
                ax.plot(x, y, s.style, label=s.label or None)
            drawn += 1
        if drawn == 0:
            raise MissingSeriesError("no series could be drawn")
        if spec.kind == "loglog":
            ax.set_xscale("log")
            ax.set_yscale("log")
            xlim = ax.get_xlim()
            xg = np.geomspace(*xlim, 50)
            for label, x0, y0, slope in spec.guides:
                ax.plot(xg, y0 * (xg / x0) ** slope, "--", label=label)
            ax.set_xlim(xlim)
        ax.set_xlabel(f"{spec.x_label} ({spec.x_unit})")
        ax.set_ylabel(f"{spec.y_label} ({spec.y_unit})")
        if spec.title:
            ax.set_title(spec.title)
        if spec.kind != "heatmap" and any(s.label for s in spec.series):
            ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return path
