"""Report writer: ``report.json``, one or more TSV tables, and PNG figures.

Figures are drawn from floats converted at the last moment; every number
in the JSON and TSV output stays an exact ``p/q`` string.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .geometry import convex_hull  # noqa: E402
from .manifest import atomic_write, canonical_json  # noqa: E402
from .rational import fmt  # noqa: E402


def _cell(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return "" if x is None else str(x)
    return fmt(x)


def write_tsv(path: Path, header: list, rows: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(x) for x in r])
    return path


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def _log2(x, floor):
    return math.log2(float(x)) if x > 0 else floor


# --- figures --------------------------------------------------------------

def plot_stage_dims(run, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.step(range(len(run.stages)), [s.dim for s in run.stages], where="post", label="dim U_n")
    ax.plot(range(len(run.stages)), [len(s.vertices) // 2 for s in run.stages], ".", label="vertex pairs")
    ax.set_xlabel("stage n")
    ax.set_ylabel("count")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def _polygon(points):
    """Exact hull of 2-d points, ordered by angle."""
    hull = convex_hull(points).vertices
    if len(hull) < 3:
        return [tuple(float(c) for c in p) for p in hull]
    cx = sum(float(p[0]) for p in hull) / len(hull)
    cy = sum(float(p[1]) for p in hull) / len(hull)
    pts = [(float(p[0]), float(p[1])) for p in hull]
    return sorted(pts, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))


def plot_balls(run, path: Path, limit: int = 4) -> Path:
    """Unit balls of the first stages of dimension >= 2, projected on their
    first two coordinates (equal across stages, since each stage is
    1-complemented in the next) and on their last two."""
    picks = [k for k, s in enumerate(run.stages) if s.dim >= 2][:limit]
    fig, axes = plt.subplots(1, 2, figsize=(7.5, 3.8))
    for ax, sl, title in ((axes[0], slice(0, 2), "first two coordinates"),
                          (axes[1], slice(-2, None), "last two coordinates")):
        for k in picks:
            poly = _polygon([v[sl] for v in run.stages[k].vertices])
            xs, ys = zip(*(poly + poly[:1]))
            ax.plot(xs, ys, label=f"U_{k} (dim {run.stages[k].dim})")
        ax.set_aspect("equal")
        ax.set_title(title)
    if picks:
        axes[1].legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def plot_bounds(rows: list, path: Path, title: str) -> Path:
    """``rows`` = (label, [(n, defect, bound)]); zero defects sit on a floor line."""
    fig, ax = plt.subplots(figsize=(5, 3.4))
    floor = -1 + min((_log2(b, 0) for _, pts in rows for _, _, b in pts), default=0) - 2
    for label, pts in rows:
        if not pts:
            continue
        ns = [p[0] for p in pts]
        ax.plot(ns, [_log2(p[1], floor) for p in pts], "o-", label=f"{label} defect")
    if rows and rows[0][1]:
        pts = rows[0][1]
        ax.plot([p[0] for p in pts], [_log2(p[2], floor) for p in pts], "k--", label="bound")
    ax.axhline(floor, color="grey", lw=.5)
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_xlabel("n")
    ax.set_ylabel("log2 (0 drawn at floor)")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


# --- report bundles -------------------------------------------------------

def write_report(directory, payload: dict, tables: dict, figures=()) -> list:
    """Write ``report.json``, ``<name>.tsv`` per table and the given figures.

    ``tables`` maps a name to ``(header, rows)``; ``figures`` is a list of
    ``(filename, callable(path) -> path)``.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    atomic_write(d / "report.json", canonical_json(payload))
    out.append(d / "report.json")
    for name, (header, rows) in tables.items():
        out.append(write_tsv(d / f"{name}.tsv", header, rows))
    for name, draw in figures:
        out.append(draw(d / name))
    return out
