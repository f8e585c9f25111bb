"""Render sweep/simulation CSVs into static figures plus numeric sidecars.

Four figure kinds cover the CSV schemas the ffma CLI emits:

  pas_vs_ebn0    power-scaling factor against Eb/N0, one line per series
  pas_vs_gain    power-scaling factor against the spectral-efficiency
                 gain log2(p), one line per series
  ber_semilog    error-rate curves on a log-y axis (zero rows dropped)
  fbl_min_ebn0   minimum required Eb/N0 against spectral efficiency

Rendering is batch and deterministic: a fixed style sheet, no
timestamps, and a sidecar JSON carrying the exact plotted arrays so
regression tests never diff images.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KINDS = {
    "pas_vs_ebn0": {"x": "ebn0_db", "y": "mu_pas", "series": "p",
                    "xlabel": "Eb/N0 (dB)", "ylabel": "power-scaling factor", "logy": False},
    "pas_vs_gain": {"x": "log2p", "y": "mu_pas", "series": "eta",
                    "xlabel": "spectral-efficiency gain log2(p)", "ylabel": "power-scaling factor", "logy": False},
    "ber_semilog": {"x": "ebn0_db", "y": "ser", "series": "scheme",
                    "xlabel": "Eb/N0 (dB)", "ylabel": "error rate", "logy": True},
    "fbl_min_ebn0": {"x": "spectral_efficiency", "y": "min_ebn0_db", "series": "scenario",
                     "xlabel": "spectral efficiency (bits/DoF)", "ylabel": "minimum Eb/N0 (dB)", "logy": False},
}

_STYLE = {
    "figure.figsize": (6.4, 4.4),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "lines.linewidth": 1.6,
    "lines.markersize": 4.5,
    "legend.fontsize": 9,
    "font.size": 10,
}

_MARKERS = ["o", "s", "^", "v", "D", "x", "+", "*"]


class RenderError(ValueError):
    """Bad figure spec or CSV contents."""


@dataclass
class FigureSpec:
    csv: list[str]
    kind: str
    out: str
    series_by: str | None = None
    x: str | None = None
    y: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    title: str | None = None
    sidecar: str | None = None

    @classmethod
    def from_json(cls, doc: dict | str | Path) -> "FigureSpec":
        if not isinstance(doc, dict):
            doc = json.loads(Path(doc).read_text())
        if "kind" not in doc or doc["kind"] not in KINDS:
            raise RenderError(f"kind must be one of {sorted(KINDS)}")
        if "csv" not in doc or "out" not in doc:
            raise RenderError("spec needs 'csv' and 'out' paths")
        csvs = doc["csv"] if isinstance(doc["csv"], list) else [doc["csv"]]
        return cls(
            csv=[str(c) for c in csvs],
            kind=doc["kind"],
            out=str(doc["out"]),
            series_by=doc.get("series_by"),
            x=doc.get("x"),
            y=doc.get("y"),
            xlabel=doc.get("xlabel"),
            ylabel=doc.get("ylabel"),
            title=doc.get("title"),
            sidecar=doc.get("sidecar"),
        )


def _read_rows(paths: list[str]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows.extend(reader)
    if not rows:
        raise RenderError("no CSV rows to plot")
    return rows


def _column(rows: list[dict], name: str) -> None:
    if name not in rows[0]:
        raise RenderError(f"column {name!r} not in CSV (have {sorted(rows[0])})")


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns the sidecar document.

    The sidecar holds the plotted arrays exactly as read (no smoothing),
    one entry per series, sorted by label; rows dropped from a log axis
    are recorded.  The same spec and CSVs produce byte-identical
    sidecars.
    """
    defaults = KINDS[spec.kind]
    x_col = spec.x or defaults["x"]
    y_col = spec.y or defaults["y"]
    series_col = spec.series_by or defaults["series"]
    rows = _read_rows(spec.csv)
    for col in (x_col, y_col, series_col):
        _column(rows, col)

    groups: dict[str, list[tuple[float, float]]] = {}
    dropped = 0
    for row in rows:
        x = float(row[x_col])
        y = float(row[y_col])
        if defaults["logy"] and y <= 0.0:
            dropped += 1
            continue
        groups.setdefault(str(row[series_col]), []).append((x, y))
    if dropped:
        print(f"figviz: dropped {dropped} non-positive row(s) from the log axis", file=sys.stderr)
    if not groups:
        raise RenderError("every row was dropped; nothing to plot")

    series = []
    for label in sorted(groups, key=_label_key):
        pts = sorted(groups[label])
        series.append(
            {
                "label": label,
                "x": [p[0] for p in pts],
                "y": [p[1] for p in pts],
            }
        )

    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for i, s in enumerate(series):
            ax.plot(s["x"], s["y"], marker=_MARKERS[i % len(_MARKERS)],
                    label=f"{series_col}={s['label']}")
        if defaults["logy"]:
            ax.set_yscale("log")
        ax.set_xlabel(spec.xlabel or defaults["xlabel"])
        ax.set_ylabel(spec.ylabel or defaults["ylabel"])
        if spec.title:
            ax.set_title(spec.title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(spec.out, metadata=_image_metadata(spec.out))
        plt.close(fig)

    sidecar = {
        "kind": spec.kind,
        "x_column": x_col,
        "y_column": y_col,
        "series_column": series_col,
        "dropped_rows": dropped,
        "series": series,
    }
    sidecar_path = spec.sidecar or str(Path(spec.out).with_suffix("")) + ".sidecar.json"
    Path(sidecar_path).write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    return sidecar


def _label_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def _image_metadata(path: str) -> dict:
    # strip run-dependent metadata so renders are byte-stable
    if path.endswith(".png"):
        return {"Software": "figviz"}
    if path.endswith(".svg"):
        return {"Date": None}
    return {}
