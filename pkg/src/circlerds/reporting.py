"""Canonical report serialization (byte-stable JSON and CSV)."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .transfer import GridMeasure
from .weights import WeightProfile


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, repr floats."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(canonical_json(obj), encoding="utf-8")


def profile_to_csv(profile: WeightProfile) -> str:
    d = profile.d
    header = (
        ["probe_point"]
        + [f"u_{i + 1}" for i in range(d)]
        + [f"stderr_{i + 1}" for i in range(d)]
        + ["unclassified"]
    )
    lines = [",".join(header)]
    for est in profile.estimates:
        row = [f"{float(est.point.value):.12f}"]
        row += [repr(v) for v in est.values.tolist()]
        row += [repr(v) for v in est.stderr.tolist()]
        row.append(repr(est.unclassified))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def measure_to_csv(mu: GridMeasure) -> str:
    n = mu.resolution
    lines = ["cell_index,lo,hi,mass"]
    for c in range(n):
        lines.append(
            f"{c},{Fraction(c, n)},{Fraction(c + 1, n)},{float(mu.mass[c])!r}"
        )
    return "\n".join(lines) + "\n"


def measure_from_csv(text: str) -> GridMeasure:
    rows = [ln for ln in text.strip().splitlines()[1:] if ln]
    import numpy as np

    mass = np.zeros(len(rows))
    for row in rows:
        idx, _, _, m = row.split(",")
        mass[int(idx)] = float(m)
    return GridMeasure(len(rows), mass / mass.sum())


def measure_cdf_csv(mu: GridMeasure) -> str:
    lines = ["x,cdf"]
    cdf = mu.cdf()
    n = mu.resolution
    for c in range(n):
        lines.append(f"{(c + 1) / n!r},{float(cdf[c])!r}")
    return "\n".join(lines) + "\n"


def weight_curves_csv(profile: WeightProfile) -> dict[str, str]:
    out = {}
    for i in range(profile.d):
        lines = ["x,u"]
        for est in profile.estimates:
            lines.append(f"{float(est.point.value)!r},{float(est.values[i])!r}")
        out[f"u_{i + 1}.csv"] = "\n".join(lines) + "\n"
    return out
