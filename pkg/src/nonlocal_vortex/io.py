"""CSV and 16-bit PGM writers for maps and scans.

CSV layout: ``#`` lines carry ``key: value`` metadata; each data row holds
comma-separated values written with 17 significant digits, so reading a
file back reproduces the stored floats exactly. Lines end with LF.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(v) -> str:
    return "%.17g" % v


def write_csv(path, rows: np.ndarray, meta: dict) -> Path:
    path = Path(path)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Return ``(meta, rows)`` from a file written by :func:`write_csv`."""
    meta, rows = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                meta[key.strip()] = value.strip()
            elif line:
                rows.append([float(t) for t in line.split(",")])
    return meta, np.array(rows)


def _axis_meta(max_) -> str:
    a = max_.axis
    return (f"{max_.label} photon={max_.photon} representation={max_.representation} "
            f"start={_fmt(a.start)} stop={_fmt(a.stop)} n={a.n}")


def write_map_csv(path, cmap, config_hash: str = "", extra: dict | None = None) -> Path:
    """Coincidence map; row index follows axis 1, column index axis 2."""
    meta = {"kind": "coincidence-map", "axis1": _axis_meta(cmap.axis1), "axis2": _axis_meta(cmap.axis2)}
    for key in ("plane", "path", "counts", "total_events", "seed", "apertures"):
        if key in cmap.meta:
            meta[key] = cmap.meta[key]
    if extra:
        meta.update(extra)
    meta["config_sha256"] = config_hash
    return write_csv(path, cmap.values, meta)


def write_scan_csv(path, scan, config_hash: str = "") -> Path:
    cols = [scan.positions, scan.intensities]
    names = ["detector2", "intensity"]
    if scan.fit is not None:
        cols.append(scan.fit.model(scan.positions))
        names.append("fit")
    meta = {"kind": "fringe-scan", "detector1": scan.detector1, "columns": ",".join(names),
            "path": scan.meta.get("path", ""), "config_sha256": config_hash}
    return write_csv(path, np.column_stack(cols), meta)


def write_pgm16(path, values: np.ndarray) -> Path:
    """Binary 16-bit graymap, linear from 0 to the array maximum; image row = array row."""
    v = np.asarray(values, dtype=float)
    top = v.max()
    scaled = np.zeros_like(v) if top <= 0 else np.clip(v / top, 0.0, 1.0) * 65535.0
    data = np.rint(scaled).astype(">u2")
    h, w = data.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())
    return path


def read_pgm16(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    w, h = (int(t) for t in parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(h, w)
