"""Phase singularities, winding numbers and the singularity/entanglement check.

Orientation: for a field sampled as ``values[i, j]`` at ``(x_i, y_j)`` the
winding is counted counterclockwise in the ``(x, y)`` plane, so
``(x + 1j*y) * gaussian`` has charge +1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .biphoton import schmidt_from_amplitude
from .fringes import FringeScan
from .grid import FieldGrid

TWO_PI = 2.0 * math.pi
NULL_THRESHOLD = 1e-3
SCHMIDT_TOL = 1e-6
# phase steps this close to pi cannot be assigned a direction
AMBIGUOUS_STEP = math.pi - 1e-6
MAX_LOOP_STEP = 0.75 * math.pi


class LoopTouchesNull(ValueError):
    pass


class LoopTooCoarse(ValueError):
    pass


class InconsistentPeriods(ValueError):
    pass


class ResolutionWarning(UserWarning):
    pass


def _wrapped_steps(z: np.ndarray) -> np.ndarray:
    """Phase increments along a closed sequence of complex samples, each in (-pi, pi]."""
    return np.angle(np.roll(z, -1) * np.conj(z))


def rectangle_loop(i0: int, i1: int, j0: int, j1: int) -> np.ndarray:
    """Counterclockwise index path around the rectangle ``[i0, i1] x [j0, j1]`` (closed implicitly)."""
    if i1 <= i0 or j1 <= j0:
        raise ValueError("empty rectangle")
    bottom = [(i, j0) for i in range(i0, i1)]
    right = [(i1, j) for j in range(j0, j1)]
    top = [(i, j1) for i in range(i1, i0, -1)]
    left = [(i0, j) for j in range(j1, j0, -1)]
    return np.array(bottom + right + top + left, dtype=int)


def circle_loop(fld: FieldGrid, center=(0.0, 0.0), radius: float = 1.0) -> np.ndarray:
    """Counterclockwise 8-connected index path of grid cells hugging a circle."""
    ax, ay = fld.axes
    r_px = radius / min(ax.step, ay.step)
    m = max(16, int(math.ceil(8 * r_px)))
    t = np.linspace(0.0, TWO_PI, m, endpoint=False)
    i = np.rint((center[0] + radius * np.cos(t) - ax.start) / ax.step).astype(int)
    j = np.rint((center[1] + radius * np.sin(t) - ay.start) / ay.step).astype(int)
    if i.min() < 0 or j.min() < 0 or i.max() >= ax.n or j.max() >= ay.n:
        raise ValueError("circle leaves the grid")
    pts = np.stack([i, j], axis=1)
    keep = np.any(pts != np.roll(pts, 1, axis=0), axis=1)
    return pts[keep]


def winding_number(fld: FieldGrid, loop, null_threshold: float = NULL_THRESHOLD) -> int:
    """Topological charge enclosed by a closed index path.

    Sums nearest-branch phase increments between consecutive loop samples.
    Raises :class:`LoopTouchesNull` if the modulus on the loop falls below
    ``null_threshold`` of the field peak, and :class:`LoopTooCoarse` if any
    step exceeds 3/4 pi (the branch choice would be unreliable).
    """
    loop = np.asarray(loop, dtype=int)
    if loop.ndim != 2 or loop.shape[1] != 2 or len(loop) < 3:
        raise ValueError("loop must be a sequence of at least 3 (i, j) index pairs")
    z = fld.values[loop[:, 0], loop[:, 1]]
    peak = np.abs(fld.values).max()
    if np.abs(z).min() <= null_threshold * peak:
        raise LoopTouchesNull("field modulus on the loop is below the null threshold")
    steps = _wrapped_steps(z)
    if np.abs(steps).max() > MAX_LOOP_STEP:
        raise LoopTooCoarse(f"phase step {np.abs(steps).max():.3f} rad on loop; sample it more densely")
    return int(np.rint(steps.sum() / TWO_PI))


@dataclass
class SingularityReport:
    locations: list = field(default_factory=list)
    charges: list = field(default_factory=list)
    core_ratios: list = field(default_factory=list)

    def __len__(self):
        return len(self.charges)

    @property
    def total_charge(self) -> int:
        return int(sum(self.charges))


def _plaquette_charges(z: np.ndarray):
    """Winding of every 2x2 cell and a mask of ambiguous cells (a step of +-pi), whose charge is 0."""
    a, b, c, d = z[:-1, :-1], z[1:, :-1], z[1:, 1:], z[:-1, 1:]
    steps = np.stack([np.angle(b * np.conj(a)), np.angle(c * np.conj(b)),
                      np.angle(d * np.conj(c)), np.angle(a * np.conj(d))])
    charge = np.rint(steps.sum(axis=0) / TWO_PI).astype(int)
    ambiguous = np.any(np.abs(steps) > AMBIGUOUS_STEP, axis=0)
    charge[ambiguous] = 0
    return charge, ambiguous


def _bilinear_zero(z00, z10, z11, z01):
    """Zero of the bilinear interpolant on the unit cell, by Newton iteration from the center."""
    u = v = 0.5
    for _ in range(30):
        f = (1 - u) * (1 - v) * z00 + u * (1 - v) * z10 + u * v * z11 + (1 - u) * v * z01
        fu = (1 - v) * (z10 - z00) + v * (z11 - z01)
        fv = (1 - u) * (z01 - z00) + u * (z11 - z10)
        jac = np.array([[fu.real, fv.real], [fu.imag, fv.imag]])
        try:
            du, dv = np.linalg.solve(jac, [-f.real, -f.imag])
        except np.linalg.LinAlgError:
            break
        u, v = u + du, v + dv
        if abs(du) + abs(dv) < 1e-13:
            break
    return float(np.clip(u, 0, 1)), float(np.clip(v, 0, 1))


def _cell_zero(fld: FieldGrid, i: int, j: int, peak: float):
    """Bilinear zero of cell ``(i, j)`` as ``(x, y, |f| / peak)``."""
    z = fld.values
    ax, ay = fld.axes
    u, v = _bilinear_zero(z[i, j], z[i + 1, j], z[i + 1, j + 1], z[i, j + 1])
    f = ((1 - u) * (1 - v) * z[i, j] + u * (1 - v) * z[i + 1, j]
         + u * v * z[i + 1, j + 1] + (1 - u) * v * z[i, j + 1])
    return ax.start + (i + u) * ax.step, ay.start + (j + v) * ay.step, float(abs(f) / peak)


def _enclosing_charge(fld: FieldGrid, low: np.ndarray, i0, i1, j0, j1, null_threshold):
    """Winding around the rectangle, grown until its loop avoids low samples and coarse steps.

    Returns ``(charge, (i0, i1, j0, j1))``; charge is None when the
    rectangle reaches the grid edge first.
    """
    n0, n1 = low.shape
    while i0 >= 0 and j0 >= 0 and i1 < n0 and j1 < n1:
        path = rectangle_loop(i0, i1, j0, j1)
        if not low[path[:, 0], path[:, 1]].any():
            try:
                return winding_number(fld, path, null_threshold), (i0, i1, j0, j1)
            except LoopTooCoarse:
                pass
        i0, i1, j0, j1 = i0 - 1, i1 + 1, j0 - 1, j1 + 1
    return None, (i0, i1, j0, j1)


def _parabolic_offset(fm, f0, fp):
    den = fm - 2.0 * f0 + fp
    if den <= 0:
        return 0.0
    return float(np.clip(0.5 * (fm - fp) / den, -0.5, 0.5))


def locate_singularities(fld: FieldGrid, null_threshold: float = NULL_THRESHOLD) -> SingularityReport:
    """Isolated phase singularities of a 2D field.

    Cells whose corners all exceed ``null_threshold`` of the peak modulus are
    scanned for nonzero circulation and the core is placed at the zero of the
    bilinear interpolant. Low-modulus islands (a core landing on or next to a
    sample) are enclosed by the smallest surrounding rectangle whose samples
    are all above threshold; the core is placed at the modulus minimum,
    refined by a parabola through ``|f|^2``. Cells left ambiguous by a core
    sitting on a grid line are grouped and enclosed the same way. Regions
    touching the grid edge, such as null lines, are not isolated
    singularities and are skipped.
    """
    if fld.ndim != 2:
        raise ValueError("singularity search needs a 2D field")
    z = fld.values
    mag = np.abs(z)
    peak = mag.max()
    report = SingularityReport()
    if peak == 0:
        return report
    ax, ay = fld.axes
    low = mag <= null_threshold * peak

    charge, ambiguous = _plaquette_charges(z)
    cell_low = low[:-1, :-1] | low[1:, :-1] | low[1:, 1:] | low[:-1, 1:]
    for i, j in zip(*np.nonzero((charge != 0) & ~cell_low)):
        x, y, ratio = _cell_zero(fld, i, j, peak)
        report.locations.append((x, y))
        report.charges.append(int(charge[i, j]))
        report.core_ratios.append(ratio)

    # a core on a grid line makes the cells sharing that edge ambiguous; enclose them in a wider loop
    counted = np.where(cell_low, 0, charge)
    amb_labels, _ = ndimage.label(ambiguous & ~cell_low, structure=np.ones((3, 3)))
    for sl in ndimage.find_objects(amb_labels):
        q, rect = _enclosing_charge(fld, low, sl[0].start - 1, sl[0].stop + 1, sl[1].start - 1,
                                    sl[1].stop + 1, null_threshold)
        if not q:
            continue
        i0, i1, j0, j1 = rect
        q -= int(counted[i0:i1, j0:j1].sum())
        if not q:
            continue
        cells = zip(*np.nonzero(ambiguous[sl]))
        best = min((_cell_zero(fld, sl[0].start + i, sl[1].start + j, peak) for i, j in cells),
                   key=lambda t: t[2])
        report.locations.append(best[:2])
        report.charges.append(int(q))
        report.core_ratios.append(best[2])

    labels, count = ndimage.label(low, structure=np.ones((3, 3)))
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        i0, i1, j0, j1 = sl[0].start - 1, sl[0].stop, sl[1].start - 1, sl[1].stop
        if i0 < 0 or j0 < 0 or i1 >= ax.n or j1 >= ay.n:
            continue
        q, rect = _enclosing_charge(fld, low, i0, i1, j0, j1, null_threshold)
        if q:
            # charges of cells inside the rectangle were already reported above
            i0, i1, j0, j1 = rect
            q -= int(counted[i0:i1, j0:j1].sum())
        if not q:
            continue
        inside = labels[sl] == lab
        sub = np.where(inside, mag[sl], np.inf)
        mi, mj = np.unravel_index(np.argmin(sub), sub.shape)
        gi, gj = sl[0].start + mi, sl[1].start + mj
        m2 = mag ** 2
        di = _parabolic_offset(m2[gi - 1, gj], m2[gi, gj], m2[gi + 1, gj]) if 0 < gi < ax.n - 1 else 0.0
        dj = _parabolic_offset(m2[gi, gj - 1], m2[gi, gj], m2[gi, gj + 1]) if 0 < gj < ay.n - 1 else 0.0
        report.locations.append((ax.start + (gi + di) * ax.step, ay.start + (gj + dj) * ay.step))
        report.charges.append(int(q))
        report.core_ratios.append(float(mag[gi, gj] / peak))
    return report


@dataclass
class SeparabilityResult:
    verdict: str
    schmidt_coefficients: np.ndarray
    schmidt_number: int
    isolated_singularity: bool
    singularities: SingularityReport
    consistent: bool
    converged: bool

    @property
    def entangled(self) -> bool:
        return self.verdict == "entangled"


def separability_test(fld: FieldGrid, tol: float = SCHMIDT_TOL,
                      null_threshold: float = NULL_THRESHOLD) -> SeparabilityResult:
    """Classify a sampled two-mode amplitude as separable or entangled.

    The verdict comes from the Schmidt number of the sampled amplitude. The
    singularity search is reported alongside, and ``consistent`` records the
    implication "isolated nonzero-charge singularity => Schmidt number >= 2".
    Convergence is judged by comparing the leading coefficients with those of
    the grid decimated by two.
    """
    if fld.ndim != 2:
        raise ValueError("separability test needs a 2D amplitude")
    s, _ = schmidt_from_amplitude(fld.values, fld.cell_volume)
    coarse, _ = schmidt_from_amplitude(fld.values[::2, ::2], 4.0 * fld.cell_volume)
    k = min(4, len(coarse))
    converged = bool(np.max(np.abs(s[:k] - coarse[:k])) <= 1e-4)
    if not converged:
        warnings.warn("Schmidt coefficients change by more than 1e-4 under grid decimation; "
                      "refine the grid", ResolutionWarning, stacklevel=2)
    number = int(np.sum(s > tol))
    report = locate_singularities(fld, null_threshold)
    isolated = len(report) > 0
    verdict = "entangled" if number >= 2 else "separable"
    return SeparabilityResult(verdict, s, number, isolated, report,
                              consistent=(not isolated) or number >= 2, converged=converged)


def fringe_shift(scan_a: FringeScan, scan_b: FringeScan, period_rtol: float = 0.02) -> float:
    """Relative fringe shift ``(phase_a - phase_b) / 2 pi`` wrapped into (-1/2, 1/2]."""
    fa, fb = scan_a.fit, scan_b.fit
    if fa is None or fb is None:
        raise ValueError("both scans must be fitted first")
    if abs(fa.period - fb.period) > period_rtol * max(fa.period, fb.period):
        raise InconsistentPeriods(f"fitted periods differ: {fa.period:.6g} vs {fb.period:.6g}")
    v = (fa.phase - fb.phase) / TWO_PI
    return float(-((-v + 0.5) % 1.0 - 0.5))
