"""Locate spectral singularities, resonances, bound states and CPA points.

Spectral singularities are the real positive zeros of M22(k); CPA points are
zeros of M11(k) (the time-reversed laser); resonances, bound and virtual
states are zeros of M22 continued to complex k.  A complex condition on one
real wavenumber has codimension 2, so on-axis searches tune one extra real
family parameter theta (a gain, a coupling strength, an overall scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ._roots import (
    ConvergenceError,
    RootCountError,
    gauss_newton_2d,
    local_minima_2d,
    newton_complex,
    winding_number,
)
from .potentials import DeltaComb, Medium, PiecewiseConstant, Potential, Sampled
from .transfer import (
    SAMPLES_PER_WAVELENGTH,
    Amplitudes,
    SpectralSingularityError,
    TransferMatrix,
    amplitudes,
    transfer_matrix_grid,
    unitarity_defect,
)

__all__ = [
    "SingularityReport",
    "ScanRow",
    "RootSearchResult",
    "FailedSeed",
    "scan",
    "find_ss",
    "find_cpa",
    "find_resonances",
    "kappa_family",
    "alpha_family",
    "scale_family",
    "ConvergenceError",
    "RootCountError",
]

DEFAULT_GRID_POINTS = 400
DEFAULT_SEED_CUTOFF = 0.5


@dataclass(frozen=True)
class SingularityReport:
    """A located zero of a transfer-matrix entry.

    ``kind`` is one of lasing-SS, CPA, resonance, bound-state, virtual-state.
    Real-axis and imaginary-axis roots are snapped exactly onto their axis.
    """

    k_star: complex
    kind: str
    residual: float
    tuned_parameter: Optional[tuple[str, float]] = None
    multiplicity: int = 1


@dataclass(frozen=True)
class FailedSeed:
    k: float
    theta: float
    residual: float


class RootSearchResult(list):
    """List of SingularityReport; non-converged seeds land in ``failures``."""

    def __init__(self, items=(), failures=()):
        super().__init__(items)
        self.failures: list[FailedSeed] = list(failures)


@dataclass(frozen=True)
class ScanRow:
    """One wavenumber of a sweep; amplitude fields are None at a singularity."""

    k: float
    m: TransferMatrix
    t: Optional[complex]
    rl: Optional[complex]
    rr: Optional[complex]
    defect_l: Optional[float]
    defect_r: Optional[float]
    singular: bool


def scan(
    source: Union[Potential, Medium],
    k_grid,
    *,
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
) -> list[ScanRow]:
    """Sweep the transfer matrix, amplitudes and unitarity defects over k_grid."""
    ks = np.asarray(k_grid, dtype=float)
    if ks.size == 0:
        return []
    if not (np.all(ks > 0) and np.all(np.diff(ks) > 0)):
        raise ValueError("k grid must be strictly positive and increasing")
    ms = transfer_matrix_grid(
        source, ks, samples_per_wavelength=samples_per_wavelength
    )
    rows = []
    for k, m in zip(ks, ms):
        tm = TransferMatrix(m[0, 0], m[0, 1], m[1, 0], m[1, 1], complex(k))
        try:
            a = amplitudes(tm)
            dl, dr = unitarity_defect(a)
            rows.append(ScanRow(float(k), tm, a.t, a.rl, a.rr, dl, dr, False))
        except SpectralSingularityError:
            rows.append(ScanRow(float(k), tm, None, None, None, None, None, True))
    return rows


# ---------------------------------------------------------------------------
# one-parameter families


def kappa_family(m: Medium) -> Callable[[float], Medium]:
    """theta = kappa: replace Im n of every layer (gain for kappa < 0)."""

    def family(theta: float) -> Medium:
        return Medium([(a, b, complex(n.real, theta)) for a, b, n in m.layers])

    return family


def alpha_family(c: DeltaComb) -> Callable[[float], DeltaComb]:
    """theta = alpha: every delta strength becomes i*alpha."""

    def family(theta: float) -> DeltaComb:
        return DeltaComb([(x, 1j * theta) for x, _ in c.deltas])

    return family


def scale_family(p: Potential) -> Callable[[float], Potential]:
    """theta scales the potential values: v -> theta * v."""

    def family(theta: float) -> Potential:
        if isinstance(p, PiecewiseConstant):
            return PiecewiseConstant([(a, b, theta * v) for a, b, v in p.layers])
        if isinstance(p, DeltaComb):
            return DeltaComb([(x, theta * z) for x, z in p.deltas])
        if isinstance(p, Sampled):
            return Sampled(p.x0, p.dx, theta * p.values)
        raise TypeError(f"not a potential: {type(p).__name__}")

    return family


# ---------------------------------------------------------------------------
# 2D on-axis searches (real k, one tuning parameter)


def _entry_scalar(family, theta, k, idx, spw):
    m = transfer_matrix_grid(family(theta), [complex(k)], samples_per_wavelength=spw)
    return m[0, idx, idx]


def _find_on_axis(
    family,
    k_window,
    theta_window,
    *,
    entry: int,
    kind: str,
    tol: float,
    grid_points: int,
    seed_cutoff: float,
    param_name: str,
    samples_per_wavelength: int,
) -> RootSearchResult:
    k_lo, k_hi = map(float, k_window)
    t_lo, t_hi = map(float, theta_window)
    if not (0 < k_lo < k_hi):
        raise ValueError(f"bad k window [{k_lo}, {k_hi}]")
    if not t_lo < t_hi:
        raise ValueError(f"bad parameter window [{t_lo}, {t_hi}]")
    if not tol > 0:
        raise ValueError("tol must be positive")

    ks = np.linspace(k_lo, k_hi, grid_points)
    thetas = np.linspace(t_lo, t_hi, grid_points)
    vals = np.empty((thetas.size, ks.size))
    for j, th in enumerate(thetas):
        ms = transfer_matrix_grid(
            family(th), ks, samples_per_wavelength=samples_per_wavelength
        )
        vals[j] = np.abs(ms[:, entry, entry])

    f = lambda k, th: _entry_scalar(
        family, th, k, entry, samples_per_wavelength
    )
    roots: list[tuple[float, float, float]] = []
    failures: list[FailedSeed] = []
    for j, i in local_minima_2d(vals):
        if vals[j, i] >= seed_cutoff:
            continue
        k, th, res, ok = gauss_newton_2d(
            lambda k_, th_: f(k_, th_),
            ks[i],
            thetas[j],
            tol=tol,
            x_scale=k_hi,
            y_scale=max(abs(t_lo), abs(t_hi)),
        )
        if not ok:
            failures.append(FailedSeed(k, th, res))
            continue
        if not (k_lo <= k <= k_hi and t_lo <= th <= t_hi):
            continue
        # re-evaluate from scratch before reporting
        res = abs(f(k, th))
        if res < tol:
            roots.append((float(k), float(th), float(res)))

    dedup: list[tuple[float, float, float]] = []
    k_rad = 1e-6 * (k_hi - k_lo)
    t_rad = 1e-6 * (t_hi - t_lo)
    for cand in sorted(roots):
        for idx, kept in enumerate(dedup):
            if abs(cand[0] - kept[0]) < k_rad and abs(cand[1] - kept[1]) < t_rad:
                if cand[2] < kept[2]:
                    dedup[idx] = cand
                break
        else:
            dedup.append(cand)

    reports = [
        SingularityReport(
            k_star=complex(k, 0.0),
            kind=kind,
            residual=res,
            tuned_parameter=(param_name, th),
        )
        for k, th, res in sorted(dedup)
    ]
    return RootSearchResult(reports, failures)


def find_ss(
    family: Callable[[float], Union[Potential, Medium]],
    k_window,
    theta_window,
    *,
    tol: float = 1e-8,
    grid_points: int = DEFAULT_GRID_POINTS,
    seed_cutoff: float = DEFAULT_SEED_CUTOFF,
    param_name: str = "theta",
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
) -> RootSearchResult:
    """Spectral singularities of a one-parameter family: zeros of M22(k; theta).

    Seeds are strict local minima of |M22| below ``seed_cutoff`` on a
    grid_points x grid_points mesh, refined by damped Gauss-Newton.  Real
    potentials have |M22| >= 1, so such windows return an empty list.
    """
    return _find_on_axis(
        family,
        k_window,
        theta_window,
        entry=1,
        kind="lasing-SS",
        tol=tol,
        grid_points=grid_points,
        seed_cutoff=seed_cutoff,
        param_name=param_name,
        samples_per_wavelength=samples_per_wavelength,
    )


def find_cpa(
    family: Callable[[float], Union[Potential, Medium]],
    k_window,
    theta_window,
    *,
    tol: float = 1e-8,
    grid_points: int = DEFAULT_GRID_POINTS,
    seed_cutoff: float = DEFAULT_SEED_CUTOFF,
    param_name: str = "theta",
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
) -> RootSearchResult:
    """Coherent-perfect-absorption points: zeros of M11(k; theta)."""
    return _find_on_axis(
        family,
        k_window,
        theta_window,
        entry=0,
        kind="CPA",
        tol=tol,
        grid_points=grid_points,
        seed_cutoff=seed_cutoff,
        param_name=param_name,
        samples_per_wavelength=samples_per_wavelength,
    )


# ---------------------------------------------------------------------------
# complex-plane search


def _classify_complex(z: complex, axis_tol: float) -> tuple[str, complex]:
    if abs(z.imag) <= axis_tol and z.real > 0:
        return "lasing-SS", complex(z.real, 0.0)
    if abs(z.real) <= axis_tol and z.imag > 0:
        return "bound-state", complex(0.0, z.imag)
    if abs(z.real) <= axis_tol and z.imag < 0:
        return "virtual-state", complex(0.0, z.imag)
    if z.imag < 0:
        return "resonance", z
    # off the imaginary axis in the upper half plane: still square-integrable
    return "bound-state", z


def find_resonances(
    p: Potential,
    rectangle,
    *,
    tol: float = 1e-8,
    n_per_side: int = 96,
    max_depth: int = 16,
    cluster_radius: Optional[float] = None,
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
) -> list[SingularityReport]:
    """Zeros of M22 analytically continued into a complex-k rectangle.

    ``rectangle`` is (re_lo, re_hi, im_lo, im_hi) and must exclude k = 0.
    The boundary winding number fixes the zero count; the rectangle is then
    subdivided until each zero is isolated and polished by Newton.  A
    persistent count mismatch raises RootCountError.
    """
    re0, re1, im0, im1 = map(float, rectangle)
    if not (re0 < re1 and im0 < im1):
        raise ValueError(f"bad rectangle {rectangle}")
    if re0 <= 0 <= re1 and im0 <= 0 <= im1:
        raise ValueError("rectangle must avoid k = 0")

    def f(z):
        return complex(
            transfer_matrix_grid(
                p, [z], samples_per_wavelength=samples_per_wavelength
            )[0, 1, 1]
        )

    if cluster_radius is None:
        cluster_radius = max(100.0 * tol, 1e-7)

    for attempt, nps in enumerate((n_per_side, 2 * n_per_side)):
        total = winding_number(f, (re0, re1, im0, im1), n_per_side=nps)
        if total == 0:
            return []
        try:
            found = _hunt(
                f, (re0, re1, im0, im1), tol, nps, max_depth, cluster_radius
            )
        except ConvergenceError:
            if attempt == 1:
                raise
            continue
        if sum(mult for _, mult, _ in found) == total:
            break
        if attempt == 1:
            raise RootCountError(
                f"winding count {total} != refined roots "
                f"{sum(m for _, m, _ in found)}"
            )
    axis_tol = max(10.0 * tol, 1e-9)
    reports = []
    for z, mult, res in sorted(found, key=lambda r: (r[0].real, r[0].imag)):
        kind, z_snapped = _classify_complex(z, axis_tol)
        reports.append(
            SingularityReport(
                k_star=z_snapped, kind=kind, residual=res, multiplicity=mult
            )
        )
    return reports


def _hunt(f, rect, tol, n_per_side, depth, cluster_radius):
    re0, re1, im0, im1 = rect
    count = winding_number(f, rect, n_per_side=n_per_side)
    if count == 0:
        return []
    center = complex(0.5 * (re0 + re1), 0.5 * (im0 + im1))
    diam = math.hypot(re1 - re0, im1 - im0)

    if count == 1:
        z, res, ok = newton_complex(f, center, tol=tol)
        pad = 1e-12 * max(1.0, abs(center))
        if ok and re0 - pad <= z.real <= re1 + pad and im0 - pad <= z.imag <= im1 + pad:
            return [(z, 1, res)]

    if diam < cluster_radius:
        # unresolvable cluster: report as one multiple root
        z, res, _ = newton_complex(f, center, tol=tol, multiplicity=count)
        return [(z, count, res)]

    if depth <= 0:
        raise ConvergenceError("resonance subdivision exceeded max depth")

    # split, nudging the cut if a zero sits on it
    for frac in (0.5, 0.53, 0.47, 0.59):
        rm = re0 + frac * (re1 - re0)
        im = im0 + frac * (im1 - im0)
        quads = [
            (re0, rm, im0, im),
            (rm, re1, im0, im),
            (re0, rm, im, im1),
            (rm, re1, im, im1),
        ]
        try:
            out = []
            for q in quads:
                out.extend(
                    _hunt(f, q, tol, n_per_side, depth - 1, cluster_radius)
                )
            return out
        except ConvergenceError as exc:
            last = exc
            continue
    raise last
