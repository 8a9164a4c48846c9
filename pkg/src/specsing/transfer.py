"""Transfer matrices, scattering amplitudes and Jost solutions.

The transfer matrix M(k) relates the plane-wave coefficients of a solution of
psi'' + (k^2 - v) psi = 0 on the two sides of the support:

    (A+, B+) = M(k) (A-, B-),   psi -> A e^{ikx} + B e^{-ikx} as x -> +-inf.

Layers and deltas compose exactly (trigonometric interior solution and jump
matrices); sampled potentials are integrated with fixed-step RK4 on their
linear interpolant.  Everything is analytic in k, so the same code evaluates
M at complex k for resonance searches.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .potentials import (
    DeltaComb,
    Medium,
    PiecewiseConstant,
    Potential,
    Sampled,
    support,
)

__all__ = [
    "TransferMatrix",
    "Amplitudes",
    "JostSolutions",
    "SpectralSingularityError",
    "GridTooCoarseError",
    "transfer_matrix",
    "transfer_matrix_grid",
    "amplitudes",
    "unitarity_defect",
    "jost_solutions",
]

DET_TOL = 1e-9
SAMPLES_PER_WAVELENGTH = 50  # RK4 substep density, dx <= lambda_local / this


class SpectralSingularityError(ArithmeticError):
    """M22(k) vanished: reflection/transmission amplitudes diverge at this k."""

    def __init__(self, k, m22):
        self.k = k
        self.m22 = m22
        super().__init__(
            f"spectral singularity: M22 = {m22} at k = {k}; amplitudes diverge"
        )


class GridTooCoarseError(ValueError):
    """Sampled grid resolves fewer than 20 samples per local wavelength."""


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 complex matrix with unit determinant relating asymptotic coefficients."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex
    k: complex

    @property
    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def det_defect(self) -> float:
        return abs(self.det - 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])


@dataclass(frozen=True)
class Amplitudes:
    """Left/right reflection and (side-independent) transmission amplitudes."""

    rl: complex
    rr: complex
    t: complex


def _validate_k(k) -> complex:
    kc = complex(k)
    if kc == 0:
        raise ValueError("k = 0 is excluded (plane-wave basis degenerates)")
    if kc.imag == 0 and kc.real <= 0:
        raise ValueError(f"real wavenumber must be positive, got {kc.real}")
    return kc


def _sin_over(t: np.ndarray) -> np.ndarray:
    # sin(t)/t, even in t, stable near t = 0
    t = np.asarray(t, dtype=complex)
    out = np.empty_like(t)
    small = np.abs(t) < 1e-5
    ts = t[small]
    out[small] = 1.0 - ts * ts / 6.0 + ts ** 4 / 120.0
    tb = t[~small]
    out[~small] = np.sin(tb) / tb
    return out


def _layer_factor(ks, a, b, w2):
    """Plane-wave-basis matrix of one homogeneous slab; analytic in w2."""
    ell = b - a
    t = np.sqrt(w2) * ell
    c = np.cos(t)
    s_over_w = ell * _sin_over(t)  # sin(w l)/w
    half = 0.5j * s_over_w / ks
    diag = half * (ks * ks + w2)
    off = half * (w2 - ks * ks)
    e_m = np.exp(-1j * ks * ell)
    e_p = np.exp(1j * ks * ell)
    ph_m = np.exp(-1j * ks * (a + b))
    ph_p = np.exp(1j * ks * (a + b))
    m = np.empty(ks.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = e_m * (c + diag)
    m[..., 0, 1] = ph_m * off
    m[..., 1, 0] = -ph_p * off
    m[..., 1, 1] = e_p * (c - diag)
    return m


def _delta_factor(ks, x0, z):
    """Plane-wave-basis jump matrix of z*delta(x - x0)."""
    zeta = z / (2j * ks)
    m = np.empty(ks.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0 + zeta
    m[..., 0, 1] = zeta * np.exp(-2j * ks * x0)
    m[..., 1, 0] = -zeta * np.exp(2j * ks * x0)
    m[..., 1, 1] = 1.0 - zeta
    return m


def _sampled_matrices(p: Sampled, ks, samples_per_wavelength):
    """RK4 transfer matrices of a sampled potential, vectorized over k."""
    n = p.values.size
    x_end = p.x0 + p.dx * (n - 1)
    qmax = float(np.max(np.abs(np.sqrt(ks[:, None] ** 2 - p.values[None, :]))))
    qmax = max(qmax, float(np.max(np.abs(ks))))
    lam_min = 2.0 * math.pi / qmax
    if p.dx > lam_min / 20.0:
        raise GridTooCoarseError(
            f"sample spacing {p.dx:.3g} exceeds lambda_local/20 = {lam_min / 20:.3g}; "
            "refine the grid or lower k"
        )
    substeps = max(1, math.ceil(p.dx * samples_per_wavelength / lam_min))
    h = p.dx / substeps

    # two basis solutions, seeded with pure e^{+ikx} and e^{-ikx} at the left edge
    e0 = np.exp(1j * ks * p.x0)
    psi = np.stack([e0, 1.0 / e0])
    dpsi = np.stack([1j * ks * e0, -1j * ks / e0])
    k2 = ks * ks

    for j in range(n - 1):
        va, vb = p.values[j], p.values[j + 1]
        for s in range(substeps):
            f0 = va + (vb - va) * (s / substeps)
            f1 = va + (vb - va) * ((s + 0.5) / substeps)
            f2 = va + (vb - va) * ((s + 1.0) / substeps)
            q0, q1, q2 = f0 - k2, f1 - k2, f2 - k2
            k1p = dpsi
            k1d = q0 * psi
            k2p = dpsi + 0.5 * h * k1d
            k2d = q1 * (psi + 0.5 * h * k1p)
            k3p = dpsi + 0.5 * h * k2d
            k3d = q1 * (psi + 0.5 * h * k2p)
            k4p = dpsi + h * k3d
            k4d = q2 * (psi + h * k3p)
            psi = psi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
            dpsi = dpsi + (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)

    e1 = np.exp(1j * ks * x_end)
    a_out = 0.5 * (psi + dpsi / (1j * ks)) / e1
    b_out = 0.5 * (psi - dpsi / (1j * ks)) * e1
    m = np.empty((ks.size, 2, 2), dtype=complex)
    m[:, 0, 0] = a_out[0]
    m[:, 0, 1] = a_out[1]
    m[:, 1, 0] = b_out[0]
    m[:, 1, 1] = b_out[1]
    return m


def transfer_matrix_grid(
    source,
    ks,
    *,
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
) -> np.ndarray:
    """Transfer matrices over a wavenumber grid, shape (len(ks), 2, 2).

    ``source`` may be a Potential or a Medium (whose optical potential is
    rebuilt at every k).  Vectorized for layers, media and delta combs; the
    sampled variant integrates all k simultaneously.
    """
    ks = np.asarray([_validate_k(k) for k in np.atleast_1d(ks)], dtype=complex)
    if isinstance(source, Sampled):
        return _sampled_matrices(source, ks, samples_per_wavelength)

    m = np.broadcast_to(np.eye(2, dtype=complex), (ks.size, 2, 2)).copy()
    if isinstance(source, Medium):
        for a, b, n in source.layers:
            m = _layer_factor(ks, a, b, (ks * n) ** 2) @ m
    elif isinstance(source, PiecewiseConstant):
        for a, b, v in source.layers:
            m = _layer_factor(ks, a, b, ks * ks - v) @ m
    elif isinstance(source, DeltaComb):
        for x0, z in source.deltas:
            m = _delta_factor(ks, x0, z) @ m
    else:
        raise TypeError(f"not a potential or medium: {type(source).__name__}")
    return m


def transfer_matrix(
    source,
    k,
    *,
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
    det_tol: float = DET_TOL,
) -> TransferMatrix:
    """Transfer matrix of a potential or medium at one wavenumber.

    Raises ValueError for k <= 0 and GridTooCoarseError for under-resolved
    sampled grids; the unit-determinant invariant is checked at ``det_tol``.
    """
    kc = _validate_k(k)
    m = transfer_matrix_grid(
        source, [kc], samples_per_wavelength=samples_per_wavelength
    )[0]
    tm = TransferMatrix(m[0, 0], m[0, 1], m[1, 0], m[1, 1], kc)
    if tm.det_defect > det_tol:
        raise ArithmeticError(
            f"transfer matrix lost unit determinant: |det-1| = {tm.det_defect:.3g} "
            f"at k = {kc}"
        )
    return tm


def amplitudes(m: TransferMatrix) -> Amplitudes:
    """Reflection/transmission amplitudes T = 1/M22, Rr = M12/M22, Rl = -M21/M22.

    A vanishing M22 is the spectral-singularity condition and is raised as
    :class:`SpectralSingularityError` rather than propagating infinities.
    """
    if m.m22 == 0 or not cmath.isfinite(1.0 / m.m22):
        raise SpectralSingularityError(m.k, m.m22)
    t = 1.0 / m.m22
    return Amplitudes(rl=-m.m21 / m.m22, rr=m.m12 / m.m22, t=t)


def unitarity_defect(a: Amplitudes) -> tuple[float, float]:
    """(|Rl|^2 + |T|^2 - 1, |Rr|^2 + |T|^2 - 1); zero for real potentials."""
    t2 = abs(a.t) ** 2
    return (abs(a.rl) ** 2 + t2 - 1.0, abs(a.rr) ** 2 + t2 - 1.0)


# ---------------------------------------------------------------------------
# state propagation in the (psi, psi') basis, used by the Jost solver


def _segment_step(psi, dpsi, w2, ell):
    # exact propagator of psi'' = (v - k^2) psi over signed length ell
    t = cmath.sqrt(w2) * ell
    c = cmath.cos(t)
    s_over_w = ell * (
        1.0 - t * t / 6.0 + t ** 4 / 120.0 if abs(t) < 1e-5 else cmath.sin(t) / t
    )
    return (
        c * psi + s_over_w * dpsi,
        -w2 * s_over_w * psi + c * dpsi,
    )


def _value_at(p, x):
    # potential value at x (piecewise data; deltas excluded)
    if isinstance(p, PiecewiseConstant):
        for a, b, v in p.layers:
            if a <= x <= b:
                return v
        return 0.0
    if isinstance(p, Sampled):
        lo, hi = support(p)
        if not (lo <= x <= hi):
            return 0.0
        u = (x - p.x0) / p.dx
        j = min(int(u), p.values.size - 2)
        frac = u - j
        return p.values[j] * (1 - frac) + p.values[j + 1] * frac
    return 0.0


def _breakpoints(p):
    if isinstance(p, PiecewiseConstant):
        pts = set()
        for a, b, _ in p.layers:
            pts.update((a, b))
        return sorted(pts)
    if isinstance(p, Sampled):
        return list(p.x)
    if isinstance(p, DeltaComb):
        return [x for x, _ in p.deltas]
    return []


def _propagate(p, k, x_from, x_to, psi, dpsi, samples_per_wavelength):
    """Advance a (psi, psi') state from x_from to x_to (either direction).

    States are limits from below: at a delta position the stored psi' is the
    left limit, so the jump is applied on departure when moving right and on
    arrival when moving left.
    """
    if x_to == x_from:
        return psi, dpsi
    forward = x_to > x_from
    lo, hi = (x_from, x_to) if forward else (x_to, x_from)
    cuts = [c for c in _breakpoints(p) if lo < c < hi]
    nodes = [x_from] + (cuts if forward else cuts[::-1]) + [x_to]

    deltas = {x: z for x, z in p.deltas} if isinstance(p, DeltaComb) else {}
    k2 = k * k
    for xa, xb in zip(nodes, nodes[1:]):
        if forward and xa in deltas:
            dpsi = dpsi + deltas[xa] * psi
        seg = xb - xa
        if seg != 0:
            if isinstance(p, Sampled):
                psi, dpsi = _rk4_span(
                    p, k2, xa, xb, psi, dpsi, samples_per_wavelength
                )
            else:
                v = _value_at(p, 0.5 * (xa + xb))
                psi, dpsi = _segment_step(psi, dpsi, k2 - v, seg)
        if not forward and xb in deltas:
            dpsi = dpsi - deltas[xb] * psi
    return psi, dpsi


def _rk4_span(p, k2, xa, xb, psi, dpsi, samples_per_wavelength):
    span = xb - xa
    vmax = float(np.max(np.abs(p.values)))
    qmax = max(abs(k2) ** 0.5, (abs(k2) + vmax) ** 0.5)
    h_target = 2.0 * math.pi / (qmax * samples_per_wavelength)
    steps = max(1, math.ceil(abs(span) / h_target))
    h = span / steps
    x = xa
    for _ in range(steps):
        q0 = _value_at(p, x) - k2
        q1 = _value_at(p, x + 0.5 * h) - k2
        q2 = _value_at(p, x + h) - k2
        k1p, k1d = dpsi, q0 * psi
        k2p, k2d = dpsi + 0.5 * h * k1d, q1 * (psi + 0.5 * h * k1p)
        k3p, k3d = dpsi + 0.5 * h * k2d, q1 * (psi + 0.5 * h * k2p)
        k4p, k4d = dpsi + h * k3d, q2 * (psi + h * k3p)
        psi = psi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        dpsi = dpsi + (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)
        x += h
    return psi, dpsi


@dataclass(frozen=True)
class JostSolutions:
    """The pair psi_{k+-} sampled on a grid, together with derivatives.

    psi_plus tends to e^{+ikx} as x -> +inf; psi_minus to e^{-ikx} as
    x -> -inf.  ``wronskian()`` returns psi_minus psi_plus' - psi_minus' psi_plus,
    which equals 2ik M22(k) for every x.
    """

    x: np.ndarray
    psi_plus: np.ndarray
    dpsi_plus: np.ndarray
    psi_minus: np.ndarray
    dpsi_minus: np.ndarray
    k: complex

    def wronskian(self) -> np.ndarray:
        return self.psi_minus * self.dpsi_plus - self.dpsi_minus * self.psi_plus


def jost_solutions(
    p: Potential,
    k,
    grid,
    *,
    samples_per_wavelength: int = SAMPLES_PER_WAVELENGTH,
) -> JostSolutions:
    """Integrate the Jost pair across the support and sample it on ``grid``."""
    kc = _validate_k(k)
    xs = np.sort(np.asarray(grid, dtype=float))
    if xs.size == 0:
        raise ValueError("empty evaluation grid")
    lo, hi = support(p)

    # psi_plus: anchor strictly right of everything, walk leftwards
    anchor = max(hi, xs[-1]) + 1.0
    psi = cmath.exp(1j * kc * anchor)
    dpsi = 1j * kc * psi
    plus = np.empty(xs.size, dtype=complex)
    dplus = np.empty(xs.size, dtype=complex)
    pos = anchor
    for i in range(xs.size - 1, -1, -1):
        psi, dpsi = _propagate(p, kc, pos, xs[i], psi, dpsi, samples_per_wavelength)
        pos = xs[i]
        plus[i], dplus[i] = psi, dpsi

    anchor = min(lo, xs[0]) - 1.0
    psi = cmath.exp(-1j * kc * anchor)
    dpsi = -1j * kc * psi
    minus = np.empty(xs.size, dtype=complex)
    dminus = np.empty(xs.size, dtype=complex)
    pos = anchor
    for i in range(xs.size):
        psi, dpsi = _propagate(p, kc, pos, xs[i], psi, dpsi, samples_per_wavelength)
        pos = xs[i]
        minus[i], dminus[i] = psi, dpsi

    return JostSolutions(xs, plus, dplus, minus, dminus, kc)
