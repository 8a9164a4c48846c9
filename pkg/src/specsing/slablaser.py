"""Slab-laser physics: threshold condition, mode combs, Kerr-nonlinear output.

A homogeneous slab of refractive index n = eta + i*kappa and thickness L in
vacuum lases exactly where its transfer matrix develops a real-k zero of M22,
which for this geometry reduces to the transcendental condition

    exp(-2 i n k L) = ((n - 1)/(n + 1))^2 =: reflectivity.

The modulus of that condition is the textbook threshold-gain relation; its
phase fixes the mode comb.  Adding a weak Kerr term sigma |psi|^2 inside the
slab and asking for purely outgoing waves turns the lasing condition into a
nonlinear boundary-value problem whose solution gives the emitted intensity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._roots import ConvergenceError, gauss_newton_2d
from .potentials import Medium

__all__ = [
    "SlabSpec",
    "LasingMode",
    "NonlinearEmission",
    "IntensityCurve",
    "reflectivity",
    "ss_residual",
    "threshold_gain",
    "gain_coefficient",
    "lasing_modes",
    "slab_medium",
    "pt_bilayer_medium",
    "nonlinear_outgoing_solve",
    "intensity_curve",
]


@dataclass(frozen=True)
class SlabSpec:
    """Homogeneous slab: index eta + i*kappa, length L, Kerr coefficient sigma."""

    eta: float
    L: float
    sigma: float = 0.0
    kappa: Optional[float] = None
    k: Optional[float] = None

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def n(self) -> complex:
        return complex(self.eta, self.kappa or 0.0)


@dataclass(frozen=True)
class LasingMode:
    """One spectral singularity of the slab: wavenumber, gain index, residual."""

    index: int
    k: float
    kappa: float
    residual: float

    @property
    def gain(self) -> float:
        return -2.0 * self.kappa * self.k


def reflectivity(n: complex) -> complex:
    """Fresnel intensity reflectivity of a vacuum/slab interface, ((n-1)/(n+1))^2."""
    n = complex(n)
    if n == -1:
        raise ValueError("n = -1 has no reflectivity")
    return ((n - 1.0) / (n + 1.0)) ** 2


def ss_residual(n: complex, k: float, L: float) -> complex:
    """The lasing condition defect exp(-2inkL) - reflectivity(n); zero on a mode."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    if not complex(k).real > 0 and complex(k).imag == 0:
        raise ValueError(f"k must be positive, got {k}")
    return cmath.exp(-2j * complex(n) * k * L) - reflectivity(n)


def threshold_gain(n, L: float) -> float:
    """Minimum gain coefficient for lasing onset, ln(1/|reflectivity|^2)/(2L).

    Real input is the usual textbook value; a complex refractive index
    evaluates the same formula with the exact reflectivity at that index.
    Returns math.inf for n = 1 (index-matched slab cannot lase).
    """
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    n = complex(n)
    if not n.real > 0:
        raise ValueError(f"Re n must be positive, got {n}")
    r = abs(reflectivity(n))
    if r == 0:
        return math.inf
    return math.log(1.0 / (r * r)) / (2.0 * L)


def gain_coefficient(kappa: float, lam: float) -> float:
    """Gain coefficient g = -4 pi kappa / lambda (negative for lossy media)."""
    if not lam > 0:
        raise ValueError(f"wavelength must be positive, got {lam}")
    return -4.0 * math.pi * kappa / lam


def slab_medium(eta: float, kappa: float, L: float) -> Medium:
    """The slab as a Medium: one layer of index eta + i*kappa on [-L/2, L/2]."""
    return Medium([(-L / 2.0, L / 2.0, complex(eta, kappa))])


def pt_bilayer_medium(eta: float, kappa: float, L: float) -> Medium:
    """Balanced gain/loss bilayer: eta + i*kappa on [-L/2, 0], conjugate on [0, L/2]."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    if kappa == 0:
        return Medium([(-L / 2.0, L / 2.0, complex(eta, 0.0))])
    return Medium(
        [
            (-L / 2.0, 0.0, complex(eta, kappa)),
            (0.0, L / 2.0, complex(eta, -kappa)),
        ]
    )


def lasing_modes(
    eta: float,
    L: float,
    k_window,
    *,
    tol: float = 1e-10,
    max_iter: int = 80,
) -> list[LasingMode]:
    """Solve the lasing condition for all modes with k in ``k_window``.

    Seeds come from the leading-order modulus/phase split
    k_m = (2 pi m - arg R)/(2 eta L), kappa_m = ln|R|/(2 k_m L) with R the
    real-index reflectivity, then each (k, kappa) pair is polished by a 2D
    Newton iteration on the full complex condition.
    """
    if not (eta > 0 and L > 0):
        raise ValueError(f"need eta > 0 and L > 0, got eta={eta}, L={L}")
    k_lo, k_hi = map(float, k_window)
    if not (0 < k_lo < k_hi):
        raise ValueError(f"bad k window [{k_lo}, {k_hi}]")
    if eta == 1.0:
        return []  # zero reflectivity: infinite threshold, no modes

    r = reflectivity(eta)
    arg_r = cmath.phase(r)
    log_r = math.log(abs(r))
    m_lo = math.ceil((2.0 * eta * L * k_lo + arg_r) / (2.0 * math.pi))
    m_hi = math.floor((2.0 * eta * L * k_hi + arg_r) / (2.0 * math.pi))

    modes = []
    for m in range(m_lo, m_hi + 1):
        k_seed = (2.0 * math.pi * m - arg_r) / (2.0 * eta * L)
        if k_seed <= 0:
            continue
        kappa_seed = log_r / (2.0 * k_seed * L)
        k, kap, res, ok = gauss_newton_2d(
            lambda k_, kap_: ss_residual(complex(eta, kap_), k_, L),
            k_seed,
            kappa_seed,
            tol=tol,
            max_iter=max_iter,
            x_scale=k_seed,
            y_scale=max(abs(kappa_seed), 1e-3),
        )
        if not ok:
            raise ConvergenceError(
                f"mode {m} did not converge: residual {res:.3g} at k = {k}"
            )
        if k_lo <= k <= k_hi:
            modes.append(LasingMode(m, float(k), float(kap), float(res)))
    return sorted(modes, key=lambda mo: mo.k)


# ---------------------------------------------------------------------------
# Kerr-nonlinear outgoing modes


@dataclass(frozen=True)
class NonlinearEmission:
    """Solution of the nonlinear outgoing problem at fixed gain."""

    k: float
    intensity: float
    gain: float
    residual: float


def _outgoing_defect(n2, sigma, L, intensity, k, steps):
    """Incoming-wave coefficient at the left face, per unit outgoing amplitude.

    Integrates psi'' + k^2 (n^2 + sigma*I*|psi|^2) psi = 0 from the right face
    (psi normalized to an outgoing unit wave there) leftwards with fixed-step
    RK4 and decomposes the left-face state into plane waves.  Zero means a
    purely outgoing (emitting) solution.
    """
    h = -L / steps
    k2 = k * k
    psi = 1.0 + 0.0j
    dpsi = 1j * k

    def rhs(p):
        return -k2 * (n2 + sigma * intensity * (p.real * p.real + p.imag * p.imag)) * p

    for _ in range(steps):
        k1p, k1d = dpsi, rhs(psi)
        k2p, k2d = dpsi + 0.5 * h * k1d, rhs(psi + 0.5 * h * k1p)
        k3p, k3d = dpsi + 0.5 * h * k2d, rhs(psi + 0.5 * h * k2p)
        k4p, k4d = dpsi + h * k3d, rhs(psi + h * k3p)
        psi = psi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        dpsi = dpsi + (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)
    # left-face decomposition: incoming = coefficient of e^{+ik(x + L/2)}
    return 0.5 * (psi + dpsi / (1j * k))


def nonlinear_outgoing_solve(
    spec: SlabSpec,
    mode_seed: LasingMode,
    *,
    tol: float = 1e-9,
    steps_per_wavelength: int = 80,
    max_iter: int = 80,
    intensity_floor: float = 1e-6,
    seed_intensity: float = 0.0,
    seed_k: Optional[float] = None,
) -> Optional[NonlinearEmission]:
    """Emitted intensity of the Kerr slab at fixed gain index spec.kappa.

    Solves the purely-outgoing condition for the two real unknowns (I, k),
    seeded at (seed_intensity, mode_seed.k).  The RK4 step count is frozen
    during each Newton pass (so the shooting map stays smooth) and re-derived
    from the converged intensity until it is self-consistent: the Kerr term
    shortens the interior wavelength, and the interior field exceeds the
    emitted one by up to the single-pass gain factor.

    Returns None when the converged intensity is below -intensity_floor,
    i.e. the gain is below threshold and no power is emitted; intensities in
    the discretization-noise band [-intensity_floor, 0) clamp to zero.
    Raises ConvergenceError if the iteration fails outright.
    """
    if spec.sigma <= 0:
        raise ValueError("nonlinear solve needs sigma > 0")
    if spec.kappa is None:
        raise ValueError("spec.kappa must be set (the pump level)")
    n2 = spec.n ** 2
    interior_gain = math.exp(2.0 * abs(spec.kappa) * mode_seed.k * spec.L)

    def step_count(intensity_bound):
        n_eff = math.sqrt(abs(n2) + spec.sigma * intensity_bound)
        return max(
            50,
            math.ceil(
                steps_per_wavelength * spec.L * mode_seed.k * n_eff / (2 * math.pi)
            ),
        )

    inten = float(seed_intensity)
    k = mode_seed.k if seed_k is None else float(seed_k)
    bound = max(1.0, interior_gain * abs(inten))
    steps = step_count(bound)
    for _ in range(5):
        inten, k, res, ok = gauss_newton_2d(
            lambda i_, k_: _outgoing_defect(n2, spec.sigma, spec.L, i_, k_, steps),
            inten,
            k,
            tol=tol,
            max_iter=max_iter,
            x_scale=1.0,
            y_scale=mode_seed.k,
        )
        if not ok:
            raise ConvergenceError(
                f"nonlinear outgoing solve stalled at residual {res:.3g}"
            )
        new_steps = step_count(max(1.0, interior_gain * abs(inten)))
        if new_steps <= steps:
            break
        steps = new_steps
    if inten < -intensity_floor:
        return None  # below threshold: only the unphysical negative branch
    return NonlinearEmission(
        k=float(k),
        intensity=float(max(inten, 0.0)),
        gain=-2.0 * spec.kappa * float(k),
        residual=float(res),
    )


@dataclass(frozen=True)
class IntensityCurve:
    """Output intensity versus pump gain, with its near-threshold linear fit.

    ``gains`` are the pump values -2*kappa*k_mode actually driven; ``ks`` are
    the converged (Kerr-shifted) emission wavenumbers.  ``g_th_fit`` is the
    g-axis intercept of the least-squares line.
    """

    gains: tuple[float, ...]
    intensities: tuple[float, ...]
    ks: tuple[float, ...]
    slope: float
    g_th_fit: float
    r_squared: float


def intensity_curve(
    spec: SlabSpec,
    g_grid,
    *,
    mode: Optional[LasingMode] = None,
    k_window=None,
    tol: float = 1e-9,
    steps_per_wavelength: int = 80,
) -> IntensityCurve:
    """Map the emitted intensity over a gain grid just above threshold.

    ``spec`` carries eta, L and sigma; the pump is swept by converting each g
    to kappa = -g/(2 k_mode).  The grid must lie in (g_th, 1.2*g_th].  The
    returned fit is least-squares linear, with g_th_fit its g-axis intercept.
    """
    if spec.sigma <= 0:
        raise ValueError("intensity curve needs sigma > 0")
    if mode is None:
        if k_window is None:
            raise ValueError("pass either a mode or a k_window")
        found = lasing_modes(spec.eta, spec.L, k_window)
        if not found:
            raise ValueError(f"no lasing mode in k window {k_window}")
        mode = found[0]

    g_th = threshold_gain(spec.eta, spec.L)
    gs = np.sort(np.asarray(g_grid, dtype=float))
    if gs.size < 2:
        raise ValueError("need at least two gain values to fit")
    if np.any(gs <= g_th) or np.any(gs > 1.2 * g_th):
        raise ValueError(f"gain grid must lie in (g_th, 1.2*g_th] = ({g_th:.6g}, {1.2 * g_th:.6g}]")

    intensities = []
    ks = []
    warm_i, warm_k = 0.0, None
    for g in gs:
        pumped = SlabSpec(
            eta=spec.eta,
            L=spec.L,
            sigma=spec.sigma,
            kappa=-g / (2.0 * mode.k),
        )
        sol = nonlinear_outgoing_solve(
            pumped,
            mode,
            tol=tol,
            steps_per_wavelength=steps_per_wavelength,
            seed_intensity=warm_i,
            seed_k=warm_k,
        )
        if sol is None:
            raise ConvergenceError(f"no emission at g = {g:.6g} despite g > g_th")
        intensities.append(sol.intensity)
        ks.append(sol.k)
        warm_i, warm_k = sol.intensity, sol.k

    g_arr = np.asarray(gs)
    i_arr = np.asarray(intensities)
    slope, offset = np.polyfit(g_arr, i_arr, 1)
    fitted = slope * g_arr + offset
    ss_res = float(np.sum((i_arr - fitted) ** 2))
    ss_tot = float(np.sum((i_arr - i_arr.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return IntensityCurve(
        gains=tuple(float(g) for g in gs),
        intensities=tuple(float(i) for i in intensities),
        ks=tuple(float(k) for k in ks),
        slope=float(slope),
        g_th_fit=float(-offset / slope),
        r_squared=float(r2),
    )
