"""Root-finding helpers: damped Gauss-Newton, complex Newton, winding counts."""

from __future__ import annotations

import cmath
import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "RootCountError",
    "gauss_newton_2d",
    "newton_complex",
    "winding_number",
    "local_minima_2d",
]


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach the requested residual."""


class RootCountError(RuntimeError):
    """Argument-principle count and refined-root count disagree."""


def gauss_newton_2d(f, x0, y0, *, tol, max_iter=80, x_scale=1.0, y_scale=1.0):
    """Drive the complex-valued f(x, y) to zero over two real unknowns.

    Damped Gauss-Newton with a central-difference Jacobian and least-squares
    steps, so rank-deficient Jacobians (zero curves rather than isolated
    zeros) still converge to a point on the zero set.

    Returns (x, y, residual, converged).
    """
    x, y = float(x0), float(y0)
    fv = complex(f(x, y))
    res = abs(fv)
    for _ in range(max_iter):
        if res < tol:
            return x, y, res, True
        hx = 1e-7 * max(abs(x), abs(x_scale))
        hy = 1e-7 * max(abs(y), abs(y_scale))
        dfx = (complex(f(x + hx, y)) - complex(f(x - hx, y))) / (2 * hx)
        dfy = (complex(f(x, y + hy)) - complex(f(x, y - hy))) / (2 * hy)
        jac = np.array([[dfx.real, dfy.real], [dfx.imag, dfy.imag]])
        rhs = np.array([fv.real, fv.imag])
        step, *_ = np.linalg.lstsq(jac, -rhs, rcond=None)
        if not np.all(np.isfinite(step)):
            return x, y, res, False
        lam = 1.0
        for _ in range(25):
            xn, yn = float(x + lam * step[0]), float(y + lam * step[1])
            fn = complex(f(xn, yn))
            if abs(fn) < res:  # False for nan/inf trial values
                x, y, fv, res = xn, yn, fn, abs(fn)
                break
            lam *= 0.5
        else:
            return x, y, res, res < tol
    return x, y, res, res < tol


def newton_complex(f, z0, *, tol, max_iter=60, multiplicity=1):
    """Newton iteration for an analytic f; derivative by central differences.

    Returns (z, residual, converged).
    """
    z = complex(z0)
    fv = complex(f(z))
    res = abs(fv)
    for _ in range(max_iter):
        if res < tol:
            return z, res, True
        h = 1e-7 * max(1.0, abs(z))
        df = (complex(f(z + h)) - complex(f(z - h))) / (2 * h)
        if df == 0 or not cmath.isfinite(df):
            return z, res, False
        step = -multiplicity * fv / df
        lam = 1.0
        for _ in range(25):
            zn = z + lam * step
            fn = complex(f(zn))
            if abs(fn) < res:
                z, fv, res = zn, fn, abs(fn)
                break
            lam *= 0.5
        else:
            return z, res, res < tol
    return z, res, res < tol


def _boundary_points(rect, n_per_side):
    # positively oriented rectangle boundary
    re0, re1, im0, im1 = rect
    s = np.linspace(0.0, 1.0, n_per_side, endpoint=False)
    bottom = re0 + (re1 - re0) * s + 1j * im0
    right = re1 + 1j * (im0 + (im1 - im0) * s)
    top = re1 - (re1 - re0) * s + 1j * im1
    left = re0 + 1j * (im1 - (im1 - im0) * s)
    return np.concatenate([bottom, right, top, left])


def winding_number(f, rect, *, n_per_side=64, max_refine=12):
    """Count zeros of analytic f inside the rectangle by the argument principle.

    The boundary is sampled adaptively until successive phase increments stay
    below pi/2; raises ConvergenceError if f (nearly) vanishes on the boundary
    or the total phase is not close to a multiple of 2*pi.
    """
    pts = list(_boundary_points(rect, n_per_side))
    pts.append(pts[0])
    vals = [complex(f(z)) for z in pts]
    scale = max(abs(v) for v in vals)
    if scale == 0 or min(abs(v) for v in vals) < 1e-13 * scale:
        raise ConvergenceError(
            "zero of f on or too close to the winding contour; move the window"
        )

    total = 0.0
    i = 0
    refinements = 0
    while i < len(pts) - 1:
        dphi = cmath.phase(vals[i + 1] / vals[i])
        if abs(dphi) > 0.5 * math.pi:
            if refinements > max_refine * len(pts):
                raise ConvergenceError("winding contour refinement did not settle")
            zm = 0.5 * (pts[i] + pts[i + 1])
            fm = complex(f(zm))
            if abs(fm) < 1e-13 * scale:
                raise ConvergenceError(
                    "zero of f on or too close to the winding contour; move the window"
                )
            pts.insert(i + 1, zm)
            vals.insert(i + 1, fm)
            refinements += 1
            continue
        total += dphi
        i += 1
    n = total / (2.0 * math.pi)
    if abs(n - round(n)) > 1e-3:
        raise ConvergenceError(f"non-integer winding number {n:.6f}")
    return int(round(n))


def local_minima_2d(vals):
    """Indices (i, j) of entries strictly smaller than their 8 neighbors."""
    v = np.asarray(vals, dtype=float)
    p = np.pad(v, 1, constant_values=np.inf)
    c = p[1:-1, 1:-1]
    mask = np.ones(v.shape, dtype=bool)
    ni, nj = v.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                mask &= c < p[1 + di : 1 + di + ni, 1 + dj : 1 + dj + nj]
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(mask))]
