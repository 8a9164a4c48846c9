"""1D complex scattering potentials and layered optical media.

Three potential variants are supported: piecewise-constant layers, combs of
Dirac deltas, and uniformly sampled profiles.  All have compact support and
vanish outside it.  An optical ``Medium`` stores a layered complex refractive
index n(x) and materializes a wavenumber-dependent potential
v(x) = k^2 (1 - n(x)^2) via :func:`from_medium`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence, Union

import numpy as np

__all__ = [
    "Layer",
    "Delta",
    "IndexLayer",
    "PiecewiseConstant",
    "DeltaComb",
    "Sampled",
    "Medium",
    "Potential",
    "from_medium",
    "moment_norm",
    "time_reverse",
    "parity_transform",
    "support",
    "FileFormatError",
    "parse_scatterer",
    "load_scatterer",
]


class Layer(NamedTuple):
    """Constant complex potential ``value`` on the interval [x_left, x_right]."""

    x_left: float
    x_right: float
    value: complex


class Delta(NamedTuple):
    """Dirac delta z*delta(x - position); ``strength`` carries units energy*length."""

    position: float
    strength: complex


class IndexLayer(NamedTuple):
    """Homogeneous slab with complex refractive index ``n`` on [x_left, x_right]."""

    x_left: float
    x_right: float
    n: complex


def _check_intervals(intervals, what):
    for a, b, _ in intervals:
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError(f"{what} endpoints must be finite, got [{a}, {b}]")
        if not a < b:
            raise ValueError(f"{what} interval [{a}, {b}] is empty or reversed")
    for (_, b0, _), (a1, _, _) in zip(intervals, intervals[1:]):
        if a1 < b0:
            raise ValueError(f"{what} intervals overlap near x = {a1}")


@dataclass(frozen=True)
class PiecewiseConstant:
    """Piecewise-constant potential: disjoint, sorted layers; zero elsewhere."""

    layers: tuple[Layer, ...]

    def __init__(self, layers: Sequence[tuple[float, float, complex]]):
        coerced = tuple(
            Layer(float(a), float(b), complex(v)) for a, b, v in layers
        )
        _check_intervals(coerced, "layer")
        object.__setattr__(self, "layers", coerced)


@dataclass(frozen=True)
class DeltaComb:
    """Sum of Dirac deltas at strictly increasing positions."""

    deltas: tuple[Delta, ...]

    def __init__(self, deltas: Sequence[tuple[float, complex]]):
        coerced = tuple(Delta(float(x), complex(z)) for x, z in deltas)
        for x, _ in coerced:
            if not math.isfinite(x):
                raise ValueError(f"delta position must be finite, got {x}")
        for (x0, _), (x1, _) in zip(coerced, coerced[1:]):
            if not x0 < x1:
                raise ValueError(
                    f"delta positions must be strictly increasing, got {x0} then {x1}"
                )
        object.__setattr__(self, "deltas", coerced)


@dataclass(frozen=True, eq=False)
class Sampled:
    """Potential sampled on the uniform grid x0 + j*dx, linearly interpolated.

    The declared grid is the compact support; the potential is zero outside
    [x0, x0 + (len(values)-1)*dx].
    """

    x0: float
    dx: float
    values: np.ndarray

    def __init__(self, x0: float, dx: float, values):
        vals = np.asarray(values, dtype=complex).copy()
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("sampled potential needs a 1D grid of at least 2 values")
        if not (math.isfinite(x0) and dx > 0 and math.isfinite(dx)):
            raise ValueError(f"bad sampled grid: x0={x0}, dx={dx}")
        vals.setflags(write=False)
        object.__setattr__(self, "x0", float(x0))
        object.__setattr__(self, "dx", float(dx))
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)


Potential = Union[PiecewiseConstant, DeltaComb, Sampled]


@dataclass(frozen=True)
class Medium:
    """Layered refractive-index profile n(x); vacuum (n = 1) outside the layers.

    Layers must be disjoint and sorted, with Re n > 0.
    """

    layers: tuple[IndexLayer, ...]

    def __init__(self, layers: Sequence[tuple[float, float, complex]]):
        coerced = tuple(
            IndexLayer(float(a), float(b), complex(n)) for a, b, n in layers
        )
        _check_intervals(coerced, "medium layer")
        for a, _, n in coerced:
            if not n.real > 0:
                raise ValueError(f"layer at x = {a} has Re n = {n.real} <= 0")
        object.__setattr__(self, "layers", coerced)


def support(p: Union[Potential, Medium]) -> tuple[float, float]:
    """Smallest interval outside which the scatterer is trivial (zero or vacuum)."""
    if isinstance(p, (PiecewiseConstant, Medium)):
        if not p.layers:
            return (0.0, 0.0)
        return (p.layers[0].x_left, p.layers[-1].x_right)
    if isinstance(p, DeltaComb):
        if not p.deltas:
            return (0.0, 0.0)
        return (p.deltas[0].position, p.deltas[-1].position)
    if isinstance(p, Sampled):
        return (p.x0, p.x0 + p.dx * (p.values.size - 1))
    raise TypeError(f"not a potential or medium: {type(p).__name__}")


def from_medium(m: Medium, k: float) -> PiecewiseConstant:
    """Materialize the optical potential v = k^2 (1 - n^2) of ``m`` at wavenumber k.

    Vacuum layers (n = 1) drop out, so an empty medium maps to the zero
    potential for every k.
    """
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    layers = []
    for a, b, n in m.layers:
        v = k * k * (1.0 - n * n)
        if v != 0:
            layers.append((a, b, v))
    return PiecewiseConstant(layers)


def _abs_moment(a: float, b: float) -> float:
    # int_a^b |x| dx, closed form for any sign arrangement
    if a >= 0:
        return 0.5 * (b * b - a * a)
    if b <= 0:
        return 0.5 * (a * a - b * b)
    return 0.5 * (a * a + b * b)


def moment_norm(p: Potential) -> float:
    """First-moment weighted L1 size: integral of (1 + |x|) |v(x)| dx.

    Exact for layers, a trapezoidal quadrature for sampled grids, and the
    natural sum analogue sum_j (1 + |x_j|) |z_j| for delta combs.  Finite by
    construction (compact support).
    """
    if isinstance(p, PiecewiseConstant):
        return sum(
            abs(v) * ((b - a) + _abs_moment(a, b)) for a, b, v in p.layers
        )
    if isinstance(p, DeltaComb):
        return sum((1.0 + abs(x)) * abs(z) for x, z in p.deltas)
    if isinstance(p, Sampled):
        x = p.x
        return float(np.trapezoid((1.0 + np.abs(x)) * np.abs(p.values), dx=p.dx))
    raise TypeError(f"not a potential: {type(p).__name__}")


def time_reverse(p: Union[Potential, Medium]) -> Union[Potential, Medium]:
    """Complex-conjugate the scatterer: v -> v*, or n -> n* for a medium.

    Turns a gain medium into the equally lossy one and vice versa; support is
    unchanged and real data is a fixed point (bit-exact).
    """
    if isinstance(p, PiecewiseConstant):
        return PiecewiseConstant([(a, b, v.conjugate()) for a, b, v in p.layers])
    if isinstance(p, DeltaComb):
        return DeltaComb([(x, z.conjugate()) for x, z in p.deltas])
    if isinstance(p, Sampled):
        return Sampled(p.x0, p.dx, np.conj(p.values))
    if isinstance(p, Medium):
        return Medium([(a, b, n.conjugate()) for a, b, n in p.layers])
    raise TypeError(f"not a potential or medium: {type(p).__name__}")


def parity_transform(p: Union[Potential, Medium]) -> Union[Potential, Medium]:
    """Spatially reflect the scatterer: v(x) -> v(-x) (bit-exact on layer data)."""
    if isinstance(p, PiecewiseConstant):
        return PiecewiseConstant([(-b, -a, v) for a, b, v in reversed(p.layers)])
    if isinstance(p, DeltaComb):
        return DeltaComb([(-x, z) for x, z in reversed(p.deltas)])
    if isinstance(p, Sampled):
        x_end = p.x0 + p.dx * (p.values.size - 1)
        return Sampled(-x_end, p.dx, p.values[::-1])
    if isinstance(p, Medium):
        return Medium([(-b, -a, n) for a, b, n in reversed(p.layers)])
    raise TypeError(f"not a potential or medium: {type(p).__name__}")


# ---------------------------------------------------------------------------
# description-file parsing
#
# Line-oriented text with sections:
#   [layers]   x_left x_right Re(n) Im(n)    -> Medium
#   [deltas]   x Re(z) Im(z)                 -> DeltaComb
#   [samples]  x Re(v) Im(v)                 -> Sampled (uniform grid)
# '#' starts a comment; blank lines are ignored.  Exactly one section kind may
# carry data in a file ([layers] empty of rows is the vacuum medium).


class FileFormatError(ValueError):
    """Malformed scatterer description file; carries a 1-based line number."""

    def __init__(self, source: str, line: int, message: str):
        self.source = source
        self.line = line
        super().__init__(f"{source}:{line}: {message}")


_SECTIONS = {"layers": 4, "deltas": 3, "samples": 3}


def parse_scatterer(text: str, source: str = "<string>") -> Union[Potential, Medium]:
    """Parse a medium/potential description; raises FileFormatError on bad input."""
    rows: dict[str, list[tuple[int, list[float]]]] = {s: [] for s in _SECTIONS}
    seen: list[str] = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise FileFormatError(source, lineno, f"unknown section [{name}]")
            section = name
            if name not in seen:
                seen.append(name)
            continue
        if section is None:
            raise FileFormatError(source, lineno, "data before any [section] header")
        fields = line.split()
        want = _SECTIONS[section]
        if len(fields) != want:
            raise FileFormatError(
                source, lineno,
                f"[{section}] rows need {want} fields, got {len(fields)}",
            )
        try:
            values = [float(f) for f in fields]
        except ValueError as exc:
            raise FileFormatError(source, lineno, f"bad number: {exc}") from None
        rows[section].append((lineno, values))

    filled = [s for s in _SECTIONS if rows[s]]
    if len(filled) > 1:
        raise FileFormatError(
            source, rows[filled[1]][0][0],
            f"file mixes [{filled[0]}] and [{filled[1]}] data; use one section kind",
        )

    try:
        if not filled:
            if "deltas" in seen and "layers" not in seen and "samples" not in seen:
                return DeltaComb([])
            return Medium([])
        kind = filled[0]
        if kind == "layers":
            return Medium([(a, b, complex(re, im)) for _, (a, b, re, im) in rows[kind]])
        if kind == "deltas":
            return DeltaComb([(x, complex(re, im)) for _, (x, re, im) in rows[kind]])
        return _samples_to_potential(rows["samples"], source)
    except FileFormatError:
        raise
    except ValueError as exc:
        raise FileFormatError(source, rows[filled[0]][0][0], str(exc)) from None


def _samples_to_potential(entries, source):
    first_line = entries[0][0]
    xs = np.array([vals[0] for _, vals in entries])
    vs = np.array([complex(v[1], v[2]) for _, v in entries])
    if xs.size < 2:
        raise FileFormatError(source, first_line, "[samples] needs at least 2 rows")
    if not np.all(np.diff(xs) > 0):
        raise FileFormatError(source, first_line, "[samples] x values must increase")
    dx = (xs[-1] - xs[0]) / (xs.size - 1)
    if np.max(np.abs(np.diff(xs) - dx)) > 1e-9 * max(1.0, abs(dx)):
        raise FileFormatError(source, first_line, "[samples] grid is not uniform")
    return Sampled(xs[0], dx, vs)


def load_scatterer(path) -> Union[Potential, Medium]:
    """Read a medium/potential description file (see module docs for the format)."""
    p = Path(path)
    return parse_scatterer(p.read_text(), source=str(p))
