"""Analytic field generators: the vortex control beam and the probe profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field import ComplexField2D
from .params import DEFAULT_WAVELENGTH_CM, GridSpec

PROBE_KINDS = ("gaussian", "double_gaussian", "sech_multi")


@dataclass(frozen=True)
class ControlBeamSpec:
    """Doughnut-mode control beam (unit orbital charge, no radial nodes).

    G0 is the Rabi amplitude scale in gamma units, waist_wc the beam waist in
    cm and waist_position_z0 the location of the waist measured from the cell
    entry plane (typically the cell length: the control is focused at the back
    of the cell).
    """

    G0: float = 1.0
    waist_wc: float = 120.0e-4
    waist_position_z0: float = 5.0
    wavelength: float = DEFAULT_WAVELENGTH_CM

    def __post_init__(self):
        if self.G0 < 0:
            raise ValueError("G0 must be non-negative")
        if not self.waist_wc > 0:
            raise ValueError("waist_wc must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def rayleigh_range(self) -> float:
        return np.pi * self.waist_wc**2 / self.wavelength

    def width_at(self, z: float) -> float:
        """Beam radius w(z) = w_c sqrt(1 + ((z - z0)/z_R)^2)."""
        return self.waist_wc * np.sqrt(
            1.0 + ((z - self.waist_position_z0) / self.rayleigh_range) ** 2)

    def ring_radius(self, z: float) -> float:
        """Radius of maximal intensity, w(z)/sqrt(2)."""
        return self.width_at(z) / np.sqrt(2.0)

    def peak_intensity(self, z: float) -> float:
        """Maximum of |G|^2 over the transverse plane at z."""
        wz = self.width_at(z)
        return (self.G0 * self.waist_wc / wz) ** 2 * 0.5 * np.exp(-1.0)


@dataclass(frozen=True)
class ProbeSpec:
    """Initial probe profile: single/double Gaussian or sech multi-peak.

    ``width`` is the 1/e amplitude radius in cm.  ``centers`` holds the
    x offsets of the constituent peaks: empty for a single centered Gaussian,
    two entries for the double Gaussian, one or more for the sech comb.
    """

    kind: str = "gaussian"
    g0: float = 0.2
    width: float = 48.0e-4
    centers: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in PROBE_KINDS:
            raise ValueError(f"unknown probe kind {self.kind!r}; "
                             f"expected one of {PROBE_KINDS}")
        if self.g0 < 0:
            raise ValueError("g0 must be non-negative")
        if not self.width > 0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if len(set(self.centers)) != len(self.centers):
            raise ValueError("probe centers must be distinct")
        if self.kind == "gaussian" and self.centers:
            raise ValueError("a single Gaussian probe takes no centers")
        if self.kind == "double_gaussian" and len(self.centers) != 2:
            raise ValueError("a double Gaussian probe takes exactly two centers")
        if self.kind == "sech_multi" and len(self.centers) < 1:
            raise ValueError("a sech multi-peak probe needs at least one center")


def control_field(spec: ControlBeamSpec, x, y, z: float):
    """Complex control Rabi amplitude at (x, y, z), gamma units.

    G = G0 (w_c r / w_z^2) exp(-i k r^2 / (2 q) + i theta) with
    q = i z_R - z + z0 and theta the azimuth.  The amplitude vanishes on the
    axis, where the azimuth is left at zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    r = np.sqrt(r2)
    k = 2.0 * np.pi / spec.wavelength
    zr = spec.rayleigh_range
    q = 1j * zr - z + spec.waist_position_z0
    wz = spec.width_at(z)
    theta = np.arctan2(y, x)
    envelope = spec.G0 * spec.waist_wc * r / wz**2
    out = envelope * np.exp(-1j * k * r2 / (2.0 * q) + 1j * theta)
    if out.shape == ():
        return complex(out)
    return out


def control_intensity(spec: ControlBeamSpec, grid: GridSpec, z: float) -> np.ndarray:
    """|G|^2 sampled on the grid at height z (cheaper than the complex field)."""
    X, Y = grid.mesh()
    r2 = X * X + Y * Y
    wz = spec.width_at(z)
    amp = spec.G0 * spec.waist_wc * np.sqrt(r2) / wz**2
    return amp * amp * np.exp(-2.0 * r2 / wz**2)


def gaussian_probe(spec: ProbeSpec, grid: GridSpec) -> ComplexField2D:
    """g(x, y) = g0 exp(-r^2 / w^2) sampled at the entry plane."""
    X, Y = grid.mesh()
    values = spec.g0 * np.exp(-(X * X + Y * Y) / spec.width**2)
    return ComplexField2D(values, grid, 0.0)


def double_gaussian_probe(spec: ProbeSpec, grid: GridSpec) -> ComplexField2D:
    """Sum of two equal Gaussians centered at (x1, 0) and (x2, 0)."""
    X, Y = grid.mesh()
    x1, x2 = spec.centers
    values = spec.g0 * (np.exp(-((X - x1) ** 2 + Y * Y) / spec.width**2)
                        + np.exp(-((X - x2) ** 2 + Y * Y) / spec.width**2))
    return ComplexField2D(values, grid, 0.0)


def sech_multipeak_probe(spec: ProbeSpec, grid: GridSpec) -> ComplexField2D:
    """g0 * sum_i sech(sqrt((x - x_i)^2 + y^2) / w), equal peak widths."""
    X, Y = grid.mesh()
    out = np.zeros_like(X)
    for xi in spec.centers:
        out += 1.0 / np.cosh(np.sqrt((X - xi) ** 2 + Y * Y) / spec.width)
    return ComplexField2D(spec.g0 * out, grid, 0.0)


def make_probe(spec: ProbeSpec, grid: GridSpec) -> ComplexField2D:
    """Entry-plane probe field for any probe kind."""
    if spec.kind == "gaussian":
        return gaussian_probe(spec, grid)
    if spec.kind == "double_gaussian":
        return double_gaussian_probe(spec, grid)
    return sech_multipeak_probe(spec, grid)
