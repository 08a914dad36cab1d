"""Physical and numerical parameters for the Raman vapor beam propagation model.

All frequency-like quantities except ``gamma`` itself are stored dimensionless,
in units of the spontaneous decay rate gamma. Lengths are in cm (Gaussian-CGS
conventions throughout, so the refractive index is n = 1 + 2*pi*chi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Rb D1 wavelength in cm; fixed by consistency of a 120 um control waist with
# a 5.7 cm Rayleigh range (z_R = pi w^2 / lambda).
DEFAULT_WAVELENGTH_CM = 794.98e-7

# Default gamma in rad/s; the natural unit of every other frequency here.
DEFAULT_GAMMA_RAD_S = 3.0e6 * np.pi


class ConfigurationError(ValueError):
    """A parameter set violates one or more invariants.

    Carries the complete list of violations, not just the first one found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class PhysicalParams:
    """Atomic, field and medium constants.

    Attributes
    ----------
    gamma : float
        Spontaneous decay rate on each arm of the Lambda system, rad/s.
        Both arms decay at this same rate.
    big_gamma : float
        Ground-state coherence decay rate, in units of gamma.
    delta_p : float
        Probe one-photon detuning (atomic minus laser), in units of gamma.
    delta_R : float
        Two-photon (Raman) detuning delta_R = delta_p - delta_c, in units
        of gamma.  The control detuning is derived: delta_c = delta_p - delta_R.
    doppler_width : float
        1-sigma width of the Maxwellian distribution of k*v, in units of gamma.
    density : float
        Atomic number density, atoms/cm^3.
    wavelength : float
        Optical wavelength in cm (probe and control assumed equal).
    """

    gamma: float = DEFAULT_GAMMA_RAD_S
    big_gamma: float = 1.0e-3
    delta_p: float = -170.0
    delta_R: float = -0.015
    doppler_width: float = 70.0
    density: float = 1.0e12
    wavelength: float = DEFAULT_WAVELENGTH_CM

    @property
    def delta_c(self) -> float:
        """Control one-photon detuning in units of gamma."""
        return self.delta_p - self.delta_R

    @property
    def wavenumber(self) -> float:
        """k = 2*pi/lambda in 1/cm."""
        return 2.0 * np.pi / self.wavelength

    def to_rad_s(self, value_gamma_units: float) -> float:
        return value_gamma_units * self.gamma

    def from_rad_s(self, value_rad_s: float) -> float:
        return value_rad_s / self.gamma

    def violations(self) -> list[str]:
        out = []
        if not self.gamma > 0:
            out.append("gamma must be positive")
        if self.big_gamma < 0:
            out.append("big_gamma must be non-negative")
        if self.doppler_width < 0:
            out.append("doppler_width must be non-negative")
        if not self.density > 0:
            out.append("density must be positive")
        if not self.wavelength > 0:
            out.append("wavelength must be positive")
        for name in ("big_gamma", "delta_p", "delta_R", "doppler_width"):
            if not np.isfinite(getattr(self, name)):
                out.append(f"{name} must be finite")
        return out


@dataclass(frozen=True)
class GridSpec:
    """Uniform transverse grid and longitudinal stepping.

    The transverse domain is a square of full width ``extent`` sampled at
    nx x ny points (powers of two, for transform efficiency). ``dz`` is the
    split-step size and ``cell_length`` the vapor cell length, both in cm.
    """

    nx: int = 256
    ny: int = 256
    extent: float = 0.24
    dz: float = 50.0e-4
    cell_length: float = 5.0

    @property
    def dx(self) -> float:
        return self.extent / self.nx

    @property
    def dy(self) -> float:
        return self.extent / self.ny

    @property
    def n_steps(self) -> int:
        return int(round(self.cell_length / self.dz))

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centered x and y coordinate arrays (cm), origin at the center."""
        x = (np.arange(self.nx) - self.nx // 2) * self.dx
        y = (np.arange(self.ny) - self.ny // 2) * self.dy
        return x, y

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")

    def spatial_frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """Angular spatial frequencies (kx, ky) in rad/cm, FFT ordering."""
        kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, self.dx)
        ky = 2.0 * np.pi * np.fft.fftfreq(self.ny, self.dy)
        return kx, ky

    def violations(self, narrowest_feature: float | None = None) -> list[str]:
        out = []
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if n < 2 or (n & (n - 1)) != 0:
                out.append(f"{name} must be a power of two, got {n}")
        if not self.extent > 0:
            out.append("extent must be positive")
        if not self.dz > 0:
            out.append("dz must be positive")
        if not self.cell_length > 0:
            out.append("cell_length must be positive")
        if self.dz > 0 and self.cell_length > 0 and self.n_steps < 1:
            out.append("cell_length/dz must round to at least one step")
        if narrowest_feature is not None and self.extent > 0 and self.nx > 0:
            # feature diameter (twice the 1/e amplitude width) must span >= 8 cells
            samples = 2.0 * narrowest_feature / self.dx
            if samples < 8.0:
                out.append(
                    f"grid spacing {self.dx:.4g} cm resolves the narrowest probe "
                    f"feature ({narrowest_feature:.4g} cm) with only {samples:.2f} "
                    "samples across its diameter; at least 8 are required"
                )
        return out


def dipole_prefactor(params: PhysicalParams) -> float:
    """Susceptibility scale N |d|^2 / hbar in rad/s.

    The dipole moment is eliminated through the radiative-decay relation
    |d|^2 = 3 hbar gamma lambda^3 / (32 pi^3) (Gaussian units), so the result
    is 3 N lambda^3 gamma / (32 pi^3).  Dividing by gamma gives the
    dimensionless scale multiplying the susceptibility ratio.
    """
    return 3.0 * params.density * params.wavelength**3 * params.gamma / (32.0 * np.pi**3)


def prefactor_over_gamma(params: PhysicalParams) -> float:
    """Dimensionless susceptibility scale N |d|^2 / (hbar gamma)."""
    return dipole_prefactor(params) / params.gamma


def doppler_width_from_temperature(temperature_K: float, mass_g: float,
                                   omega_rad_s: float) -> float:
    """1-sigma Doppler width D = sqrt(kB T omega^2 / (M c^2)) in rad/s.

    Convenience helper only; the simulation takes D directly in gamma units.
    Gaussian-CGS: kB in erg/K, mass in g, c in cm/s.
    """
    kb = 1.380649e-16
    c = 2.99792458e10
    return np.sqrt(kb * temperature_K * omega_rad_s**2 / (mass_g * c**2))


def validate(params: PhysicalParams, grid: GridSpec,
             narrowest_feature: float | None = None) -> tuple[PhysicalParams, GridSpec]:
    """Check every invariant and return the pair unchanged if all hold.

    Raises ConfigurationError carrying the complete list of violations
    otherwise.
    """
    problems = params.violations() + grid.violations(narrowest_feature)
    if problems:
        raise ConfigurationError(problems)
    return params, grid
