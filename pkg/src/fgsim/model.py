"""Physical constants, FG parameters and the derived characteristic scales.

All values are SI.  The reference sphere (30 um radius, 7e15 polarized
spins) has no stated mass; it is calibrated from its Einstein-de Haas
frequency of 1.193 rad/s and that density is carried to every other radius
by :func:`scale_params`.
"""

from dataclasses import dataclass, replace
import math
import numbers

from .errors import ParameterError

__all__ = [
    "PhysicalConstants",
    "CODATA",
    "FGParams",
    "DerivedFG",
    "derive",
    "scale_params",
    "calibrated_mass",
    "reference_params",
    "REFERENCE_RADIUS",
    "REFERENCE_SPIN_COUNT",
    "REFERENCE_OMEGA_I",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values.  ``g_grav`` is the only one meant to be overridden."""

    hbar: float = 1.054571817e-34
    mu_B: float = 9.2740100783e-24
    g_e: float = 2.00231930436256
    mu_0: float = 1.25663706212e-6
    k_B: float = 1.380649e-23
    c: float = 299792458.0
    m_e: float = 9.1093837015e-31
    g_grav: float = 9.80665
    m_He: float = 6.646477e-27  # 4He atom, 4.00260325413 u
    e_charge: float = 1.602176634e-19

    def __post_init__(self):
        for name in ("hbar", "mu_B", "g_e", "mu_0", "k_B", "c", "m_e", "g_grav",
                     "m_He", "e_charge"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ParameterError(f"constant {name} must be positive, got {value!r}", name)

    @property
    def gamma(self):
        """Electron gyromagnetic ratio g_e mu_B / hbar in rad/(s T)."""
        return self.g_e * self.mu_B / self.hbar

    def with_gravity(self, g_grav):
        return replace(self, g_grav=g_grav)


CODATA = PhysicalConstants()

REFERENCE_RADIUS = 30e-6
REFERENCE_SPIN_COUNT = 7e15
REFERENCE_OMEGA_I = 1.193


def _positive(name, value):
    if (isinstance(value, bool) or not isinstance(value, numbers.Real)
            or not math.isfinite(value) or not value > 0):
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}", name)


@dataclass(frozen=True)
class FGParams:
    """Uniformly magnetized spherical FG.

    Attributes
    ----------
    radius : float
        Sphere radius, m.
    spin_count : float
        Number of polarized electron spins N.
    mass : float
        kg.
    moment_per_spin : float
        Magnetic moment carried per polarized spin, J/T.  Defaults to one
        Bohr magneton.
    """

    radius: float
    spin_count: float
    mass: float
    moment_per_spin: float = CODATA.mu_B

    def __post_init__(self):
        _positive("radius", self.radius)
        _positive("spin_count", self.spin_count)
        _positive("mass", self.mass)
        _positive("moment_per_spin", self.moment_per_spin)

    @property
    def volume(self):
        return 4.0 / 3.0 * math.pi * self.radius ** 3

    @property
    def density(self):
        return self.mass / self.volume


@dataclass(frozen=True)
class DerivedFG:
    inertia: float      # kg m^2
    spin: float         # J s, total intrinsic angular momentum S
    moment: float       # J/T
    omega_I: float      # rad/s, Einstein-de Haas frequency S/I
    omega_star: float   # rad/s, precession threshold (identical to omega_I)
    B_star: float       # T, threshold field
    gamma: float        # rad/(s T)
    params: FGParams    # the sphere these were derived from


def derive(params, consts=CODATA):
    """Moment of inertia, spin, moment and characteristic frequencies."""
    if not isinstance(params, FGParams):
        raise ParameterError("params must be an FGParams instance")
    inertia = 0.4 * params.mass * params.radius ** 2
    spin = params.spin_count * consts.hbar / 2.0
    omega_i = spin / inertia
    return DerivedFG(
        inertia=inertia,
        spin=spin,
        moment=params.spin_count * params.moment_per_spin,
        omega_I=omega_i,
        omega_star=omega_i,
        B_star=omega_i / consts.gamma,
        gamma=consts.gamma,
        params=params,
    )


def calibrated_mass(radius, spin_count, omega_I, consts=CODATA):
    """Mass giving the requested Einstein-de Haas frequency: m = 5 N hbar / (4 r^2 omega_I)."""
    _positive("radius", radius)
    _positive("spin_count", spin_count)
    _positive("omega_I", omega_I)
    return 5.0 * spin_count * consts.hbar / (4.0 * radius ** 2 * omega_I)


def reference_params(consts=CODATA):
    """The 30 um, 7e15-spin sphere with mass calibrated to omega_I = 1.193 rad/s."""
    mass = calibrated_mass(REFERENCE_RADIUS, REFERENCE_SPIN_COUNT, REFERENCE_OMEGA_I, consts)
    return FGParams(radius=REFERENCE_RADIUS, spin_count=REFERENCE_SPIN_COUNT, mass=mass,
                    moment_per_spin=consts.mu_B)


def scale_params(reference, new_radius):
    """Resize a sphere at fixed mass density and spin density."""
    _positive("new_radius", new_radius)
    k = (new_radius / reference.radius) ** 3
    return replace(reference, radius=new_radius, spin_count=reference.spin_count * k,
                   mass=reference.mass * k)
