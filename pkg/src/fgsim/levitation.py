"""FG levitated above a type-I superconductor: equilibrium and closed forms.

With the magnetization horizontal the image field at height z is
``-K(z) n`` with ``K = mu0 mu / (32 pi z^3)``; its z-response to a small
tilt is what feeds back on the precession.  ``B_image`` throughout this
module means that horizontal-orientation magnitude K(z_eq).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq

from .errors import FGSimError, LevitationError, ParameterError
from .model import CODATA, derive, scale_params

__all__ = [
    "LevitationEquilibrium",
    "TiltConfig",
    "SuppressionPoint",
    "vertical_force",
    "equilibrium_height",
    "effective_precession",
    "suppression_factor",
    "suppression_curve",
    "tilt_precession_rate",
    "sc_threshold",
]

Z_MAX = 1.0  # m, upper end of the equilibrium bracket


@dataclass(frozen=True)
class LevitationEquilibrium:
    z_eq: float           # m, centre height above the SC plane
    B_image_mag: float    # T, |image field| at z_eq for horizontal n
    B_image_eq17: float   # T, mu0 mu / (4 pi z_eq^3), the single-distance convention
    residual_force: float  # N


@dataclass(frozen=True)
class TiltConfig:
    beta: float  # rad, initial tilt of n out of the horizontal plane

    def __post_init__(self):
        if not abs(self.beta) < math.pi / 2:
            raise ParameterError(f"tilt must satisfy |beta| < pi/2, got {self.beta!r}", "beta")

    @property
    def n_z0(self):
        return math.sin(self.beta)

    @classmethod
    def degrees(cls, deg):
        return cls(math.radians(deg))


@dataclass(frozen=True)
class SuppressionPoint:
    radius: float
    ratio: float      # NaN when infeasible
    z_eq: float
    B_image: float
    error: str = ""


def image_magnitude(z, mu, consts=CODATA):
    """|image field| at height z for a horizontal moment mu."""
    return consts.mu_0 * mu / (32.0 * math.pi * z ** 3)


def vertical_force(z, params, consts=CODATA):
    """Net upward force on a horizontally magnetized FG at height z, in N."""
    mu = params.spin_count * params.moment_per_spin
    k = image_magnitude(z, mu, consts)
    return 0.5 * mu * 3.0 * k / z - params.mass * consts.g_grav


def equilibrium_height(params, d=None, consts=CODATA):
    """Height where the image force balances gravity, horizontal magnetization.

    The root is bracketed in (radius, 1 m) and refined to 1e-12 relative.
    Raises LevitationError when the sphere cannot float in that range.
    """
    if d is None:
        d = derive(params, consts)

    def f(z):
        return vertical_force(z, params, consts)

    lo, hi = params.radius, Z_MAX
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0 and f_hi < 0):
        raise LevitationError(
            f"no levitation height in ({lo:g}, {hi:g}) m for radius {params.radius:g} m "
            f"(force at contact {f_lo:.3e} N, at 1 m {f_hi:.3e} N)")
    z = brentq(f, lo, hi, xtol=1e-300, rtol=1e-12, maxiter=500)
    k = image_magnitude(z, d.moment, consts)
    return LevitationEquilibrium(
        z_eq=z,
        B_image_mag=k,
        B_image_eq17=consts.mu_0 * d.moment / (4.0 * math.pi * z ** 3),
        residual_force=abs(f(z)),
    )


def suppression_factor(B_image, d):
    """1 + gamma B_image / omega_I."""
    if B_image < 0:
        raise ParameterError("B_image must be non-negative", "B_image")
    return 1.0 + d.gamma * B_image / d.omega_I


def effective_precession(B_ext, B_image, d):
    """Precession rate of a levitated FG in an axial field, rad/s."""
    if B_ext < 0:
        raise ParameterError("B_ext must be non-negative", "B_ext")
    return d.gamma * B_ext / suppression_factor(B_image, d)


def sc_threshold(B_image, d):
    """Effective precession-regime threshold field above the SC, T."""
    if B_image < 0:
        raise ParameterError("B_image must be non-negative", "B_image")
    return B_image + d.omega_I / d.gamma


def tilt_precession_rate(tilt, d):
    """Horizontal precession driven by an initial tilt: omega_I sin(beta)."""
    return d.omega_I * tilt.n_z0


def suppression_curve(radii, reference, consts=CODATA):
    """Suppression factor versus radius at fixed mass and spin density.

    Infeasible radii are kept in the output with ``ratio`` NaN and the reason
    in ``error``.
    """
    radii = [float(r) for r in radii]
    if any(not r > 0 for r in radii):
        raise ParameterError("radii must be positive", "radii")
    if any(b < a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radii must be ascending", "radii")
    points = []
    for r in radii:
        p = scale_params(reference, r)
        d = derive(p, consts)
        try:
            eq = equilibrium_height(p, d, consts)
        except FGSimError as exc:
            points.append(SuppressionPoint(r, math.nan, math.nan, math.nan, str(exc)))
            continue
        points.append(SuppressionPoint(r, suppression_factor(eq.B_image_mag, d), eq.z_eq,
                                       eq.B_image_mag))
    return points


def log_radii(start=1e-8, stop=1e-4, per_decade=10):
    n = int(round(math.log10(stop / start) * per_decade)) + 1
    return list(np.logspace(math.log10(start), math.log10(stop), n))
