"""Flux of a point magnetic dipole through a circular SQUID pickup loop.

The loop normal is the x axis.  Its centre sits ``standoff`` from the FG
centre along x, optionally displaced sideways by ``offset_y``/``offset_z``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ParameterError
from .model import CODATA

__all__ = ["SQUIDParams", "coaxial_flux", "loop_flux", "loop_clearance"]


@dataclass(frozen=True)
class SQUIDParams:
    loop_radius: float = 1e-6           # m
    standoff: float = 1e-6              # m, FG centre to loop plane along x
    flux_noise_density: float = 1e-21   # T m^2 / sqrt(Hz)
    offset_y: float = 0.0               # m
    offset_z: float = 0.0               # m

    def __post_init__(self):
        for name in ("loop_radius", "standoff", "flux_noise_density"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v!r}", name)
        for name in ("offset_y", "offset_z"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite", name)

    @classmethod
    def matched(cls, fg_radius, flux_noise_density=1e-21):
        """Loop of the FG's radius with its plane one radius from the FG centre."""
        return cls(fg_radius, fg_radius, flux_noise_density)

    @property
    def coaxial(self):
        return self.offset_y == 0.0 and self.offset_z == 0.0


def loop_clearance(squid, displacement=(0.0, 0.0, 0.0)):
    """Shortest distance from the FG centre to the loop wire, in m.

    ``displacement`` is the FG centre relative to its reference position.
    """
    w = np.array([squid.standoff, squid.offset_y, squid.offset_z]) - np.asarray(displacement)
    rho = math.hypot(w[1], w[2])
    return math.hypot(w[0], rho - squid.loop_radius)


def coaxial_flux(mu_x, squid, consts=CODATA):
    """On-axis closed form: mu0 mu_x a^2 / (2 (a^2 + d^2)^(3/2))."""
    a, d = squid.loop_radius, squid.standoff
    return consts.mu_0 * mu_x * a * a / (2.0 * (a * a + d * d) ** 1.5)


def loop_flux(moments, displacements, squid, n_nodes=256, consts=CODATA):
    """Flux for a batch of dipole moments (J/T) at displacements (m), T m^2.

    Integrates the dipole vector potential around the loop with the periodic
    trapezoid rule, which converges geometrically for a smooth integrand.
    """
    moments = np.atleast_2d(np.asarray(moments, dtype=float))
    displacements = np.atleast_2d(np.asarray(displacements, dtype=float))
    theta = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    a = squid.loop_radius
    pts = np.stack([np.full(n_nodes, squid.standoff), squid.offset_y + a * np.cos(theta),
                    squid.offset_z + a * np.sin(theta)], axis=1)
    dl = np.stack([np.zeros(n_nodes), -a * np.sin(theta), a * np.cos(theta)], axis=1)
    dl *= 2.0 * math.pi / n_nodes
    # R[s, k] = wire node k relative to dipole s
    R = pts[None, :, :] - displacements[:, None, :]
    R3 = np.linalg.norm(R, axis=2) ** 3
    A = np.cross(moments[:, None, :], R) / R3[:, :, None]
    return consts.mu_0 / (4.0 * math.pi) * np.einsum("skc,kc->s", A, dl)
