"""Noise budget of a precession-frequency measurement: gas collisions and SQUID readout."""

from dataclasses import dataclass
import math

from scipy.optimize import brentq

from .errors import GeometryError, ParameterError
from .levitation import equilibrium_height, suppression_factor
from .model import CODATA, derive
from .pickup import SQUIDParams, coaxial_flux, loop_clearance

__all__ = [
    "GasParams",
    "SQUIDParams",
    "NoiseBudget",
    "collision_prefactor",
    "collision_noise",
    "detection_noise",
    "fg_flux_amplitude",
    "levitated_suppression",
    "budget",
]


@dataclass(frozen=True)
class GasParams:
    """Residual gas; defaults are helium at 4 K and 3e13 atoms/cm^3."""

    species_mass: float = CODATA.m_He  # kg
    temperature: float = 4.0           # K
    number_density: float = 3e19       # m^-3

    def __post_init__(self):
        for name in ("species_mass", "temperature", "number_density"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v!r}", name)

    def v_th(self, consts=CODATA):
        """Mean thermal speed sqrt(8 k_B T / (pi m))."""
        return math.sqrt(8.0 * consts.k_B * self.temperature / (math.pi * self.species_mass))


def _positive_time(t):
    if not (t > 0 and math.isfinite(t)):
        raise ParameterError(f"integration time must be positive, got {t!r}", "t")


def _suppression(value):
    if not (value >= 1 and math.isfinite(value)):
        raise ParameterError(f"suppression must be >= 1, got {value!r}", "suppression")


def collision_prefactor(params, gas, consts=CODATA):
    """Free-FG collision noise times sqrt(t), in rad s^-1/2."""
    v = gas.v_th(consts)
    return (gas.species_mass * params.radius ** 2 / (6.0 * params.spin_count * consts.hbar)
            * math.sqrt(gas.number_density * v ** 3 / math.pi))


def collision_noise(params, gas, t, suppression=1.0, consts=CODATA):
    """Precession-frequency uncertainty from gas collisions after time t, rad/s."""
    _positive_time(t)
    _suppression(suppression)
    return collision_prefactor(params, gas, consts) / math.sqrt(t) / suppression


def fg_flux_amplitude(params, squid, consts=CODATA):
    """Peak coaxial flux of the FG moment through the loop, T m^2."""
    if not loop_clearance(squid) > params.radius:
        raise GeometryError("pickup loop intersects the FG sphere")
    mu = params.spin_count * params.moment_per_spin
    return coaxial_flux(mu, squid, consts)


def detection_noise(squid, flux_amp, t):
    """SQUID-limited frequency uncertainty: (flux noise / flux amplitude) t^(-3/2)."""
    _positive_time(t)
    if not (flux_amp > 0 and math.isfinite(flux_amp)):
        raise GeometryError(f"flux amplitude must be positive, got {flux_amp!r}")
    return squid.flux_noise_density / flux_amp * t ** -1.5


def levitated_suppression(params, consts=CODATA):
    """Suppression factor of the FG at its own levitation height."""
    d = derive(params, consts)
    return suppression_factor(equilibrium_height(params, d, consts).B_image_mag, d)


@dataclass(frozen=True)
class NoiseBudget:
    """Collision and detection terms at integration time ``t``.

    ``col_prefactor`` already includes the suppression divisor.
    """

    col_prefactor: float   # rad s^-1/2
    angle_noise: float     # rad / sqrt(Hz)
    suppression: float
    t: float

    @property
    def suppression_applied(self):
        return self.suppression != 1.0

    def delta_omega_col(self, t=None):
        t = self.t if t is None else t
        _positive_time(t)
        return self.col_prefactor / math.sqrt(t)

    def delta_omega_det(self, t=None):
        t = self.t if t is None else t
        _positive_time(t)
        return self.angle_noise * t ** -1.5

    def floor(self, t=None):
        """Both terms added in quadrature."""
        return math.hypot(self.delta_omega_col(t), self.delta_omega_det(t))

    def dominant(self, t=None):
        return "collision" if self.delta_omega_col(t) >= self.delta_omega_det(t) else "detection"

    def crossover_closed_form(self):
        if self.col_prefactor == 0.0:
            return math.inf
        return self.angle_noise / self.col_prefactor

    def crossover_time(self):
        """Time where the two terms are equal, found by root search in log t."""
        if self.col_prefactor == 0.0:
            return math.inf

        def gap(log_t):
            t = math.exp(log_t)
            return math.log(self.delta_omega_col(t)) - math.log(self.delta_omega_det(t))

        lo, hi = -50.0, 50.0
        while gap(lo) > 0:
            lo -= 50.0
        while gap(hi) < 0:
            hi += 50.0
        return math.exp(brentq(gap, lo, hi, xtol=1e-14, rtol=1e-14))


def budget(params, gas, squid, t, suppression=None, consts=CODATA):
    """Noise budget of an FG; ``suppression=None`` uses its levitated suppression factor."""
    _positive_time(t)
    if suppression is None:
        suppression = levitated_suppression(params, consts)
    _suppression(suppression)
    flux = fg_flux_amplitude(params, squid, consts)
    return NoiseBudget(
        col_prefactor=collision_prefactor(params, gas, consts) / suppression,
        angle_noise=squid.flux_noise_density / flux,
        suppression=suppression,
        t=t,
    )
