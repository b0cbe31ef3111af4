"""SQUID pickup signal, spectral peak extraction and the Larmor-frequency sweep."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .dynamics import IntegratorConfig, ModelKind, brick_state, free_state, integrate
from .errors import FGSimError, GeometryError, ParameterError
from .model import CODATA, derive
from .pickup import SQUIDParams, coaxial_flux, loop_clearance, loop_flux

__all__ = [
    "FluxSignal",
    "SpectrumPeaks",
    "Regime",
    "SweepRow",
    "flux_signal",
    "attach_flux",
    "spectrum_peaks",
    "classify_regime",
    "sweep_frequencies",
    "precession_rate",
    "SWEEP_HEADER",
]

SWEEP_HEADER = ("omega_L", "peak1", "amp1", "peak2", "amp2", "brick_peak", "brick_amp")

MIN_SAMPLES = 16
PAD_FACTOR = 4
NOISE_MADS = 6.0
LEAKAGE_MARGIN = 2.0
MAIN_LOBE_BINS = 2.0


@dataclass(frozen=True)
class FluxSignal:
    samples: np.ndarray  # T m^2
    dt: float            # s
    squid: SQUIDParams

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).copy()
        if s.ndim != 1 or len(s) == 0:
            raise ParameterError("flux signal needs a non-empty 1-D sample array", "samples")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError("dt must be positive", "dt")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)


@dataclass(frozen=True)
class SpectrumPeaks:
    peaks: tuple          # ((omega rad/s, amplitude), ...) by descending amplitude
    resolution: float     # rad/s, unpadded bin spacing

    @property
    def frequencies(self):
        return [f for f, _ in self.peaks]

    @property
    def amplitudes(self):
        return [a for _, a in self.peaks]

    def __len__(self):
        return len(self.peaks)


class Regime(str, Enum):
    PRECESSING = "precessing"
    INTERMEDIATE = "intermediate"
    LIBRATING = "librating"


def flux_signal(traj, squid=SQUIDParams(), mode="fast", consts=CODATA):
    """Pickup flux along a trajectory.

    ``fast`` keeps only the n_x term of the coaxial closed form; ``exact``
    uses the closed form when the loop is coaxial and the FG stays put, and
    loop quadrature otherwise.  The loop is fixed in the lab at the FG's
    initial position plus the SQUID offsets.
    """
    if len(traj) == 0:
        raise ParameterError("trajectory is empty", "trajectory")
    if mode not in ("fast", "exact"):
        raise ParameterError(f"flux mode must be 'fast' or 'exact', got {mode!r}", "flux_mode")
    d = derive(traj.params, consts)
    disp = traj.r - traj.r[0]
    radius = traj.params.radius
    clear = min(loop_clearance(squid, disp[i]) for i in _extreme_rows(disp))
    if not clear > radius:
        raise GeometryError(f"pickup loop passes within {clear:.3g} m of the FG centre, "
                            f"inside the {radius:.3g} m sphere")
    mu_vec = d.moment * traj.n
    still = not np.any(disp)
    if mode == "fast" or (squid.coaxial and still):
        samples = coaxial_flux(mu_vec[:, 0], squid, consts)
    else:
        samples = loop_flux(mu_vec, disp, squid, consts=consts)
    return FluxSignal(samples, traj.dt, squid)


def _extreme_rows(disp):
    # clearance is checked at the rows bounding the CoM excursion
    if not np.any(disp):
        return [0]
    return sorted({0, *np.argmin(disp, axis=0), *np.argmax(disp, axis=0)})


def attach_flux(traj, squid=SQUIDParams(), mode="fast", consts=CODATA):
    return traj.with_flux(flux_signal(traj, squid, mode, consts).samples)


def spectrum_peaks(signal, max_peaks=4):
    """Strongest spectral lines of a uniformly sampled signal.

    Hann window, zero padding to 4x the next power of two, parabolic
    refinement on log magnitude, and a noise floor of median + 6 MAD.
    Window sidelobes of a stronger accepted line are not reported as
    separate lines.
    """
    if max_peaks < 1:
        raise ParameterError("max_peaks must be at least 1", "max_peaks")
    x = np.asarray(signal.samples, dtype=float)
    n = len(x)
    if n < MIN_SAMPLES:
        raise ParameterError(f"spectral analysis needs at least {MIN_SAMPLES} samples", "samples")
    dt = signal.dt
    resolution = 2.0 * math.pi / (n * dt)
    x = x - x.mean()
    if np.ptp(x) == 0.0:
        return SpectrumPeaks((), resolution)
    w = np.hanning(n)
    nfft = PAD_FACTOR * (1 << (n - 1).bit_length())
    mag = np.abs(np.fft.rfft(x * w, nfft))
    bin_w = 2.0 * math.pi / (nfft * dt)
    scale = 2.0 / w.sum()

    k = np.nonzero((mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:]))[0] + 1
    med = np.median(mag)
    floor = med + NOISE_MADS * np.median(np.abs(mag - med))
    k = k[mag[k] > floor]

    candidates = []
    for i in k:
        lm, l0, lp = np.log(mag[i - 1:i + 2] + 1e-300)
        den = lm - 2.0 * l0 + lp
        off = 0.5 * (lm - lp) / den if den < 0 else 0.0
        off = min(max(off, -0.5), 0.5)
        freq = (i + off) * bin_w
        amp = math.exp(l0 - 0.25 * (lm - lp) * off) * scale
        if 0.0 < freq < math.pi / dt:
            candidates.append((freq, amp))
    candidates.sort(key=lambda c: -c[1])

    accepted = []
    for freq, amp in candidates:
        if all(_resolved(freq, amp, f, a, resolution) for f, a in accepted):
            accepted.append((freq, amp))
            if len(accepted) == max_peaks:
                break
    return SpectrumPeaks(tuple(accepted), resolution)


def _resolved(freq, amp, strong_freq, strong_amp, resolution):
    delta = abs(freq - strong_freq) / resolution
    if delta < MAIN_LOBE_BINS:
        return False
    sidelobe = 1.0 / (math.pi * delta * abs(delta * delta - 1.0))
    return amp > LEAKAGE_MARGIN * strong_amp * sidelobe


def classify_regime(B, d):
    """Decade margins around the threshold field."""
    if not B >= 0:
        raise ParameterError(f"field magnitude must be non-negative, got {B!r}", "B")
    if B < d.B_star / 10.0:
        return Regime.PRECESSING
    if B > 10.0 * d.B_star:
        return Regime.LIBRATING
    return Regime.INTERMEDIATE


def precession_rate(traj):
    """Mean azimuthal rate of n about z, from a linear fit to the unwrapped phase."""
    if len(traj) < 2:
        raise ParameterError("need at least two samples", "trajectory")
    phi = np.unwrap(np.arctan2(traj.n[:, 1], traj.n[:, 0]))
    return float(np.polyfit(traj.t - traj.t[0], phi, 1)[0])


# --------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepRow:
    omega_L: float
    fg_peaks: tuple       # up to two (omega, amp) pairs, sorted by frequency
    brick_peak: tuple     # (omega, amp) or ()
    duration: float = 0.0
    error: str = ""

    def csv_fields(self):
        fields = [self.omega_L]
        for i in range(2):
            fields.extend(self.fg_peaks[i] if i < len(self.fg_peaks) else (None, None))
        fields.extend(self.brick_peak if self.brick_peak else (None, None))
        return fields


def sweep_plan(omega_L, omega_I, periods=10, nutation_periods=40, samples_per_period=16):
    """Run length and sample interval for one sweep point.

    The lower free-FG line sits near (omega_I/2)(sqrt(1 + 4 omega_L/omega_I) - 1);
    the run covers ``periods`` of the slowest expected line and at least
    ``nutation_periods`` nutation periods.
    """
    lower = 0.5 * omega_I * (math.sqrt(1.0 + 4.0 * omega_L / omega_I) - 1.0)
    slowest = min(lower, math.sqrt(omega_L * omega_I))
    duration = max(periods * 2.0 * math.pi / slowest, nutation_periods * 2.0 * math.pi / omega_I)
    fastest = omega_I + omega_L + 2.0 * math.sqrt(omega_L * omega_I)
    dt = 2.0 * math.pi / (samples_per_period * fastest)
    return duration, dt


def _sweep_row(omega_L, d, squid, rel_tol, abs_tol, consts):
    duration, dt = sweep_plan(omega_L, d.omega_I)
    cfg = IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol, sample_interval=dt)
    B = (0.0, 0.0, omega_L / d.gamma)
    try:
        fg = integrate(free_state(), ModelKind.free(B), d, cfg, duration, consts)
        fg_pk = spectrum_peaks(flux_signal(fg, squid, "fast", consts), max_peaks=2)
        br = integrate(brick_state(), ModelKind.brick(B), d, cfg, duration, consts)
        br_pk = spectrum_peaks(flux_signal(br, squid, "fast", consts), max_peaks=1)
    except FGSimError as exc:
        return SweepRow(omega_L, (), (), duration, f"{type(exc).__name__}: {exc}")
    fg_sorted = tuple(sorted(fg_pk.peaks))
    return SweepRow(omega_L, fg_sorted, br_pk.peaks[0] if br_pk.peaks else (), duration)


def sweep_frequencies(params, omega_L_values, squid=None, threads=1, rel_tol=1e-10,
                      abs_tol=1e-12, consts=CODATA):
    """Free-FG and brick spectral lines for each Larmor frequency (B along z, n(0) = x).

    Rows come back in input order whatever ``threads`` is.  The default
    pickup is a loop matched to the FG radius.
    """
    if squid is None:
        squid = SQUIDParams.matched(params.radius)
    values = [float(v) for v in omega_L_values]
    if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ParameterError("omega_L values must be positive", "omega_L")
    d = derive(params, consts)
    work = lambda w: _sweep_row(w, d, squid, rel_tol, abs_tol, consts)  # noqa: E731
    if threads <= 1:
        return [work(w) for w in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, values))


def log_grid(lo, hi, per_decade):
    n = int(round(math.log10(hi / lo) * per_decade)) + 1
    return list(np.logspace(math.log10(lo), math.log10(hi), n))
