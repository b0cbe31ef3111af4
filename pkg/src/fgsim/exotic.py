"""Pseudoscalar-mediated spin-spin coupling between a polarized source and the FG.

Spins enter the potential as dimensionless vectors of length 1/2; the
prefactor hbar^3 / (4 m_e^2 c) then carries the units of J m^3.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import GeometryError, ParameterError
from .model import CODATA, derive

__all__ = [
    "SpinSource",
    "BosonCoupling",
    "ExclusionCurve",
    "v_pp",
    "equivalent_field",
    "exclusion_curve",
    "inverse_range",
    "mass_grid",
    "SOURCE_SPINS",
]

SOURCE_SPINS = 5e19  # 1 mm radius SmCo5 sphere


def _unit(v, name):
    v = np.asarray(v, dtype=float).reshape(-1)
    norm = np.linalg.norm(v) if v.shape == (3,) else 0.0
    if not (norm > 0 and math.isfinite(norm)):
        raise ParameterError(f"{name} must be a non-zero finite 3-vector", name)
    return v / norm


@dataclass(frozen=True)
class SpinSource:
    """Uniformly polarized sphere.

    ``gap`` is the surface-to-surface distance to the FG, or the centre
    distance when ``distance_mode`` is "center".  ``direction`` points from
    the FG centre towards the source centre.
    """

    radius: float = 1e-3
    spin_count: float = SOURCE_SPINS
    gap: float = 1e-3
    polarization_axis: tuple = (0.0, 0.0, 1.0)
    direction: tuple = (0.0, 0.0, -1.0)
    distance_mode: str = "gap"

    def __post_init__(self):
        for name in ("radius", "spin_count", "gap"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v!r}", name)
        if self.distance_mode not in ("gap", "center"):
            raise ParameterError("distance_mode must be 'gap' or 'center'", "distance_mode")
        object.__setattr__(self, "polarization_axis",
                           tuple(_unit(self.polarization_axis, "polarization_axis")))
        object.__setattr__(self, "direction", tuple(_unit(self.direction, "direction")))

    def center_distance(self, fg_radius):
        d = self.gap if self.distance_mode == "center" else self.gap + self.radius + fg_radius
        if not d > self.radius + fg_radius:
            raise GeometryError(f"source and FG overlap (centre distance {d:g} m)")
        return d


@dataclass(frozen=True)
class BosonCoupling:
    boson_mass: float = 0.0  # eV/c^2
    coupling: float = 1.0    # (g_P^e)^2 / (4 pi hbar c)

    def __post_init__(self):
        for name in ("boson_mass", "coupling"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be non-negative, got {v!r}", name)


def inverse_range(boson_mass, consts=CODATA):
    """m c / hbar in 1/m for a boson mass given in eV/c^2."""
    return boson_mass * consts.e_charge / (consts.hbar * consts.c)


def _prefactor(consts):
    return consts.hbar ** 3 / (4.0 * consts.m_e ** 2 * consts.c)


def _radial_terms(r, k):
    """Isotropic and tensor radial functions times the Yukawa factor."""
    yuk = np.exp(-k * r)
    a = (k / r ** 2 + 1.0 / r ** 3) * yuk
    b = (k * k / r + 3.0 * k / r ** 2 + 3.0 / r ** 3) * yuk
    return a, b


def v_pp(s1_dir, s2_dir, r_vec, bc, consts=CODATA):
    """Interaction energy of two electron spins along the given directions, J.

    The contact term is omitted; ``r_vec`` must be non-zero.
    """
    s1 = 0.5 * _unit(s1_dir, "s1_dir")
    s2 = 0.5 * _unit(s2_dir, "s2_dir")
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if not r > 0:
        raise GeometryError("spin separation must be non-zero")
    rh = r_vec / r
    a, b = _radial_terms(r, inverse_range(bc.boson_mass, consts))
    return bc.coupling * _prefactor(consts) * (s1 @ s2 * a - (s1 @ rh) * (s2 @ rh) * b)


def _sphere_nodes(radius, order):
    """Product Gauss rule on a ball: nodes (M, 3) and weights summing to the volume."""
    xr, wr = np.polynomial.legendre.leggauss(order)
    rr = 0.5 * radius * (xr + 1.0)
    wr = 0.5 * radius * wr * rr ** 2
    ct, wt = np.polynomial.legendre.leggauss(order)
    n_phi = 2 * order
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    wp = np.full(n_phi, 2.0 * math.pi / n_phi)
    R, C, P = np.meshgrid(rr, ct, phi, indexing="ij")
    S = np.sqrt(1.0 - C ** 2)
    pts = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * C], axis=-1).reshape(-1, 3)
    w = (wr[:, None, None] * wt[None, :, None] * wp[None, None, :]).reshape(-1)
    return pts, w


def _gradient_per_pair(sep, pol, k):
    """dV/dS1 per spin pair at unit coupling and prefactor, source spin pol/2.

    ``sep`` holds FG-spin minus source-spin separations, shape (M, 3).
    """
    r = np.linalg.norm(sep, axis=1)
    rh = sep / r[:, None]
    a, b = _radial_terms(r, k)
    s2 = 0.5 * pol
    return s2[None, :] * a[:, None] - rh * (rh @ s2)[:, None] * b[:, None]


def equivalent_field(source, params, bc, quadrature="point", order=12, fg_order=2,
                     consts=CODATA):
    """Field B_eff (T, 3-vector) with -mu n.B_eff equal to the coupling energy E(n).

    ``point`` collapses both spheres onto their centres; ``volume`` uses a
    product Gauss rule over both (``order`` for the source, ``fg_order`` for
    the FG).
    """
    if quadrature not in ("point", "volume"):
        raise ParameterError(f"quadrature must be 'point' or 'volume', got {quadrature!r}",
                             "quadrature")
    d = derive(params, consts)
    dist = source.center_distance(params.radius)
    centre = dist * np.asarray(source.direction)
    pol = np.asarray(source.polarization_axis)
    k = inverse_range(bc.boson_mass, consts)
    if quadrature == "point":
        sep = -centre[None, :]
        grad = _gradient_per_pair(sep, pol, k)[0]
    else:
        src_pts, src_w = _sphere_nodes(source.radius, order)
        fg_pts, fg_w = _sphere_nodes(params.radius, fg_order)
        src_w = src_w / src_w.sum()
        fg_w = fg_w / fg_w.sum()
        grad = np.zeros(3)
        for p, wf in zip(fg_pts, fg_w):
            sep = p[None, :] - (centre[None, :] + src_pts)
            grad += wf * (src_w @ _gradient_per_pair(sep, pol, k))
    # E(n) = n . G with S1 = n/2 for every FG spin
    G = bc.coupling * _prefactor(consts) * params.spin_count * source.spin_count * 0.5 * grad
    return -G / d.moment


@dataclass(frozen=True)
class ExclusionCurve:
    masses: np.ndarray          # eV/c^2
    min_coupling: np.ndarray    # dimensionless, inf where the signal underflows
    metadata: dict = field(default_factory=dict)

    def rows(self):
        return zip(self.masses, self.min_coupling)


def exclusion_curve(masses, source, params, noise_floor, suppression=1.0, quadrature="point",
                    threads=1, metadata=None, consts=CODATA):
    """Smallest coupling whose suppressed precession rate reaches ``noise_floor``.

    B_eff is linear in the coupling, so each point is a single evaluation at
    unit coupling.
    """
    masses = np.asarray(masses, dtype=float)
    if masses.ndim != 1 or masses.size == 0 or np.any(~np.isfinite(masses)) or np.any(masses < 0):
        raise ParameterError("boson masses must be a non-empty list of values >= 0",
                             "boson_masses")
    if not (noise_floor > 0 and math.isfinite(noise_floor)):
        raise ParameterError(f"noise floor must be positive, got {noise_floor!r}", "noise_floor")
    if not (suppression >= 1 and math.isfinite(suppression)):
        raise ParameterError(f"suppression must be >= 1, got {suppression!r}", "suppression")
    source.center_distance(params.radius)
    d = derive(params, consts)

    def point(m):
        b = np.linalg.norm(equivalent_field(source, params, BosonCoupling(m, 1.0), quadrature,
                                            consts=consts))
        rate = d.gamma * b / suppression
        return noise_floor / rate if rate > 0 else math.inf

    with np.errstate(over="ignore", under="ignore"):
        if threads <= 1:
            values = [point(m) for m in masses]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                values = list(pool.map(point, masses))
    meta = {
        "source_radius_m": source.radius,
        "source_spins": source.spin_count,
        "gap_m": source.gap,
        "distance_mode": source.distance_mode,
        "center_distance_m": source.center_distance(params.radius),
        "polarization_axis": list(source.polarization_axis),
        "fg_radius_m": params.radius,
        "fg_spins": params.spin_count,
        "noise_floor_rad_s": noise_floor,
        "suppression": suppression,
        "quadrature": quadrature,
    }
    meta.update(metadata or {})
    return ExclusionCurve(masses.copy(), np.array(values), meta)


def mass_grid(lo=1e-8, hi=1e-2, per_decade=10):
    n = int(round(math.log10(hi / lo) * per_decade)) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)
