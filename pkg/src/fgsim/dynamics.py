"""Equations of motion for free, brick and SC-levitated ferromagnetic gyroscopes.

The spin is locked to the magnetization easy axis, so the rotational state
is carried by two dimensionless vectors: the spin direction ``n`` and the
total angular momentum ``j = n + l`` in units of the spin S.  For the
magnetic brick control ``j`` holds the rotational part only (zero spin
content).

The pure-numpy right-hand sides in this module are the readable reference;
:func:`integrate` runs the compiled copy in ``_kernels``.  Tests cross-check
the two.
"""

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from . import _kernels
from .errors import GeometryError, ParameterError, StiffnessError
from .model import CODATA

__all__ = [
    "Kind",
    "FGState",
    "StateRate",
    "ModelKind",
    "IntegratorConfig",
    "Trajectory",
    "image_field",
    "image_field_gradient",
    "rhs_free",
    "rhs_levitated",
    "integrate",
    "free_state",
    "brick_state",
    "levitated_state",
    "energy",
    "energy_terms",
    "energy_drift",
    "TRAJECTORY_HEADER",
]

TRAJECTORY_HEADER = ("t", "nx", "ny", "nz", "jx", "jy", "jz", "x", "y", "z", "flux")


def _vec(value, name):
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be a finite 3-vector, got {value!r}", name)
    arr.flags.writeable = False
    return arr


class Kind(str, Enum):
    FREE = "free"
    BRICK = "brick"
    LEVITATED = "levitated"


@dataclass(frozen=True)
class FGState:
    """Instantaneous FG state; vectors are read-only float arrays."""

    n: np.ndarray
    j: np.ndarray
    r: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: float = 0.0

    def __post_init__(self):
        for name in ("n", "j", "r", "p"):
            object.__setattr__(self, name, _vec(getattr(self, name), name))
        norm = float(np.linalg.norm(self.n))
        if not abs(norm - 1.0) < 1e-6:
            raise ParameterError(f"spin direction n must be a unit vector (|n| = {norm})", "n")

    @property
    def ell(self):
        """Rotational angular momentum in units of S (spin-bearing models)."""
        return self.j - self.n


@dataclass(frozen=True)
class StateRate:
    """Time derivative of an FGState, in SI units (p rate is a force)."""

    n: np.ndarray
    j: np.ndarray
    r: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class ModelKind:
    """Which dynamical model to run and its external conditions.

    ``frozen_com`` pins the centre of mass of a levitated FG at its initial
    position so that only the rotational degrees of freedom evolve; the
    image field still acts.  ``gravity`` is the acceleration used when
    ``gravity_enabled`` is set.
    """

    kind: Kind = Kind.FREE
    B_ext: np.ndarray = field(default_factory=lambda: np.zeros(3))
    image_field_enabled: bool = False
    gravity_enabled: bool = False
    gravity: float = CODATA.g_grav
    frozen_com: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "B_ext", _vec(self.B_ext, "B_ext"))
        if not (math.isfinite(self.gravity) and self.gravity >= 0):
            raise ParameterError(f"gravity must be >= 0, got {self.gravity!r}", "gravity")
        if self.kind is not Kind.LEVITATED and (self.image_field_enabled or self.gravity_enabled):
            raise ParameterError("image field and gravity apply to the levitated model only",
                                 "kind")

    @classmethod
    def free(cls, B_ext=(0.0, 0.0, 0.0)):
        return cls(Kind.FREE, B_ext)

    @classmethod
    def brick(cls, B_ext=(0.0, 0.0, 0.0)):
        return cls(Kind.BRICK, B_ext)

    @classmethod
    def levitated(cls, B_ext=(0.0, 0.0, 0.0), gravity=CODATA.g_grav, frozen_com=False,
                  image_field_enabled=True, gravity_enabled=True):
        return cls(Kind.LEVITATED, B_ext, image_field_enabled, gravity_enabled, gravity,
                   frozen_com)

    def check_initial(self, state):
        if self.kind is Kind.BRICK and np.any(state.j != 0.0):
            raise ParameterError("magnetic brick carries no spin: j(0) must be zero", "j")
        if self.kind is Kind.LEVITATED and not state.r[2] > 0:
            raise GeometryError(f"FG centre at z = {state.r[2]} m is not above the SC plane",
                                time=state.t)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    sample_interval: float = 1e-2
    renormalize_n: bool = True
    max_steps: int = 200_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ParameterError(f"{name} must lie in (0, 1), got {v!r}", name)
        if not self.sample_interval > 0 or not math.isfinite(self.sample_interval):
            raise ParameterError("sample_interval must be positive", "sample_interval")
        if not self.max_step > 0:
            raise ParameterError("max_step must be positive", "max_step")
        if not self.max_steps > 0:
            raise ParameterError("max_steps must be positive", "max_steps")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled FG states plus the run metadata.

    Arrays have one row per sample; ``flux`` is filled by
    :func:`fgsim.spectral.attach_flux` and is None otherwise.
    """

    t: np.ndarray
    n: np.ndarray
    j: np.ndarray
    r: np.ndarray
    p: np.ndarray
    model: ModelKind
    params: object
    config: IntegratorConfig
    n_accepted: int = 0
    n_rejected: int = 0
    flux: np.ndarray = None

    def __post_init__(self):
        for name in ("t", "n", "j", "r", "p", "flux"):
            arr = getattr(self, name)
            if arr is not None:
                arr.flags.writeable = False

    def __len__(self):
        return len(self.t)

    @property
    def dt(self):
        return self.config.sample_interval

    @property
    def ell(self):
        if self.model.kind is Kind.BRICK:
            return self.j
        return self.j - self.n

    def state(self, i):
        return FGState(self.n[i], self.j[i], self.r[i], self.p[i], float(self.t[i]))

    def with_flux(self, flux):
        flux = np.asarray(flux, dtype=float)
        if flux.shape != self.t.shape:
            raise ParameterError("flux must have one value per sample", "flux")
        return Trajectory(self.t, self.n, self.j, self.r, self.p, self.model, self.params,
                          self.config, self.n_accepted, self.n_rejected, flux.copy())

    def rows(self):
        """Yield CSV rows in ``TRAJECTORY_HEADER`` order (flux None when absent)."""
        for i in range(len(self.t)):
            fl = None if self.flux is None else self.flux[i]
            yield (self.t[i], *self.n[i], *self.j[i], *self.r[i], fl)


def free_state(n0=(1.0, 0.0, 0.0), ell0=(0.0, 0.0, 0.0)):
    n0 = np.asarray(n0, dtype=float)
    n0 = n0 / np.linalg.norm(n0)
    return FGState(n0, n0 + np.asarray(ell0, dtype=float))


def brick_state(n0=(1.0, 0.0, 0.0)):
    n0 = np.asarray(n0, dtype=float)
    return FGState(n0 / np.linalg.norm(n0), np.zeros(3))


def levitated_state(height, tilt=0.0, ell0=(0.0, 0.0, 0.0), azimuth=0.0):
    """FG at rest at ``height`` with n tilted ``tilt`` rad out of the horizontal plane."""
    if not height > 0:
        raise GeometryError(f"levitation height must be positive, got {height!r}")
    if not abs(tilt) < math.pi / 2:
        raise ParameterError("tilt must satisfy |tilt| < pi/2", "tilt")
    n0 = np.array([math.cos(tilt) * math.cos(azimuth), math.cos(tilt) * math.sin(azimuth),
                   math.sin(tilt)])
    return FGState(n0, n0 + np.asarray(ell0, dtype=float), r=(0.0, 0.0, height))


# --------------------------------------------------------------------------
# image dipole


def image_field(r, n, mu, consts=CODATA):
    """Field at the FG from its superconductor image dipole, in T.

    The image sits at (x, y, -z) with moment mu * (n_x, n_y, -n_z); the
    returned value is the ordinary point-dipole field of that moment
    evaluated at the FG centre.
    """
    r = np.asarray(r, dtype=float)
    n = np.asarray(n, dtype=float)
    z = r[2]
    if not z > 0:
        raise GeometryError(f"FG centre at z = {z} m is at or below the SC surface")
    rt = np.array([0.0, 0.0, 2.0 * z])
    nt = np.array([n[0], n[1], -n[2]])
    rr = 2.0 * z
    return consts.mu_0 / (4.0 * math.pi) * mu / rr ** 5 * (3.0 * rt * (rt @ nt) - nt * rr ** 2)


def image_field_gradient(r, n, mu, consts=CODATA):
    """Gradient of (image field . n) with n fixed and the image following r."""
    z = float(np.asarray(r, dtype=float)[2])
    if not z > 0:
        raise GeometryError(f"FG centre at z = {z} m is at or below the SC surface")
    n = np.asarray(n, dtype=float)
    k = consts.mu_0 * mu / (32.0 * math.pi * z ** 3)
    q = n[0] ** 2 + n[1] ** 2 + 2.0 * n[2] ** 2
    return np.array([0.0, 0.0, 3.0 * k * q / z])


def _larmor(model, d):
    b = float(np.linalg.norm(model.B_ext))
    if b == 0.0:
        return 0.0, np.zeros(3)
    return d.gamma * b, model.B_ext / b


def rhs_free(state, model, d):
    """Torque-driven spin/rotation dynamics of an FG (or brick) in a uniform field."""
    w_l, b_hat = _larmor(model, d)
    n, j = state.n, state.j
    zero = np.zeros(3)
    return StateRate(n=d.omega_I * np.cross(j, n), j=w_l * np.cross(n, b_hat), r=zero, p=zero)


def rhs_levitated(state, model, d, consts=CODATA):
    """Free-FG rates plus image-field torque, image force, gravity and CoM motion."""
    base = rhs_free(state, model, d)
    n = state.n
    mu = d.moment
    mass = d.params.mass
    dj = base.j
    force = np.zeros(3)
    if model.image_field_enabled:
        b_img = image_field(state.r, n, mu, consts)
        # omega_B (n x B_hat) == gamma (n x B)
        dj = dj + d.gamma * np.cross(n, b_img)
        force = force + 0.5 * mu * image_field_gradient(state.r, n, mu, consts)
    elif not state.r[2] > 0:
        raise GeometryError(f"FG centre at z = {state.r[2]} m is at or below the SC surface")
    if model.gravity_enabled:
        force = force - np.array([0.0, 0.0, mass * model.gravity])
    # B_ext is uniform, so mu grad(B_ext . n) vanishes
    if model.frozen_com:
        return StateRate(n=base.n, j=dj, r=np.zeros(3), p=np.zeros(3))
    return StateRate(n=base.n, j=dj, r=state.p / mass, p=force)


def energy_terms(traj, consts=CODATA):
    """Named energy contributions along a trajectory, one array per term.

    Free FG and brick use E/S in rad/s; the levitated model uses joules.
    """
    from .model import derive

    d = derive(traj.params, consts)
    model = traj.model
    ell = traj.ell
    rot = 0.5 * d.omega_I * np.einsum("ij,ij->i", ell, ell)
    w_l, b_hat = _larmor(model, d)
    if model.kind is not Kind.LEVITATED:
        return {"rotation": rot, "field": -w_l * (traj.n @ b_hat)}
    mass = traj.params.mass
    mu = d.moment
    z = traj.r[:, 2]
    terms = {"rotation": d.spin * rot, "field": -mu * (traj.n @ model.B_ext)}
    if not model.frozen_com:
        terms["kinetic"] = np.einsum("ij,ij->i", traj.p, traj.p) / (2.0 * mass)
        if model.gravity_enabled:
            terms["gravity"] = mass * model.gravity * z
    if model.image_field_enabled:
        # -(mu/2) n . image = +(mu/2) K q
        k = consts.mu_0 * mu / (32.0 * math.pi * z ** 3)
        q = traj.n[:, 0] ** 2 + traj.n[:, 1] ** 2 + 2.0 * traj.n[:, 2] ** 2
        terms["image"] = 0.5 * mu * k * q
    return terms


def energy(traj, consts=CODATA):
    """Conserved energy along a trajectory.

    Free FG and brick: E/S = omega_I |l|^2 / 2 - omega_L n.B_hat (rad/s).
    Levitated: E in joules, including kinetic, gravitational, image and
    external-field terms.
    """
    return sum(energy_terms(traj, consts).values())


def energy_drift(traj, consts=CODATA):
    """Largest energy excursion relative to the largest term magnitude on the run.

    Normalizing by the terms rather than by E(0) keeps the measure finite
    when the total happens to start at zero.
    """
    terms = energy_terms(traj, consts)
    e = sum(terms.values())
    scale = float(np.max(sum(np.abs(v) for v in terms.values())))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(e - e[0]))) / scale


# --------------------------------------------------------------------------
# integration


def pack_params(model, d, consts=CODATA):
    """Parameter block for the compiled kernel (layout in ``_kernels``)."""
    prm = np.zeros(_kernels.N_PARAMS)
    w_l, b_hat = _larmor(model, d)
    L = d.params.radius
    mu = d.moment
    prm[0] = d.omega_I
    prm[1] = w_l
    prm[2:5] = b_hat
    prm[5] = d.gamma
    if model.kind is Kind.LEVITATED:
        image_coeff = consts.mu_0 * mu / (32.0 * math.pi * L ** 3)
        prm[6] = image_coeff
        prm[7] = 1.0 if model.image_field_enabled else 0.0
        prm[8] = 0.0 if model.frozen_com else 1.0
        prm[9] = 3.0 * mu * image_coeff / (2.0 * d.params.mass * L ** 2)
        prm[10] = model.gravity / L if model.gravity_enabled else 0.0
    return prm


def integrate(initial, model, d, cfg, duration, consts=CODATA):
    """Adaptive Dormand-Prince 5(4) integration sampled every ``cfg.sample_interval``.

    Raises
    ------
    GeometryError
        The FG reached the SC plane (``.time`` holds the failure time).
    StiffnessError
        The step size underflowed or ``cfg.max_steps`` was exhausted.
    """
    if not (duration >= 0 and math.isfinite(duration)):
        raise ParameterError(f"duration must be non-negative, got {duration!r}", "duration")
    model.check_initial(initial)
    L = d.params.radius
    mass = d.params.mass
    y0 = np.concatenate([initial.n, initial.j, initial.r / L, initial.p / (mass * L)])
    n_samples = int(math.floor(duration / cfg.sample_interval + 1e-9)) + 1
    prm = pack_params(model, d, consts)

    out, status, t_fail, n_acc, n_rej = _kernels.integrate_dopri5(
        y0, prm, float(cfg.sample_interval), n_samples, float(cfg.rel_tol),
        float(cfg.abs_tol), float(cfg.max_step), bool(cfg.renormalize_n), int(cfg.max_steps))

    t0 = initial.t
    if status == _kernels.STATUS_GEOMETRY:
        raise GeometryError(f"FG reached the SC surface at t = {t0 + t_fail:.9g} s",
                            time=t0 + t_fail)
    if status == _kernels.STATUS_STEP_UNDERFLOW:
        raise StiffnessError(f"step size underflow at t = {t0 + t_fail:.9g} s",
                             time=t0 + t_fail)
    if status == _kernels.STATUS_MAX_STEPS:
        raise StiffnessError(f"step budget of {cfg.max_steps} exhausted at "
                             f"t = {t0 + t_fail:.9g} s", time=t0 + t_fail)

    t = t0 + cfg.sample_interval * np.arange(n_samples)
    r = out[:, 6:9] * L
    p = out[:, 9:12] * (mass * L)
    # undo the scaling round-off on the initial row
    r[0] = initial.r
    p[0] = initial.p
    return Trajectory(
        t=t,
        n=out[:, 0:3].copy(),
        j=out[:, 3:6].copy(),
        r=r,
        p=p,
        model=model,
        params=d.params,
        config=cfg,
        n_accepted=int(n_acc),
        n_rejected=int(n_rej),
    )
