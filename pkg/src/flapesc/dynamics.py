"""2-DOF vertical flapping-wing dynamics and fixed-step RK4 integration.

State is (z, z_dot, phi, phi_dot) with z positive *downward* (gravity enters
with +g), so "altitude" elsewhere in the package is z_ref - z.  The wing is
torque-driven; vertical force input u_z exists in the equations but is zero
in every shipped scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DivergenceError

DEFAULT_DT_MAX = 1e-3


@dataclass(frozen=True)
class FlapperState:
    z: float          # vertical position, m, positive down
    z_dot: float      # vertical velocity, m/s
    phi: float        # wing flapping angle, rad
    phi_dot: float    # flapping angular rate, rad/s

    def as_tuple(self):
        return (self.z, self.z_dot, self.phi, self.phi_dot)


@dataclass(frozen=True)
class FlapperStateDerivative:
    z_dot: float
    z_ddot: float
    phi_dot: float
    phi_ddot: float


@dataclass(frozen=True)
class ActuatorInput:
    u_z: float = 0.0     # direct vertical force input, m/s^2
    u_phi: float = 0.0   # wing torque input, rad/s^2


@dataclass(frozen=True)
class DynamicsParams:
    k_d1: float = 0.2     # vertical drag coefficient, 1/m
    k_L: float = 0.1      # lift coefficient
    k_d2: float = 0.05    # rotational drag coefficient
    k_d3: float = 0.01    # coupling drag coefficient
    g: float = 9.81       # m/s^2
    kappa_m: float = 18.0  # wing torque per command unit, rad/s^2
    omega_f: float = 50.0  # flapping carrier frequency, rad/s

    def validate(self) -> None:
        if not (self.k_L > 0):
            raise ValueError(f"k_L must be > 0, got {self.k_L}")
        if not (self.g > 0):
            raise ValueError(f"g must be > 0, got {self.g}")
        if not (self.kappa_m > 0):
            raise ValueError(f"kappa_m must be > 0, got {self.kappa_m}")
        if not (self.omega_f > 0):
            raise ValueError(f"omega_f must be > 0, got {self.omega_f}")
        for name in ("k_d1", "k_d2", "k_d3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


_FIELDS = ("z", "z_dot", "phi", "phi_dot")


def _check_finite_tuple(s, context: str = "state"):
    for name, v in zip(_FIELDS, s):
        if not math.isfinite(v):
            raise DivergenceError(name)


def _derivs(z_dot: float, phi_dot: float, u_z: float, u_phi: float,
            p: DynamicsParams):
    """Right-hand side; returns (z_ddot, phi_ddot).  z and phi do not appear."""
    abs_pd = abs(phi_dot)
    z_ddot = -p.k_d1 * abs_pd * z_dot + p.g - p.k_L * phi_dot * phi_dot + u_z
    phi_ddot = -p.k_d3 * z_dot * phi_dot - p.k_d2 * abs_pd * phi_dot + u_phi
    return z_ddot, phi_ddot


def derivatives(state: FlapperState, inp: ActuatorInput,
                params: DynamicsParams) -> FlapperStateDerivative:
    params.validate()
    _check_finite_tuple(state.as_tuple())
    if not (math.isfinite(inp.u_z) and math.isfinite(inp.u_phi)):
        raise ValueError("non-finite actuator input")
    z_ddot, phi_ddot = _derivs(state.z_dot, state.phi_dot, inp.u_z, inp.u_phi, params)
    return FlapperStateDerivative(state.z_dot, z_ddot, state.phi_dot, phi_ddot)


def _rk4_tuple(s, input_fn, t: float, dt: float, p: DynamicsParams):
    """One classical RK4 step on the bare (z, z_dot, phi, phi_dot) tuple.

    input_fn(t) -> (u_z, u_phi); evaluated at the stage times.
    """
    z, zd, phi, pd = s
    half = 0.5 * dt

    uz, up = input_fn(t)
    a1, b1 = _derivs(zd, pd, uz, up, p)

    uz, up = input_fn(t + half)
    a2, b2 = _derivs(zd + half * a1, pd + half * b1, uz, up, p)
    a3, b3 = _derivs(zd + half * a2, pd + half * b2, uz, up, p)

    uz, up = input_fn(t + dt)
    a4, b4 = _derivs(zd + dt * a3, pd + dt * b3, uz, up, p)

    sixth = dt / 6.0
    z_new = z + sixth * ((zd) + 2.0 * (zd + half * a1) + 2.0 * (zd + half * a2) + (zd + dt * a3))
    zd_new = zd + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    phi_new = phi + sixth * ((pd) + 2.0 * (pd + half * b1) + 2.0 * (pd + half * b2) + (pd + dt * b3))
    pd_new = pd + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    return (z_new, zd_new, phi_new, pd_new)


def step(state: FlapperState,
         input_fn: Callable[[float], ActuatorInput],
         t: float, dt: float, params: DynamicsParams,
         dt_max: float = DEFAULT_DT_MAX) -> FlapperState:
    """Advance the state by one RK4 step of size dt, sampling input_fn at
    the stage times.  Deterministic for identical arguments."""
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    if dt > dt_max:
        raise ValueError(f"dt={dt} exceeds dt_max={dt_max}")
    params.validate()
    _check_finite_tuple(state.as_tuple())

    def raw_input(tau: float):
        u = input_fn(tau)
        return (u.u_z, u.u_phi)

    s_new = _rk4_tuple(state.as_tuple(), raw_input, t, dt, params)
    _check_finite_tuple(s_new)
    return FlapperState(*s_new)


def hover_equilibrium(params: DynamicsParams) -> float:
    """Constant |phi_dot| at which mean lift k_L*phi_dot^2 balances gravity."""
    if params.k_L <= 0:
        raise ValueError(f"k_L must be > 0, got {params.k_L}")
    return math.sqrt(params.g / params.k_L)
