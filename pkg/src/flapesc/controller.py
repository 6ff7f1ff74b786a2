"""Extremum-seeking loop: washout filter, dither demodulation, adaptation.

The update law per step:

    J_hp  = washout(J)                      (optional, exact discretization)
    xi    = c * J_hp * cos(omega * t)
    m_hat = clamp(m_hat + sign * (-k) * drive * dt)
    m     = clamp(m_hat + a * cos(omega * t))

where drive == xi by default.  When gradient conditioning is enabled
(grad_avg), drive is the one-dither-period moving average of xi plus a
low-passed lead term; this is required to stabilize the loop on
inertia-dominated plants whose position responds to thrust through two
integrations (see README).  With grad_avg off and t_lead = 0 the law above
is exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import MeasurementFaultError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EscParams:
    omega: float               # perturbation frequency, rad/s
    k: float                   # integrator gain
    a: float                   # perturbation amplitude, command units
    c: float                   # adaptation (demodulation) gain
    h: float = 0.0             # high-pass filter gain, 1/s
    hpf_enabled: bool = False
    m_min: float = 0.0
    m_max: float = 1.0
    sign: int = 1              # +1 or -1, selects descent direction through the plant
    m_init: float | None = None  # None -> midpoint of [m_min, m_max]
    # gradient conditioning (off by default; see module docstring)
    grad_avg: bool = False
    t_lead: float = 0.0        # lead time constant, s
    lead_pole: float = 15.0    # lead low-pass pole, rad/s

    def validate(self) -> None:
        if not (self.omega > 0):
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not (self.c > 0):
            raise ValueError(f"c must be > 0, got {self.c}")
        if self.hpf_enabled and not (self.h > 0):
            raise ValueError(f"h must be > 0 when hpf_enabled, got {self.h}")
        if not (self.m_min < self.m_max):
            raise ValueError(f"m_min must be < m_max, got [{self.m_min}, {self.m_max}]")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.grad_avg:
            if self.t_lead < 0:
                raise ValueError(f"t_lead must be >= 0, got {self.t_lead}")
            if not (self.lead_pole > 0):
                raise ValueError(f"lead_pole must be > 0, got {self.lead_pole}")


@dataclass
class EscState:
    eta: float = 0.0       # washout internal state, objective units
    m_hat: float = 0.0     # adapted mean command, command units
    t: float = 0.0         # controller clock, s
    # conditioning state: ring buffer of xi over one dither period
    buf: list = field(default_factory=list)
    buf_idx: int = 0
    buf_sum: float = 0.0
    buf_count: int = 0
    lead_lp: float = 0.0


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def reset(params: EscParams) -> EscState:
    params.validate()
    m0 = params.m_init
    if m0 is None:
        m0 = 0.5 * (params.m_min + params.m_max)
    clamped = _clamp(m0, params.m_min, params.m_max)
    if clamped != m0:
        log.warning("initial command %g outside [%g, %g]; clamped to %g",
                    m0, params.m_min, params.m_max, clamped)
    return EscState(eta=0.0, m_hat=clamped, t=0.0)


def hpf_update(state: EscState, J: float, h: float, dt: float,
               enabled: bool = True):
    """Washout update eta' = eta + (J - eta)*(1 - exp(-h*dt)); J_hp = J - eta'.

    Exact discretization of eta_dot = h*(J - eta).  When disabled, eta is
    untouched and J passes through.
    """
    if not enabled:
        return state, J
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    if not math.isfinite(J):
        raise MeasurementFaultError(f"non-finite objective measurement: {J}")
    state.eta = state.eta + (J - state.eta) * (1.0 - math.exp(-h * dt))
    return state, J - state.eta


def demodulate(J_hp: float, t: float, params: EscParams) -> float:
    """xi = c * J_hp * cos(omega * t)."""
    return params.c * J_hp * math.cos(params.omega * t)


def esc_step(state: EscState, J_meas: float, dt: float, params: EscParams):
    """One controller update.  Returns (state, m); advances the clock by dt."""
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    if not math.isfinite(J_meas):
        raise MeasurementFaultError(f"non-finite objective measurement: {J_meas}")

    state, J_hp = hpf_update(state, J_meas, params.h, dt, enabled=params.hpf_enabled)
    xi = demodulate(J_hp, state.t, params)

    if params.grad_avg:
        drive = _conditioned_drive(state, xi, dt, params)
    else:
        drive = xi

    m_hat = _clamp(state.m_hat + params.sign * (-params.k) * drive * dt,
                   params.m_min, params.m_max)
    state.m_hat = m_hat
    m = _clamp(m_hat + params.a * math.cos(params.omega * state.t),
               params.m_min, params.m_max)
    state.t += dt
    # keep the internal values of this step observable for telemetry
    state.last_J_hp = J_hp
    state.last_xi = xi
    return state, m


def _conditioned_drive(state: EscState, xi: float, dt: float,
                       params: EscParams) -> float:
    # one dither period worth of samples
    n = max(1, int(round(2.0 * math.pi / (params.omega * dt))))
    if len(state.buf) != n:
        state.buf = [0.0] * n
        state.buf_idx = 0
        state.buf_sum = 0.0
        state.buf_count = 0
        state.lead_lp = 0.0
    old = state.buf[state.buf_idx]
    state.buf[state.buf_idx] = xi
    state.buf_idx = (state.buf_idx + 1) % n
    state.buf_sum += xi - old
    if state.buf_count < n:
        state.buf_count += 1
        return 0.0  # warm-up: no adaptation until the window is full
    ghat = state.buf_sum / n
    state.lead_lp += params.lead_pole * (ghat - state.lead_lp) * dt
    return ghat + params.t_lead * params.lead_pole * (ghat - state.lead_lp)
