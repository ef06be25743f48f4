"""Squirrel-cage induction machine in the stationary alpha-beta frame.

State is flux-linkage based: stator flux, rotor flux (stationary frame),
mechanical speed and angle. Currents are recovered from the fluxes through
the inverse inductance matrix. Space vectors use the amplitude-invariant
(2/3) scaling, so torque carries the 3/2 factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class DivergenceError(RuntimeError):
    """Raised when a plant state leaves the configured safety envelope."""


def derive_sigma(Ls: float, Lr: float, Lm: float) -> float:
    """Total leakage factor ``1 - Lm**2 / (Ls * Lr)``."""
    if Ls <= 0 or Lr <= 0:
        raise ValueError("Ls and Lr must be positive")
    if Lm * Lm >= Ls * Lr:
        raise ValueError(f"non-physical machine: Lm^2={Lm * Lm:g} >= Ls*Lr={Ls * Lr:g}")
    return 1.0 - Lm * Lm / (Ls * Lr)


@dataclass(frozen=True)
class MachineParams:
    Rs: float = 4.85
    Rr: float = 3.805
    Ls: float = 0.274
    Lr: float = 0.274
    Lm: float = 0.258
    p: int = 1
    J: float = 0.02
    f_visc: float = 0.001
    sigma: float = field(init=False)

    def __post_init__(self):
        if self.Rs <= 0 or self.Rr <= 0:
            raise ValueError("Rs and Rr must be positive")
        if self.Lm <= 0:
            raise ValueError("Lm must be positive")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be an integer >= 1, got {self.p!r}")
        if self.J <= 0:
            raise ValueError("J must be positive")
        if self.f_visc < 0:
            raise ValueError("f_visc must be non-negative")
        object.__setattr__(self, "sigma", derive_sigma(self.Ls, self.Lr, self.Lm))

    @property
    def det(self) -> float:
        # sigma * Ls * Lr
        return self.Ls * self.Lr - self.Lm * self.Lm


@dataclass(frozen=True)
class MachineState:
    phi_s_alpha: float = 0.0
    phi_s_beta: float = 0.0
    phi_r_alpha: float = 0.0
    phi_r_beta: float = 0.0
    omega_m: float = 0.0
    theta_m: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.phi_s_alpha, self.phi_s_beta, self.phi_r_alpha,
                self.phi_r_beta, self.omega_m, self.theta_m)

    @property
    def phi_s(self) -> complex:
        return complex(self.phi_s_alpha, self.phi_s_beta)

    @property
    def phi_r(self) -> complex:
        return complex(self.phi_r_alpha, self.phi_r_beta)


@dataclass(frozen=True)
class LoadModel:
    """Constant load torque with either free or speed-locked mechanics.

    In ``"locked"`` mode the speed stays at the state's initial ``omega_m``.
    """
    T_load: float = 0.0
    mode: str = "free"

    def __post_init__(self):
        if self.mode not in ("free", "locked"):
            raise ValueError(f"unknown load mode {self.mode!r}")
        if not math.isfinite(self.T_load):
            raise ValueError("T_load must be finite")


def stator_currents(state: MachineState, params: MachineParams) -> tuple[float, float]:
    d = params.det
    return ((params.Lr * state.phi_s_alpha - params.Lm * state.phi_r_alpha) / d,
            (params.Lr * state.phi_s_beta - params.Lm * state.phi_r_beta) / d)


def rotor_currents(state: MachineState, params: MachineParams) -> tuple[float, float]:
    d = params.det
    return ((params.Ls * state.phi_r_alpha - params.Lm * state.phi_s_alpha) / d,
            (params.Ls * state.phi_r_beta - params.Lm * state.phi_s_beta) / d)


def electromagnetic_torque(state: MachineState, params: MachineParams) -> float:
    isa, isb = stator_currents(state, params)
    return 1.5 * params.p * (state.phi_s_alpha * isb - state.phi_s_beta * isa)


def torque_from_flux_angle(state: MachineState, params: MachineParams) -> float:
    """Torque from the flux magnitudes and the angle between them.

    ``gamma`` is the angle by which the stator flux leads the rotor flux.
    Independent route used to cross-check :func:`electromagnetic_torque`.
    """
    ps, pr = state.phi_s, state.phi_r
    if ps == 0 or pr == 0:
        return 0.0
    gamma = math.atan2(ps.imag, ps.real) - math.atan2(pr.imag, pr.real)
    k = params.Lm / (params.sigma * params.Ls * params.Lr)
    return 1.5 * params.p * k * abs(ps) * abs(pr) * math.sin(gamma)


def _make_rhs(params: MachineParams, load: LoadModel):
    # flat float closure; the integrator calls this ~10^6 times per run
    Rs, Rr, Ls, Lr, Lm = params.Rs, params.Rr, params.Ls, params.Lr, params.Lm
    inv_d = 1.0 / params.det
    pp = params.p
    J, fv, TL = params.J, params.f_visc, load.T_load
    locked = load.mode == "locked"

    def rhs(x, va, vb):
        psa, psb, pra, prb, w, _ = x
        isa = (Lr * psa - Lm * pra) * inv_d
        isb = (Lr * psb - Lm * prb) * inv_d
        ira = (Ls * pra - Lm * psa) * inv_d
        irb = (Ls * prb - Lm * psb) * inv_d
        we = pp * w
        if locked:
            dw = 0.0
        else:
            te = 1.5 * pp * (psa * isb - psb * isa)
            dw = (te - TL - fv * w) / J
        return (va - Rs * isa,
                vb - Rs * isb,
                -Rr * ira - we * prb,
                -Rr * irb + we * pra,
                dw,
                w)

    return rhs


def state_derivative(state: MachineState, v_s: tuple[float, float],
                     params: MachineParams, load: LoadModel) -> MachineState:
    """Time derivative of ``state`` under stator voltage ``v_s`` (alpha, beta).

    Returned as a :class:`MachineState` whose fields hold the rates.
    """
    x = state.as_tuple()
    if not all(math.isfinite(c) for c in x):
        raise ValueError("state must be finite")
    return MachineState(*_make_rhs(params, load)(x, v_s[0], v_s[1]))


def integrate_interval(state: MachineState, v_s: tuple[float, float], duration: float,
                       params: MachineParams, load: LoadModel,
                       max_substep: float = 5e-6, flux_ceiling: float = 10.0,
                       speed_ceiling: float = 1e4, _rhs=None) -> MachineState:
    """Advance ``state`` by ``duration`` seconds with ``v_s`` held constant.

    Classical RK4 with ``ceil(duration / max_substep)`` equal substeps, so the
    interval end is hit exactly. Raises :class:`DivergenceError` when a flux
    magnitude exceeds ``flux_ceiling`` or the speed exceeds ``speed_ceiling``.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if max_substep <= 0:
        raise ValueError("max_substep must be > 0")
    if duration == 0:
        return state
    rhs = _rhs or _make_rhs(params, load)
    va, vb = v_s
    n = math.ceil(duration / max_substep)
    h = duration / n
    h2 = 0.5 * h
    h6 = h / 6.0
    x = state.as_tuple()
    for _ in range(n):
        k1 = rhs(x, va, vb)
        k2 = rhs(tuple(a + h2 * b for a, b in zip(x, k1)), va, vb)
        k3 = rhs(tuple(a + h2 * b for a, b in zip(x, k2)), va, vb)
        k4 = rhs(tuple(a + h * b for a, b in zip(x, k3)), va, vb)
        x = tuple(a + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                  for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4))
    _check_envelope(x, flux_ceiling, speed_ceiling)
    return MachineState(*x)


def _check_envelope(x, flux_ceiling, speed_ceiling):
    psa, psb, pra, prb, w, th = x
    if not all(math.isfinite(c) for c in x):
        raise DivergenceError(f"non-finite plant state {x}")
    if math.hypot(psa, psb) > flux_ceiling or math.hypot(pra, prb) > flux_ceiling:
        raise DivergenceError(
            f"flux magnitude above ceiling {flux_ceiling} Wb: "
            f"|phi_s|={math.hypot(psa, psb):.4g}, |phi_r|={math.hypot(pra, prb):.4g}")
    if abs(w) > speed_ceiling:
        raise DivergenceError(f"speed {w:.4g} rad/s above ceiling {speed_ceiling}")

