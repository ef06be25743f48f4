"""Triangular carrier superposed on the torque reference.

The carrier forces the torque comparator to commutate once per carrier
half-period. It must be at least as steep as the fastest achievable torque
slope, ``max|dTe/dt| <= 4 (A_tr + B_H) / T_tr``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class CarrierConfig:
    A_tr: float = 0.5
    f_tr: float = 5000.0
    enabled: bool = True

    def __post_init__(self):
        if not (self.A_tr >= 0 and math.isfinite(self.A_tr)):
            raise ValueError("A_tr must be finite and >= 0")
        if not (self.f_tr > 0 and math.isfinite(self.f_tr)):
            raise ValueError("f_tr must be finite and > 0")

    @property
    def T_tr(self) -> float:
        return 1.0 / self.f_tr


@dataclass(frozen=True)
class CarrierCheck:
    ok: bool
    max_torque_slope: float
    bound: float

    def describe(self) -> str:
        rel = "<=" if self.ok else ">"
        return (f"max |dTe/dt| = {self.max_torque_slope:.6g} N*m/s {rel} "
                f"4*(A_tr+B_H)/T_tr = {self.bound:.6g} N*m/s")


def triangle_value(t: float, cfg: CarrierConfig) -> float:
    """Symmetric triangle: 0 at t=0, +A at T/4, 0 at T/2, -A at 3T/4."""
    if not cfg.enabled or cfg.A_tr == 0:
        return 0.0
    # exact modular reduction of the phase; no accumulated time
    u = math.fmod(t * cfg.f_tr, 1.0)
    if u < 0:
        u += 1.0
    if u < 0.25:
        s = 4.0 * u
    elif u < 0.75:
        s = 2.0 - 4.0 * u
    else:
        s = 4.0 * u - 4.0
    return cfg.A_tr * s


def modulated_reference(T_ref: float, t: float, cfg: CarrierConfig) -> float:
    return T_ref + triangle_value(t, cfg)


def carrier_bound(cfg: CarrierConfig, B_H: float) -> float:
    return 4.0 * (cfg.A_tr + B_H) * cfg.f_tr


def validate_carrier(max_torque_slope: float, cfg: CarrierConfig, B_H: float) -> CarrierCheck:
    if max_torque_slope < 0:
        raise ValueError("max_torque_slope must be >= 0")
    bound = carrier_bound(cfg, B_H)
    return CarrierCheck(max_torque_slope <= bound, max_torque_slope, bound)


def estimate_max_torque_slope(params, v_max: float, phi_ref: float) -> float:
    """Worst-case torque slope with the rotor flux frozen.

    Differentiates ``Te = 1.5 p Lm/(sigma Ls Lr) |phi_s x phi_r|`` with
    ``d phi_s/dt`` at the largest available stator voltage ``v_max`` and
    ``|phi_r| ~ (Lm/Ls) phi_ref``.
    """
    k = params.Lm / (params.sigma * params.Ls * params.Lr)
    phi_r = params.Lm / params.Ls * phi_ref
    return 1.5 * params.p * k * phi_r * v_max
