"""Classic DTC building blocks: flux/torque estimator, hysteresis comparators,
six-sector flux position and the basic switching table."""
from __future__ import annotations

import math
from dataclasses import dataclass

# Equivalent VSI vectors as output leg states (A, B, C).
VSI_PATTERNS = {
    0: (0, 0, 0),
    1: (1, 0, 0),
    2: (1, 1, 0),
    3: (0, 1, 0),
    4: (0, 1, 1),
    5: (0, 0, 1),
    6: (1, 0, 1),
    7: (1, 1, 1),
}

# (phi_flag, tau_flag) -> selected vector for flux sectors 1..6
TABLE_I = {
    (1, 1): (2, 3, 4, 5, 6, 1),
    (1, 0): (7, 0, 7, 0, 7, 0),
    (1, -1): (6, 1, 2, 3, 4, 5),
    (0, 1): (3, 4, 5, 6, 1, 2),
    (0, 0): (0, 7, 0, 7, 0, 7),
    (0, -1): (5, 6, 1, 2, 3, 4),
}

_SNAP = 1e-9


def vsi_angle(k: int) -> float:
    """Direction of active VSI vector ``k`` (1..6) in radians."""
    if not 1 <= k <= 6:
        raise ValueError(f"V{k} has no direction")
    return (k - 1) * math.pi / 3


@dataclass(frozen=True)
class EstimatorState:
    phi_est_alpha: float = 0.0
    phi_est_beta: float = 0.0
    Te_est: float = 0.0
    includes_rs_drop: bool = True

    @property
    def phi_mag(self) -> float:
        return math.hypot(self.phi_est_alpha, self.phi_est_beta)


@dataclass(frozen=True)
class HysteresisState:
    phi_flag: int = 1
    tau_flag: int = 0
    B_phi: float = 0.01
    B_H: float = 0.25

    def __post_init__(self):
        if self.B_phi <= 0 or self.B_H <= 0:
            raise ValueError("hysteresis bands must be positive")
        if self.phi_flag not in (0, 1) or self.tau_flag not in (-1, 0, 1):
            raise ValueError("invalid comparator flags")


@dataclass(frozen=True)
class DtcCommand:
    phi_flag: int
    tau_flag: int
    sector: int

    def __post_init__(self):
        if self.phi_flag not in (0, 1):
            raise ValueError(f"phi_flag must be 0 or 1, got {self.phi_flag}")
        if self.tau_flag not in (-1, 0, 1):
            raise ValueError(f"tau_flag must be -1, 0 or 1, got {self.tau_flag}")
        if not 1 <= self.sector <= 6:
            raise ValueError(f"sector must be 1..6, got {self.sector}")


def update_flux_estimate(prev: EstimatorState, v_s, i_s, Rs: float, dt: float,
                         p: int = 1) -> EstimatorState:
    """One forward-Euler step of the voltage-model flux estimator.

    ``v_s`` and ``i_s`` are (alpha, beta) pairs. The torque estimate uses the
    updated flux with ``i_s``.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    k = Rs if prev.includes_rs_drop else 0.0
    pa = prev.phi_est_alpha + (v_s[0] - k * i_s[0]) * dt
    pb = prev.phi_est_beta + (v_s[1] - k * i_s[1]) * dt
    te = 1.5 * p * (pa * i_s[1] - pb * i_s[0])
    return EstimatorState(pa, pb, te, prev.includes_rs_drop)


def _cell(angle: float, width: float) -> float:
    r = angle / width
    if abs(r - round(r)) < _SNAP:
        r = float(round(r))
    return r


def flux_sector(phi) -> int:
    """Sector 1..6 of a flux vector given as (alpha, beta).

    Cells are centred on the active vector directions (V1 at 0 deg), closed on
    their counter-clockwise edge: sector 1 is (-30, 30] deg.
    """
    a, b = phi
    if a == 0 and b == 0:
        raise ValueError("flux sector undefined for a zero vector")
    theta = math.atan2(b, a)
    r = _cell(theta - math.pi / 6, math.pi / 3)
    return int(math.ceil(r)) % 6 + 1


def flux_comparator(error: float, prev: int, B_phi: float) -> int:
    if B_phi <= 0:
        raise ValueError("B_phi must be > 0")
    if error > B_phi:
        return 1
    if error < -B_phi:
        return 0
    return prev


def torque_comparator(error: float, prev: int, B_H: float) -> int:
    """Three-level hysteresis with return to 0 when the error crosses zero."""
    if B_H <= 0:
        raise ValueError("B_H must be > 0")
    if error > B_H:
        return 1
    if error < -B_H:
        return -1
    if prev == 1 and error <= 0:
        return 0
    if prev == -1 and error >= 0:
        return 0
    return prev


def table1_lookup(cmd: DtcCommand) -> int:
    return TABLE_I[(cmd.phi_flag, cmd.tau_flag)][cmd.sector - 1]
