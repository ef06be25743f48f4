"""Scenario engine: stiff grid, discrete DTC controller ticking at ``T_s``,
two-interval converter schedule per tick and RK4 plant integration."""
from __future__ import annotations

import bisect
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import converter as conv
from .carrier import (CarrierCheck, CarrierConfig, estimate_max_torque_slope,
                      modulated_reference, validate_carrier)
from .dtc import (DtcCommand, EstimatorState, flux_comparator, flux_sector, table1_lookup,
                  torque_comparator, update_flux_estimate)
from .machine import LoadModel, MachineParams, MachineState, _make_rhs, integrate_interval
from .modulator import schedule

SQRT3_2 = math.sqrt(3.0) / 2.0


class CarrierViolation(ValueError):
    def __init__(self, check: CarrierCheck):
        super().__init__("carrier violates the slope bound: " + check.describe())
        self.check = check


@dataclass(frozen=True)
class GridSource:
    V_phase_rms: float = 220.0
    f_grid: float = 50.0
    phase_offset: float = 0.0

    def __post_init__(self):
        if self.V_phase_rms <= 0 or self.f_grid <= 0:
            raise ValueError("grid voltage and frequency must be positive")

    @property
    def Vm(self) -> float:
        return math.sqrt(2.0) * self.V_phase_rms


def grid_voltages(src: GridSource, t: float) -> tuple[float, float, float]:
    th = 2.0 * math.pi * src.f_grid * t + src.phase_offset
    vm = src.Vm
    return (vm * math.cos(th),
            vm * math.cos(th - 2.0 * math.pi / 3.0),
            vm * math.cos(th - 4.0 * math.pi / 3.0))


@dataclass(frozen=True)
class ControllerConfig:
    phi_ref: float = 1.14
    B_phi: float = 0.01
    B_H: float = 0.25
    torque_steps: tuple = ((0.0, 10.0),)
    includes_rs_drop: bool = True

    def __post_init__(self):
        if self.B_phi <= 0 or self.B_H <= 0:
            raise ValueError("hysteresis bands must be positive")
        if self.phi_ref <= 0:
            raise ValueError("phi_ref must be positive")
        steps = tuple((float(t), float(v)) for t, v in self.torque_steps)
        if not steps:
            raise ValueError("torque_steps must not be empty")
        times = [t for t, _ in steps]
        if times != sorted(times):
            raise ValueError("torque_steps must be sorted by time")
        object.__setattr__(self, "torque_steps", steps)

    def torque_ref(self, t: float) -> float:
        times = [s[0] for s in self.torque_steps]
        i = bisect.bisect_right(times, t) - 1
        return self.torque_steps[max(i, 0)][1]


@dataclass(frozen=True)
class Scenario:
    machine: MachineParams = field(default_factory=MachineParams)
    load: LoadModel = field(default_factory=LoadModel)
    omega_init: float = 0.0
    grid: GridSource = field(default_factory=GridSource)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    carrier: CarrierConfig = field(default_factory=CarrierConfig)
    T_s: float = 50e-6
    mode: str = "fixed"  # "fixed" | "baseline"
    duration: float = 0.6
    max_substep: float = 5e-6
    decimation: int = 1
    settle_time: float = 0.2
    max_torque_slope: float | None = None
    allow_carrier_violation: bool = False
    name: str = "scenario"

    def __post_init__(self):
        if self.mode not in ("fixed", "baseline"):
            raise ValueError(f"mode must be 'fixed' or 'baseline', got {self.mode!r}")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        if self.T_s <= 0 or self.max_substep <= 0:
            raise ValueError("T_s and max_substep must be positive")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise ValueError("decimation must be a positive integer")

    @property
    def carrier_active(self) -> bool:
        return self.mode == "fixed" and self.carrier.enabled

    def torque_slope(self) -> float:
        if self.max_torque_slope is not None:
            return float(self.max_torque_slope)
        v_max = 2.0 / math.sqrt(3.0) * self.grid.Vm  # largest output vector
        return estimate_max_torque_slope(self.machine, v_max, self.controller.phi_ref)

    def carrier_check(self) -> CarrierCheck:
        return validate_carrier(self.torque_slope(), self.carrier, self.controller.B_H)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["machine"].pop("sigma", None)
        d["controller"]["torque_steps"] = [list(s) for s in self.controller.torque_steps]
        return d


SERIES = ("t", "Te", "Te_est", "T_ref", "phi_alpha", "phi_beta", "phi_mag",
          "ia_s", "ib_s", "ic_s", "omega_m", "v_in_a", "i_in_a",
          "p_grid", "p_motor", "p_grid_avg", "phi_flag", "tau_flag", "vsi_vec", "flux_sector",
          "input_sector")

_INT_SERIES = ("phi_flag", "tau_flag", "vsi_vec", "flux_sector", "input_sector")


@dataclass
class SimResult:
    series: dict
    cfg: list
    scenario: dict
    meta: dict
    applied: list = field(default_factory=list)  # (start time, config) per plant interval

    def __len__(self):
        return len(self.cfg)

    @property
    def sample_rate(self) -> float:
        return 1.0 / (self.meta["T_s"] * self.meta["decimation"])

    def window(self, t0: float, t1: float | None = None) -> np.ndarray:
        t = self.series["t"]
        m = t >= t0 - 1e-12
        if t1 is not None:
            m &= t < t1 - 1e-12
        return m


def _abc(ia, ib):
    # amplitude-invariant inverse transform of an isolated-neutral set
    return (ia, -0.5 * ia + SQRT3_2 * ib, -0.5 * ia - SQRT3_2 * ib)


def run_scenario(scn: Scenario) -> SimResult:
    check = scn.carrier_check() if scn.carrier_active else None
    if check is not None and not check.ok and not scn.allow_carrier_violation:
        raise CarrierViolation(check)

    mp, ctl, car = scn.machine, scn.controller, scn.carrier
    rhs = _make_rhs(mp, scn.load)
    Ts = scn.T_s
    Lr, Lm, inv_d = mp.Lr, mp.Lm, 1.0 / mp.det
    pp = mp.p

    def currents(x: MachineState):
        return ((Lr * x.phi_s_alpha - Lm * x.phi_r_alpha) * inv_d,
                (Lr * x.phi_s_beta - Lm * x.phi_r_beta) * inv_d)

    state = MachineState(omega_m=scn.omega_init)
    est = EstimatorState(includes_rs_drop=ctl.includes_rs_drop)
    phi_flag, tau_flag = 1, 0
    prev_cfg = None
    v_avg = (0.0, 0.0)
    n_ticks = int(round(scn.duration / Ts))
    rows = {k: [] for k in SERIES}
    cfgs = []
    applied = []

    for k in range(n_ticks):
        t = k * Ts
        v_grid = grid_voltages(scn.grid, t)
        i_s = currents(state)
        est = update_flux_estimate(est, v_avg, i_s, mp.Rs, Ts, pp)

        t_ref = ctl.torque_ref(t)
        t_cmd = modulated_reference(t_ref, t, car) if scn.carrier_active else t_ref
        phi_flag = flux_comparator(ctl.phi_ref - est.phi_mag, phi_flag, ctl.B_phi)
        tau_flag = torque_comparator(t_cmd - est.Te_est, tau_flag, ctl.B_H)
        f_sec = flux_sector((est.phi_est_alpha, est.phi_est_beta)) if est.phi_mag > 0 else 1
        vsi = table1_lookup(DtcCommand(phi_flag, tau_flag, f_sec))
        sched, in_sec = schedule(v_grid, vsi, Ts, prev_cfg)
        intervals = sched.intervals()

        capture = k % scn.decimation == 0
        if capture:
            i_o = _abc(*i_s)
            cfg0 = intervals[0][0]
            p_grid = sum(v * i for v, i in zip(v_grid, conv.apply_currents(cfg0, i_o)))
            p_motor = sum(v * i for v, i in zip(conv.apply_voltages(cfg0, v_grid), i_o))
            te = 1.5 * pp * (state.phi_s_alpha * i_s[1] - state.phi_s_beta * i_s[0])
            rows["t"].append(t)
            rows["Te"].append(te)
            rows["Te_est"].append(est.Te_est)
            rows["T_ref"].append(t_ref)
            rows["phi_alpha"].append(state.phi_s_alpha)
            rows["phi_beta"].append(state.phi_s_beta)
            rows["phi_mag"].append(math.hypot(state.phi_s_alpha, state.phi_s_beta))
            rows["ia_s"].append(i_o[0])
            rows["ib_s"].append(i_o[1])
            rows["ic_s"].append(i_o[2])
            rows["omega_m"].append(state.omega_m)
            rows["v_in_a"].append(v_grid[0])
            rows["p_grid"].append(p_grid)
            rows["p_motor"].append(p_motor)
            rows["phi_flag"].append(phi_flag)
            rows["tau_flag"].append(tau_flag)
            rows["vsi_vec"].append(vsi)
            rows["flux_sector"].append(f_sec)
            rows["input_sector"].append(in_sec.sector)
            cfgs.append(cfg0.name)

        t0 = t
        va_sum = vb_sum = ia_in = p_avg = 0.0
        for cfg, dur in intervals:
            v_mid = grid_voltages(scn.grid, t0 + 0.5 * dur)
            vs = conv.space_vector(conv.apply_voltages(cfg, v_mid))
            i_start = currents(state)
            state = integrate_interval(state, (vs.real, vs.imag), dur, mp, scn.load,
                                       scn.max_substep, _rhs=rhs)
            i_end = currents(state)
            i_o = _abc(0.5 * (i_start[0] + i_end[0]), 0.5 * (i_start[1] + i_end[1]))
            i_in = conv.apply_currents(cfg, i_o)
            va_sum += vs.real * dur
            vb_sum += vs.imag * dur
            ia_in += i_in[0] * dur
            p_avg += sum(v * i for v, i in zip(v_mid, i_in)) * dur
            applied.append((t0, cfg.name))
            prev_cfg = cfg
            t0 += dur
        v_avg = (va_sum / Ts, vb_sum / Ts)
        if capture:
            rows["i_in_a"].append(ia_in / Ts)
            rows["p_grid_avg"].append(p_avg / Ts)

    series = {k: np.asarray(v, dtype=int if k in _INT_SERIES
                            else float) for k, v in rows.items()}
    meta = {
        "version": __version__,
        "T_s": Ts,
        "decimation": scn.decimation,
        "n_ticks": n_ticks,
        "mode": scn.mode,
        "carrier_check": None if check is None else asdict(check),
    }
    return SimResult(series, cfgs, scn.to_dict(), meta, applied)
