"""Figures of merit computed from simulation series."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dtc import VSI_PATTERNS


class AnalysisError(ValueError):
    pass


@dataclass
class SpectrumReport:
    freqs: np.ndarray
    magnitude: np.ndarray
    f1: float
    mag1: float
    thd: float
    n_periods: int

    def summary(self) -> dict:
        return {"f1": self.f1, "mag1": self.mag1, "thd": self.thd, "n_periods": self.n_periods}


@dataclass
class RippleReport:
    mean: float
    std: float
    p2p: float


@dataclass
class SwitchingStats:
    counts: list
    cell_frequency: list
    mean_frequency: float
    aggregate_frequency: float
    period_cov: float
    window: float

    def summary(self) -> dict:
        return asdict(self)


def _trim_periods(n: int, fs: float, f0: float) -> tuple[int, int]:
    n_per = int(math.floor(n * f0 / fs + 1e-9))
    if n_per < 2:
        raise AnalysisError(f"window holds {n * f0 / fs:.3g} periods of {f0:g} Hz; need >= 2")
    return n_per, int(round(n_per * fs / f0))


def spectrum(x, fs: float, f0: float | None = None, max_order: int = 40,
             search: float = 0.5) -> SpectrumReport:
    """Amplitude-calibrated magnitude spectrum and THD.

    The window is trimmed to a whole number of periods of ``f0`` (rectangular
    window). The fundamental is the largest bin within ``f0 * (1 +- search)``;
    without ``f0`` it is the largest non-DC bin of the untrimmed record.
    """
    x = np.asarray(x, dtype=float)
    if f0 is not None:
        n_per, n = _trim_periods(len(x), fs, f0)
        x = x[:n]
    else:
        n_per, n = 0, len(x)
    if n < 4:
        raise AnalysisError("series too short for a spectrum")
    X = np.fft.rfft(x) / n
    mag = np.abs(X)
    mag[1:] *= 2.0
    if n % 2 == 0:
        mag[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    if f0 is not None:
        band = np.flatnonzero((freqs >= f0 * (1 - search)) & (freqs <= f0 * (1 + search)))
        band = band[band > 0]
    else:
        band = np.arange(1, len(mag))
    if band.size == 0:
        raise AnalysisError("no frequency bin near the requested fundamental")
    k1 = int(band[np.argmax(mag[band])])
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    if mag[k1] <= 1e-9 * max(scale, 1e-300):
        raise AnalysisError("no fundamental component detected")
    harm = [h * k1 for h in range(2, max_order + 1) if h * k1 < len(mag)]
    thd = float(np.sqrt(np.sum(mag[harm] ** 2)) / mag[k1]) if harm else 0.0
    if f0 is None:
        n_per = k1
    return SpectrumReport(freqs, mag, float(freqs[k1]), float(mag[k1]), thd, n_per)


def torque_ripple(x) -> RippleReport:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise AnalysisError("empty window")
    return RippleReport(float(x.mean()), float(x.std()), float(x.max() - x.min()))


def _cells(states):
    if len(states) and isinstance(states[0], (int, np.integer)):
        return [VSI_PATTERNS[int(s)] for s in states]
    return [tuple(s) for s in states]


def switching_stats(states, t, dt: float | None = None) -> SwitchingStats:
    """Commutation statistics of a cell-state series.

    ``states`` holds one entry per sample: a configuration name such as
    ``"abb"``, a tuple of leg states, or a VSI vector index. Each position is a
    cell; a commutation is a change of that cell between consecutive samples.
    A switching period spans two commutations of the same cell, so a cell
    toggling every 100 us switches at 5 kHz. ``mean_frequency`` averages the
    per-cell rates; ``aggregate_frequency`` is their sum. ``period_cov`` is the
    coefficient of variation of the gaps between successive commutation
    instants of the converter as a whole.
    """
    t = np.asarray(t, dtype=float)
    cells = _cells(states)
    if len(cells) != len(t):
        raise AnalysisError("states and timestamps differ in length")
    if len(t) == 0:
        return SwitchingStats([], [], 0.0, 0.0, 0.0, 0.0)
    if dt is None:
        dt = float(np.median(np.diff(t))) if len(t) > 1 else 0.0
    window = float(t[-1] - t[0] + dt)
    arr = np.array(cells)
    changed = arr[1:] != arr[:-1]
    counts = changed.sum(axis=0).astype(int).tolist()
    events = t[1:][changed.any(axis=1)]
    gaps = np.diff(events)
    cov = float(gaps.std() / gaps.mean()) if gaps.size > 1 else 0.0
    if window > 0:
        cell_f = [c / (2 * window) for c in counts]
    else:
        cell_f = [0.0] * len(counts)
    mean_f = sum(cell_f) / len(cell_f) if cell_f else 0.0
    return SwitchingStats(counts, cell_f, float(mean_f), float(sum(cell_f)), cov, window)


def _phasor(x, fs: float, f: float) -> complex:
    n = len(x)
    w = np.exp(-2j * np.pi * f * np.arange(n) / fs)
    return complex(2.0 / n * np.dot(x, w))


def displacement_power_factor(v, i, f: float, fs: float) -> float:
    """cos of the angle between the fundamental phasors of ``v`` and ``i``.

    Negative values mean power flows from the current's side back into the
    voltage source.
    """
    v = np.asarray(v, dtype=float)
    i = np.asarray(i, dtype=float)
    if len(v) != len(i):
        raise AnalysisError("voltage and current differ in length")
    _, n = _trim_periods(len(v), fs, f)
    V = _phasor(v[:n], fs, f)
    I = _phasor(i[:n], fs, f)
    for name, z, x in (("voltage", V, v), ("current", I, i)):
        if abs(z) <= 1e-9 * max(float(np.max(np.abs(x[:n]))), 1e-300):
            raise AnalysisError(f"no {name} fundamental at {f:g} Hz")
    return float(np.cos(np.angle(V) - np.angle(I)))


def flux_trajectory_metrics(phi_alpha, phi_beta) -> dict:
    r = np.hypot(np.asarray(phi_alpha, dtype=float), np.asarray(phi_beta, dtype=float))
    if r.size == 0:
        raise AnalysisError("empty window")
    return {"mean_radius": float(r.mean()), "radial_std": float(r.std())}


def electrical_frequency(phi_alpha, phi_beta, t) -> float:
    """Mean rotation frequency (Hz) of a vector trajectory."""
    ang = np.unwrap(np.arctan2(phi_beta, phi_alpha))
    span = float(t[-1] - t[0])
    if span <= 0:
        raise AnalysisError("need at least two samples")
    return float(abs(ang[-1] - ang[0]) / (2 * np.pi * span))


def summarize(result, settle_time: float | None = None, t_end: float | None = None) -> dict:
    """Metrics over ``[settle_time, t_end)`` of a :class:`~dtcmc.sim.SimResult`."""
    s = result.series
    if settle_time is None:
        settle_time = result.scenario.get("settle_time", 0.2)
    m = result.window(settle_time, t_end)
    out = {"window": [settle_time, t_end], "n_samples": int(m.sum())}
    if not m.any():
        return out
    fs = result.sample_rate
    t = s["t"][m]
    te = torque_ripple(s["Te"][m])
    out["torque"] = asdict(te)
    out["torque"]["estimate_mean_abs_error"] = float(np.mean(np.abs(s["Te_est"][m] - s["Te"][m])))
    out["flux"] = flux_trajectory_metrics(s["phi_alpha"][m], s["phi_beta"][m])
    out["grid_power_mean"] = float(np.mean(s["p_grid_avg"][m]))
    f_grid = result.scenario["grid"]["f_grid"]
    try:
        out["input_pf"] = displacement_power_factor(s["v_in_a"][m], s["i_in_a"][m], f_grid, fs)
    except AnalysisError as exc:
        out["input_pf"] = None
        out["input_pf_error"] = str(exc)
    try:
        fe = electrical_frequency(s["phi_alpha"][m], s["phi_beta"][m], t)
        out["stator_current"] = spectrum(s["ia_s"][m], fs, fe).summary()
    except AnalysisError as exc:
        out["stator_current"] = None
        out["stator_current_error"] = str(exc)
    out["switching_dtc"] = switching_stats(s["vsi_vec"][m], t).summary()
    if result.applied:
        t_hi = np.inf if t_end is None else t_end
        seq = [(ta, c) for ta, c in result.applied if settle_time <= ta < t_hi]
        if seq:
            ta, names = zip(*seq)
            out["switching_dmc"] = switching_stats(list(names), np.array(ta),
                                                   dt=result.meta["T_s"] / 2).summary()
    return out
