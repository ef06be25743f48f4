"""Command-line front end.

    dtcmc run <scenario.json> -o <dir>
    dtcmc compare <scenario.json> -o <dir>
    dtcmc tables -o <dir>

Exit codes: 0 success, 1 parse/validation error, 2 plant divergence.
``tables`` exits 3 when the derived switching table disagrees with the
printed one (informational).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import __version__
from . import converter as conv
from . import modulator as mod
from .analysis import summarize
from .carrier import CarrierConfig
from .dtc import TABLE_I
from .machine import DivergenceError, LoadModel, MachineParams
from .sim import CarrierViolation, ControllerConfig, GridSource, Scenario, run_scenario

CSV_VERSION = 1
CSV_COLUMNS = ("t", "Te", "Te_est", "phi_alpha", "phi_beta", "phi_mag", "ia_s", "ib_s",
               "ic_s", "v_in_a", "i_in_a", "cfg", "vsi_vec", "flux_sector", "input_sector")
CSV_UNITS = ("s", "N*m", "N*m", "Wb", "Wb", "Wb", "A", "A", "A", "V", "A", "-", "-", "-", "-")
STEP_SETTLE = 0.1  # s skipped after each torque step in per-segment metrics

REQUIRED = ("name", "mode", "duration", "load", "controller", "carrier")
_SECTIONS = {
    "machine": MachineParams,
    "load": LoadModel,
    "grid": GridSource,
    "controller": ControllerConfig,
    "carrier": CarrierConfig,
}


class ScenarioError(ValueError):
    pass


def _init_fields(cls) -> set:
    return {f.name for f in dataclasses.fields(cls) if f.init}


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ScenarioError(f"{where}: must be finite")
    return v


def _section(cls, data, where):
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: expected an object")
    allowed = _init_fields(cls)
    extra = sorted(set(data) - allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown field(s) {', '.join(extra)}")
    kw = {}
    for k, v in data.items():
        if k == "torque_steps":
            if not isinstance(v, list) or not all(isinstance(s, list) and len(s) == 2 for s in v):
                raise ScenarioError(f"{where}.torque_steps: expected [[t, T], ...]")
            v = tuple((_number(a, f"{where}.torque_steps"), _number(b, f"{where}.torque_steps"))
                      for a, b in v)
        elif k in ("mode", "enabled", "includes_rs_drop"):
            pass
        else:
            v = _number(v, f"{where}.{k}")
        kw[k] = v
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def scenario_from_dict(d) -> Scenario:
    """Build a validated :class:`Scenario`; errors name the offending field."""
    if not isinstance(d, dict):
        raise ScenarioError("scenario: expected a JSON object")
    missing = [k for k in REQUIRED if k not in d]
    if missing:
        raise ScenarioError(f"scenario: missing field(s) {', '.join(missing)}")
    extra = sorted(set(d) - _init_fields(Scenario))
    if extra:
        raise ScenarioError(f"scenario: unknown field(s) {', '.join(extra)}")
    kw = {}
    for k, v in d.items():
        if k in _SECTIONS:
            kw[k] = _section(_SECTIONS[k], v, k)
        elif k in ("name", "mode"):
            if not isinstance(v, str):
                raise ScenarioError(f"{k}: expected a string")
            kw[k] = v
        elif k == "allow_carrier_violation":
            if not isinstance(v, bool):
                raise ScenarioError(f"{k}: expected true/false")
            kw[k] = v
        elif k == "max_torque_slope" and v is None:
            kw[k] = None
        else:
            kw[k] = _number(v, k)
    if "decimation" in kw:
        if kw["decimation"] != int(kw["decimation"]):
            raise ScenarioError("decimation: must be an integer")
        kw["decimation"] = int(kw["decimation"])
    try:
        return Scenario(**kw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"scenario: {exc}") from None


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return scenario_from_dict(data)


# ---------------------------------------------------------------------------
# writers

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def write_csv(result, path) -> None:
    s = result.series
    with open(path, "w", newline="") as fh:
        fh.write(f"# dtcmc csv v{CSV_VERSION}; units: "
                 + ", ".join(f"{c}[{u}]" for c, u in zip(CSV_COLUMNS, CSV_UNITS)) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(len(result.cfg)):
            row = []
            for c in CSV_COLUMNS:
                if c == "cfg":
                    row.append(result.cfg[i])
                else:
                    v = s[c][i]
                    row.append(_fmt(int(v) if s[c].dtype.kind == "i" else float(v)))
            w.writerow(row)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def segments(scn: Scenario) -> list:
    """Analysis windows, one per torque-command step."""
    steps = scn.controller.torque_steps
    out = []
    for i, (t0, ref) in enumerate(steps):
        t1 = steps[i + 1][0] if i + 1 < len(steps) else scn.duration
        lo = max(scn.settle_time, t0 + STEP_SETTLE) if i else scn.settle_time
        if lo < t1:
            out.append((lo, t1, ref))
    return out


def build_summary(scn: Scenario, result) -> dict:
    segs = []
    for lo, hi, ref in segments(scn):
        segs.append({"T_ref": ref, "metrics": summarize(result, lo, hi)})
    return {
        "tool": "dtcmc",
        "version": __version__,
        "csv_version": CSV_VERSION,
        "scenario": result.scenario,
        "meta": result.meta,
        "metrics": summarize(result, scn.settle_time, None),
        "segments": segs,
    }


def concordance_text() -> str:
    lines = ["Table III concordance (derived vs printed)"]
    mism = mod.table3_concordance()
    for k in mod.TABLE_ROW_ORDER:
        cells = []
        for s in range(1, 7):
            d = ", ".join(mod.TABLE_III[k, s])
            flag = "" if mod.printed_cell(k, s) == mod.TABLE_III[k, s] else " *"
            cells.append(f"{d}{flag}")
        lines.append(f"V{k}: " + " | ".join(cells))
    lines.append(f"mismatches: {len(mism)}")
    lines.extend(f"  {m}" for m in mism)
    lines.append("")
    lines.append("Table II cross-check (rows inconsistent with the port equations)")
    bad = [r for r in conv.table2_concordance() if not r.consistent]
    for r in bad:
        what = [n for n, ok in (("letters", r.letters_ok), ("bits", r.bits_ok),
                                ("voltages", r.voltages_ok), ("currents", r.currents_ok)) if not ok]
        lines.append(f"  row {r.row}: printed {r.printed_name} (bits {r.bits_name}), "
                     f"generated {r.generated}; differs in {', '.join(what)}")
    lines.append(f"inconsistent rows: {len(bad)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def cmd_run(args) -> int:
    scn = load_scenario(args.scenario)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    res = run_scenario(scn)
    write_csv(res, out / f"{scn.name}.csv")
    _dump(build_summary(scn, res), out / f"{scn.name}_summary.json")
    (out / "table3_concordance.txt").write_text(concordance_text())
    m = summarize(res, scn.settle_time, None)
    if "torque" in m:
        print(f"{scn.name}: mean Te = {m['torque']['mean']:.4f} N*m, "
              f"std = {m['torque']['std']:.4f} N*m, mean |phi_s| = {m['flux']['mean_radius']:.4f} Wb")
    print(f"wrote {out}")
    return 0


def _ratio(a, b):
    return None if a is None or b is None or b == 0 else a / b


def cmd_compare(args) -> int:
    scn = load_scenario(args.scenario)
    if not scn.carrier.enabled:
        raise ScenarioError("carrier.enabled: compare requires a carrier config")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for mode in ("fixed", "baseline"):
        s = dataclasses.replace(scn, mode=mode)
        res = run_scenario(s)
        write_csv(res, out / f"{scn.name}_{mode}.csv")
        summaries[mode] = build_summary(s, res)
        _dump(summaries[mode], out / f"{scn.name}_{mode}_summary.json")
    (out / "table3_concordance.txt").write_text(concordance_text())

    def pick(mode, *keys):
        x = summaries[mode]["metrics"]
        for k in keys:
            if x is None or k not in x:
                return None
            x = x[k]
        return x

    delta = {
        "torque_std_ratio": _ratio(pick("fixed", "torque", "std"), pick("baseline", "torque", "std")),
        "switching_cov_ratio": _ratio(pick("fixed", "switching_dmc", "period_cov"),
                                      pick("baseline", "switching_dmc", "period_cov")),
        "switching_cov_ratio_vsi": _ratio(pick("fixed", "switching_dtc", "period_cov"),
                                          pick("baseline", "switching_dtc", "period_cov")),
        "thd_ratio": _ratio(pick("fixed", "stator_current", "thd"),
                            pick("baseline", "stator_current", "thd")),
        "input_pf": {m: pick(m, "input_pf") for m in summaries},
        "mean_frequency": {m: pick(m, "switching_dmc", "mean_frequency") for m in summaries},
        "mean_frequency_vsi": {m: pick(m, "switching_dtc", "mean_frequency") for m in summaries},
        "last_segment_grid_power": {
            m: (summaries[m]["segments"][-1]["metrics"].get("grid_power_mean")
                if summaries[m]["segments"] else None) for m in summaries},
    }
    _dump({"tool": "dtcmc", "version": __version__, "scenario": scn.name, "delta": delta},
          out / f"{scn.name}_compare.json")
    for k, v in delta.items():
        print(f"{k}: {v}")
    print(f"wrote {out}")
    return 0


def cmd_tables(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table1.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi", "tau"] + [f"sector{s}" for s in range(1, 7)])
        for (phi, tau), row in TABLE_I.items():
            w.writerow([phi, tau] + [f"V{v}" for v in row])
    with open(out / "table3.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vector"] + list(mod.ROMAN))
        for k in mod.TABLE_ROW_ORDER:
            w.writerow([f"V{k}"] + [", ".join(mod.TABLE_III[k, s]) for s in range(1, 7)])
    report = concordance_text()
    (out / "table3_concordance.txt").write_text(report)
    print("Table I (phi, tau): sectors 1..6")
    for (phi, tau), row in TABLE_I.items():
        print(f"  ({phi:d}, {tau:+d}): " + " ".join(f"V{v}" for v in row))
    print(report, end="")
    return 3 if mod.table3_concordance() else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dtcmc", description="Fixed-frequency DTC of an induction "
                                "machine fed by a direct matrix converter")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("run", cmd_run, "simulate one scenario"),
                            ("compare", cmd_compare, "fixed-frequency vs baseline paired runs")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("scenario", help="scenario JSON file")
        sp.add_argument("-o", "--output", required=True, help="output directory")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("tables", help="dump switching tables and concordance report")
    sp.add_argument("-o", "--output", required=True, help="output directory")
    sp.set_defaults(func=cmd_tables)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CarrierViolation as exc:
        print(f"error: carrier: {exc.check.describe()}", file=sys.stderr)
        return 1
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
