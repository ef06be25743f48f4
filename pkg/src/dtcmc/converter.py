"""Ideal 3x3 direct matrix converter.

A configuration connects every output phase (A, B, C) to exactly one input
phase (a, b, c); it is named by the three input letters in output order,
e.g. ``"abb"``. Output voltages follow ``v_o = M v_i`` and input currents
``i_i = M^T i_o`` with the binary switch matrix ``M``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

PHASES = "abc"
A_OP = cmath.exp(2j * math.pi / 3)
_UNITS = (1.0 + 0j, A_OP, A_OP * A_OP)


def space_vector(x) -> complex:
    """Amplitude-invariant space vector (2/3)(x_A + a x_B + a^2 x_C)."""
    return (2.0 / 3.0) * (x[0] + _UNITS[1] * x[1] + _UNITS[2] * x[2])


def pair_direction(p: int, q: int) -> float:
    """Angle (rad, in [0, 2pi)) of the input-current vector drawn when input
    ``p`` sources and ``q`` sinks the same current."""
    return cmath.phase(_UNITS[p] - _UNITS[q]) % (2 * math.pi)


@dataclass(frozen=True)
class Classification:
    kind: str                      # "zero" | "active" | "rotating"
    family: int | None = None      # VSI vector V1/V3/V5 whose axis carries the output
    scale_sign: int = 0            # sign on the canonical line-line voltage
    scale_pair: str | None = None  # "ab" | "bc" | "ca"

    @property
    def positive_direction(self) -> int | None:
        """VSI vector the output points at while the scale voltage is positive."""
        if self.kind != "active":
            return None
        return self.family if self.scale_sign > 0 else (self.family + 2) % 6 + 1

    def __str__(self):
        if self.kind != "active":
            return self.kind
        sign = "" if self.scale_sign > 0 else "-"
        return f"active(V{self.family}, {sign}U_{self.scale_pair})"


@dataclass(frozen=True)
class DmcConfiguration:
    name: str
    id: int = 0

    def __post_init__(self):
        if len(self.name) != 3 or any(ch not in PHASES for ch in self.name):
            raise ValueError(f"invalid configuration {self.name!r}")

    def __str__(self):
        return self.name

    @property
    def assignment(self) -> tuple[int, int, int]:
        return tuple(PHASES.index(ch) for ch in self.name)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.zeros((3, 3), dtype=int)
        for k, j in enumerate(self.assignment):
            m[k, j] = 1
        return m

    @property
    def kind(self) -> str:
        n = len(set(self.name))
        return {1: "zero", 2: "active", 3: "rotating"}[n]


def _active_sort_key(name: str):
    # lone output position, then input-current direction starting at 30 deg
    lone = next(k for k, ch in enumerate(name) if name.count(ch) == 1)
    p = PHASES.index(name[lone])
    q = PHASES.index(name[(lone + 1) % 3])
    ang = math.degrees(pair_direction(p, q))
    return lone, (round(ang, 6) - 30.0) % 360.0


def enumerate_configurations() -> list[DmcConfiguration]:
    """All 27 legal configurations: 3 zero, 18 active, then 6 rotating.

    Ids run 1..27; the ordering reproduces the row numbering of the
    classic 27-state listing.
    """
    names = ["".join(t) for t in itertools.product(PHASES, repeat=3)]
    zero = sorted(n for n in names if len(set(n)) == 1)
    active = sorted((n for n in names if len(set(n)) == 2), key=_active_sort_key)
    rotating = sorted(n for n in names if len(set(n)) == 3)
    return [DmcConfiguration(n, i + 1) for i, n in enumerate(zero + active + rotating)]


CONFIGURATIONS = enumerate_configurations()
BY_NAME = {c.name: c for c in CONFIGURATIONS}


def get(name) -> DmcConfiguration:
    if isinstance(name, DmcConfiguration):
        return name
    try:
        return BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown configuration {name!r}") from None


def apply_voltages(cfg, v_i):
    cfg = get(cfg)
    return tuple(v_i[j] for j in cfg.assignment)


def apply_currents(cfg, i_o):
    cfg = get(cfg)
    i_i = [0.0, 0.0, 0.0]
    for k, j in enumerate(cfg.assignment):
        i_i[j] += i_o[k]
    return tuple(i_i)


def output_space_vector(v_o) -> complex:
    return space_vector(v_o)


def line_voltages(v):
    """(U_AB, U_BC, U_CA) of a three-phase set."""
    return (v[0] - v[1], v[1] - v[2], v[2] - v[0])


_CANONICAL = {(0, 1): (1, "ab"), (1, 2): (1, "bc"), (2, 0): (1, "ca"),
              (1, 0): (-1, "ab"), (2, 1): (-1, "bc"), (0, 2): (-1, "ca")}


def classify(cfg) -> Classification:
    cfg = get(cfg)
    kind = cfg.kind
    if kind != "active":
        return Classification(kind)
    asg = cfg.assignment
    lone = next(k for k in range(3) if asg.count(asg[k]) == 1)
    p, q = asg[lone], asg[(lone + 1) % 3]
    sign, pair = _CANONICAL[(p, q)]
    # lone output A, B, C -> axis of V1, V3, V5
    return Classification("active", 2 * lone + 1, sign, pair)


# ---------------------------------------------------------------------------
# Printed 27-state listing, transcribed cell by cell (including its errata),
# used only as a cross-check for the generated configurations.
# Columns: letters, switch bits (S_aA..S_cC), U_AB, U_BC, U_CA, i_a, i_b, i_c.
# Current symbols name output-phase currents (i_a == i_A, ...).
PRINTED_TABLE_II = [
    ("aaa", "100100100", "0", "0", "0", "0", "0", "0"),
    ("bbb", "010010010", "0", "0", "0", "0", "0", "0"),
    ("ccc", "001001001", "0", "0", "0", "0", "0", "0"),
    ("acc", "100001001", "-U_ca", "0", "U_ca", "i_a", "0", "-i_a"),
    ("bcc", "010001001", "U_bc", "0", "-U_bc", "0", "i_a", "-i_a"),
    ("baa", "010100100", "-U_ab", "0", "U_ab", "-i_a", "i_a", "0"),
    ("caa", "001100100", "U_ca", "0", "-U_ca", "-i_a", "0", "i_a"),
    ("cbb", "001010010", "-U_bc", "0", "U_bc", "0", "-i_a", "i_a"),
    ("abb", "100010010", "U_ab", "0", "-U_ab", "i_a", "-i_a", "0"),
    ("cac", "001100001", "U_ca", "-U_ca", "0", "i_b", "0", "-i_b"),
    ("cbc", "001010001", "-U_bc", "U_bc", "0", "0", "i_b", "-i_b"),
    ("aba", "100010100", "U_ab", "-U_ab", "0", "-i_b", "i_b", "0"),
    ("aca", "100001100", "-U_ca", "U_ca", "0", "-i_b", "0", "i_b"),
    ("bcb", "010001010", "U_bc", "-U_bc", "0", "0", "-i_b", "i_b"),
    ("bab", "010100010", "-U_ab", "U_ab", "0", "i_b", "-i_b", "0"),
    ("cac", "001001100", "U_ca", "-U_ca", "0", "i_c", "0", "-i_c"),
    ("cbc", "001001010", "-U_bc", "U_bc", "0", "i_c", "0", "-i_c"),
    ("aab", "100100010", "0", "U_ab", "-U_ab", "-i_c", "i_c", "0"),
    ("aac", "100100001", "0", "-U_ca", "U_ca", "-i_c", "0", "i_c"),
    ("bbc", "010010001", "0", "U_bc", "-U_bc", "0", "-i_c", "i_c"),
    ("bba", "010010100", "0", "-U_ab", "U_ab", "i_c", "-i_c", "0"),
    ("abc", "100010001", "U_ab", "U_bc", "U_ca", "i_a", "i_b", "i_c"),
    ("acb", "100001010", "-U_ca", "-U_bc", "-U_ab", "i_a", "i_c", "i_b"),
    ("bac", "010100001", "-U_ab", "-U_ca", "-U_bc", "i_b", "i_a", "i_c"),
    ("bca", "010001100", "U_bc", "U_ca", "U_ab", "i_b", "i_c", "i_a"),
    ("cab", "001100010", "U_ca", "U_ab", "U_bc", "i_c", "i_a", "i_b"),
    ("cba", "001010100", "-U_bc", "-U_ab", "-U_ca", "i_c", "i_b", "i_a"),
]


def _eval_symbol(sym: str, env: dict) -> float:
    if sym == "0":
        return 0.0
    if sym.startswith("-"):
        return -env[sym[1:]]
    return env[sym]


def _bits_to_name(bits: str) -> str:
    # bits are grouped per output phase: (S_aA S_bA S_cA)(S_aB ...)(S_aC ...)
    out = []
    for k in range(3):
        grp = bits[3 * k:3 * k + 3]
        if grp.count("1") != 1:
            return "?"
        out.append(PHASES[grp.index("1")])
    return "".join(out)


@dataclass
class TableIIRow:
    row: int
    printed_name: str
    bits_name: str
    generated: str
    letters_ok: bool
    bits_ok: bool
    voltages_ok: bool
    currents_ok: bool

    @property
    def consistent(self) -> bool:
        return self.letters_ok and self.bits_ok and self.voltages_ok and self.currents_ok


def table2_concordance(n_trials: int = 8, seed: int = 0) -> list[TableIIRow]:
    """Compare every generated configuration with the printed listing.

    Each printed row is evaluated symbolically on random port quantities and
    compared against the port equations for the generated configuration with
    the same row number.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for n, (cfg, printed) in enumerate(zip(CONFIGURATIONS, PRINTED_TABLE_II), start=1):
        name, bits, *cells = printed
        v_ok = i_ok = True
        for _ in range(n_trials):
            v_i = rng.normal(size=3) * 100
            i_o = rng.normal(size=3) * 10
            i_o -= i_o.mean()  # star-connected load
            env = {"U_ab": v_i[0] - v_i[1], "U_bc": v_i[1] - v_i[2], "U_ca": v_i[2] - v_i[0],
                   "i_a": i_o[0], "i_b": i_o[1], "i_c": i_o[2]}
            u_pr = [_eval_symbol(s, env) for s in cells[:3]]
            i_pr = [_eval_symbol(s, env) for s in cells[3:]]
            u_gen = line_voltages(apply_voltages(cfg, v_i))
            i_gen = apply_currents(cfg, i_o)
            v_ok &= bool(np.allclose(u_pr, u_gen, atol=1e-9))
            i_ok &= bool(np.allclose(i_pr, i_gen, atol=1e-9))
        bits_name = _bits_to_name(bits)
        rows.append(TableIIRow(n, name, bits_name, cfg.name, name == cfg.name,
                               bits_name == cfg.name, v_ok, i_ok))
    return rows
