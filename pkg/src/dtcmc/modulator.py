"""Input-current space-vector stage of the matrix converter.

For each selected VSI vector the modulator picks two active configurations
whose output vectors both lie along that vector, using the two input
line-line voltages bounding the current input sector. Their dwell times
follow the zero-free duty cycles, so the period-averaged input current is
aligned with the input voltage (unity displacement factor).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import converter as conv
from .dtc import VSI_PATTERNS, vsi_angle

ROMAN = ("I", "II", "III", "IV", "V", "VI")
SIXTH = math.pi / 3
_SNAP = 1e-9


@dataclass(frozen=True)
class InputSectorState:
    theta_abs: float
    sector: int      # 1..6 (I..VI)
    theta_in: float  # [0, pi/3), from the sector's clockwise edge

    @property
    def roman(self) -> str:
        return ROMAN[self.sector - 1]


@dataclass(frozen=True)
class DutySchedule:
    theta_in: float
    d_gamma: float
    d_delta: float
    d_0: float
    d_gamma_n: float
    d_delta_n: float
    T_gamma: float
    T_delta: float
    T_c: float
    cfg_gamma: conv.DmcConfiguration
    cfg_delta: conv.DmcConfiguration

    def intervals(self):
        """(config, duration) pairs in application order, zero-length ones dropped."""
        out = []
        if self.T_gamma > 0:
            out.append((self.cfg_gamma, self.T_gamma))
        if self.T_delta > 0:
            out.append((self.cfg_delta, self.T_delta))
        return out


def input_sector(v_i) -> InputSectorState:
    """Sector of the input-voltage vector; sector I spans [-30, 30) deg."""
    z = conv.space_vector(v_i)
    if abs(z) <= 1e-12 * max(abs(x) for x in v_i):
        raise ValueError("input sector undefined for a zero voltage vector")
    theta = math.atan2(z.imag, z.real)
    r = (theta + math.pi / 6) / SIXTH
    if abs(r - round(r)) < _SNAP:
        r = float(round(r))
    k = math.floor(r)
    theta_in = (r - k) * SIXTH
    return InputSectorState(theta, k % 6 + 1, theta_in)


def duty_cycles(theta_in: float) -> tuple[float, float, float]:
    if not 0.0 <= theta_in < SIXTH:
        raise ValueError(f"theta_in={theta_in!r} outside [0, pi/3)")
    d_g = math.sin(SIXTH - theta_in)
    d_d = math.sin(theta_in)
    return d_g, d_d, 1.0 - (d_d + d_g)


def normalize_duties(d_gamma: float, d_delta: float) -> tuple[float, float]:
    s = d_gamma + d_delta
    if s <= 0:
        raise ValueError("duty cycles sum to zero")
    d_g = d_gamma / s
    return d_g, 1.0 - d_g


def durations(d_gamma_n: float, d_delta_n: float, T_c: float) -> tuple[float, float]:
    if T_c <= 0:
        raise ValueError("T_c must be > 0")
    # The longer dwell is a product, the shorter one the difference. That
    # difference is exact in floating point (Sterbenz), so the sum is T_c.
    if d_gamma_n >= d_delta_n:
        t_g = d_gamma_n * T_c
        return t_g, T_c - t_g
    t_d = d_delta_n * T_c
    return T_c - t_d, t_d


# ---------------------------------------------------------------------------
# Switching-table derivation

def _edge_pairs(sector: int):
    """Input pairs (p, q) whose current directions are the clockwise and
    counter-clockwise edges of ``sector``."""
    right = ((sector - 1) * 60 - 30) % 360
    left = (right + 60) % 360
    found = {}
    for p in range(3):
        for q in range(3):
            if p != q:
                found[round(math.degrees(conv.pair_direction(p, q))) % 360] = (p, q)
    return found[right], found[left]


def _sector_voltages(sector: int, theta_in: float, vm: float = 1.0):
    theta = (sector - 1) * SIXTH - math.pi / 6 + theta_in
    return tuple(vm * math.cos(theta - 2 * math.pi * k / 3) for k in range(3))


def _derive_active_cell(k: int, sector: int):
    """Brute-force search over the 18 active configurations."""
    target = vsi_angle(k)
    v_mid = _sector_voltages(sector, SIXTH / 2)
    right, left = _edge_pairs(sector)
    picks = {}
    for cfg in conv.CONFIGURATIONS:
        if cfg.kind != "active":
            continue
        z = conv.space_vector(conv.apply_voltages(cfg, v_mid))
        if abs(z) < 1e-12:
            continue
        err = math.remainder(math.atan2(z.imag, z.real) - target, 2 * math.pi)
        if abs(err) > 1e-9:
            continue
        # the "1" legs of V_k source the input current, the "0" legs sink it
        bits = VSI_PATTERNS[k]
        hi = cfg.assignment[bits.index(1)]
        lo = cfg.assignment[bits.index(0)]
        for edge, pair in (("gamma", right), ("delta", left)):
            if (hi, lo) == pair:
                picks[edge] = cfg
    if set(picks) != {"gamma", "delta"}:
        raise RuntimeError(f"no admissible pair for V{k}, sector {sector}")
    return picks["gamma"].name, picks["delta"].name


def _derive_zero_cell(k: int, sector: int):
    # V0: every output on the sinking input of each edge; V7: on the sourcing one
    right, left = _edge_pairs(sector)
    idx = 1 if k == 0 else 0
    return (conv.PHASES[right[idx]] * 3, conv.PHASES[left[idx]] * 3)


def derive_table3() -> dict[tuple[int, int], tuple[str, str]]:
    """Full 8 x 6 table keyed by (vsi_vector, sector)."""
    table = {}
    for k in range(8):
        for s in range(1, 7):
            if k in (0, 7):
                table[k, s] = _derive_zero_cell(k, s)
            else:
                table[k, s] = _derive_active_cell(k, s)
    return table


TABLE_III = derive_table3()

# Printed proposed table, rows V1..V6, V0, V7 and sectors I..VI, as published.
PRINTED_TABLE_III = {
    1: ("abb, acc", "acc, bcc", "bcc, baa", "baa, caa", "caa, cbb", "cbb, abb"),
    2: ("aab, aac", "aac, bbc", "bbc, bba", "bba, cca", "cca, ccb", "ccb, aab"),
    3: ("bab, cac", "cac, cbc", "cbc, aba", "aba, aca", "aca, ccb", "ccb, bab"),
    4: ("baa, caa", "caa, cbb", "cbb, abb", "abb, acc", "acc, bcc", "bcc, baa"),
    5: ("bba, cca", "cca, ccb", "ccb, aab", "aab, aac", "aac, bbc", "bbc, bba"),
    6: ("aba, aca", "aca, cbc", "ccb, bab", "bab, cac", "cac, cbc", "cbc, aba"),
    0: ("bbb, ccc", "ccc, ccc", "ccc, aaa", "aaa, aaa", "aaa, bbb", "bbb, bbb"),
    7: ("aaa, aaa", "aaa, bbb", "bbb, bbb", "bbb, ccc", "ccc, ccc", "ccc, aaa"),
}
TABLE_ROW_ORDER = (1, 2, 3, 4, 5, 6, 0, 7)


def printed_cell(k: int, sector: int) -> tuple[str, str]:
    a, b = PRINTED_TABLE_III[k][sector - 1].split(", ")
    return a, b


@dataclass(frozen=True)
class Mismatch:
    vector: int
    sector: int
    printed: tuple[str, str]
    derived: tuple[str, str]

    def __str__(self):
        return (f"V{self.vector} sector {ROMAN[self.sector - 1]}: printed "
                f"{', '.join(self.printed)} / derived {', '.join(self.derived)}")


def table3_concordance(table=None) -> list[Mismatch]:
    table = table or TABLE_III
    out = []
    for k in TABLE_ROW_ORDER:
        for s in range(1, 7):
            pr = printed_cell(k, s)
            if pr != table[k, s]:
                out.append(Mismatch(k, s, pr, table[k, s]))
    return out


def cyclic_substitution(name: str) -> str:
    """Rename input phases a->b, b->c, c->a."""
    return name.translate(str.maketrans("abc", "bca"))


def commutations(a, b) -> int:
    """Number of output rows whose input connection differs."""
    if a is None:
        return 0
    a, b = str(a), str(b)
    return sum(x != y for x, y in zip(a, b))


def choose_zero(prev, candidates=()) -> conv.DmcConfiguration:
    """Zero configuration with the fewest row changes from ``prev``.

    Ties prefer ``candidates`` in order, then aaa, bbb, ccc.
    """
    zeros = [c for c in conv.CONFIGURATIONS if c.kind == "zero"]
    order = {name: i for i, name in enumerate(candidates)}

    def key(c):
        return commutations(prev, c.name), order.get(c.name, len(order)), c.id

    return min(zeros, key=key)


def table3_lookup(vsi_vector: int, sector: int, prev=None):
    """Configuration pair for ``vsi_vector`` in input ``sector`` (1..6).

    Zero vectors return one zero configuration paired with itself.
    """
    if not 0 <= vsi_vector <= 7 or not 1 <= sector <= 6:
        raise ValueError(f"invalid lookup V{vsi_vector}, sector {sector}")
    g, d = TABLE_III[vsi_vector, sector]
    if vsi_vector in (0, 7):
        z = choose_zero(prev, (g, d))
        return z, z
    return conv.get(g), conv.get(d)


def schedule(v_i, vsi_vector: int, T_c: float, prev=None) -> tuple[DutySchedule, InputSectorState]:
    """Full per-period pipeline: input sector, duties, dwell times, configurations."""
    sec = input_sector(v_i)
    d_g, d_d, d_0 = duty_cycles(sec.theta_in)
    g_n, d_n = normalize_duties(d_g, d_d)
    cfg_g, cfg_d = table3_lookup(vsi_vector, sec.sector, prev)
    if vsi_vector in (0, 7):
        t_g, t_d = T_c, 0.0
    else:
        t_g, t_d = durations(g_n, d_n, T_c)
    return DutySchedule(sec.theta_in, d_g, d_d, d_0, g_n, d_n, t_g, t_d, T_c,
                        cfg_g, cfg_d), sec
