import math

import pytest
from hypothesis import given, strategies as st

from dtcmc.dtc import (TABLE_I, VSI_PATTERNS, DtcCommand, EstimatorState, HysteresisState,
                       flux_comparator, flux_sector, table1_lookup, torque_comparator,
                       update_flux_estimate, vsi_angle)


def _at(deg, r=1.0):
    return (r * math.cos(math.radians(deg)), r * math.sin(math.radians(deg)))


def test_estimator_idle():
    prev = EstimatorState(0.4, -0.2, 1.0)
    out = update_flux_estimate(prev, (0.0, 0.0), (0.0, 0.0), 4.85, 50e-6)
    assert (out.phi_est_alpha, out.phi_est_beta) == (0.4, -0.2)


def test_estimator_pure_integration():
    prev = EstimatorState(includes_rs_drop=False)
    out = update_flux_estimate(prev, (100.0, 0.0), (3.0, 1.0), 4.85, 50e-6)
    assert out.phi_est_alpha == pytest.approx(5e-3, abs=1e-15)
    assert out.phi_est_beta == 0.0


def test_estimator_rs_drop_and_torque():
    prev = EstimatorState(1.0, 0.0)
    out = update_flux_estimate(prev, (10.0, 0.0), (2.0, 4.0), 5.0, 1e-3)
    assert out.phi_est_alpha == pytest.approx(1.0 + (10.0 - 10.0) * 1e-3)
    assert out.phi_est_beta == pytest.approx(-20.0 * 1e-3)
    assert out.Te_est == pytest.approx(1.5 * (out.phi_est_alpha * 4.0 - out.phi_est_beta * 2.0))


def test_estimator_rejects_bad_dt():
    with pytest.raises(ValueError):
        update_flux_estimate(EstimatorState(), (0, 0), (0, 0), 1.0, 0.0)


@pytest.mark.parametrize("deg,sector", [(0, 1), (100, 3), (-30, 6), (30, 1), (29.9, 1),
                                        (30.1, 2), (90, 2), (180, 4), (-90, 5), (-150, 4)])
def test_flux_sector_examples(deg, sector):
    assert flux_sector(_at(deg)) == sector


def test_flux_sector_zero_vector():
    with pytest.raises(ValueError):
        flux_sector((0.0, 0.0))


def test_flux_sector_six_equal_cells():
    counts = [0] * 6
    for k in range(3600):
        counts[flux_sector(_at(k / 10.0 + 0.05)) - 1] += 1
    assert counts == [600] * 6


@given(st.floats(-179.9, 179.9), st.floats(1e-3, 10.0))
def test_flux_sector_scale_invariant(deg, r):
    assert flux_sector(_at(deg, r)) == flux_sector(_at(deg))


def test_flux_comparator_examples():
    b = 0.01
    assert flux_comparator(2 * b, 0, b) == 1
    assert flux_comparator(-2 * b, 1, b) == 0
    assert flux_comparator(0.0, 1, b) == 1
    assert flux_comparator(0.0, 0, b) == 0


def test_torque_comparator_examples():
    b = 0.25
    assert torque_comparator(2 * b, 0, b) == 1
    assert torque_comparator(-0.1 * b, 1, b) == 0
    assert torque_comparator(-2 * b, 0, b) == -1
    assert torque_comparator(0.1 * b, -1, b) == 0
    assert torque_comparator(0.1 * b, 1, b) == 1
    assert torque_comparator(-0.1 * b, -1, b) == -1
    assert torque_comparator(0.5 * b, 0, b) == 0


@pytest.mark.parametrize("prev", [-1, 0, 1])
def test_torque_comparator_monotone(prev):
    errs = [x / 100 for x in range(-100, 101)]
    out = [torque_comparator(e, prev, 0.3) for e in errs]
    assert all(a <= b for a, b in zip(out, out[1:]))


@pytest.mark.parametrize("prev", [0, 1])
def test_flux_comparator_monotone(prev):
    errs = [x / 1000 for x in range(-100, 101)]
    out = [flux_comparator(e, prev, 0.02) for e in errs]
    assert all(a <= b for a, b in zip(out, out[1:]))


def test_comparators_reject_bad_bands():
    with pytest.raises(ValueError):
        flux_comparator(0.0, 1, 0.0)
    with pytest.raises(ValueError):
        torque_comparator(0.0, 0, -1.0)
    with pytest.raises(ValueError):
        HysteresisState(B_phi=0.0)


def test_table1_examples():
    assert table1_lookup(DtcCommand(1, 1, 1)) == 2
    assert table1_lookup(DtcCommand(1, -1, 4)) == 3
    assert table1_lookup(DtcCommand(0, 0, 1)) == 0
    assert [table1_lookup(DtcCommand(1, 1, s)) for s in range(1, 7)] == [2, 3, 4, 5, 6, 1]


def test_table1_rotational_symmetry():
    for (phi, tau), row in TABLE_I.items():
        if tau == 0:
            continue
        for s in range(6):
            assert row[(s + 1) % 6] == row[s] % 6 + 1


def test_table1_zero_rows():
    for (phi, tau), row in TABLE_I.items():
        if tau == 0:
            assert set(row) <= {0, 7}
            assert all(a != b for a, b in zip(row, row[1:]))
        else:
            assert not set(row) & {0, 7}


def test_command_validation():
    for bad in [(2, 0, 1), (1, 2, 1), (1, 0, 0), (1, 0, 7)]:
        with pytest.raises(ValueError):
            DtcCommand(*bad)


def test_vsi_patterns_match_directions():
    a = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    for k in range(1, 7):
        sa, sb, sc = VSI_PATTERNS[k]
        z = (2 / 3) * (sa + a * sb + a * a * sc)
        assert math.remainder(math.atan2(z.imag, z.real) - vsi_angle(k), 2 * math.pi) == \
            pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        vsi_angle(0)
