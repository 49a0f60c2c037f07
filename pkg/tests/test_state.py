"""Resummed coefficients, photon statistics, and bright-state construction."""

import csv
import math

import pytest

from brightghz.oracles import coherent_pk, squeezed_pk
from brightghz.state import (
    CUTOFF_CAP,
    BGHZState,
    BrightStateSpec,
    ResummationError,
    build_bghz,
    dump_distribution_csv,
    dump_state_csv,
    photon_distribution,
    project_out_vacuum,
    resummed_coefficient,
)

# Reference distribution at gain 0.8, k = 0..10, for one, two, and three
# beams; entries carry the precision they were published with.
REFERENCE_PK = {
    1: [0.53, 0.34, 0.11, 0.023, 0.0037, 0.00047, 5e-5, 4.6e-6, 3.7e-7, 2.6e-8, 1.7e-9],
    2: [0.55, 0.24, 0.11, 0.048, 0.021, 0.0093, 0.0041, 0.0018, 0.0008, 0.00035, 0.00016],
    3: [0.60, 0.16, 0.074, 0.040, 0.024, 0.016, 0.011, 0.0087, 0.0066, 0.0052, 0.0042],
}


def _last_digit_unit(ref: float) -> float:
    """One unit in the last digit of ref as conventionally printed."""
    text = repr(ref)
    if "e" in text:
        mantissa, exponent = text.split("e")
        decimals = len(mantissa.split(".")[1]) if "." in mantissa else 0
        return 10.0 ** (int(exponent) - decimals)
    decimals = len(text.split(".")[1]) if "." in text else 0
    return 10.0**-decimals


def test_spec_validation():
    with pytest.raises(ValueError):
        BrightStateSpec(n=0, gamma=0.5)
    with pytest.raises(ValueError):
        BrightStateSpec(n=3, gamma=-0.1)
    assert BrightStateSpec(n=3, gamma=0.9).validity_warning
    assert not BrightStateSpec(n=3, gamma=0.89).validity_warning
    assert not BrightStateSpec(n=2, gamma=1.5).validity_warning


def test_coefficient_validation():
    with pytest.raises(ValueError):
        resummed_coefficient(0, 0, 0.5)
    with pytest.raises(ValueError):
        resummed_coefficient(1, -1, 0.5)
    with pytest.raises(ValueError):
        resummed_coefficient(1, 0, -0.5)


def test_coefficient_at_zero_gain():
    assert resummed_coefficient(3, 0, 0.0) == 1.0 + 0j
    assert resummed_coefficient(3, 4, 0.0) == 0.0 + 0j


def test_coefficient_matches_coherent_closed_form():
    # |C_k| = exp(-G^2/2) G^k / k!, phase i^k
    for gamma in (0.3, 0.8):
        for k in range(7):
            got = resummed_coefficient(1, k, gamma)
            mag = math.exp(-gamma * gamma / 2) * gamma**k / math.factorial(k)
            want = (1j) ** (k % 4) * mag
            assert got == pytest.approx(want, abs=1e-12)


def test_coefficient_matches_squeezed_closed_form():
    # |C_k| = sech(G) tanh(G)^k / k!, phase i^k
    for gamma in (0.3, 0.8):
        sech = 1.0 / math.cosh(gamma)
        th = math.tanh(gamma)
        for k in range(7):
            got = resummed_coefficient(2, k, gamma)
            want = (1j) ** (k % 4) * (sech * th**k / math.factorial(k))
            assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("n,oracle", [(1, coherent_pk), (2, squeezed_pk)])
def test_distribution_matches_closed_forms(n, oracle):
    for gamma in [x / 10 for x in range(1, 9)]:
        dist = photon_distribution(BrightStateSpec(n=n, gamma=gamma))
        for k, p in enumerate(dist.probs):
            assert p == pytest.approx(oracle(gamma, k), abs=1e-6)


def test_reference_distribution_all_beams():
    for n, column in REFERENCE_PK.items():
        dist = photon_distribution(BrightStateSpec(n=n, gamma=0.8))
        assert not dist.diverged
        for k, ref in enumerate(column):
            assert abs(dist.probs[k] - ref) <= _last_digit_unit(ref) + 1e-12, (
                f"n={n} k={k}: {dist.probs[k]} vs {ref}"
            )


def test_vacuum_probability_grows_with_beams():
    p0 = [
        photon_distribution(BrightStateSpec(n=n, gamma=0.8)).probs[0]
        for n in (1, 2, 3)
    ]
    assert p0[0] < p0[1] < p0[2]


def test_three_beam_tail_overtakes_two_beam():
    d2 = photon_distribution(BrightStateSpec(n=2, gamma=0.8))
    d3 = photon_distribution(BrightStateSpec(n=3, gamma=0.8))
    for k in range(4, 11):
        assert d3.probs[k] > d2.probs[k]


def test_distribution_invariants():
    for n in (1, 2, 3):
        dist = photon_distribution(BrightStateSpec(n=n, gamma=0.8))
        assert all(0.0 <= p <= 1.0 for p in dist.probs)
        assert sum(dist.probs) + dist.tail_bound == pytest.approx(1.0, abs=1e-9)
        assert dist.cutoff <= CUTOFF_CAP
        # weights decay monotonically past the first excited order
        for k in range(1, dist.cutoff):
            assert dist.probs[k + 1] < dist.probs[k]


def test_poisson_mean():
    dist = photon_distribution(BrightStateSpec(n=1, gamma=0.5))
    assert dist.mean == pytest.approx(0.25, abs=1e-6)


def test_zero_gain_distribution():
    dist = photon_distribution(BrightStateSpec(n=3, gamma=0.0))
    assert dist.probs[0] == 1.0
    assert all(p == 0.0 for p in dist.probs[1:])
    assert dist.tail_bound == 0.0


def test_pinned_cutoff_reports_fat_tail():
    dist = photon_distribution(BrightStateSpec(n=3, gamma=0.8, cutoff=5))
    assert dist.cutoff == 5
    assert dist.tail_bound > 0.01
    assert sum(dist.probs) + dist.tail_bound == pytest.approx(1.0, abs=1e-9)


def test_validity_boundary_warns_and_flags():
    with pytest.warns(RuntimeWarning):
        dist = photon_distribution(BrightStateSpec(n=3, gamma=0.95))
    assert dist.diverged
    assert dist.mean is None


def test_unresolvable_coefficient_raises():
    with pytest.raises(ResummationError):
        resummed_coefficient(3, 25, 1.2)


def test_state_normalization_and_symmetry():
    state = build_bghz(0.5)
    total = sum(abs(a) ** 2 for a in state.amps.values())
    assert total == pytest.approx(1.0, abs=1e-12)
    for (q, m), amp in state.amps.items():
        assert amp == pytest.approx(state.amps[(m, q)], abs=1e-15)


def test_state_phases_follow_total_occupation():
    state = build_bghz(0.5)
    for (q, m), amp in state.amps.items():
        if abs(amp) < 1e-12:
            continue
        # amplitude sits on the i^(q+m) ray
        rotated = amp * (-1j) ** ((q + m) % 4)
        assert abs(rotated.imag) < 1e-12 * abs(amp)
        assert rotated.real > 0


def test_state_small_gain_matches_leading_order():
    gamma = 0.05
    state = build_bghz(gamma)
    # leading amplitudes: 1, i*G, i*G, -G^2 up to O(G^2) corrections
    assert abs(state.amps[(0, 0)]) == pytest.approx(1.0, abs=5 * gamma**2)
    assert abs(state.amps[(1, 0)]) == pytest.approx(gamma, abs=5 * gamma**3)
    assert abs(state.amps[(1, 1)]) == pytest.approx(gamma**2, rel=0.05)


def test_state_zero_gain_is_vacuum():
    state = build_bghz(0.0)
    assert state.amps == {(0, 0): 1.0 + 0j}


def test_state_guard_warns():
    with pytest.warns(RuntimeWarning):
        build_bghz(0.95, cutoff=6)


def test_norm_residual_tracks_truncation():
    assert build_bghz(0.3).norm_residual < 1e-8
    with pytest.warns(RuntimeWarning):
        heavy = build_bghz(0.92, cutoff=20)
    assert heavy.norm_residual > 1e-3


def test_vacuum_projection():
    state = build_bghz(0.4)
    projected = project_out_vacuum(state)
    assert projected.vacuum_projected
    assert (0, 0) not in projected.amps
    total = sum(abs(a) ** 2 for a in projected.amps.values())
    assert total == pytest.approx(1.0, abs=1e-12)
    # relative weights of surviving components are untouched
    ratio = abs(projected.amps[(1, 0)]) / abs(state.amps[(1, 0)])
    for qm, amp in projected.amps.items():
        assert abs(amp) / abs(state.amps[qm]) == pytest.approx(ratio, rel=1e-12)


def test_vacuum_projection_needs_support():
    with pytest.raises(ValueError):
        project_out_vacuum(build_bghz(0.0))


def test_distribution_csv_roundtrip(tmp_path):
    dist = photon_distribution(BrightStateSpec(n=2, gamma=0.6))
    path = tmp_path / "pk.csv"
    dump_distribution_csv(dist, str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "p"]
    assert len(rows) == len(dist.probs) + 1
    for k, row in enumerate(rows[1:]):
        assert int(row[0]) == k
        assert float(row[1]) == pytest.approx(dist.probs[k], rel=1e-15)


def test_state_csv_roundtrip(tmp_path):
    state = build_bghz(0.5, cutoff=3)
    path = tmp_path / "state.csv"
    dump_state_csv(state, str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["q", "m", "re_amp", "im_amp"]
    assert len(rows) == len(state.amps) + 1
    got = {
        (int(q), int(m)): complex(float(re), float(im))
        for q, m, re, im in rows[1:]
    }
    for qm, amp in state.amps.items():
        assert got[qm] == pytest.approx(amp, abs=1e-15)
