"""Basis rotations, Stokes expectations, and the correlation tensor."""

import csv
import math

import numpy as np
import pytest

from brightghz.oracles import DenseTruncatedState, dense_expectation
from brightghz.state import BGHZState, build_bghz
from brightghz.stokes import (
    CorrelationTensor,
    JointFockState,
    MeasurementBasis,
    basis,
    dump_tensor_csv,
    joint_from_bghz,
    rotate_party,
    stokes_expectation,
    tensor_t,
)

SQ2 = math.sqrt(2.0)

MERMIN_TRIPLES = [
    ("S1", "S1", "S1"),
    ("S1", "S2", "S2"),
    ("S2", "S1", "S2"),
    ("S2", "S2", "S1"),
]


@pytest.fixture(scope="module")
def ghz():
    """Ideal single-triple GHZ superposition on the diagonal support."""
    return BGHZState(
        gamma=0.0,
        cutoff=1,
        amps={(1, 0): 1 / SQ2, (0, 1): 1 / SQ2},
        norm_residual=0.0,
    )


@pytest.fixture(scope="module")
def vacuum():
    return BGHZState(gamma=0.0, cutoff=0, amps={(0, 0): 1.0}, norm_residual=0.0)


@pytest.fixture(scope="module")
def bright_small():
    return build_bghz(0.3, cutoff=4)


def test_basis_unitarity_and_unbiasedness():
    for index in (1, 2, 3):
        u = basis(index).unitary
        assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-14)
    # any two different bases are mutually unbiased
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            if a == b:
                continue
            overlap = basis(a).unitary @ basis(b).unitary.conj().T
            assert np.allclose(np.abs(overlap) ** 2, 0.5, atol=1e-14)


def test_basis_accessor_validates():
    with pytest.raises(ValueError):
        basis(0)
    with pytest.raises(ValueError):
        basis(4)
    assert basis(2) is basis(2)


def test_single_photon_rotation_amplitudes():
    state = JointFockState(amps={(1, 0, 0, 0, 0, 0): 1.0 + 0j})
    rotated = rotate_party(state, 1, 1)
    amps = rotated.amps
    assert amps[(1, 0, 0, 0, 0, 0)] == pytest.approx(1 / SQ2)
    assert amps[(0, 1, 0, 0, 0, 0)] == pytest.approx(1 / SQ2)


def test_two_photon_rotation_amplitudes():
    state = JointFockState(amps={(0, 0, 2, 0, 0, 0): 1.0 + 0j})
    rotated = rotate_party(state, 2, 1)
    amps = rotated.amps
    assert abs(amps[(0, 0, 2, 0, 0, 0)]) == pytest.approx(0.5)
    assert abs(amps[(0, 0, 1, 1, 0, 0)]) == pytest.approx(1 / SQ2)
    assert abs(amps[(0, 0, 0, 2, 0, 0)]) == pytest.approx(0.5)


def test_rotation_preserves_norm_and_shells():
    state = JointFockState(
        amps={
            (1, 0, 2, 1, 0, 0): 0.6 + 0j,
            (0, 1, 1, 2, 0, 0): 0.8j,
        }
    )
    for party, target in ((1, 1), (2, 2), (3, 1)):
        state = rotate_party(state, party, target)
    assert state.norm_sq() == pytest.approx(1.0, abs=1e-12)
    # per-party photon totals are conserved by every passive rotation
    for key in state.amps:
        totals = (key[0] + key[1], key[2] + key[3], key[4] + key[5])
        assert totals == (1, 3, 0)


def test_rotation_round_trip_is_identity():
    state = JointFockState(
        amps={(2, 1, 1, 0, 0, 1): 0.5 + 0.5j, (1, 2, 0, 1, 1, 0): 0.5 - 0.5j}
    )
    there = rotate_party(state, 1, 2)
    back = rotate_party(there, 1, 3)
    for key in set(state.amps) | set(back.amps):
        assert back.amps.get(key, 0j) == pytest.approx(
            state.amps.get(key, 0j), abs=1e-12
        )


def test_rotation_validates_input():
    state = JointFockState(amps={(0, 0, 0, 0, 0, 0): 1.0 + 0j})
    with pytest.raises(ValueError):
        rotate_party(state, 0, 1)
    with pytest.raises(ValueError):
        rotate_party(state, 1, np.eye(3))
    with pytest.raises(ValueError):
        rotate_party(state, 1, np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_expectations_invariant_under_passive_rotation():
    """Re-expressing the state in other bases must not move any observable."""
    state = JointFockState(
        amps={(1, 0, 2, 0, 1, 1): 0.6 + 0j, (0, 1, 1, 1, 2, 0): 0.8j}
    )
    rng = np.random.default_rng(11)
    reference = {
        ops: stokes_expectation(state, ops)
        for ops in MERMIN_TRIPLES + [("S3", "Pi", "S0"), ("S1p", "S2p", "S3p")]
    }
    for party in (1, 2, 3):
        theta, phi = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        u = np.array([[c, -s * np.exp(-1j * phi)], [s * np.exp(1j * phi), c]])
        state = rotate_party(state, party, u)
    for ops, want in reference.items():
        assert stokes_expectation(state, ops) == pytest.approx(want, abs=1e-12)


def test_ghz_correlations(ghz):
    assert stokes_expectation(ghz, ("S1", "S1", "S1")) == pytest.approx(1.0)
    assert stokes_expectation(ghz, ("S2", "S2", "S2")) == pytest.approx(0.0, abs=1e-12)
    for ops in MERMIN_TRIPLES[1:]:
        assert stokes_expectation(ghz, ops) == pytest.approx(-1.0)
    assert stokes_expectation(ghz, ("S3", "S3", "S3")) == pytest.approx(0.0, abs=1e-12)
    assert stokes_expectation(ghz, ("Pi", "Pi", "Pi")) == pytest.approx(1.0)
    # Mermin combination reaches the GHZ maximum of 4
    total = stokes_expectation(ghz, MERMIN_TRIPLES[0]) - sum(
        stokes_expectation(ghz, ops) for ops in MERMIN_TRIPLES[1:]
    )
    assert abs(total) == pytest.approx(4.0)


def test_vacuum_values(vacuum):
    assert stokes_expectation(vacuum, ("S1p", "S2p", "S3p")) == pytest.approx(-1.0)
    assert stokes_expectation(vacuum, ("S1", "S1", "S1")) == 0.0
    assert stokes_expectation(vacuum, ("Pvac", "Pvac", "Pvac")) == pytest.approx(1.0)
    assert stokes_expectation(vacuum, ("S0", "S0", "S0")) == 0.0


def test_selector_validation(ghz):
    with pytest.raises(ValueError):
        stokes_expectation(ghz, ("S1", "S1"))
    with pytest.raises(ValueError):
        stokes_expectation(ghz, ("S1", "S4", "S1"))
    with pytest.raises(TypeError):
        stokes_expectation({(0, 0): 1.0}, ("S1", "S1", "S1"))


def test_joint_norm_guard():
    lopsided = JointFockState(amps={(1, 0, 1, 0, 1, 0): 0.5 + 0j})
    with pytest.raises(ValueError):
        stokes_expectation(lopsided, ("S1", "S1", "S1"))


def test_fast_path_matches_joint_path(bright_small):
    joint = joint_from_bghz(bright_small)
    triples = MERMIN_TRIPLES + [
        ("S1p", "S2p", "S2p"),
        ("S3", "S3", "S3"),
        ("Pi", "Pi", "Pi"),
        ("Pvac", "I", "S0"),
    ]
    for ops in triples:
        fast = stokes_expectation(bright_small, ops)
        generic = stokes_expectation(joint, ops)
        assert fast == pytest.approx(generic, abs=1e-10)


def test_nonvacuum_projector_complements_vacuum(bright_small):
    p_vac = abs(bright_small.amps[(0, 0)]) ** 2
    assert stokes_expectation(bright_small, ("Pi", "Pi", "Pi")) == pytest.approx(
        1.0 - p_vac, abs=1e-12
    )


@pytest.mark.parametrize("gamma", [0.1, 0.4, 0.8])
def test_tensor_closed_form_matches_generic(gamma):
    tensor = tensor_t(gamma)
    assert tensor.cross_check <= 1e-8
    assert tensor.elements[(1, 1, 1)] == tensor.t
    for index in ((1, 2, 2), (2, 1, 2), (2, 2, 1)):
        assert tensor.elements[index] == -tensor.t
        # the sign pattern is real, not just bookkeeping
        ops = tuple(f"S{i}" for i in index)
        state = build_bghz(gamma)
        assert stokes_expectation(state, ops) == pytest.approx(-tensor.t, abs=1e-8)


def test_tensor_limits():
    assert tensor_t(0.0).t == pytest.approx(0.0, abs=1e-12)
    # small-gain leading order grows from zero
    small = tensor_t(0.05).t
    assert 0.0 < small < 0.02


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_structural_zeros(gamma):
    """Everything with an S3 leg, and the all-S2 triple, vanishes."""
    state = build_bghz(gamma)
    triples = [
        (i, j, k)
        for i in (1, 2, 3)
        for j in (1, 2, 3)
        for k in (1, 2, 3)
        if 3 in (i, j, k)
    ] + [(2, 2, 2)]
    for index in triples:
        ops = tuple(f"S{i}" for i in index)
        assert abs(stokes_expectation(state, ops)) < 1e-10


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_party_stokes_vector_in_bloch_ball(gamma):
    state = build_bghz(gamma)
    for party in range(3):
        components = []
        for j in (1, 2, 3):
            ops = ["I", "I", "I"]
            ops[party] = f"S{j}"
            components.append(stokes_expectation(state, tuple(ops)))
        assert sum(c * c for c in components) <= 1.0 + 1e-10


@pytest.mark.parametrize("gamma", [0.5, 0.8])
def test_sparse_matches_dense_oracle(gamma):
    state = build_bghz(gamma, cutoff=2)
    dense = DenseTruncatedState.from_amplitudes(state.amps)
    triples = MERMIN_TRIPLES + [
        ("S1p", "S1p", "S1p"),
        ("S2p", "S2p", "S1p"),
        ("S3", "S3", "S3"),
        ("Pi", "Pi", "Pi"),
    ]
    for ops in triples:
        sparse = stokes_expectation(state, ops)
        brute = dense_expectation(dense, ops)
        assert sparse == pytest.approx(brute, abs=1e-10)


def test_tensor_csv_roundtrip(tmp_path):
    tensor = tensor_t(0.4)
    path = tmp_path / "tensor.csv"
    dump_tensor_csv(tensor, str(path))
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 27
    values = {
        (int(r["i"]), int(r["j"]), int(r["k"])): float(r["value"]) for r in rows
    }
    assert values[(1, 1, 1)] == pytest.approx(tensor.t)
    assert values[(1, 2, 2)] == pytest.approx(-tensor.t)
    assert values[(3, 3, 3)] == 0.0
    assert all(float(r["gamma"]) == 0.4 for r in rows)
