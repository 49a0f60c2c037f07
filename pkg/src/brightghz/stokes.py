"""Sparse Fock-space measurement engine for polarization observables.

Every observable here is the expectation of a product of one per-party
operator, each diagonal in some polarization basis: the normalized Stokes
operator takes (k_a - k_b)/(k_a + k_b) on the photon counts of the two
measured modes and 0 on the party vacuum, its primed variant takes -1 on
the vacuum instead, and the projector family counts vacuum/non-vacuum.
Measuring in basis 1 (+-45 degrees) or 2 (circular) means rotating the
party's two modes by the basis unitary first; the rotation is passive, so
it acts inside each fixed-total-photon shell.

Bright states are diagonal across the three parties, which collapses the
six-mode sum: the expectation reduces to one quadratic form per photon
shell, with the three per-party operator blocks multiplied entrywise.
That path never materializes a rotated state and stays quadratic in the
cutoff; the explicit rotate-then-sum path remains available for arbitrary
joint states and doubles as a cross-check of the fast kernel.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from brightghz.state import BGHZState, DEFAULT_POLICY, NumericPolicy, build_bghz

__all__ = [
    "MeasurementBasis",
    "JointFockState",
    "CorrelationTensor",
    "basis",
    "joint_from_bghz",
    "rotate_party",
    "stokes_expectation",
    "tensor_t",
    "dump_tensor_csv",
]

_SQ = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Polarization basis: its conventional index and mode-mapping unitary.

    The unitary maps canonical-basis (H/V) mode operators to this basis's
    mode operators, new = U @ old.  Index 0 marks a caller-supplied custom
    unitary.
    """

    index: int
    unitary: np.ndarray


_BASES = {
    # diagonal: difference of +-45 mode counts is adag b + bdag a
    1: MeasurementBasis(1, np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)),
    # circular: difference of R/L mode counts is i(bdag a - adag b)
    2: MeasurementBasis(2, np.array([[_SQ, -1j * _SQ], [_SQ, 1j * _SQ]], dtype=complex)),
    3: MeasurementBasis(3, np.eye(2, dtype=complex)),
}


def basis(index: int) -> MeasurementBasis:
    """The shared basis object for index 1 (+-45), 2 (circular), or 3 (H/V)."""
    try:
        return _BASES[index]
    except KeyError:
        raise ValueError(f"basis index must be 1, 2, or 3, got {index}") from None


@dataclass(frozen=True)
class JointFockState:
    """Finite-support amplitude map over six-mode occupation numbers.

    Keys are (k_a1, k_b1, k_a2, k_b2, k_a3, k_b3); each party's pair is
    expressed in that party's current basis.
    """

    amps: dict[tuple[int, int, int, int, int, int], complex]
    bases: tuple[MeasurementBasis, MeasurementBasis, MeasurementBasis] = field(
        default=(_BASES[3], _BASES[3], _BASES[3])
    )

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps.values()))


def joint_from_bghz(state: BGHZState) -> JointFockState:
    """Expand the three-party diagonal amplitude map to six-mode keys."""
    return JointFockState(
        amps={(q, m, q, m, q, m): a for (q, m), a in state.amps.items()}
    )


def _rotation_amplitudes(u: np.ndarray, q: int, m: int) -> np.ndarray:
    """Amplitudes of |q, m> over the rotated shell, indexed by new a-count.

    (adag)^q (bdag)^m |vac> rewritten in rotated modes is a product of two
    binomials; entry kappa collects the z^kappa coefficient, with the
    factorial weights converting between occupation normalizations.
    """
    k = q + m
    pa = np.array([math.comb(q, i) * u[0, 0] ** i * u[1, 0] ** (q - i) for i in range(q + 1)])
    pb = np.array([math.comb(m, i) * u[0, 1] ** i * u[1, 1] ** (m - i) for i in range(m + 1)])
    coeffs = np.convolve(pa, pb)
    scale = np.array(
        [
            math.sqrt(math.factorial(kappa) * math.factorial(k - kappa))
            for kappa in range(k + 1)
        ]
    )
    return coeffs * scale / math.sqrt(math.factorial(q) * math.factorial(m))


def _as_basis(target) -> MeasurementBasis:
    if isinstance(target, MeasurementBasis):
        return target
    if isinstance(target, int):
        return basis(target)
    u = np.asarray(target, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"custom basis needs a 2x2 unitary, got shape {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12):
        raise ValueError("custom basis matrix is not unitary")
    return MeasurementBasis(0, u)


def rotate_party(state: JointFockState, party: int, target) -> JointFockState:
    """Re-express one party's occupations in another basis.

    party is 1, 2, or 3; target is a basis index, a MeasurementBasis, or a
    raw 2x2 unitary.  The transformation is passive, so each party shell
    (fixed photon total) maps onto itself and the norm is preserved.
    """
    if party not in (1, 2, 3):
        raise ValueError(f"party must be 1, 2, or 3, got {party}")
    tb = _as_basis(target)
    slot = party - 1
    rel = tb.unitary @ state.bases[slot].unitary.conj().T
    new_bases = list(state.bases)
    new_bases[slot] = tb
    if np.allclose(rel, np.eye(2), atol=1e-15):
        return JointFockState(amps=dict(state.amps), bases=tuple(new_bases))
    out: dict[tuple[int, int, int, int, int, int], complex] = {}
    for key, amp in state.amps.items():
        q, m = key[2 * slot], key[2 * slot + 1]
        column = _rotation_amplitudes(rel, q, m)
        for kappa, c in enumerate(column):
            if c == 0:
                continue
            new_key = list(key)
            new_key[2 * slot] = kappa
            new_key[2 * slot + 1] = q + m - kappa
            new_key = tuple(new_key)
            out[new_key] = out.get(new_key, 0j) + amp * complex(c)
    return JointFockState(amps=out, bases=tuple(new_bases))


# selector -> (measurement basis index, diagonal functional id)
_SELECTORS = {
    "S0": (3, "Pi"),
    "S1": (1, "S"),
    "S2": (2, "S"),
    "S3": (3, "S"),
    "S1p": (1, "Sp"),
    "S2p": (2, "Sp"),
    "S3p": (3, "Sp"),
    "Pi": (3, "Pi"),
    "Pvac": (3, "Pvac"),
    "I": (3, "I"),
}


def _count_value(kind: str, ka: int, kb: int) -> float:
    total = ka + kb
    if kind == "S":
        return (ka - kb) / total if total else 0.0
    if kind == "Sp":
        return (ka - kb) / total if total else -1.0
    if kind == "Pi":
        return 1.0 if total else 0.0
    if kind == "Pvac":
        return 0.0 if total else 1.0
    return 1.0  # identity


def _diagonal_values(kind: str, k: int) -> np.ndarray:
    return np.array([_count_value(kind, kappa, k - kappa) for kappa in range(k + 1)])


_SHELL_ROTATIONS: dict[tuple[int, int], np.ndarray] = {}
_SHELL_BLOCKS: dict[tuple[str, int], np.ndarray] = {}


def _shell_rotation(basis_index: int, k: int) -> np.ndarray:
    """Matrix A with A[kappa, q] = <kappa photons in rotated a | q, k-q>."""
    key = (basis_index, k)
    got = _SHELL_ROTATIONS.get(key)
    if got is None:
        u = _BASES[basis_index].unitary
        got = np.column_stack(
            [_rotation_amplitudes(u, q, k - q) for q in range(k + 1)]
        )
        _SHELL_ROTATIONS[key] = got
    return got


def _shell_block(selector: str, k: int) -> np.ndarray:
    """Shell-k matrix of the per-party operator in the canonical basis."""
    key = (selector, k)
    got = _SHELL_BLOCKS.get(key)
    if got is None:
        basis_index, kind = _SELECTORS[selector]
        values = _diagonal_values(kind, k)
        if basis_index == 3:
            got = np.diag(values).astype(complex)
        else:
            rot = _shell_rotation(basis_index, k)
            got = rot.conj().T @ (values[:, None] * rot)
        _SHELL_BLOCKS[key] = got
    return got


def _validate_selectors(ops) -> tuple[str, str, str]:
    ops = tuple(ops)
    if len(ops) != 3:
        raise ValueError(f"need one selector per party, got {len(ops)}")
    for op in ops:
        if op not in _SELECTORS:
            raise ValueError(
                f"unknown selector {op!r}; valid: {sorted(_SELECTORS)}"
            )
    return ops


def _bghz_expectation(state: BGHZState, ops: tuple[str, str, str]) -> float:
    total = 0.0
    shells: dict[int, list[tuple[int, complex]]] = {}
    for (q, m), amp in state.amps.items():
        shells.setdefault(q + m, []).append((q, amp))
    for k, members in shells.items():
        vec = np.zeros(k + 1, dtype=complex)
        for q, amp in members:
            vec[q] = amp
        block = _shell_block(ops[0], k).copy()
        for op in ops[1:]:
            block = block * _shell_block(op, k)
        total += float(np.real(np.vdot(vec, block @ vec)))
    return total


def _joint_expectation(state: JointFockState, ops: tuple[str, str, str]) -> float:
    norm = state.norm_sq()
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"state norm^2 is {norm}, expected 1")
    work = state
    for party, op in enumerate(ops, start=1):
        work = rotate_party(work, party, _SELECTORS[op][0])
    kinds = [_SELECTORS[op][1] for op in ops]
    total = 0.0
    for key, amp in work.amps.items():
        weight = abs(amp) ** 2
        if weight == 0:
            continue
        value = weight
        for party in range(3):
            value *= _count_value(kinds[party], key[2 * party], key[2 * party + 1])
        total += value
    return total


def stokes_expectation(state, ops) -> float:
    """Expectation of a product of one per-party polarization observable.

    ops is a 3-sequence of selectors: S1/S2/S3 (normalized Stokes in the
    +-45, circular, H/V bases), S1p/S2p/S3p (vacuum counted as -1), S0 or
    Pi (non-vacuum projector), Pvac (vacuum projector), I (identity, for
    marginals).  Bright states use the diagonal shell kernel; joint states
    are rotated explicitly.
    """
    ops = _validate_selectors(ops)
    if isinstance(state, BGHZState):
        return _bghz_expectation(state, ops)
    if isinstance(state, JointFockState):
        return _joint_expectation(state, ops)
    raise TypeError(f"unsupported state type {type(state).__name__}")


@dataclass(frozen=True)
class CorrelationTensor:
    """Triple Stokes correlations T_ijk of a bright state.

    Only four elements survive: T_111 = t and T_122 = T_212 = T_221 = -t.
    cross_check records |t - <S1 S1 S1>|, the closed form against the
    generic shell evaluation of T_111 on the same truncated state.
    """

    gamma: float
    t: float
    elements: dict[tuple[int, int, int], float]
    cross_check: float


def _closed_form_t(state: BGHZState) -> float:
    """Double sum for t over the retained amplitudes.

    Per photon shell k the two terms hop one photon between the a and b
    modes in every party at once; the (x(y+1))^(3/2) weights are the
    three-party ladder factors and k^3 the Stokes normalization.
    """
    amps = state.amps
    total = 0.0
    kmax = 2 * state.cutoff
    for k in range(1, kmax + 1):
        for m in range(0, k + 1):
            a = amps.get((m, k - m))
            if a is None or a == 0:
                continue
            left = amps.get((k - m - 1, m + 1))
            if left is not None:
                w = ((k - m) * (m + 1)) ** 1.5 / k**3
                total += (left.conjugate() * a * w).real
            right = amps.get((m - 1, k - m + 1))
            if right is not None:
                w = (m * (k - m + 1)) ** 1.5 / k**3
                total += (right.conjugate() * a * w).real
    return total


def tensor_t(
    gamma: float,
    cutoff: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
    state: BGHZState | None = None,
) -> CorrelationTensor:
    """Correlation tensor of the bright state at one gain.

    Builds the state (or reuses a provided one), evaluates the closed-form
    double sum for t, fills the GHZ sign pattern, and cross-checks t
    against the generic evaluation of <S1 S1 S1>.
    """
    if state is None:
        state = build_bghz(gamma, cutoff=cutoff, policy=policy)
    t = _closed_form_t(state)
    generic = stokes_expectation(state, ("S1", "S1", "S1"))
    elements = {
        (i, j, k): 0.0
        for i in (1, 2, 3)
        for j in (1, 2, 3)
        for k in (1, 2, 3)
    }
    elements[(1, 1, 1)] = t
    elements[(1, 2, 2)] = -t
    elements[(2, 1, 2)] = -t
    elements[(2, 2, 1)] = -t
    return CorrelationTensor(
        gamma=state.gamma,
        t=t,
        elements=elements,
        cross_check=abs(t - generic),
    )


def dump_tensor_csv(tensors, path: str) -> None:
    """Write tensors as CSV rows gamma,i,j,k,value (27 rows per tensor)."""
    if isinstance(tensors, CorrelationTensor):
        tensors = [tensors]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gamma", "i", "j", "k", "value"])
        for tensor in tensors:
            for (i, j, k) in sorted(tensor.elements):
                writer.writerow(
                    [
                        f"{tensor.gamma:.17g}",
                        i,
                        j,
                        k,
                        f"{tensor.elements[(i, j, k)]:.17g}",
                    ]
                )
