"""Bell-type tests and entanglement witnesses for bright GHZ states.

The Mermin-like combination takes the four setting triples 111, 122, 212,
221 over bases 1 (+-45) and 2 (circular) with primed Stokes operators, so
no-photon events answer -1 instead of dropping out; any local realistic
model keeps the combination at or below 2.  On the diagonal bright states
the combination reduces to |4t + 2 p_vac| with t the only independent
tensor element, which this module cross-checks against the generic
evaluation at every point.

Normalization convention for the Bell test: the retained amplitude box
carries squared mass 1 - norm_residual of the untruncated state, and the
Mermin expectations are reported as partial sums of that state's
expectation series, i.e. the unit-state evaluation scaled back by the
retained mass.  Renormalizing the box instead would inflate correlations
and vacuum weight together and bias the test toward violation; near the
threshold the inflation exceeds the distance to the classical bound, so
the convention moves the detected crossing by more than the bisection
tolerance.  The witnesses are a statement about whatever state is handed
to them, so they stay on the unit-norm truncated state, where their
closed-form identities are exact.

Detector loss is binomial thinning at efficiency eta on all six
detectors.  The lossy per-party response on counts (k_a, k_b) averages
(kappa_a - kappa_b)/(kappa_a + kappa_b) over the thinned counts and
assigns -1 to the all-lost outcome; that is a congruence of the lossless
response table by the thinning matrix, computed here as one dense matrix
product per shell rather than term-by-term rational sums, which keeps
threshold sweeps over a gain grid at interactive speed for an error far
below the 1e-3 bisection tolerance.

Both witnesses flag entanglement strictly below zero: w1 transplants the
three-qubit GHZ projector witness to normalized Stokes operators, and w2
adds the non-vacuum projector to the Mermin operator, lowering the
separable bound to half the local realistic one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from brightghz.state import (
    DEFAULT_POLICY,
    BGHZState,
    NumericPolicy,
    build_bghz,
    project_out_vacuum,
)
from brightghz.stokes import _shell_rotation, stokes_expectation, tensor_t

__all__ = [
    "LossModel",
    "SweepResult",
    "MerminEvaluation",
    "WitnessEvaluation",
    "evaluate_mermin",
    "mermin_lhs",
    "gamma_threshold",
    "per_party_loss_factor",
    "lossy_mermin_lhs",
    "eta_threshold",
    "witness_w1",
    "evaluate_w2",
    "witness_w2",
    "find_crossing",
    "mermin_sweep",
    "eta_threshold_sweep",
    "witness_sweep",
    "dump_sweep_csv",
]

# setting triples of the Mermin combination and their signs
_SETTINGS = ((1, 1, 1), (1, 2, 2), (2, 1, 2), (2, 2, 1))
_SIGNS = (1.0, -1.0, -1.0, -1.0)

CLASSICAL_BOUND = 2.0


@dataclass(frozen=True)
class LossModel:
    """Uniform detector efficiency for all six detectors."""

    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class SweepResult:
    """One observable evaluated over a strictly increasing grid.

    threshold, when not None, is a bisected crossing point bracketed by a
    sign change of (value - bound) between two grid neighbours.
    diagnostics carries one dict per point.
    """

    axis: tuple[float, ...]
    values: tuple[float, ...]
    threshold: float | None
    diagnostics: tuple[dict, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.axis, self.axis[1:])):
            raise ValueError("axis must be strictly increasing")
        if not len(self.axis) == len(self.values) == len(self.diagnostics):
            raise ValueError("axis, values, diagnostics must align")


@dataclass(frozen=True)
class MerminEvaluation:
    """Generic four-term evaluation next to its diagonal-state reduction."""

    gamma: float
    lhs: float
    reduced: float
    agreement: float


@dataclass(frozen=True)
class WitnessEvaluation:
    gamma: float
    value: float
    closed_form: float
    agreement: float


def _prepare(gamma, cutoff, policy, state):
    if state is None:
        state = build_bghz(gamma, cutoff=cutoff, policy=policy)
    return state


def _vacuum_probability(state: BGHZState) -> float:
    amp = state.amps.get((0, 0))
    return float(abs(amp) ** 2) if amp is not None else 0.0


def evaluate_mermin(
    gamma: float,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    state: BGHZState | None = None,
) -> MerminEvaluation:
    """Mermin-like LHS with primed operators, plus the reduced form.

    The generic evaluation sums the four setting triples; the reduced form
    |4t + 2 p_vac| follows from <S'S'S'> = T - p_vac on states whose
    support is exchange-diagonal.  agreement records their difference.
    Both are partial sums of the untruncated state's expectations (see the
    module docstring), so every term is scaled by the retained mass.
    """
    state = _prepare(gamma, cutoff, policy, state)
    scale = 1.0 - state.norm_residual
    total = 0.0
    for sign, (i, j, k) in zip(_SIGNS, _SETTINGS):
        total += sign * stokes_expectation(state, (f"S{i}p", f"S{j}p", f"S{k}p"))
    lhs = scale * abs(total)
    tensor = tensor_t(state.gamma, policy=policy, state=state)
    reduced = scale * abs(4.0 * tensor.t + 2.0 * _vacuum_probability(state))
    return MerminEvaluation(
        gamma=state.gamma, lhs=lhs, reduced=reduced, agreement=abs(lhs - reduced)
    )


def mermin_lhs(
    gamma: float,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    state: BGHZState | None = None,
) -> float:
    return evaluate_mermin(gamma, policy, cutoff, state).lhs


def find_crossing(fn, level, lo, hi, tol=1e-3):
    """Bisect fn(x) = level on [lo, hi]; fn(lo) and fn(hi) must straddle it.

    Returns the midpoint of the final bracket, accurate to tol in x.
    """
    flo = fn(lo) - level
    fhi = fn(hi) - level
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(
            f"no crossing: endpoints give {flo + level} and {fhi + level}, "
            f"both on the same side of {level}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid) - level
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gamma_threshold(
    policy: NumericPolicy = DEFAULT_POLICY,
    gamma_min: float = 0.05,
    gamma_max: float = 0.9,
    tol: float = 1e-3,
) -> float:
    """Gain at which the Mermin violation dies, bisected to tol.

    Requires the LHS to sit above 2 at gamma_min and at or below 2 at
    gamma_max; raises "no crossing" otherwise (e.g. on a range that ends
    while the inequality is still violated).
    """
    return find_crossing(
        lambda g: mermin_lhs(g, policy), CLASSICAL_BOUND, gamma_min, gamma_max, tol
    )


# largest thinning-response table built so far, per efficiency
_LOSS_TABLES: dict[float, np.ndarray] = {}


def _loss_table(eta: float, kmax: int) -> np.ndarray:
    """Table L[k_a, k_b] of lossy per-party responses up to kmax photons.

    L = B V B^T with B the binomial thinning matrix and V the lossless
    response (count asymmetry, -1 on the double vacuum).
    """
    got = _LOSS_TABLES.get(eta)
    if got is not None and got.shape[0] > kmax:
        return got
    dim = kmax + 1
    B = np.zeros((dim, dim))
    for k in range(dim):
        for kappa in range(k + 1):
            B[k, kappa] = (
                math.comb(k, kappa) * eta**kappa * (1.0 - eta) ** (k - kappa)
            )
    counts = np.arange(dim, dtype=float)
    totals = counts[:, None] + counts[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        V = np.where(totals > 0, (counts[:, None] - counts[None, :]) / totals, 0.0)
    V[0, 0] = -1.0
    table = B @ V @ B.T
    _LOSS_TABLES[eta] = table
    return table


def per_party_loss_factor(k_a: int, k_b: int, eta: float) -> float:
    """Expected one-party response to counts (k_a, k_b) at efficiency eta.

    Each photon survives independently with probability eta; surviving
    counts answer their count asymmetry, losing everything answers -1.
    """
    if k_a < 0 or k_b < 0:
        raise ValueError("photon counts must be non-negative")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    return float(_loss_table(eta, max(k_a, k_b))[k_a, k_b])


def lossy_mermin_lhs(
    gamma: float,
    eta: float,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    state: BGHZState | None = None,
) -> float:
    """Mermin-like LHS with every detector thinned to efficiency eta.

    Thinning commutes with the (photon-number-conserving) basis rotations,
    so each party contributes a shell matrix congruent to the diagonal
    lossy response; the three parties combine entrywise exactly as in the
    lossless kernel.  Reported in the untruncated-state normalization,
    matching mermin_lhs at eta = 1.
    """
    state = _prepare(gamma, cutoff, policy, state)
    scale = 1.0 - state.norm_residual
    shells: dict[int, np.ndarray] = {}
    for (q, m), amp in state.amps.items():
        k = q + m
        vec = shells.get(k)
        if vec is None:
            vec = np.zeros(k + 1, dtype=complex)
            shells[k] = vec
        vec[q] = amp
    table = _loss_table(eta, max(shells))
    totals = dict.fromkeys(range(len(_SETTINGS)), 0.0)
    for k, vec in shells.items():
        values = np.array([table[kappa, k - kappa] for kappa in range(k + 1)])
        blocks = {}
        for b in (1, 2):
            rot = _shell_rotation(b, k)
            blocks[b] = rot.conj().T @ (values[:, None] * rot)
        for s, (i, j, l) in enumerate(_SETTINGS):
            prod = blocks[i] * blocks[j] * blocks[l]
            totals[s] += float(np.real(np.vdot(vec, prod @ vec)))
    return scale * abs(sum(sign * totals[s] for s, sign in enumerate(_SIGNS)))


def eta_threshold(
    gamma: float,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    tol: float = 1e-3,
) -> float:
    """Detector efficiency below which the Mermin violation dies.

    Bisects lossy_mermin_lhs = 2 in eta; requires a violation at eta = 1
    (raises "not violated at eta=1" otherwise).  The lower bracket starts
    just above 0 because eta = 0 gives exactly 2.
    """
    state = build_bghz(gamma, cutoff=cutoff, policy=policy)
    if mermin_lhs(gamma, policy, state=state) <= CLASSICAL_BOUND:
        raise ValueError(f"not violated at eta=1 (gamma={gamma})")
    return find_crossing(
        lambda e: lossy_mermin_lhs(gamma, e, policy, state=state),
        CLASSICAL_BOUND,
        1e-6,
        1.0,
        tol,
    )


def witness_w1(
    gamma: float,
    projected: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    state: BGHZState | None = None,
) -> float:
    """GHZ projector witness in normalized Stokes operators.

    (3/2) S0 S0 S0 - S1 S1 S1 - (1/2)(S3 S3 S0 + S0 S3 S3 + S3 S0 S3);
    negative expectation flags entanglement, the three-qubit GHZ state
    reaching -1.  projected evaluates on the vacuum-removed state.
    """
    state = _prepare(gamma, cutoff, policy, state)
    if projected:
        state = project_out_vacuum(state)
    value = 1.5 * stokes_expectation(state, ("S0", "S0", "S0"))
    value -= stokes_expectation(state, ("S1", "S1", "S1"))
    value -= 0.5 * (
        stokes_expectation(state, ("S3", "S3", "S0"))
        + stokes_expectation(state, ("S0", "S3", "S3"))
        + stokes_expectation(state, ("S3", "S0", "S3"))
    )
    return value


def evaluate_w2(
    gamma: float,
    projected: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    state: BGHZState | None = None,
) -> WitnessEvaluation:
    """Mermin-operator witness with the non-vacuum projector added.

    value is <S1 S2 S2 + S2 S1 S2 + S2 S2 S1 - S1 S1 S1> + <Pi Pi Pi>,
    evaluated generically; closed_form is -4t + 1 - p_vac on the same
    state, and agreement records their difference.  Negative value flags
    entanglement (separable bound 0).
    """
    state = _prepare(gamma, cutoff, policy, state)
    if projected:
        state = project_out_vacuum(state)
    m_value = (
        stokes_expectation(state, ("S1", "S2", "S2"))
        + stokes_expectation(state, ("S2", "S1", "S2"))
        + stokes_expectation(state, ("S2", "S2", "S1"))
        - stokes_expectation(state, ("S1", "S1", "S1"))
    )
    value = m_value + stokes_expectation(state, ("Pi", "Pi", "Pi"))
    tensor = tensor_t(state.gamma, policy=policy, state=state)
    closed = -4.0 * tensor.t + 1.0 - _vacuum_probability(state)
    return WitnessEvaluation(
        gamma=state.gamma,
        value=value,
        closed_form=closed,
        agreement=abs(value - closed),
    )


def witness_w2(
    gamma: float,
    projected: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
    cutoff: int | None = None,
    state: BGHZState | None = None,
) -> float:
    return evaluate_w2(gamma, projected, policy, cutoff, state).value


def mermin_sweep(
    gammas, policy: NumericPolicy = DEFAULT_POLICY
) -> SweepResult:
    """Mermin LHS over a gain grid, with the threshold bisected when the
    grid brackets the crossing of 2."""
    gammas = tuple(float(g) for g in gammas)
    evals = [evaluate_mermin(g, policy) for g in gammas]
    values = tuple(e.lhs for e in evals)
    threshold = None
    for a, b, va, vb in zip(gammas, gammas[1:], values, values[1:]):
        if (va - CLASSICAL_BOUND) > 0.0 >= (vb - CLASSICAL_BOUND):
            threshold = find_crossing(
                lambda g: mermin_lhs(g, policy), CLASSICAL_BOUND, a, b
            )
            break
    return SweepResult(
        axis=gammas,
        values=values,
        threshold=threshold,
        diagnostics=tuple(
            {"reduced": e.reduced, "agreement": e.agreement} for e in evals
        ),
    )


def eta_threshold_sweep(
    gammas, policy: NumericPolicy = DEFAULT_POLICY
) -> SweepResult:
    """eta_threshold per grid point; NaN where the inequality is not
    violated even with perfect detectors."""
    gammas = tuple(float(g) for g in gammas)
    values = []
    diagnostics = []
    for g in gammas:
        try:
            values.append(eta_threshold(g, policy))
            diagnostics.append({"violated": True})
        except ValueError:
            values.append(float("nan"))
            diagnostics.append({"violated": False})
    return SweepResult(
        axis=gammas,
        values=tuple(values),
        threshold=None,
        diagnostics=tuple(diagnostics),
    )


def witness_sweep(
    which: int,
    gammas,
    projected: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> SweepResult:
    """w1 or w2 over a gain grid; threshold is the zero crossing where the
    witness loses negativity, when the grid brackets one."""
    if which not in (1, 2):
        raise ValueError(f"witness index must be 1 or 2, got {which}")
    gammas = tuple(float(g) for g in gammas)
    if which == 1:
        values = tuple(witness_w1(g, projected, policy) for g in gammas)
        diagnostics = tuple({} for _ in gammas)
        fn = lambda g: witness_w1(g, projected, policy)
    else:
        evals = [evaluate_w2(g, projected, policy) for g in gammas]
        values = tuple(e.value for e in evals)
        diagnostics = tuple({"agreement": e.agreement} for e in evals)
        fn = lambda g: witness_w2(g, projected, policy)
    threshold = None
    for a, b, va, vb in zip(gammas, gammas[1:], values, values[1:]):
        if va < 0.0 <= vb:
            threshold = find_crossing(fn, 0.0, a, b)
            break
    return SweepResult(
        axis=gammas, values=values, threshold=threshold, diagnostics=diagnostics
    )


def dump_sweep_csv(result: SweepResult, path: str, axis_label: str = "gamma") -> None:
    """Write a sweep as CSV: axis, value, then any shared diagnostic keys."""
    keys = sorted(
        set.intersection(*(set(d) for d in result.diagnostics))
        if result.diagnostics
        else set()
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis_label, "value", *keys])
        for x, v, diag in zip(result.axis, result.values, result.diagnostics):
            writer.writerow(
                [f"{x:.17g}", f"{v:.17g}", *(f"{diag[k]}" for k in keys)]
            )
