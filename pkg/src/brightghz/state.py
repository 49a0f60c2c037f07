"""Resummed emission amplitudes, photon statistics, and the bright GHZ state.

A single n-beam source prepares sum_k C_k (Adag)**k |vac> with the series
data of `series_core` resummed by `pade`.  The probability of finding k
emitted n-tuples is p(k) = |C_k|**2 * (k!)**n.  Two such three-beam
emissions, one feeding the a-modes and one the b-modes of three observers,
prepare the bright GHZ state

    |BGHZ> = sum_{q,m} C_q C_m (Adag)**q (Bdag)**m |vac>,

which lives on the exchange-symmetric diagonal: every observer holds the
same occupation pair (q photons polarized a, m polarized b).

Weights like (q! m!)**1.5 overflow double precision long before the cutoff
does, so magnitudes are combined at working precision and only the final,
normalized amplitudes are handed out as machine floats.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from mpmath import mp, mpf

from brightghz.pade import DiagonalResummer
from brightghz.series_core import c_series

__all__ = [
    "NumericPolicy",
    "BrightStateSpec",
    "TripleDistribution",
    "BGHZState",
    "ResummationError",
    "resummed_coefficient",
    "photon_distribution",
    "build_bghz",
    "project_out_vacuum",
    "dump_state_csv",
    "dump_distribution_csv",
]

TAIL_TARGET = 1e-10
CUTOFF_CAP = 60
# Deep emission orders stop meeting the strict ladder tolerance long before
# their values turn into noise.  A value whose final two diagonal entries
# agree to this relative level is still good to ~0.1 percent, which enters
# probabilities squared at ~0.2 percent: ample for any downstream float
# use.  Anything looser is treated as unresolved.
SOFT_AGREEMENT = 1e-3


class ResummationError(RuntimeError):
    """Diagonal ladder failed to settle; carries the deepest order reached."""

    def __init__(self, message: str, order_reached: int):
        super().__init__(message)
        self.order_reached = order_reached


@dataclass(frozen=True)
class NumericPolicy:
    """Precision and truncation knobs shared by every resummed quantity.

    cutoff None means: grow the photon cutoff until the estimated omitted
    probability mass drops below TAIL_TARGET, capped at CUTOFF_CAP.
    """

    pade_order: int = 40
    tol: float = 1e-10
    bits: int = 256
    cutoff: int | None = None
    gamma_guard: float = 0.9

    def key(self) -> tuple:
        return (self.pade_order, self.tol, self.bits)


DEFAULT_POLICY = NumericPolicy()


@dataclass(frozen=True)
class BrightStateSpec:
    """One emission configuration: beam count, gain, and numeric policy."""

    n: int
    gamma: float
    cutoff: int | None = None
    pade_order: int = 40
    tol: float = 1e-10
    bits: int = 256

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"beam count n must be >= 1, got {self.n}")
        if self.gamma < 0:
            raise ValueError(f"gain must be >= 0, got {self.gamma}")

    @property
    def policy(self) -> NumericPolicy:
        return NumericPolicy(
            pade_order=self.pade_order,
            tol=self.tol,
            bits=self.bits,
            cutoff=self.cutoff,
        )

    @property
    def validity_warning(self) -> bool:
        """True past the gain where three-beam statistics stop converging."""
        return self.n >= 3 and self.gamma >= 0.9


@dataclass(frozen=True)
class TripleDistribution:
    """Normalized p(k) over retained k, with an estimate of the omitted tail.

    probs sums to 1 - tail_bound; mean is None when the retained weights
    show no decay (diverged set) or the tail estimate is infinite.
    """

    n: int
    gamma: float
    probs: tuple[float, ...]
    tail_bound: float
    mean: float | None
    diverged: bool

    @property
    def cutoff(self) -> int:
        return len(self.probs) - 1


@dataclass(frozen=True)
class BGHZState:
    """Bright GHZ state on the exchange-symmetric diagonal, unit norm.

    amps maps (q, m) to the amplitude of the joint ket in which every one
    of the three observers holds q photons in its a-mode and m in its
    b-mode.  norm_residual records |1 - sum|amp|^2| before renormalization,
    a joint measure of truncation loss and resummation drift.
    """

    gamma: float
    cutoff: int
    amps: dict[tuple[int, int], complex]
    norm_residual: float
    vacuum_projected: bool = False


# Resummer per coefficient series and settled series values per gain point.
_RESUMMERS: dict[tuple[int, int, int], DiagonalResummer] = {}
_VALUES: dict[tuple, object] = {}


def _resummer(n: int, k: int, L: int) -> DiagonalResummer:
    key = (n, k, L)
    got = _RESUMMERS.get(key)
    if got is None:
        got = DiagonalResummer(c_series(k, n, L).coeffs)
        _RESUMMERS[key] = got
    return got


def _series_value(n: int, k: int, gamma: float, policy: NumericPolicy):
    """Resummed value of sum_j c_j u^j at u = -gamma**2, as a working-precision real.

    A value is usable when the ladder meets the strict policy tolerance,
    or failing that when its final two diagonal entries still agree to
    SOFT_AGREEMENT relative; otherwise the order budget genuinely cannot
    resolve this coefficient and ResummationError is raised.
    """
    key = (n, k, float(gamma)) + policy.key()
    got = _VALUES.get(key)
    if got is not None:
        return got
    resummer = _resummer(n, k, 2 * policy.pade_order + 1)
    u = -(Fraction(gamma) ** 2)
    result = resummer.resum(
        u, max_order=policy.pade_order, tol=policy.tol, bits=policy.bits
    )
    if not result.converged:
        vals = [v for _, v in result.diagnostics if v is not None]
        settled = (
            len(vals) >= 2
            and vals[-1] != 0
            and abs(vals[-1] - vals[-2]) <= SOFT_AGREEMENT * abs(vals[-1])
        )
        if not settled:
            raise ResummationError(
                f"diagonal ladder for n={n}, k={k} did not settle at"
                f" gamma={gamma} within order {result.order_used}",
                order_reached=result.order_used,
            )
    _VALUES[key] = result.value
    return result.value


def resummed_coefficient(
    n: int, k: int, gamma: float, policy: NumericPolicy = DEFAULT_POLICY
) -> complex:
    """Emission coefficient C_k = (i*gamma)**k times the resummed series value."""
    if n < 1:
        raise ValueError(f"beam count n must be >= 1, got {n}")
    if k < 0:
        raise ValueError(f"tuple number k must be >= 0, got {k}")
    if gamma < 0:
        raise ValueError(f"gain must be >= 0, got {gamma}")
    if gamma == 0:
        return complex(1.0) if k == 0 else complex(0.0)
    s = _series_value(n, k, gamma, policy)
    with mp.workprec(policy.bits):
        magnitude = float(mpf(gamma) ** k * s)
    return (1j) ** (k % 4) * magnitude


def _weight(n: int, gamma: float, k: int, policy: NumericPolicy):
    """Unnormalized p-weight |C_k|^2 (k!)^n as a working-precision real."""
    with mp.workprec(policy.bits):
        if gamma == 0:
            return mpf(1) if k == 0 else mpf(0)
        s = _series_value(n, k, gamma, policy)
        return mpf(gamma) ** (2 * k) * s * s * mpf(factorial(k)) ** n


def _tail_estimate(w: list) -> float:
    """Geometric extrapolation of the omitted mass from the last two weights."""
    if len(w) < 2 or w[-1] == 0:
        return 0.0
    if w[-2] == 0:
        return float("inf")
    r = w[-1] / w[-2]
    if r >= 1:
        return float("inf")
    return float(w[-1] * r / (1 - r))


def _omitted_mass(w: list) -> float:
    """Best estimate of the probability mass beyond the retained orders.

    The weights of a normalized emission state must total exactly 1, so
    the retained-sum shortfall measures the omitted mass directly; it
    stays honest even while the weight ratio is still climbing toward its
    limit, where a geometric extrapolation from the last two entries
    undershoots.  The larger of the two estimates is kept, which also
    preserves the geometric bound as the conservative choice whenever the
    ratio is falling instead.
    """
    geometric = _tail_estimate(w)
    if geometric == float("inf"):
        return geometric
    shortfall = float(1 - sum(w))
    return max(geometric, shortfall, 0.0)


def photon_distribution(spec: BrightStateSpec) -> TripleDistribution:
    """Probability of observing k emitted n-tuples, up to an adaptive cutoff."""
    policy = spec.policy
    if spec.validity_warning:
        warnings.warn(
            f"gain {spec.gamma} is at or past the n={spec.n} validity boundary;"
            " photon statistics may not converge",
            RuntimeWarning,
            stacklevel=2,
        )
    if spec.cutoff is not None:
        if spec.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {spec.cutoff}")
        w = [_weight(spec.n, spec.gamma, k, policy) for k in range(spec.cutoff + 1)]
        tail = _omitted_mass(w)
    else:
        w = [_weight(spec.n, spec.gamma, k, policy) for k in (0, 1)]
        tail = _omitted_mass(w)
        while not (
            tail < TAIL_TARGET * float(sum(w) + tail)
        ) and len(w) - 1 < CUTOFF_CAP:
            try:
                w.append(_weight(spec.n, spec.gamma, len(w), policy))
            except ResummationError:
                # the order budget cannot resolve deeper coefficients; stop
                # here and let the omitted-mass estimate carry the rest
                break
            tail = _omitted_mass(w)

    # no decay across the last five retained orders marks a diverging tail
    scaled = [float(w[k]) * k * k for k in range(len(w))]
    diverged = len(scaled) >= 5 and all(
        scaled[k + 1] >= scaled[k] for k in range(len(scaled) - 5, len(scaled) - 1)
    )
    if tail == float("inf"):
        diverged = True
        total = sum(w)
        probs = tuple(float(x / total) for x in w)
        tail_bound = float("inf")
        mean = None
    else:
        total = sum(w) + mpf(tail)
        probs = tuple(float(x / total) for x in w)
        tail_bound = float(mpf(tail) / total)
        mean = None if diverged else float(sum(k * p for k, p in enumerate(probs)))
    return TripleDistribution(
        n=spec.n,
        gamma=spec.gamma,
        probs=probs,
        tail_bound=tail_bound,
        mean=mean,
        diverged=diverged,
    )


def build_bghz(
    gamma: float, cutoff: int | None = None, policy: NumericPolicy = DEFAULT_POLICY
) -> BGHZState:
    """Construct the normalized bright GHZ state at the given gain.

    Raw amplitudes are C_q * C_m * (q! m!)**1.5 over pairs with
    q, m <= cutoff; the cutoff defaults to the photon-distribution rule.
    """
    if gamma < 0:
        raise ValueError(f"gain must be >= 0, got {gamma}")
    if gamma >= policy.gamma_guard:
        warnings.warn(
            f"gain {gamma} is at or past the guard {policy.gamma_guard};"
            " bright-state construction may not converge",
            RuntimeWarning,
            stacklevel=2,
        )
    if cutoff is None:
        cutoff = policy.cutoff
    if gamma == 0:
        return BGHZState(
            gamma=0.0, cutoff=cutoff or 0, amps={(0, 0): 1.0 + 0j}, norm_residual=0.0
        )
    if cutoff is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cutoff = photon_distribution(
                BrightStateSpec(
                    n=3,
                    gamma=gamma,
                    pade_order=policy.pade_order,
                    tol=policy.tol,
                    bits=policy.bits,
                )
            ).cutoff
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")

    with mp.workprec(policy.bits):
        g = mpf(gamma)
        mags = []
        signs = []
        for q in range(cutoff + 1):
            s = _series_value(3, q, gamma, policy)
            mags.append(abs(s) * g**q * mpf(factorial(q)) ** mpf(1.5))
            signs.append(1 if s >= 0 else -1)
        col = sum(m * m for m in mags)
        norm_residual = float(abs(1 - col * col))
        root = col**0.5  # amplitude normalization per factor state
        amps: dict[tuple[int, int], complex] = {}
        for q in range(cutoff + 1):
            for m in range(cutoff + 1):
                mag = float(mags[q] / root * (mags[m] / root))
                phase = (1j) ** ((q + m) % 4)
                amps[(q, m)] = phase * (signs[q] * signs[m] * mag)
    return BGHZState(
        gamma=gamma, cutoff=cutoff, amps=amps, norm_residual=norm_residual
    )


def project_out_vacuum(state: BGHZState) -> BGHZState:
    """Remove the global vacuum component and renormalize.

    On the exchange-symmetric diagonal an observer sees vacuum exactly when
    all of them do, so local and global vacuum projection coincide.
    """
    rest = {qm: a for qm, a in state.amps.items() if qm != (0, 0)}
    total = sum(abs(a) ** 2 for a in rest.values())
    if total <= 0:
        raise ValueError("state has no nonvacuum support to keep")
    scale = total**-0.5
    return BGHZState(
        gamma=state.gamma,
        cutoff=state.cutoff,
        amps={qm: a * scale for qm, a in rest.items()},
        norm_residual=state.norm_residual,
        vacuum_projected=True,
    )


def dump_state_csv(state: BGHZState, path: str) -> None:
    """Write amplitudes as CSV rows q,m,re_amp,im_amp in (q, m) order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "m", "re_amp", "im_amp"])
        for (q, m) in sorted(state.amps):
            a = state.amps[(q, m)]
            writer.writerow([q, m, f"{a.real:.17g}", f"{a.imag:.17g}"])


def dump_distribution_csv(dist: TripleDistribution, path: str) -> None:
    """Write the distribution as CSV rows k,p."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "p"])
        for k, p in enumerate(dist.probs):
            writer.writerow([k, f"{p:.17g}"])
