"""Diagonal Pade resummation for factorially divergent power series.

The emission-series coefficients grow too fast for any positive radius of
convergence once three or more beams are coupled, so partial sums are
useless beyond tiny gains.  The standard cure is to replace the truncated
series by the [N/M] Pade rational

    Q(x) = (X_0 + X_1 x + ... + X_N x**N) / (1 + Y_1 x + ... + Y_M x**M),

whose Taylor expansion matches the series through order N + M, and to walk
the diagonal [1/1], [2/2], ... until two successive values agree.

Coefficient magnitudes span hundreds of orders, so explicit approximant
construction solves the denominator system in exact rational arithmetic;
rounding enters only at evaluation time, at a configurable binary
precision.  Walking the whole diagonal at one point does not build the
rationals at all: the epsilon recursion on partial sums produces exactly
the [N/N] values with O(order**2) arithmetic, at a working precision
sized to the partial-sum growth so the cancellation down to the limit
scale stays resolved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from mpmath import mp, mpf

__all__ = [
    "PadeApproximant",
    "ResummationResult",
    "PoleProximityError",
    "build_pade",
    "evaluate",
    "diagonal_resum",
    "DiagonalResummer",
]


class PoleProximityError(ArithmeticError):
    """Evaluation point sits numerically on a denominator zero."""


@dataclass(frozen=True)
class PadeApproximant:
    """Rational [N/M] approximant with exact coefficients, den[0] = 1.

    ``requested`` records the order originally asked for; it differs from
    (N, M) when a singular denominator system forced a step-down.
    """

    N: int
    M: int
    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...]
    requested: tuple[int, int]


@dataclass(frozen=True)
class ResummationResult:
    """Outcome of walking the diagonal approximant ladder at one point.

    ``value`` carries the full working precision; ``diagnostics`` holds one
    (order, value) pair per diagonal order tried, value None where the order
    was skipped (pole at the evaluation point, or a singular patch of the
    value table).  converged means the last two retained values agreed to
    tol relative, which also bounds them by tol * max(1, |value|).
    """

    value: object  # mpmath.mpf
    converged: bool
    order_used: int
    diagnostics: tuple[tuple[int, float | None], ...]


def _solve_exact(
    a: list[list[Fraction]], b: list[Fraction]
) -> list[Fraction] | None:
    """Gaussian elimination with exact pivots; None if the system is singular."""
    m = len(a)
    aug = [list(a[i]) + [b[i]] for i in range(m)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            return None
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        pivval = aug[col][col]
        for r in range(col + 1, m):
            f = aug[r][col] / pivval
            if f:
                row, ref = aug[r], aug[col]
                for c in range(col, m + 1):
                    row[c] -= f * ref[c]
    x = [Fraction(0)] * m
    for r in range(m - 1, -1, -1):
        acc = aug[r][m] - sum(aug[r][c] * x[c] for c in range(r + 1, m))
        x[r] = acc / aug[r][r]
    return x


def build_pade(series: Sequence, N: int, M: int) -> PadeApproximant:
    """Construct the [N/M] approximant of a series given exactly.

    Needs N + M + 1 leading coefficients.  A singular denominator system
    (the series is effectively of lower rational degree) steps down to
    [N-1/M-1] until solvable; [0/0] always exists.
    """
    if N < 0 or M < 0:
        raise ValueError(f"orders must be nonnegative, got N={N}, M={M}")
    coeffs = [Fraction(c) for c in series]
    if len(coeffs) < N + M + 1:
        raise ValueError(
            f"[{N}/{M}] needs {N + M + 1} coefficients, got {len(coeffs)}"
        )
    requested = (N, M)

    def c(i: int) -> Fraction:
        return coeffs[i] if i >= 0 else Fraction(0)

    n, m_ord = N, M
    while True:
        if m_ord == 0:
            den = [Fraction(1)]
            y = []
            break
        a = [[c(n + j - mm) for mm in range(1, m_ord + 1)] for j in range(1, m_ord + 1)]
        rhs = [-c(n + j) for j in range(1, m_ord + 1)]
        y = _solve_exact(a, rhs)
        if y is not None:
            den = [Fraction(1)] + y
            break
        n, m_ord = max(n - 1, 0), m_ord - 1

    num = [
        sum(den[mm] * c(i - mm) for mm in range(0, min(i, m_ord) + 1))
        for i in range(n + 1)
    ]
    return PadeApproximant(
        N=n, M=m_ord, num=tuple(num), den=tuple(den), requested=requested
    )


def _to_mpf(cf: Fraction):
    return mpf(cf.numerator) / mpf(cf.denominator)


def _horner(coeffs: Sequence, x) -> tuple:
    """Evaluate polynomial and its coefficient-magnitude scale at |x|."""
    val = mpf(0)
    scale = mpf(0)
    ax = abs(x)
    for cv in reversed(coeffs):
        val = val * x + cv
        scale = scale * ax + abs(cv)
    return val, scale


def _eval_rational(num_mpf, den_mpf, x, bits: int, label: str):
    den, den_scale = _horner(den_mpf, x)
    if abs(den) < mpf(2) ** (-(bits // 2)) * den_scale:
        raise PoleProximityError(
            f"denominator of {label} vanishes near x={float(x)}"
        )
    num, _ = _horner(num_mpf, x)
    return num / den


def evaluate(approx: PadeApproximant, x, bits: int = 256):
    """Evaluate the approximant at x with the given binary working precision.

    Raises PoleProximityError when the denominator lands below
    2**(-bits/2) relative to its own coefficient scale at x.
    """
    if bits < 8:
        raise ValueError(f"bits must be >= 8, got {bits}")
    with mp.workprec(bits):
        if isinstance(x, Fraction):
            xv = mpf(x.numerator) / mpf(x.denominator)
        else:
            xv = mpf(x)
        num_mpf = tuple(_to_mpf(c) for c in approx.num)
        den_mpf = tuple(_to_mpf(c) for c in approx.den)
        return _eval_rational(
            num_mpf, den_mpf, xv, bits, f"[{approx.N}/{approx.M}]"
        )


def _point(x):
    """Convert the evaluation point to mpf at the current working precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    return mp.mpf(x)


class DiagonalResummer:
    """Reusable diagonal ladder for one coefficient series.

    approximant() builds explicit rationals exactly and caches them; they
    are independent of the evaluation point.  resum() never constructs
    them: it runs the epsilon recursion on partial sums, whose even
    columns are the diagonal approximant values, so one pass costs
    O(max_order**2) high-precision operations.
    """

    def __init__(self, series: Sequence):
        self.coeffs = tuple(Fraction(c) for c in series)
        self._pairs = tuple((c.numerator, c.denominator) for c in self.coeffs)
        self._ladder: dict[int, PadeApproximant] = {}

    def max_feasible_order(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def approximant(self, order: int) -> PadeApproximant:
        got = self._ladder.get(order)
        if got is None:
            got = build_pade(self.coeffs, order, order)
            self._ladder[order] = got
        return got

    def _working_bits(self, pairs, x, bits: int) -> int:
        # Partial sums of a divergent series overshoot the resummed value
        # by the full divergence before the table cancels it back down, so
        # the working precision must cover that overshoot on top of the
        # requested precision.
        with mp.workprec(bits + 64):
            xv = _point(x)
            total = mpf(0)
            power = mpf(1)
            peak = mpf(0)
            scale = None
            for nu, de in pairs:
                term = mpf(nu) / de * power
                if scale is None and term != 0:
                    scale = abs(term)
                total += term
                power *= xv
                if abs(total) > peak:
                    peak = abs(total)
            if scale is None or scale == 0:
                scale = mpf(1)
            excess = 0
            if peak > scale:
                excess = int(mp.ceil(mp.log(peak / scale, 2)))
        return min(bits + excess + 64, 1 << 16)

    def resum(
        self, x, max_order: int = 40, tol: float = 1e-10, bits: int = 256
    ) -> ResummationResult:
        if max_order < 1:
            raise ValueError(f"max_order must be >= 1, got {max_order}")
        if len(self.coeffs) < 2 * max_order + 1:
            raise ValueError(
                f"diagonal order {max_order} needs {2 * max_order + 1}"
                f" coefficients, got {len(self.coeffs)}"
            )
        need = 2 * max_order + 1
        pairs = self._pairs[:need]

        if x == 0:
            with mp.workprec(bits):
                value = mpf(pairs[0][0]) / pairs[0][1]
            return ResummationResult(
                value=value,
                converged=True,
                order_used=1,
                diagnostics=((1, float(value)),),
            )

        degree = max((j for j, c in enumerate(self.coeffs[:need]) if c != 0), default=-1)
        if degree <= max_order and all(c == 0 for c in self.coeffs[degree + 1 : need]):
            # Terminating series: every [N/N] with N >= degree is the
            # polynomial itself, so sum it directly.
            with mp.workprec(bits + 64):
                xv = _point(x)
                value = mpf(0)
                for nu, de in reversed(pairs[: degree + 1]):
                    value = value * xv + mpf(nu) / de
            order = max(1, degree)
            return ResummationResult(
                value=value,
                converged=True,
                order_used=order,
                diagnostics=((order, float(value)),),
            )

        work = self._working_bits(pairs, x, bits)
        diagnostics: list[tuple[int, float | None]] = []
        prev = None
        value = None
        order_used = 0
        converged = False
        with mp.workprec(work):
            xv = _point(x)
            older: list = []
            total = mpf(0)
            power = mpf(1)
            for m in range(need):
                nu, de = pairs[m]
                total += mpf(nu) / de * power
                power *= xv
                newer = [total]
                for r in range(1, min(m, len(older)) + 1):
                    diff = newer[r - 1] - older[r - 1]
                    if diff == 0:
                        # singular patch: drop this lozenge, the column
                        # depth recovers one entry per subsequent term
                        break
                    tail = older[r - 2] if r >= 2 else mpf(0)
                    newer.append(tail + 1 / diff)
                older = newer
                if m >= 2 and m % 2 == 0:
                    order = m // 2
                    if len(newer) > m and mp.isfinite(newer[m]):
                        v = newer[m]
                        diagnostics.append((order, float(v)))
                        value = v
                        order_used = order
                        if prev is not None and abs(v - prev) <= tol * abs(v):
                            converged = True
                            break
                        prev = v
                    else:
                        diagnostics.append((order, None))
        if value is None:
            raise PoleProximityError(
                "every diagonal order was skipped for pole proximity"
            )
        return ResummationResult(
            value=value,
            converged=converged,
            order_used=order_used,
            diagnostics=tuple(diagnostics),
        )


def diagonal_resum(
    series: Sequence, x, max_order: int = 40, tol: float = 1e-10, bits: int = 256
) -> ResummationResult:
    """Walk [1/1], [2/2], ... at x until two successive values agree.

    Agreement means |v_N - v_{N-1}| <= tol * |v_N|, a relative criterion:
    the resummed values here range over hundreds of orders of magnitude,
    and any absolute floor would declare victory on pure noise at the
    small end.  Orders whose value is unavailable at x (pole, or a
    singular patch of the table) are recorded with a None diagnostic; if
    every order is skipped the pole error propagates.
    """
    return DiagonalResummer(series).resum(x, max_order=max_order, tol=tol, bits=bits)
