"""Exact integer backbone of the multiphoton emission series.

An n-beam parametric source driven at dimensionless gain G emits photon
n-tuples with amplitudes C_k = sum_l (iG)^l / l! * P[k, l], where P[k, l]
counts the weight of the k-th power of the collective creation operator in
the l-th power of the interaction Hamiltonian applied to vacuum.  The
weights are positive integers obeying

    P[k, l] = P[k-1, l-1] + (k+1)**n * P[k+1, l-1],    P[k, 0] = delta(0, k),

with P[k, l] = 0 whenever k < 0, k > l, or l - k is odd.  Only every other
power of the gain contributes to a given k, so the series is organised here
in the variable u = -G**2:

    C_k = (iG)**k * sum_j c_j * u**j,    c_j = P[k, k + 2j] / (k + 2j)!

All arithmetic in this module is exact (Python integers and fractions);
floats never enter.  Downstream modules resum the (generally divergent)
series in u and attach the (iG)**k prefactor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, perm

__all__ = [
    "RecurrenceTable",
    "FormalSeries",
    "build_p_table",
    "p_explicit",
    "ladder_coefficient",
    "c_series",
    "dump_table_csv",
]


@dataclass(frozen=True)
class RecurrenceTable:
    """Table of weights P[k, l] for one beam count n, filled to l <= l_max.

    ``entries`` holds exactly the structurally nonzero pairs: 0 <= k <= l,
    l - k even.  Every stored value is a positive integer.
    """

    n: int
    l_max: int
    entries: dict[tuple[int, int], int]

    def value(self, k: int, l: int) -> int:
        """Return P[k, l], or 0 for any index outside the nonzero pattern."""
        if l > self.l_max:
            raise ValueError(
                f"table for n={self.n} filled only to l_max={self.l_max}, got l={l}"
            )
        return self.entries.get((k, l), 0)


@dataclass(frozen=True)
class FormalSeries:
    """Coefficients c_j of C_k as a power series in u = -G**2.

    The represented object is C_k = (iG)**k * sum_j coeffs[j] * u**j.
    Coefficients are exact rationals; c_0 = 1/k!.
    """

    k: int
    n: int
    coeffs: tuple[Fraction, ...]


# One growable store per n; build_p_table slices exact snapshots out of it.
_STORE: dict[int, tuple[int, dict[tuple[int, int], int]]] = {}


def _ensure_store(n: int, l_max: int) -> dict[tuple[int, int], int]:
    built, entries = _STORE.get(n, (-1, {}))
    if built < 0:
        entries[(0, 0)] = 1
        built = 0
    for l in range(built + 1, l_max + 1):
        for k in range(l % 2, l + 1, 2):
            v = entries.get((k - 1, l - 1), 0) + (k + 1) ** n * entries.get(
                (k + 1, l - 1), 0
            )
            entries[(k, l)] = v
    _STORE[n] = (max(built, l_max), entries)
    return entries


def build_p_table(n: int, l_max: int) -> RecurrenceTable:
    """Fill the recurrence table for n beams up to Hamiltonian power l_max.

    Parameters
    ----------
    n : int
        Number of beams (modes per emitted tuple), n >= 1.
    l_max : int
        Largest Hamiltonian power to fill, l_max >= 0.
    """
    if n < 1:
        raise ValueError(f"beam count n must be >= 1, got {n}")
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    store = _ensure_store(n, l_max)
    entries = {kl: v for kl, v in store.items() if kl[1] <= l_max}
    return RecurrenceTable(n=n, l_max=l_max, entries=entries)


def p_explicit(k: int, n: int, l: int) -> int:
    """Evaluate P[k, l] from its closed nested-sum form, bypassing the table.

    The (l - k)/2 nested sums run as

        sum_{i=1}^{k+1} i**n  sum_{j=1}^{i+1} j**n  ...  (innermost empty = 1)

    This route is combinatorial in (l - k)/2 and is meant as an independent
    cross-check of the recurrence on small indices, not for production use.
    """
    if n < 1:
        raise ValueError(f"beam count n must be >= 1, got {n}")
    if k < 0 or l < 0:
        raise ValueError(f"indices must be nonnegative, got k={k}, l={l}")
    if k > l:
        raise ValueError(f"nested-sum form needs k <= l, got k={k}, l={l}")
    if (l - k) % 2:
        raise ValueError(f"(l - k) must be even, got k={k}, l={l}")
    depth = (l - k) // 2
    memo: dict[tuple[int, int], int] = {}

    def tower(d: int, upper: int) -> int:
        if d == 0:
            return 1
        key = (d, upper)
        got = memo.get(key)
        if got is None:
            got = sum(i**n * tower(d - 1, i + 1) for i in range(1, upper + 1))
            memo[key] = got
        return got

    return tower(depth, k + 1)


def ladder_coefficient(n: int, l: int, p: int) -> int:
    """Weight picked up when l collective annihilations act on p stored tuples.

    Acting with the n-mode annihilation product l times on the p-th power of
    the n-mode creation product over vacuum multiplies the state by
    (p * (p-1) * ... * (p-l+1))**n.  Over-annihilation (l > p) kills the
    state, returned as 0.
    """
    if n < 1:
        raise ValueError(f"beam count n must be >= 1, got {n}")
    if l < 0 or p < 0:
        raise ValueError(f"powers must be nonnegative, got l={l}, p={p}")
    if l > p:
        return 0
    return perm(p, l) ** n


def c_series(k: int, n: int, L: int) -> FormalSeries:
    """Assemble the first L exact coefficients of C_k as a series in u = -G**2.

    coeffs[j] = P[k, k + 2j] / (k + 2j)!, so coeffs[0] = 1/k!.
    """
    if k < 0:
        raise ValueError(f"tuple number k must be >= 0, got {k}")
    if L < 1:
        raise ValueError(f"series length L must be >= 1, got {L}")
    if n < 1:
        raise ValueError(f"beam count n must be >= 1, got {n}")
    store = _ensure_store(n, k + 2 * (L - 1))
    coeffs = tuple(
        Fraction(store.get((k, k + 2 * j), 0), factorial(k + 2 * j))
        for j in range(L)
    )
    return FormalSeries(k=k, n=n, coeffs=coeffs)


def dump_table_csv(table: RecurrenceTable, path: str) -> None:
    """Write the table as CSV rows k,l,n,value with plain decimal integers."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "l", "n", "value"])
        for (k, l) in sorted(table.entries, key=lambda kl: (kl[1], kl[0])):
            writer.writerow([k, l, table.n, str(table.entries[(k, l)])])
