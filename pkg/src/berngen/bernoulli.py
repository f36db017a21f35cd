"""Bernoulli polynomials with exact rational coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

#: beyond this degree the coefficient growth defeats double precision
DEGREE_CAP = 64


@dataclass(frozen=True)
class BernoulliTable:
    """Monomial coefficients of B_0 .. B_max_degree, ascending powers.

    ``coeffs`` keeps the exact rationals; ``coeffs_float`` is the one-time
    floating-point conversion used by all evaluation routines.  Immutable
    after construction, so concurrent reads are safe.
    """

    max_degree: int
    coeffs: tuple[tuple[Fraction, ...], ...]
    coeffs_float: tuple[tuple[float, ...], ...]


def build_bernoulli_table(max_degree: int) -> BernoulliTable:
    """Generate B_k by integrating k*B_{k-1} and fixing the zero-mean constant.

    The recurrence runs in exact rational arithmetic; its alternating sums
    cancel catastrophically in floating point.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if max_degree > DEGREE_CAP:
        raise ValueError(
            f"max_degree {max_degree} exceeds the cap {DEGREE_CAP}; "
            "higher degrees are numerically meaningless at double precision")
    rows: list[tuple[Fraction, ...]] = [(Fraction(1),)]
    for k in range(1, max_degree + 1):
        prev = rows[-1]
        d = [Fraction(0)] * (k + 1)
        for j, c in enumerate(prev):
            d[j + 1] = Fraction(k) * c / (j + 1)
        # the constant term is pinned by the zero mean on [0, 1]
        d[0] = -sum(dj / (j + 1) for j, dj in enumerate(d))
        rows.append(tuple(d))
    return BernoulliTable(
        max_degree=max_degree,
        coeffs=tuple(rows),
        coeffs_float=tuple(tuple(float(c) for c in row) for row in rows),
    )


_shared: BernoulliTable = build_bernoulli_table(40)


def shared_table(min_degree: int = 0) -> BernoulliTable:
    """Process-wide table, regrown on demand.

    Tables are immutable; a concurrent regrow merely rebinds the module
    reference, so readers always see a consistent table.
    """
    global _shared
    if _shared.max_degree < min_degree:
        _shared = build_bernoulli_table(min_degree)
    return _shared


def eval_bernoulli(table: BernoulliTable, k: int, tau: float) -> float:
    """Horner evaluation of B_k(tau)."""
    if not 0 <= k <= table.max_degree:
        raise ValueError(f"degree {k} outside table range 0..{table.max_degree}")
    acc = 0.0
    for c in reversed(table.coeffs_float[k]):
        acc = acc * tau + c
    return acc


def lanczos_polynomial(table: BernoulliTable, p: int, tau: float,
                       w: complex) -> complex:
    """Truncated generating series sum_{k=0}^{p-1} B_k(tau) w^k / k!."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p - 1 > table.max_degree:
        raise ValueError(
            f"table covers degree {table.max_degree}, need {p - 1}")
    w = complex(w)
    acc = 0.0 + 0.0j
    term = 1.0 + 0.0j  # w^k / k!
    for k in range(p):
        acc += eval_bernoulli(table, k, tau) * term
        term *= w / (k + 1)
    return acc
