"""Rounding numeric subspaces to exact ones."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from .exactla import ExactMatrix, GaussianRational, column_basis

__all__ = ["continued_fraction_round", "round_projection", "round_subspace"]


def continued_fraction_round(x: float, denom_bound: int) -> Fraction:
    """Best rational approximation of ``x`` with denominator at most ``denom_bound``."""
    if denom_bound < 1:
        raise ValueError("denom_bound must be >= 1")
    return Fraction(x).limit_denominator(int(denom_bound))


def _round_entry(z: complex, bound: int) -> GaussianRational:
    re = continued_fraction_round(z.real, bound)
    im = continued_fraction_round(z.imag, bound) if z.imag else Fraction(0)
    return GaussianRational(mpq(re.numerator, re.denominator), mpq(im.numerator, im.denominator))


def round_projection(P, denom_bound: int) -> ExactMatrix:
    """Entrywise continued-fraction rounding of a (projection) matrix."""
    P = np.asarray(P, dtype=complex)
    return ExactMatrix._raw([[_round_entry(complex(v), denom_bound) for v in row] for row in P],
                            P.shape[0], P.shape[1])


def round_subspace(basis, denom_bound: int) -> list[tuple]:
    """Exact subspace spanned by the rounded projection onto span(basis).

    ``basis`` has orthonormal columns.  The result is a list of exact vectors;
    its dimension need not match when the rounding is too coarse.
    """
    B = np.asarray(basis)
    if B.ndim != 2 or B.shape[1] == 0:
        return []
    P = B @ B.conj().T
    return column_basis(round_projection(P, denom_bound))
