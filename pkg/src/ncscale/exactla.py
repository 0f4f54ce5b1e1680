"""Exact linear algebra over the Gaussian rationals Q(i).

Entries are :class:`GaussianRational` values whose real and imaginary parts
are ``gmpy2.mpq`` rationals (always reduced, positive denominator).  Vectors
are plain tuples of entries; matrices are :class:`ExactMatrix`.
"""
from __future__ import annotations

import contextlib
import numbers
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from gmpy2 import mpq, mpz

__all__ = [
    "GaussianRational",
    "ExactMatrix",
    "RankNormalForm",
    "gr",
    "ZERO",
    "ONE",
    "gauss_eliminate",
    "rref",
    "rank",
    "inverse",
    "pseudoinverse",
    "nullspace",
    "column_basis",
    "max_independent_columns",
    "span_dim",
    "same_span",
    "contains",
    "sum_basis",
    "intersection_basis",
    "orth_complement",
    "preimage",
    "image_under",
    "gram_schmidt",
    "projection",
    "clear_denominators",
    "track_bits",
    "bits_of",
]


class GaussianRational:
    """An element ``real + imag*i`` of Q(i)."""

    __slots__ = ("real", "imag")

    def __init__(self, real=0, imag=0):
        self.real = _q(real)
        self.imag = _q(imag)

    @staticmethod
    def coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return _mk(_q(value.real), _q(value.imag))
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return _mk(_q(value[0]), _q(value[1]))
        if isinstance(value, str):
            return GaussianRational.parse(value)
        return _mk(_q(value), _Q0)

    def __add__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.coerce(other)
        return _mk(self.real + o.real, self.imag + o.imag)

    __radd__ = __add__

    def __sub__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.coerce(other)
        return _mk(self.real - o.real, self.imag - o.imag)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return _mk(-self.real, -self.imag)

    def __mul__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.coerce(other)
        a, b, c, d = self.real, self.imag, o.real, o.imag
        if not b and not d:
            return _mk(a * c, _Q0)
        return _mk(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        a, b = self.real, self.imag
        if not b:
            if not a:
                raise ZeroDivisionError("inverse of zero")
            return _mk(1 / a, _Q0)
        n = a * a + b * b
        return _mk(a / n, -b / n)

    def __truediv__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.coerce(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def conj(self) -> "GaussianRational":
        return _mk(self.real, -self.imag)

    def abs2(self) -> mpq:
        return self.real * self.real + self.imag * self.imag

    def __bool__(self):
        return bool(self.real) or bool(self.imag)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.real == o.real and self.imag == o.imag

    def __hash__(self):
        return hash((self.real, self.imag))

    def __complex__(self):
        return complex(float(self.real), float(self.imag))

    def is_gaussian_integer(self) -> bool:
        return self.real.denominator == 1 and self.imag.denominator == 1

    def bits(self) -> int:
        """Largest numerator/denominator bit length among both parts."""
        return max(
            self.real.numerator.bit_length(),
            self.real.denominator.bit_length(),
            self.imag.numerator.bit_length(),
            self.imag.denominator.bit_length(),
        )

    def __str__(self):
        re_s = _fmt_q(self.real)
        if not self.imag:
            return re_s
        im = self.imag
        sign = "-" if im < 0 else "+"
        return f"{re_s}{sign}({_fmt_q(abs(im))})i"

    def __repr__(self):
        return f"GaussianRational({self})"

    _PATTERN = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)(?:([+-])\((\d+(?:/\d+)?)\)i)?\s*$")

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Inverse of ``str``: ``"p/q"``, ``"-3"`` or ``"p/q+(r/s)i"``."""
        m = cls._PATTERN.match(text)
        if not m:
            raise ValueError(f"not a Gaussian rational: {text!r}")
        re_part = mpq(m.group(1))
        im_part = mpq(m.group(3)) if m.group(3) else _Q0
        if m.group(2) == "-":
            im_part = -im_part
        return _mk(re_part, im_part)


_Q0 = mpq(0)


def _q(value) -> mpq:
    if isinstance(value, numbers.Integral) and not isinstance(value, int):
        value = int(value)                 # numpy integer scalars
    elif isinstance(value, numbers.Rational) and not isinstance(value, (int, mpq)):
        return mpq(int(value.numerator), int(value.denominator))
    elif isinstance(value, numbers.Real) and not isinstance(value, (float, int, mpq)):
        value = float(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("non-finite value")
    return mpq(value)


def _mk(real: mpq, imag: mpq) -> GaussianRational:
    g = object.__new__(GaussianRational)
    g.real = real
    g.imag = imag
    return g


def _fmt_q(x: mpq) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def gr(real=0, imag=0) -> GaussianRational:
    return GaussianRational(real, imag)


ZERO = _mk(_Q0, _Q0)
ONE = _mk(mpq(1), _Q0)


# --- bit-length instrumentation -------------------------------------------

class BitTracker:
    """Records the largest bit length seen in tracked intermediates."""

    def __init__(self):
        self.max_bits = 0
        self.samples = 0

    def observe(self, values: Iterable[GaussianRational]) -> None:
        b = self.max_bits
        for v in values:
            vb = v.bits()
            if vb > b:
                b = vb
        self.max_bits = b
        self.samples += 1


_TRACKERS: list[BitTracker] = []


@contextlib.contextmanager
def track_bits() -> Iterator[BitTracker]:
    """Context manager collecting the max bit length of exact intermediates."""
    t = BitTracker()
    _TRACKERS.append(t)
    try:
        yield t
    finally:
        _TRACKERS.remove(t)


def _observe(values: Iterable[GaussianRational]) -> None:
    if _TRACKERS:
        values = list(values)
        for t in _TRACKERS:
            t.observe(values)


def bits_of(rows: Iterable[Iterable[GaussianRational]]) -> int:
    return max((v.bits() for row in rows for v in row), default=0)


# --- matrices --------------------------------------------------------------

Vector = tuple


class ExactMatrix:
    """Immutable dense matrix over Q(i)."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Sequence[Sequence], cols: int | None = None):
        rows = [tuple(GaussianRational.coerce(v) for v in row) for row in data]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        self.rows = len(rows)
        self.cols = cols
        self._data = tuple(rows)

    @classmethod
    def _raw(cls, data, rows: int, cols: int) -> "ExactMatrix":
        m = object.__new__(cls)
        m.rows = rows
        m.cols = cols
        m._data = tuple(tuple(r) for r in data)
        return m

    # constructors
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls._raw([[ZERO] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls._raw([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "ExactMatrix":
        columns = [tuple(GaussianRational.coerce(v) for v in c) for c in columns]
        if not columns:
            return cls._raw([[] for _ in range(rows or 0)], rows or 0, 0)
        m = len(columns[0])
        return cls._raw([[c[i] for c in columns] for i in range(m)], m, len(columns))

    @classmethod
    def from_numpy(cls, array) -> "ExactMatrix":
        """Exact copy of an integer (or Gaussian-integer) valued array."""
        import numpy as np

        a = np.asarray(array)
        out = []
        for row in a:
            r = []
            for v in row:
                v = complex(v)
                re_i, im_i = round(v.real), round(v.imag)
                if re_i != v.real or im_i != v.imag:
                    raise ValueError("from_numpy expects Gaussian-integer entries")
                r.append(_mk(mpq(re_i), mpq(im_i)))
            out.append(r)
        return cls._raw(out, a.shape[0], a.shape[1])

    # access
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx):
        i, j = idx
        return self._data[i][j]

    def row(self, i: int) -> Vector:
        return self._data[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self._data)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list[GaussianRational]]:
        return [list(r) for r in self._data]

    def __iter__(self):
        return iter(self._data)

    # arithmetic
    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            ocols = other.columns()
            data = [[_dot(r, c) for c in ocols] for r in self._data]
            return ExactMatrix._raw(data, self.rows, other.cols)
        vec = tuple(other)
        if len(vec) != self.cols:
            raise ValueError("shape mismatch in matrix-vector product")
        return tuple(_dot(r, vec) for r in self._data)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        _same_shape(self, other)
        data = [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)]
        return ExactMatrix._raw(data, self.rows, self.cols)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        _same_shape(self, other)
        data = [[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)]
        return ExactMatrix._raw(data, self.rows, self.cols)

    def __neg__(self):
        return ExactMatrix._raw([[-a for a in r] for r in self._data], self.rows, self.cols)

    def scale(self, c) -> "ExactMatrix":
        c = GaussianRational.coerce(c)
        return ExactMatrix._raw([[c * a for a in r] for r in self._data], self.rows, self.cols)

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix._raw([list(c) for c in zip(*self._data)] if self.rows else
                                [[] for _ in range(self.cols)], self.cols, self.rows)

    @property
    def H(self) -> "ExactMatrix":
        """Conjugate transpose."""
        return ExactMatrix._raw([[a.conj() for a in c] for c in zip(*self._data)] if self.rows else
                                [[] for _ in range(self.cols)], self.cols, self.rows)

    def conj(self) -> "ExactMatrix":
        return ExactMatrix._raw([[a.conj() for a in r] for r in self._data], self.rows, self.cols)

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        data = []
        for r in self._data:
            for s in other._data:
                data.append([a * b for a in r for b in s])
        return ExactMatrix._raw(data, self.rows * other.rows, self.cols * other.cols)

    def is_zero(self) -> bool:
        return not any(a for r in self._data for a in r)

    def is_hermitian(self) -> bool:
        if self.rows != self.cols:
            return False
        return all(self._data[i][j] == self._data[j][i].conj()
                   for i in range(self.rows) for j in range(i, self.cols))

    def is_gaussian_integer(self) -> bool:
        return all(a.is_gaussian_integer() for r in self._data for a in r)

    def trace(self) -> GaussianRational:
        t = ZERO
        for i in range(min(self.rows, self.cols)):
            t = t + self._data[i][i]
        return t

    def bits(self) -> int:
        return bits_of(self._data)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash(self._data)

    def to_numpy(self):
        import numpy as np

        return np.array([[complex(a) for a in r] for r in self._data],
                        dtype=complex).reshape(self.rows, self.cols)

    def to_strings(self) -> list[list[str]]:
        return [[str(a) for a in r] for r in self._data]

    def __repr__(self):
        return f"ExactMatrix({self.to_strings()})"


def _dot(u: Sequence[GaussianRational], v: Sequence[GaussianRational]) -> GaussianRational:
    re_acc = _Q0
    im_acc = _Q0
    for a, b in zip(u, v):
        ar, ai, br, bi = a.real, a.imag, b.real, b.imag
        if not ai and not bi:
            if ar and br:
                re_acc += ar * br
            continue
        re_acc += ar * br - ai * bi
        im_acc += ar * bi + ai * br
    return _mk(re_acc, im_acc)


def _same_shape(a: ExactMatrix, b: ExactMatrix) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


# --- elimination -----------------------------------------------------------

def _rref_inplace(M: list[list[GaussianRational]], ncols: int, track: list | None = None):
    """Reduce ``M`` (list of row lists) to reduced row echelon form.

    Pivot rule: leftmost column first, first nonzero row within it.
    Row operations are mirrored onto ``track`` (another list of rows) if given.
    Returns the pivot column list.
    """
    pivots = []
    nrows = len(M)
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        piv = next((i for i in range(r, nrows) if M[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
            if track is not None:
                track[r], track[piv] = track[piv], track[r]
        inv = M[r][c].inverse()
        if inv != ONE:
            M[r] = [inv * a for a in M[r]]
            if track is not None:
                track[r] = [inv * a for a in track[r]]
        prow = M[r]
        trow = track[r] if track is not None else None
        for i in range(nrows):
            if i == r:
                continue
            f = M[i][c]
            if not f:
                continue
            M[i] = [a - f * b if b else a for a, b in zip(M[i], prow)]
            if track is not None:
                track[i] = [a - f * b if b else a for a, b in zip(track[i], trow)]
        pivots.append(c)
        r += 1
        if _TRACKERS:
            _observe(a for row in M for a in row)
    return pivots


def rref(A: ExactMatrix) -> tuple[ExactMatrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = A.tolist()
    piv = _rref_inplace(M, A.cols)
    return ExactMatrix._raw(M, A.rows, A.cols), piv


def rank(A: ExactMatrix) -> int:
    return len(rref(A)[1])


@dataclass(frozen=True)
class RankNormalForm:
    """``P @ A @ Q_inv`` is the block matrix ``[[I_rank, 0], [0, 0]]``."""

    P: ExactMatrix
    Q: ExactMatrix
    Q_inv: ExactMatrix
    rank: int

    def block(self, rows: int, cols: int) -> ExactMatrix:
        return ExactMatrix._raw(
            [[ONE if (i == j and i < self.rank) else ZERO for j in range(cols)] for i in range(rows)],
            rows, cols)


def gauss_eliminate(A: ExactMatrix) -> RankNormalForm:
    """Rank normal form by row reduction followed by column clearing."""
    m, n = A.shape
    M = A.tolist()
    P = ExactMatrix.identity(m).tolist()
    piv = _rref_inplace(M, n, P)
    r = len(piv)
    nonpiv = [j for j in range(n) if j not in set(piv)]
    order = piv + nonpiv  # column permutation bringing pivots first
    # Column ops E = Perm @ [[I, -B], [0, I]] with B = rows[:r] restricted to non-pivot columns.
    E = [[ZERO] * n for _ in range(n)]
    Einv = [[ZERO] * n for _ in range(n)]
    for new_pos, old in enumerate(order):
        E[old][new_pos] = ONE
    # Q = E^-1 = [[I, B], [0, I]] @ Perm^T
    for new_pos, old in enumerate(order):
        Einv[new_pos][old] = ONE
    for a in range(r):
        for b, col in enumerate(nonpiv):
            coef = M[a][col]
            if not coef:
                continue
            # E[:, r+b] -= coef * E[:, a]  (E[:, a] is e_{piv[a]})
            E[piv[a]][r + b] = E[piv[a]][r + b] - coef
            # Q row a += coef * row (r+b) of Perm^T  (that row is e_{nonpiv[b]})
            Einv[a][col] = Einv[a][col] + coef
    return RankNormalForm(
        P=ExactMatrix._raw(P, m, m),
        Q=ExactMatrix._raw(Einv, n, n),
        Q_inv=ExactMatrix._raw(E, n, n),
        rank=r,
    )


def inverse(A: ExactMatrix) -> ExactMatrix:
    if A.rows != A.cols:
        raise ValueError("inverse of non-square matrix")
    M = A.tolist()
    T = ExactMatrix.identity(A.rows).tolist()
    piv = _rref_inplace(M, A.cols, T)
    if len(piv) != A.rows:
        raise ZeroDivisionError("singular matrix")
    return ExactMatrix._raw(T, A.rows, A.rows)


def pseudoinverse(A: ExactMatrix, integral: bool = False) -> ExactMatrix:
    """Generalized inverse with ``A @ Ap @ w == w`` for every ``w`` in Im(A).

    For square ``A`` this is the nonsingular ``Q_inv @ P`` built from the rank
    normal form, which also maps a complement of Im(A) onto ker(A).  For
    rectangular ``A`` the identity block is padded with zeros.  With
    ``integral=True`` the result is multiplied by the least common denominator
    so every entry is a Gaussian integer (only spans matter downstream).
    """
    m, n = A.shape
    nf = gauss_eliminate(A)
    if m == n:
        Ap = nf.Q_inv @ nf.P
    else:
        Ap = nf.Q_inv @ nf.block(n, m) @ nf.P
    if integral:
        Ap = clear_denominators(Ap)
    _observe(a for row in Ap for a in row)
    return Ap


def clear_denominators(A: ExactMatrix) -> ExactMatrix:
    """Scale by the lcm of all denominators (result has Gaussian-integer entries)."""
    rows = [list(r) for r in A]
    return ExactMatrix._raw([list(v) for v in _clear_vectors(rows)], A.rows, A.cols)


def _clear_vectors(vectors):
    den = mpz(1)
    for v in vectors:
        for a in v:
            den = _lcm(den, a.real.denominator)
            den = _lcm(den, a.imag.denominator)
    if den == 1:
        return [tuple(v) for v in vectors]
    c = _mk(mpq(den), _Q0)
    return [tuple(c * a for a in v) for v in vectors]


def _lcm(a, b):
    from gmpy2 import lcm

    return lcm(a, b)


def _integral_vector(v: Sequence[GaussianRational]) -> Vector:
    """Scale ``v`` to a primitive-ish Gaussian-integer vector (same span)."""
    den = mpz(1)
    for a in v:
        den = _lcm(den, a.real.denominator)
        den = _lcm(den, a.imag.denominator)
    if den != 1:
        c = _mk(mpq(den), _Q0)
        v = tuple(c * a for a in v)
    from gmpy2 import gcd

    g = mpz(0)
    for a in v:
        g = gcd(g, a.real.numerator)
        g = gcd(g, a.imag.numerator)
    if g > 1:
        c = _mk(mpq(1, g), _Q0)
        v = tuple(c * a for a in v)
    return tuple(v)


def nullspace(A: ExactMatrix, integral: bool = True) -> list[Vector]:
    """Basis of ker(A) (column vectors), one per free column."""
    R, piv = rref(A)
    n = A.cols
    pivset = set(piv)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = [ZERO] * n
        v[f] = ONE
        for row, c in enumerate(piv):
            v[c] = -R[row, f]
        basis.append(_integral_vector(v) if integral else tuple(v))
    return basis


class _Echelon:
    """Incrementally maintained reduced basis used for independence tests."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[GaussianRational]] = []
        self.pivots: list[int] = []

    def reduce(self, v: Sequence[GaussianRational]) -> list[GaussianRational]:
        w = list(v)
        for row, c in zip(self.rows, self.pivots):
            f = w[c]
            if f:
                w = [a - f * b if b else a for a, b in zip(w, row)]
        return w

    def add(self, v: Sequence[GaussianRational]) -> bool:
        w = self.reduce(v)
        c = next((i for i, a in enumerate(w) if a), None)
        if c is None:
            return False
        inv = w[c].inverse()
        w = [inv * a for a in w]
        for k, row in enumerate(self.rows):
            f = row[c]
            if f:
                self.rows[k] = [a - f * b if b else a for a, b in zip(row, w)]
        self.rows.append(w)
        self.pivots.append(c)
        if _TRACKERS:
            _observe(w)
        return True

    def contains(self, v: Sequence[GaussianRational]) -> bool:
        return not any(self.reduce(v))

    @property
    def rank(self) -> int:
        return len(self.rows)


def max_independent_columns(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of the first linearly independent vectors, greedily in input order."""
    vectors = [tuple(GaussianRational.coerce(a) for a in v) for v in vectors]
    if not vectors:
        return []
    ech = _Echelon(len(vectors[0]))
    chosen = []
    for i, v in enumerate(vectors):
        if ech.rank == ech.dim:
            break
        if ech.add(v):
            chosen.append(i)
    return chosen


def column_basis(A: ExactMatrix) -> list[Vector]:
    """Basis of Im(A) chosen among the columns of ``A``."""
    cols = A.columns()
    return [cols[i] for i in max_independent_columns(cols)]


def span_dim(vectors: Sequence[Sequence]) -> int:
    return len(max_independent_columns(vectors))


def contains(basis: Sequence[Sequence], v: Sequence, dim: int | None = None) -> bool:
    """Whether ``v`` lies in span(basis)."""
    if not basis:
        return not any(GaussianRational.coerce(a) for a in v)
    ech = _Echelon(len(basis[0]))
    for b in basis:
        ech.add([GaussianRational.coerce(a) for a in b])
    return ech.contains([GaussianRational.coerce(a) for a in v])


def same_span(U: Sequence[Sequence], V: Sequence[Sequence]) -> bool:
    du, dv = span_dim(U), span_dim(V)
    if du != dv:
        return False
    return span_dim(list(U) + list(V)) == du


def sum_basis(U: Sequence[Sequence], V: Sequence[Sequence]) -> list[Vector]:
    allv = [tuple(GaussianRational.coerce(a) for a in v) for v in list(U) + list(V)]
    return [allv[i] for i in max_independent_columns(allv)]


def orth_complement(basis: Sequence[Sequence], dim: int) -> list[Vector]:
    """Basis of {v : u^H v = 0 for all u in basis} inside C^dim."""
    if not basis:
        return [tuple(ONE if i == j else ZERO for i in range(dim)) for j in range(dim)]
    rows = [[GaussianRational.coerce(a).conj() for a in u] for u in basis]
    return nullspace(ExactMatrix._raw(rows, len(rows), dim))


def intersection_basis(U: Sequence[Sequence], V: Sequence[Sequence], dim: int) -> list[Vector]:
    """Basis of span(U) ∩ span(V)."""
    if not U or not V:
        return []
    # solve U a = V b
    cols = [tuple(GaussianRational.coerce(a) for a in u) for u in U]
    cols += [tuple(-GaussianRational.coerce(a) for a in v) for v in V]
    M = ExactMatrix.from_columns(cols)
    ker = nullspace(M)
    nu = len(U)
    Ucols = [tuple(GaussianRational.coerce(a) for a in u) for u in U]
    vecs = []
    for k in ker:
        vec = [ZERO] * dim
        for coef, u in zip(k[:nu], Ucols):
            if coef:
                vec = [a + coef * b for a, b in zip(vec, u)]
        vecs.append(tuple(vec))
    return [vecs[i] for i in max_independent_columns(vecs)]


def image_under(generators: Sequence[ExactMatrix], U: Sequence[Sequence]) -> list[Vector]:
    """Basis of the subspace spanned by {A u : A in generators, u in U}."""
    vecs = [A @ u for u in U for A in generators]
    return [vecs[i] for i in max_independent_columns(vecs)] if vecs else []


def preimage(A: ExactMatrix, W: Sequence[Sequence]) -> list[Vector]:
    """Basis of {u : A u in span(W)}."""
    m, n = A.shape
    cols = A.columns() + [tuple(-GaussianRational.coerce(a) for a in w) for w in W]
    if not cols:
        return []
    M = ExactMatrix.from_columns(cols) if m else ExactMatrix.zeros(0, len(cols))
    ker = nullspace(M) if m else [tuple(ONE if i == j else ZERO for i in range(len(cols)))
                                   for j in range(len(cols))]
    us = [tuple(k[:n]) for k in ker]
    us = [u for u in us if any(u)]
    return [_integral_vector(us[i]) for i in max_independent_columns(us)]


def gram_schmidt(basis: Sequence[Sequence]) -> tuple[list[Vector], ExactMatrix]:
    """Orthogonalize an independent list; returns (orthogonal basis, projection)."""
    basis = [tuple(GaussianRational.coerce(a) for a in v) for v in basis]
    if not basis:
        raise ValueError("gram_schmidt needs at least one vector (dimension unknown)")
    dim = len(basis[0])
    if span_dim(basis) != len(basis):
        raise ValueError("gram_schmidt: input vectors are linearly dependent")
    out: list[Vector] = []
    norms: list[mpq] = []
    for v in basis:
        w = list(v)
        for b, nb in zip(out, norms):
            coef = _hdot(b, v) / _mk(nb, _Q0)
            if coef:
                w = [a - coef * x for a, x in zip(w, b)]
        w = _integral_vector(w)
        out.append(w)
        norms.append(sum((a.abs2() for a in w), _Q0))
        _observe(w)
    return out, _proj_from_orthogonal(out, norms, dim)


def _hdot(u, v) -> GaussianRational:
    """u^H v."""
    return _dot([a.conj() for a in u], v)


def _proj_from_orthogonal(out, norms, dim) -> ExactMatrix:
    P = [[ZERO] * dim for _ in range(dim)]
    for b, nb in zip(out, norms):
        inv = _mk(1 / nb, _Q0)
        bc = [a.conj() for a in b]
        for i in range(dim):
            if not b[i]:
                continue
            bi = b[i] * inv
            row = P[i]
            for j in range(dim):
                if bc[j]:
                    row[j] = row[j] + bi * bc[j]
    Pm = ExactMatrix._raw(P, dim, dim)
    _observe(a for row in P for a in row)
    return Pm


def projection(basis: Sequence[Sequence], dim: int) -> ExactMatrix:
    """Orthogonal projection onto span(basis) (basis may be dependent)."""
    basis = [tuple(GaussianRational.coerce(a) for a in v) for v in basis]
    indep = [basis[i] for i in max_independent_columns(basis)]
    if not indep:
        return ExactMatrix.zeros(dim, dim)
    return gram_schmidt(indep)[1]
