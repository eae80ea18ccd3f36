"""GF(2^m) arithmetic and the linear algebra the code constructions need.

A field element is an integer in ``[0, 2^m)``: bit ``i`` is the
coefficient of ``x^i``, addition is XOR, and products are reduced modulo
an irreducible polynomial of degree ``m`` (encoded the same way, with the
degree-``m`` bit set).  One standard polynomial per width is built in;
any other irreducible polynomial can be supplied explicitly and is
checked exhaustively at construction, which is cheap for ``m <= 16``.

Multiplication and inversion run off discrete-log tables anchored at a
primitive element found by search, so non-primitive irreducible
polynomials work too.  Matrices are plain numpy ``int64`` arrays; rank
and solving are Gaussian elimination with first-nonzero pivoting and are
dispatched to the kernels in ``_kernels``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels

MIN_M = 2
MAX_M = 16

# One irreducible (in fact primitive) polynomial per supported width.
DEFAULT_POLYS = {
    2: 0x7,        # x^2 + x + 1
    3: 0xB,        # x^3 + x + 1
    4: 0x13,       # x^4 + x + 1
    5: 0x25,       # x^5 + x^2 + 1
    6: 0x43,       # x^6 + x + 1
    7: 0x89,       # x^7 + x^3 + 1
    8: 0x11D,      # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,      # x^9 + x^4 + 1
    10: 0x409,     # x^10 + x^3 + 1
    11: 0x805,     # x^11 + x^2 + 1
    12: 0x1053,    # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,    # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,    # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,    # x^15 + x + 1
    16: 0x1100B,   # x^16 + x^12 + x^3 + x + 1
}


class UnsolvableError(ValueError):
    """Linear system has fewer independent equations than unknowns."""


class InconsistentSystemError(ValueError):
    """Linear system admits no solution at all."""


def _poly_deg(p):
    return p.bit_length() - 1


def _poly_mod(a, b):
    db = _poly_deg(b)
    while a.bit_length() - 1 >= db and a:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _is_irreducible(poly, m):
    # Trial division by every polynomial of degree 1..m//2 suffices for
    # the supported widths.
    for deg in range(1, m // 2 + 1):
        for low in range(1 << deg):
            if _poly_mod(poly, (1 << deg) | low) == 0:
                return False
    return True


def _mul_mod(a, b, poly, m):
    top = 1 << m
    res = 0
    while b:
        if b & 1:
            res ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return res


@dataclass(frozen=True)
class FieldSpec:
    """Immutable description of one GF(2^m) instance."""

    m: int
    poly: int = 0

    def __post_init__(self):
        if not MIN_M <= self.m <= MAX_M:
            raise ValueError(f"field width m={self.m} outside [{MIN_M}, {MAX_M}]")
        if self.poly == 0:
            object.__setattr__(self, "poly", DEFAULT_POLYS[self.m])
        if _poly_deg(self.poly) != self.m:
            raise ValueError(
                f"reduction polynomial {self.poly:#x} does not have degree {self.m}"
            )
        if not _is_irreducible(self.poly, self.m):
            raise ValueError(f"reduction polynomial {self.poly:#x} is reducible")

    @property
    def q(self):
        return 1 << self.m

    @property
    def hex_digits(self):
        return (self.m + 3) // 4

    def element_to_hex(self, value):
        value = int(value)
        if not 0 <= value < self.q:
            raise ValueError(f"element {value} outside GF(2^{self.m})")
        return f"{value:0{self.hex_digits}x}"

    def element_from_hex(self, text):
        value = int(text, 16)
        if not 0 <= value < self.q:
            raise ValueError(f"hex {text!r} outside GF(2^{self.m})")
        return value

    def to_json(self):
        return {"m": self.m, "poly": f"{self.poly:#x}"}

    @classmethod
    def from_json(cls, doc):
        poly = doc["poly"]
        if isinstance(poly, str):
            poly = int(poly, 16)
        return cls(m=int(doc["m"]), poly=poly)


@lru_cache(maxsize=None)
def _tables(m, poly):
    """log/exp tables for (m, poly), anchored at a primitive element."""
    q = 1 << m
    # factor q-1 to test element orders
    factors = []
    rem = q - 1
    f = 2
    while f * f <= rem:
        if rem % f == 0:
            factors.append(f)
            while rem % f == 0:
                rem //= f
        f += 1
    if rem > 1:
        factors.append(rem)

    def power(a, e):
        acc = 1
        while e:
            if e & 1:
                acc = _mul_mod(acc, a, poly, m)
            a = _mul_mod(a, a, poly, m)
            e >>= 1
        return acc

    gen = 0
    for cand in range(2, q):
        if all(power(cand, (q - 1) // p) != 1 for p in factors):
            gen = cand
            break
    assert gen, "no primitive element found (polynomial not irreducible?)"

    log = np.zeros(q, dtype=np.int64)
    exp = np.zeros(2 * (q - 1), dtype=np.int64)
    v = 1
    for i in range(q - 1):
        exp[i] = v
        exp[i + q - 1] = v
        log[v] = i
        v = _mul_mod(v, gen, poly, m)
    return log, exp


def _spec_tables(spec):
    return _tables(spec.m, spec.poly)


def _check_element(spec, a):
    a = int(a)
    if not 0 <= a < spec.q:
        raise ValueError(f"element {a} outside GF(2^{spec.m})")
    return a


def fe_add(spec, a, b):
    """Field addition: XOR of the bit representations."""
    return _check_element(spec, a) ^ _check_element(spec, b)


def fe_mul(spec, a, b):
    """Field multiplication modulo the reduction polynomial."""
    a = _check_element(spec, a)
    b = _check_element(spec, b)
    if a == 0 or b == 0:
        return 0
    log, exp = _spec_tables(spec)
    return int(exp[log[a] + log[b]])


def fe_inv(spec, a):
    """Multiplicative inverse; zero has none."""
    a = _check_element(spec, a)
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^m)")
    log, exp = _spec_tables(spec)
    return int(exp[spec.q - 1 - log[a]])


def mul_vec(spec, a, b):
    """Elementwise field product of two broadcastable int arrays."""
    log, exp = _spec_tables(spec)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = exp[log[a] + log[b]]
    return np.where((a == 0) | (b == 0), 0, out)


def matmul(spec, a, b):
    """Field matrix product of (r, n) by (n, c)."""
    a = as_matrix(spec, a)
    b = as_matrix(spec, b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} x {b.shape}")
    prods = mul_vec(spec, a[:, :, None], b[None, :, :])
    return np.bitwise_xor.reduce(prods, axis=1)


def matvec(spec, a, x):
    """Field matrix-vector product."""
    return matmul(spec, a, np.asarray(x, dtype=np.int64).reshape(-1, 1))[:, 0]


def as_matrix(spec, data):
    """Validate and copy arbitrary nested data into an int64 element matrix."""
    mat = np.array(data, dtype=np.int64)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={mat.ndim}")
    if mat.size and (mat.min() < 0 or mat.max() >= spec.q):
        raise ValueError(f"matrix entries outside GF(2^{spec.m})")
    return mat


def rank(spec, mat):
    """Row rank over the field, by Gaussian elimination."""
    a = as_matrix(spec, mat)
    if a.shape[0] == 0 or a.shape[1] == 0:
        return 0
    log, exp = _spec_tables(spec)
    return int(_kernels.gf_rank(a, log, exp, spec.q))


def solve(spec, mat, rhs):
    """Solve mat @ x = rhs over the field.

    ``rhs`` may be a vector or a matrix of stacked right-hand sides; the
    result has matching shape.  Raises :class:`InconsistentSystemError`
    when no solution exists and :class:`UnsolvableError` when the system
    does not pin down all unknowns.
    """
    a = as_matrix(spec, mat)
    b = np.asarray(rhs, dtype=np.int64)
    single = b.ndim == 1
    if single:
        b = b.reshape(-1, 1)
    b = as_matrix(spec, b)
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"rhs has {b.shape[0]} rows, matrix has {a.shape[0]}")
    log, exp = _spec_tables(spec)
    status, x = _kernels.gf_solve(a, b.copy(), log, exp, spec.q)
    if status == 2:
        raise InconsistentSystemError("system admits no solution")
    if status == 1:
        raise UnsolvableError("coefficient matrix is rank deficient")
    return x[:, 0] if single else x


def subset_ranks(spec, rows, masks):
    """Rank of every masked row subset of ``rows``.

    ``masks`` is boolean with shape (n_subsets, n_rows); returns an int64
    array of ranks.
    """
    rows = as_matrix(spec, rows)
    masks = np.ascontiguousarray(np.asarray(masks, dtype=bool))
    if masks.ndim != 2 or masks.shape[1] != rows.shape[0]:
        raise ValueError("masks must be (n_subsets, n_rows) boolean")
    log, exp = _spec_tables(spec)
    return _kernels.gf_subset_ranks(rows, masks, log, exp, spec.q)
