"""Exact arithmetic over GF(p) and GF(p^m) in polynomial basis.

Scalars are residues in [0, p).  Vectors and matrices hold numpy int64
arrays reduced mod p and frozen after construction, so every value in
this module is safe to share across threads.  Extension-field elements
are m-tuples of GF(p) coefficients (coefficient of x^i at index i);
multiplication reduces by a monic irreducible modulus.

Primality and irreducibility are checked by brute force, which is fine
at the intended scale (p up to ~1031, m up to 16).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class FieldMismatchError(ValueError):
    """Operands belong to different fields."""


class ZeroInversionError(ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


class PrimeField:
    """The prime field GF(p), operating on plain int residues."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = int(p)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def check(self, value: int) -> int:
        v = int(value)
        if not 0 <= v < self.p:
            raise ValueError(f"{value} is not a residue mod {self.p}")
        return v

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroInversionError(f"0 has no inverse in {self!r}")
        return pow(a, self.p - 2, self.p)

    def scalar(self, value: int) -> "FieldScalar":
        return FieldScalar(value % self.p, self)

    def vector(self, coords: Iterable[int]) -> "FieldVector":
        return FieldVector(self, coords)

    def matrix(self, rows) -> "FieldMatrix":
        return FieldMatrix(self, rows)


@dataclass(frozen=True)
class FieldScalar:
    """A single GF(p) residue bound to its field."""

    value: int
    field: PrimeField

    def __post_init__(self):
        self.field.check(self.value)

    def _peer(self, other: "FieldScalar") -> int:
        if not isinstance(other, FieldScalar):
            raise TypeError(f"cannot combine FieldScalar with {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatchError(f"{self.field!r} vs {other.field!r}")
        return other.value

    def __add__(self, other):
        return FieldScalar(self.field.add(self.value, self._peer(other)), self.field)

    def __sub__(self, other):
        return FieldScalar(self.field.sub(self.value, self._peer(other)), self.field)

    def __mul__(self, other):
        return FieldScalar(self.field.mul(self.value, self._peer(other)), self.field)

    def __neg__(self):
        return FieldScalar(self.field.neg(self.value), self.field)

    def inv(self) -> "FieldScalar":
        return FieldScalar(self.field.inv(self.value), self.field)

    def lift(self) -> int:
        return symmetric_lift(self.value, self.field.p)


def symmetric_lift(value: int | FieldScalar, p: int | None = None) -> int:
    """Representative of a residue in (-p/2, p/2], congruent to it mod p."""
    if isinstance(value, FieldScalar):
        p = value.field.p
        value = value.value
    if p is None:
        raise TypeError("symmetric_lift of a bare int needs the modulus p")
    v = value % p
    return v if v <= p // 2 else v - p


def _as_int_array(values, p: int) -> np.ndarray:
    arr = np.array(values, dtype=np.int64) % p
    arr.setflags(write=False)
    return arr


class FieldVector:
    """Immutable row vector over GF(p)."""

    __slots__ = ("field", "_coords")

    def __init__(self, field: PrimeField, coords: Iterable[int]):
        self.field = field
        arr = _as_int_array(list(coords), field.p)
        if arr.ndim != 1:
            raise ValueError("FieldVector needs a 1-d coordinate list")
        self._coords = arr

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self._coords)

    def as_array(self) -> np.ndarray:
        return self._coords

    def __len__(self) -> int:
        return int(self._coords.shape[0])

    def __getitem__(self, i: int) -> int:
        return int(self._coords[i])

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldVector)
            and other.field == self.field
            and other.coords == self.coords
        )

    def __hash__(self) -> int:
        return hash((self.field, self.coords))

    def __add__(self, other: "FieldVector") -> "FieldVector":
        if other.field != self.field:
            raise FieldMismatchError("vector addition across fields")
        if len(other) != len(self):
            raise ValueError("length mismatch")
        return FieldVector(self.field, (self._coords + other._coords) % self.field.p)

    def scale(self, c: int) -> "FieldVector":
        return FieldVector(self.field, (self._coords * (c % self.field.p)) % self.field.p)

    def is_zero(self) -> bool:
        return not self._coords.any()

    def __repr__(self) -> str:
        digits = "".join(str(c) for c in self.coords) if self.field.p <= 10 else str(self.coords)
        return f"FieldVector({self.field!r}, {digits})"


class FieldMatrix:
    """Immutable rectangular matrix over GF(p)."""

    __slots__ = ("field", "_a")

    def __init__(self, field: PrimeField, rows):
        self.field = field
        if isinstance(rows, FieldMatrix):
            rows = rows._a
        if isinstance(rows, (list, tuple)) and rows and isinstance(rows[0], FieldVector):
            rows = [r.as_array() for r in rows]
        arr = _as_int_array(rows, field.p)
        if arr.ndim != 2:
            raise ValueError("FieldMatrix needs a 2-d row list")
        self._a = arr

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self._a.shape)  # type: ignore[return-value]

    def as_array(self) -> np.ndarray:
        return self._a

    def row(self, i: int) -> FieldVector:
        return FieldVector(self.field, self._a[i])

    def rows(self) -> list[FieldVector]:
        return [self.row(i) for i in range(self.shape[0])]

    def scale(self, c: int) -> "FieldMatrix":
        return FieldMatrix(self.field, (self._a * (c % self.field.p)) % self.field.p)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        if other.field != self.field:
            raise FieldMismatchError("matrix addition across fields")
        return FieldMatrix(self.field, (self._a + other._a) % self.field.p)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and other.field == self.field
            and other.shape == self.shape
            and bool(np.array_equal(other._a, self._a))
        )

    def __hash__(self) -> int:
        return hash((self.field, self._a.tobytes(), self.shape))

    @classmethod
    def vstack(cls, blocks: Sequence["FieldMatrix"]) -> "FieldMatrix":
        field = blocks[0].field
        if any(b.field != field for b in blocks):
            raise FieldMismatchError("stacking across fields")
        return cls(field, np.vstack([b._a for b in blocks]))

    def rank(self) -> int:
        return rank(self)

    def __repr__(self) -> str:
        return f"FieldMatrix({self.field!r}, shape={self.shape})"


def mat_mul(x: FieldVector | FieldMatrix, m: FieldMatrix) -> FieldVector | FieldMatrix:
    """Product x @ m with entries reduced mod p."""
    if x.field != m.field:
        raise FieldMismatchError("product across fields")
    p = m.field.p
    xa = x.as_array()
    inner = xa.shape[-1]
    if inner != m.shape[0]:
        raise ValueError(f"inner dimensions disagree: {inner} vs {m.shape[0]}")
    prod = (xa.astype(object) @ m.as_array().astype(object)) % p if p > 46341 else (xa @ m.as_array()) % p
    if isinstance(x, FieldVector):
        return FieldVector(m.field, prod)
    return FieldMatrix(m.field, prod)


def row_reduce(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(p); returns (rref, pivot columns)."""
    m = np.array(a, dtype=np.int64) % p
    n_rows, n_cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        pivot = r + int(nz[0])
        if pivot != r:
            m[[r, pivot]] = m[[pivot, r]]
        m[r] = (m[r] * pow(int(m[r, c]), p - 2, p)) % p
        col = m[:, c].copy()
        col[r] = 0
        m = (m - np.outer(col, m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(m: FieldMatrix | np.ndarray, p: int | None = None) -> int:
    """Row rank over GF(p) by Gaussian elimination."""
    if isinstance(m, FieldMatrix):
        p = m.field.p
        m = m.as_array()
    if p is None:
        raise TypeError("rank of a bare array needs the modulus p")
    if m.size == 0:
        return 0
    _, pivots = row_reduce(m, p)
    return len(pivots)


# --------------------------------------------------------------------------
# Extension fields GF(p^m)
# --------------------------------------------------------------------------

def _poly_trim(c: tuple[int, ...]) -> tuple[int, ...]:
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return c[:i]


def _poly_mul(a: tuple[int, ...], b: tuple[int, ...], p: int) -> tuple[int, ...]:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(tuple(out))


def _poly_mod(a: tuple[int, ...], mod: tuple[int, ...], p: int) -> tuple[int, ...]:
    # mod must be monic
    a = list(a)
    dm = len(mod) - 1
    while len(a) > dm:
        lead = a[-1] % p
        if lead:
            shift = len(a) - 1 - dm
            for i, ci in enumerate(mod):
                a[shift + i] = (a[shift + i] - lead * ci) % p
        a.pop()
    return _poly_trim(tuple(a))


def _all_monic_polys(p: int, degree: int):
    for tail in np.ndindex(*([p] * degree)):
        yield tuple(tail) + (1,)


def poly_is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Brute-force irreducibility: no roots, no monic factor of degree <= deg/2."""
    c = _poly_trim(tuple(int(x) % p for x in coeffs))
    deg = len(c) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for a in range(p):
        if sum(ci * pow(a, i, p) for i, ci in enumerate(c)) % p == 0:
            return False
    monic = tuple((ci * pow(c[-1], p - 2, p)) % p for ci in c)
    for d in range(2, deg // 2 + 1):
        for f in _all_monic_polys(p, d):
            if not _poly_mod(monic, f, p):
                return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def poly_is_primitive(coeffs: Sequence[int], p: int) -> bool:
    """True when x generates the full multiplicative group mod the polynomial."""
    c = _poly_trim(tuple(int(v) % p for v in coeffs))
    m = len(c) - 1
    if m < 1 or not poly_is_irreducible(c, p):
        return False
    order = p**m - 1
    x = (0, 1) if m > 1 else ((-c[0] * pow(c[1], p - 2, p)) % p,)
    if m == 1:
        g = x[0] if x else 0
        if g == 0:
            return False
        return all(pow(g, order // q, p) != 1 for q in _prime_factors(order))
    for q in _prime_factors(order):
        if _poly_powmod(x, order // q, c, p) == (1,):
            return False
    return True


def _poly_powmod(base: tuple[int, ...], e: int, mod: tuple[int, ...], p: int) -> tuple[int, ...]:
    result: tuple[int, ...] = (1,)
    b = _poly_mod(base, mod, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, b, p), mod, p)
        b = _poly_mod(_poly_mul(b, b, p), mod, p)
        e >>= 1
    return result


@lru_cache(maxsize=None)
def default_modulus(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic primitive polynomial of degree m over GF(p)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    if p**m > 2**24:
        raise ValueError(f"GF({p}^{m}) is beyond the brute-force search budget")
    for cand in _all_monic_polys(p, m):
        if poly_is_primitive(cand, p):
            return cand
    raise RuntimeError(f"no primitive polynomial found for GF({p}^{m})")  # pragma: no cover


class ExtField:
    """GF(p^m) with elements as length-m coefficient tuples over GF(p)."""

    __slots__ = ("base", "m", "modulus", "_pow_table")

    def __init__(self, base: PrimeField, m: int, modulus: Sequence[int] | None = None):
        if m < 1:
            raise ValueError("extension degree must be >= 1")
        self.base = base
        self.m = int(m)
        if modulus is None:
            modulus = default_modulus(base.p, m)
        mod = _poly_trim(tuple(int(c) % base.p for c in modulus))
        if len(mod) != m + 1:
            raise ValueError(f"modulus degree {len(mod) - 1} does not match m={m}")
        if mod[-1] != 1:
            raise ValueError("modulus must be monic")
        if not poly_is_irreducible(mod, base.p):
            raise ValueError(f"modulus {mod} is reducible over GF({base.p})")
        self.modulus = mod
        self._pow_table: dict[int, tuple[int, ...]] | None = None

    @property
    def order(self) -> int:
        return self.base.p**self.m

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExtField)
            and other.base == self.base
            and other.m == self.m
            and other.modulus == self.modulus
        )

    def __hash__(self) -> int:
        return hash((self.base, self.m, self.modulus))

    def __repr__(self) -> str:
        return f"GF({self.base.p}^{self.m})"

    def _pad(self, c: tuple[int, ...]) -> tuple[int, ...]:
        return c + (0,) * (self.m - len(c))

    def element(self, coeffs: Iterable[int]) -> "ExtElement":
        c = tuple(int(v) % self.base.p for v in coeffs)
        if len(c) != self.m:
            raise ValueError(f"need exactly {self.m} coefficients")
        return ExtElement(self, c)

    def zero(self) -> "ExtElement":
        return self.element((0,) * self.m)

    def one(self) -> "ExtElement":
        return self.element((1,) + (0,) * (self.m - 1))

    def is_primitive(self) -> bool:
        return poly_is_primitive(self.modulus, self.base.p)

    def ext_pow(self, alpha_index: int | None) -> "ExtElement":
        """alpha^j in polynomial basis; index None is the zero element."""
        if alpha_index is None:
            return self.zero()
        j = int(alpha_index)
        if not 0 <= j <= self.order - 2:
            raise ValueError(f"alpha index {j} outside [0, {self.order - 2}]")
        if self._pow_table is None:
            table: dict[int, tuple[int, ...]] = {}
            x = (0, 1) if self.m > 1 else ((-self.modulus[0]) % self.base.p,)
            cur: tuple[int, ...] = (1,)
            for i in range(self.order - 1):
                table[i] = self._pad(cur)
                cur = _poly_mod(_poly_mul(cur, x, self.base.p), self.modulus, self.base.p)
            self._pow_table = table
        return ExtElement(self, self._pow_table[j])


@dataclass(frozen=True)
class ExtElement:
    """Element of GF(p^m) in polynomial-basis coordinates."""

    field: ExtField
    coeffs: tuple[int, ...]

    def as_vector(self) -> FieldVector:
        return FieldVector(self.field.base, self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: "ExtElement") -> "ExtElement":
        if other.field != self.field:
            raise FieldMismatchError("addition across extension fields")
        p = self.field.base.p
        return ExtElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: "ExtElement") -> "ExtElement":
        return ext_mul(self, other)


def ext_mul(a: ExtElement, b: ExtElement) -> ExtElement:
    """Polynomial product reduced by the field modulus."""
    if a.field != b.field:
        raise FieldMismatchError("product across extension fields")
    f = a.field
    prod = _poly_mod(_poly_mul(_poly_trim(a.coeffs), _poly_trim(b.coeffs), f.base.p), f.modulus, f.base.p)
    return ExtElement(f, f._pad(prod))


def ext_pow(field: ExtField, alpha_index: int | None) -> ExtElement:
    return field.ext_pow(alpha_index)
