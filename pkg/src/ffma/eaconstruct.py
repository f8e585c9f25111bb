"""Construction of p-ary element-assemblage (EA) multiple-access codes.

An EA code assigns each of M users an assemblage: an ordered p-tuple of
GF(p̆) m-tuples, one per source digit.  Collecting entry ς of every
assemblage row-wise gives the full-ς generator matrix G^ς; the family
constructors below differ only in how those matrices are produced:

  orthogonal    G^1 = I, G^2 = 2I (loading factor 1)
  AI-D-CWEA     G^2 is the additive inverse 2*G^1 of a full-rank ternary G^1
  BD-D-CWEA     disjoint subsets of an independent basis feed the blocks
  NO-CWEA       M > m with a declared finite-to-complex constellation map
  p-ary-BD      source digits expanded in base 3 onto stacked ternary blocks
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exactcomplex import ExactComplex, parse_complex
from .ffcore import FieldMatrix, FieldVector, PrimeField, mat_mul, rank

DCWEA_FAMILIES = ("D-CWEA", "AI-D-CWEA", "BD-D-CWEA", "orthogonal")
ALL_FAMILIES = DCWEA_FAMILIES + ("NO-CWEA", "p-ary-BD")


class ConstructionError(ValueError):
    """A constructor precondition failed; carries the offending rank when known."""

    def __init__(self, msg: str, rank_found: int | None = None):
        super().__init__(msg)
        self.rank_found = rank_found


class CodeSpecError(ValueError):
    """Invalid code-spec document; `pointer` names the offending field."""

    def __init__(self, msg: str, pointer: str):
        super().__init__(f"{pointer}: {msg}")
        self.pointer = pointer


@dataclass(frozen=True)
class ElementAssemblage:
    """Ordered p-tuple of pairwise-distinct m-tuples; entry ς answers digit ς."""

    entries: tuple[FieldVector, ...]

    def __post_init__(self):
        if len(self.entries) < 2:
            raise ConstructionError("an assemblage needs at least two entries")
        lengths = {len(e) for e in self.entries}
        if len(lengths) != 1:
            raise ConstructionError("assemblage entries must share one length")
        if len({e.coords for e in self.entries}) != len(self.entries):
            raise ConstructionError("assemblage entries must be pairwise distinct")

    @property
    def p(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries[0])

    def entry(self, digit: int) -> FieldVector:
        if not 0 <= digit < self.p:
            raise ValueError(f"digit {digit} outside [0, {self.p})")
        return self.entries[digit]


@dataclass(frozen=True)
class GeneratorMatrixSet:
    """Full-ς generator matrices, keyed by the common digit ς."""

    matrices: Mapping[int, FieldMatrix]

    def __getitem__(self, digit: int) -> FieldMatrix:
        return self.matrices[digit]


@dataclass(frozen=True)
class ParallelGeneratorMatrix:
    """Vertical stack [G^(N_d); ...; G^(1)] used for parallel encoding/decoding."""

    matrix: FieldMatrix
    n_blocks: int
    users: int

    def __post_init__(self):
        if self.n_blocks * self.users != self.matrix.shape[0]:
            raise ConstructionError("block count x users must equal the row count")

    def block(self, significance: int) -> FieldMatrix:
        """Block G^(significance), 1 = least significant."""
        if not 1 <= significance <= self.n_blocks:
            raise ValueError("significance outside [1, n_blocks]")
        top = self.n_blocks - significance
        rows = self.matrix.as_array()[top * self.users : (top + 1) * self.users]
        return FieldMatrix(self.matrix.field, rows)


@dataclass(frozen=True)
class ComplexGeneratorMatrixSet:
    """Images of the full-ς matrices under a finite-to-complex map."""

    points: Mapping[int, tuple[tuple[ExactComplex, ...], ...]]
    f2c: Mapping[int, ExactComplex]

    def __getitem__(self, digit: int) -> tuple[tuple[ExactComplex, ...], ...]:
        return self.points[digit]


@dataclass(frozen=True)
class EACode:
    """An M-user p-ary EA code over GF(p̆^m)."""

    p: int
    field: PrimeField  # characteristic p̆ of the codeword entries
    m: int
    assemblages: tuple[ElementAssemblage, ...]
    family: str
    parallel: ParallelGeneratorMatrix | None = None
    complex_set: ComplexGeneratorMatrixSet | None = None
    n_d: int | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in ALL_FAMILIES:
            raise ConstructionError(f"unknown family {self.family!r}")
        if not self.assemblages:
            raise ConstructionError("a code needs at least one assemblage")
        for a in self.assemblages:
            if a.p != self.p or a.m != self.m:
                raise ConstructionError("assemblage shape disagrees with the code")
        if self.family in DCWEA_FAMILIES:
            for a in self.assemblages:
                if not a.entry(0).is_zero():
                    raise ConstructionError("D-CWEA assemblages must answer digit 0 with zero")
        if self.family in ("AI-D-CWEA", "orthogonal"):
            for a in self.assemblages:
                if a.entry(2) != a.entry(1).scale(2):
                    raise ConstructionError("additive-inverse family requires entry 2 = 2 * entry 1")

    @property
    def n_users(self) -> int:
        return len(self.assemblages)

    @property
    def loading_factor(self) -> float:
        return self.n_users / self.m

    def generator_matrix(self, digit: int) -> FieldMatrix:
        """Full-ς matrix: row j is assemblage j's answer to digit ς."""
        return FieldMatrix(self.field, [a.entry(digit) for a in self.assemblages])

    def generator_set(self) -> GeneratorMatrixSet:
        return GeneratorMatrixSet({d: self.generator_matrix(d) for d in range(self.p)})

    @property
    def is_additive_inverse(self) -> bool:
        return self.family in ("AI-D-CWEA", "orthogonal")


def generator_for_block(code: EACode, d: Sequence[int]) -> FieldMatrix:
    """Generator of one user block: row j is assemblage j's entry d[j]."""
    if len(d) != code.n_users:
        raise ValueError(f"block length {len(d)} != {code.n_users} users")
    return FieldMatrix(code.field, [a.entry(int(dj)) for a, dj in zip(code.assemblages, d)])


def _dcwea_from_matrices(g1: FieldMatrix, g2: FieldMatrix, family: str, **kw) -> EACode:
    if g1.field != g2.field or g1.shape != g2.shape:
        raise ConstructionError("digit-1 and digit-2 matrices must match in field and shape")
    users, m = g1.shape
    zero = FieldVector(g1.field, [0] * m)
    assemblages = tuple(
        ElementAssemblage((zero, g1.row(j), g2.row(j))) for j in range(users)
    )
    return EACode(p=3, field=g1.field, m=m, assemblages=assemblages, family=family, **kw)


def build_orthogonal_ea(m: int) -> EACode:
    """Orthogonal ternary EA code on GF(3^m): user j keys digit ς to ς * e_{j-1}."""
    if m < 1:
        raise ConstructionError("m must be >= 1")
    gf3 = PrimeField(3)
    eye = FieldMatrix(gf3, np.eye(m, dtype=np.int64))
    return _dcwea_from_matrices(eye, eye.scale(2), "orthogonal")


def build_ternary_orthogonal(kappa: int) -> FieldMatrix:
    """kappa-fold ternary orthogonal matrix T(2^kappa), full rank over GF(3).

    Recursively T(2n) = [[T, T], [2T, T]] starting from T(1) = [[1]].
    """
    if kappa < 1:
        raise ConstructionError("kappa must be >= 1")
    t = np.array([[1]], dtype=np.int64)
    for _ in range(kappa):
        t = np.block([[t, t], [(2 * t) % 3, t]]) % 3
    return FieldMatrix(PrimeField(3), t)


def build_ai_dcwea(g1: FieldMatrix) -> EACode:
    """Additive-inverse D-CWEA code: digit-2 rows are 2x the digit-1 rows.

    g1 must have full row rank over GF(3); that single rank condition
    certifies unique decodability for the whole family.
    """
    if g1.field.p != 3:
        g1 = FieldMatrix(PrimeField(3), g1.as_array())
    r = rank(g1)
    if r != g1.shape[0]:
        raise ConstructionError(
            f"digit-1 matrix has rank {r}, need full row rank {g1.shape[0]}", rank_found=r
        )
    return _dcwea_from_matrices(g1, g1.scale(2), "AI-D-CWEA")


def _split_basis(basis: Sequence[FieldVector] | FieldMatrix, n_d: int) -> list[FieldMatrix]:
    if isinstance(basis, FieldMatrix):
        vecs = basis.rows()
    else:
        vecs = list(basis)
    if not vecs:
        raise ConstructionError("empty basis")
    f = vecs[0].field
    j_total = len(vecs)
    if n_d < 1 or j_total % n_d:
        raise ConstructionError(f"basis size {j_total} is not divisible by n_d={n_d}")
    mat = FieldMatrix(f, vecs)
    r = rank(mat)
    if r != j_total:
        raise ConstructionError(f"basis has rank {r}, need {j_total} independent vectors", rank_found=r)
    users = j_total // n_d
    return [FieldMatrix(f, vecs[i * users : (i + 1) * users]) for i in range(n_d)]


def build_bd_dcwea(basis: Sequence[FieldVector] | FieldMatrix, n_d: int = 2) -> EACode:
    """Basis-decomposition D-CWEA code.

    The J independent basis vectors are split contiguously into n_d
    equal disjoint subsets; subset B_1 feeds the highest-significance
    generator block (for ternary n_d=2 that is the digit-2 matrix).
    """
    subsets = _split_basis(basis, n_d)
    binary_built = subsets[0].field.p == 2
    if binary_built:
        # binary-built blocks still form ternary assemblages; entries are 0/1 either way
        gf3 = PrimeField(3)
        subsets = [FieldMatrix(gf3, s.as_array()) for s in subsets]
    if n_d == 1:
        code = build_ai_dcwea(subsets[0])
        code = EACode(
            p=3, field=code.field, m=code.m, assemblages=code.assemblages,
            family="BD-D-CWEA", n_d=1,
            parallel=ParallelGeneratorMatrix(code.generator_matrix(1), 1, code.n_users),
        )
    elif n_d == 2:
        g2, g1 = subsets[0], subsets[1]
        pll = ParallelGeneratorMatrix(FieldMatrix.vstack([g2, g1]), 2, g1.shape[0])
        code = _dcwea_from_matrices(g1, g2, "BD-D-CWEA", parallel=pll, n_d=2)
    else:
        raise ConstructionError("ternary BD codes use n_d in {1, 2}; for larger alphabets see build_pary_bd")
    if binary_built:
        code.extras["binary_built"] = True
    return code


def build_dcwea_from_matrices(g1: FieldMatrix, g2: FieldMatrix) -> EACode:
    """Generic ternary D-CWEA code from explicit digit-1/digit-2 matrices."""
    pll = ParallelGeneratorMatrix(FieldMatrix.vstack([g2, g1]), 2, g1.shape[0])
    return _dcwea_from_matrices(g1, g2, "D-CWEA", parallel=pll, n_d=2)


def build_nocwea(
    matrices: Mapping[int, FieldMatrix],
    f2c: Mapping[int, ExactComplex | str] | Mapping[str, str],
) -> EACode:
    """Non-orthogonal CWEA code: more users than tuple length, decoded in C.

    `matrices` maps each digit to its full-ς matrix (digit 0 defaults to
    the zero matrix); `f2c` maps every GF(p̆) symbol to a constellation
    point.  Uniqueness is NOT verified here; run the complex-field
    verifier separately.
    """
    digits = sorted(int(k) for k in matrices)
    p = len(digits) if 0 in digits else len(digits) + 1
    if digits != [d for d in range(p) if d in digits]:
        raise ConstructionError("digit matrices must cover 1..p-1 (0 may be omitted)")
    any_mat = matrices[digits[-1]]
    f = any_mat.field
    users, m = any_mat.shape
    if users <= m:
        raise ConstructionError(f"non-orthogonal codes need more users than tuple length (M={users}, m={m})")
    zero = FieldMatrix(f, np.zeros((users, m), dtype=np.int64))
    full = {0: matrices.get(0, zero)}
    for d in range(1, p):
        if d not in matrices:
            raise ConstructionError(f"missing matrix for digit {d}")
        full[d] = matrices[d]
        if full[d].field != f or full[d].shape != (users, m):
            raise ConstructionError("digit matrices must share field and shape")
    cmap = {f.check(int(k)): parse_complex(v) for k, v in f2c.items()}
    missing = [s for s in {int(x) for mat in full.values() for x in mat.as_array().ravel()} if s not in cmap]
    if missing:
        raise ConstructionError(f"finite-to-complex map lacks symbols {sorted(missing)}")
    assemblages = tuple(
        ElementAssemblage(tuple(full[d].row(j) for d in range(p))) for j in range(users)
    )
    points = {
        d: tuple(tuple(cmap[int(x)] for x in row) for row in full[d].as_array())
        for d in range(p)
    }
    return EACode(
        p=p, field=f, m=m, assemblages=assemblages, family="NO-CWEA",
        complex_set=ComplexGeneratorMatrixSet(points, cmap),
    )


def ternary_digits(value: int, n_d: int) -> tuple[int, ...]:
    """Base-3 expansion (t_{n_d}, ..., t_1), most significant first."""
    if value < 0 or value >= 3**n_d:
        raise ValueError(f"{value} does not fit in {n_d} ternary digits")
    out = []
    v = value
    for _ in range(n_d):
        out.append(v % 3)
        v //= 3
    return tuple(reversed(out))


def build_pary_bd(p: int, basis: Sequence[FieldVector] | FieldMatrix) -> EACode:
    """p-ary code via ternary decomposition: N_d = ceil(log3 p) stacked blocks.

    Each source digit expands to N_d ternary digits; the additive-inverse
    property of GF(3) lets one physical matrix serve each significance
    level, so only N_d matrices are stored (as the parallel stack).
    """
    if not 3 < p or not _is_prime_cached(p):
        raise ConstructionError("p must be a prime greater than 3")
    n_d = math.ceil(math.log(p, 3))
    # guard against float fuzz at exact powers of 3
    while 3**n_d < p:
        n_d += 1
    while n_d > 1 and 3 ** (n_d - 1) >= p:
        n_d -= 1
    subsets = _split_basis(basis, n_d)
    f = subsets[0].field
    if f.p not in (2, 3):
        raise ConstructionError("p-ary BD blocks live over GF(2) or GF(3)")
    gf3 = PrimeField(3)
    subsets = [FieldMatrix(gf3, s.as_array()) for s in subsets]
    users, m = subsets[0].shape
    pll = ParallelGeneratorMatrix(FieldMatrix.vstack(subsets), n_d, users)
    assemblages = []
    for j in range(users):
        entries = []
        for digit in range(p):
            acc = np.zeros(m, dtype=np.int64)
            for sig, t in zip(range(n_d, 0, -1), ternary_digits(digit, n_d)):
                acc = (acc + t * pll.block(sig).as_array()[j]) % 3
            entries.append(FieldVector(gf3, acc))
        assemblages.append(ElementAssemblage(tuple(entries)))
    return EACode(
        p=p, field=gf3, m=m, assemblages=tuple(assemblages),
        family="p-ary-BD", parallel=pll, n_d=n_d,
    )


def _is_prime_cached(p: int) -> bool:
    from .ffcore import is_prime

    return is_prime(p)


# --------------------------------------------------------------------------
# Code-spec JSON
# --------------------------------------------------------------------------

def _require(doc: Mapping, key: str, typ, pointer: str):
    if key not in doc:
        raise CodeSpecError("missing required field", f"{pointer}.{key}")
    v = doc[key]
    if typ is int and isinstance(v, bool) or not isinstance(v, typ):
        raise CodeSpecError(f"expected {typ.__name__}, got {type(v).__name__}", f"{pointer}.{key}")
    return v


def _permute_basis(basis: FieldMatrix, perm, f: PrimeField) -> FieldMatrix:
    """Optional reordering of basis rows before the contiguous subset split."""
    if perm is None:
        return basis
    n = basis.shape[0]
    if sorted(perm) != list(range(n)):
        raise CodeSpecError(f"must be a permutation of 0..{n - 1}", "$.permutation")
    return FieldMatrix(f, basis.as_array()[list(perm)])


def _matrix_from_spec(rows, f: PrimeField, pointer: str) -> FieldMatrix:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise CodeSpecError("expected a non-empty list of rows", pointer)
    try:
        return FieldMatrix(f, rows)
    except Exception as e:  # ragged rows, bad entries
        raise CodeSpecError(str(e), pointer) from e


def load_code_spec(source: str | Path | Mapping) -> EACode:
    """Build an EACode from a code-spec document (path, JSON text, or dict)."""
    if isinstance(source, Mapping):
        doc = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise CodeSpecError(f"not valid JSON: {e}", "$") from e
    family = _require(doc, "family", str, "$")
    if family == "orthogonal":
        return build_orthogonal_ea(_require(doc, "m", int, "$"))

    p_char = doc.get("field_char", 3)
    if not isinstance(p_char, int):
        raise CodeSpecError("expected int", "$.field_char")
    try:
        f = PrimeField(p_char)
    except ValueError as e:
        raise CodeSpecError(str(e), "$.field_char") from e

    if family == "AI-D-CWEA":
        g1 = _matrix_from_spec(_require(doc, "matrices", dict, "$").get("1"), f, "$.matrices.1")
        try:
            return build_ai_dcwea(g1)
        except ConstructionError as e:
            raise CodeSpecError(str(e), "$.matrices.1") from e
    if family == "BD-D-CWEA":
        basis = _matrix_from_spec(_require(doc, "basis", list, "$"), f, "$.basis")
        basis = _permute_basis(basis, doc.get("permutation"), f)
        try:
            return build_bd_dcwea(basis, int(doc.get("n_d", 2)))
        except ConstructionError as e:
            raise CodeSpecError(str(e), "$.basis") from e
    if family == "p-ary-BD":
        basis = _matrix_from_spec(_require(doc, "basis", list, "$"), f, "$.basis")
        basis = _permute_basis(basis, doc.get("permutation"), f)
        try:
            return build_pary_bd(_require(doc, "p", int, "$"), basis)
        except ConstructionError as e:
            raise CodeSpecError(str(e), "$.basis") from e
    if family == "NO-CWEA":
        mats_doc = _require(doc, "matrices", dict, "$")
        mats = {}
        for k, rows in mats_doc.items():
            try:
                digit = int(k)
            except ValueError:
                raise CodeSpecError("matrix keys must be digit strings", f"$.matrices.{k}") from None
            mats[digit] = _matrix_from_spec(rows, f, f"$.matrices.{k}")
        f2c = _require(doc, "f2c", dict, "$")
        try:
            return build_nocwea(mats, f2c)
        except (ConstructionError, ValueError) as e:
            raise CodeSpecError(str(e), "$.matrices") from e
    if family == "D-CWEA":
        mats_doc = _require(doc, "matrices", dict, "$")
        g1 = _matrix_from_spec(mats_doc.get("1"), f, "$.matrices.1")
        g2 = _matrix_from_spec(mats_doc.get("2"), f, "$.matrices.2")
        try:
            return build_dcwea_from_matrices(g1, g2)
        except ConstructionError as e:
            raise CodeSpecError(str(e), "$.matrices") from e
    raise CodeSpecError(f"unknown family {family!r}", "$.family")


def dump_code_spec(code: EACode) -> dict:
    """Canonical JSON-serializable form of a constructed code."""
    doc: dict = {
        "family": code.family,
        "p": code.p,
        "field_char": code.field.p,
        "m": code.m,
        "users": code.n_users,
        "loading_factor": code.loading_factor,
        "matrices": {
            str(d): code.generator_matrix(d).as_array().tolist() for d in range(code.p)
        },
    }
    if code.n_d is not None:
        doc["n_d"] = code.n_d
    if code.parallel is not None:
        doc["parallel"] = code.parallel.matrix.as_array().tolist()
    if code.complex_set is not None:
        doc["f2c"] = {str(k): str(v) for k, v in sorted(code.complex_set.f2c.items())}
    return doc


__all__ = [
    "EACode",
    "ElementAssemblage",
    "GeneratorMatrixSet",
    "ParallelGeneratorMatrix",
    "ComplexGeneratorMatrixSet",
    "ConstructionError",
    "CodeSpecError",
    "build_orthogonal_ea",
    "build_ternary_orthogonal",
    "build_ai_dcwea",
    "build_bd_dcwea",
    "build_dcwea_from_matrices",
    "build_nocwea",
    "build_pary_bd",
    "generator_for_block",
    "ternary_digits",
    "load_code_spec",
    "dump_code_spec",
]
