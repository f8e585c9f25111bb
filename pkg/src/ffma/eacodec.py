"""Encoding, uniqueness verification, and decoding of EA codes.

The encoder maps a multiuser digit block d = (d_1, ..., d_M) to the
finite-field sum pattern (FFSP) w = sum_j switch(d_j, C_j) over GF(p̆).
Unique decodability means d <-> w is a bijection; the verifiers below
certify it by exhaustive enumeration (finite field) or by exact
complex-sum comparison (complex field).  Decoding is by inverse table,
by the parallel generator matrix, or by q-ary sum-product (QSPA) when a
sparse parity-check matrix is available.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .eaconstruct import EACode, ElementAssemblage
from .exactcomplex import ExactComplex
from .ffcore import FieldMatrix, FieldVector, PrimeField, rank, row_reduce


class BudgetExceededError(RuntimeError):
    """Enumeration space too large; for AI-family codes use rank certification."""


class UncorrectableBlockError(ValueError):
    """Received sum pattern is outside the code's image."""


def mux_combiner(users: int) -> np.ndarray:
    """All-ones column: the receiver adds every user's element per component."""
    return np.ones((users, 1), dtype=np.int64)


def switch(digit: int, assemblage: ElementAssemblage) -> FieldVector:
    """Entry `digit` of the assemblage (the per-user transmit element)."""
    return assemblage.entry(digit)


def _check_block(code: EACode, d) -> tuple[int, ...]:
    block = tuple(int(x) for x in d)
    if len(block) != code.n_users:
        raise ValueError(f"block length {len(block)} != {code.n_users} users")
    for x in block:
        if not 0 <= x < code.p:
            raise ValueError(f"digit {x} outside [0, {code.p})")
    return block


def encode_ffsp(code: EACode, d) -> FieldVector:
    """FFSP block of one user block.

    Additive-inverse families reduce to w = d * G^1; everything else
    takes the general switching path.
    """
    block = _check_block(code, d)
    if code.is_additive_inverse:
        g1 = code.generator_matrix(1).as_array()
        w = (np.array(block, dtype=np.int64) @ g1) % code.field.p
        return FieldVector(code.field, w)
    return encode_ffsp_general(code, block)


def encode_ffsp_general(code: EACode, d) -> FieldVector:
    """FFSP via per-user switching and mod-p̆ accumulation (no shortcuts)."""
    block = _check_block(code, d)
    acc = np.zeros(code.m, dtype=np.int64)
    for dj, asm in zip(block, code.assemblages):
        acc = (acc + asm.entry(dj).as_array()) % code.field.p
    return FieldVector(code.field, acc)


# --------------------------------------------------------------------------
# Digit expansions and parallel encoding
# --------------------------------------------------------------------------

_T2B = {0: (0, 0), 1: (0, 1), 2: (1, 0)}


def t2b(d) -> np.ndarray:
    """Ternary block -> binary parallel block (all high bits, then all low bits)."""
    block = [int(x) for x in d]
    if any(x not in (0, 1, 2) for x in block):
        raise ValueError("t2b needs ternary digits")
    high = [_T2B[x][0] for x in block]
    low = [_T2B[x][1] for x in block]
    return np.array(high + low, dtype=np.int64)


def b2t(a, rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of t2b.

    The pair (1, 1) never encodes a ternary digit, so it marks a decoding
    error; it is resolved to 1 or 2 by the supplied generator (seeded from
    the run seed, keeping simulations reproducible).  Returns (digits,
    error flags).
    """
    a = np.asarray(a, dtype=np.int64)
    if a.ndim != 1 or a.size % 2:
        raise ValueError("parallel block must be 1-d with even length")
    users = a.size // 2
    high, low = a[:users], a[users:]
    digits = (2 * high + low).astype(np.int64)
    bad = digits == 3
    if bad.any():
        if rng is None:
            rng = np.random.default_rng(0)
        digits[bad] = rng.integers(1, 3, size=int(bad.sum()))
    return digits, bad


def p2t(digit: int, n_d: int) -> tuple[int, ...]:
    """Base-3 expansion of one digit, most significant first."""
    from .eaconstruct import ternary_digits

    return ternary_digits(int(digit), n_d)


def t2p(trits) -> int:
    """Inverse of p2t: collapse (t_{n_d}, ..., t_1) back to an integer."""
    v = 0
    for t in trits:
        if int(t) not in (0, 1, 2):
            raise ValueError("trits must be ternary")
        v = 3 * v + int(t)
    return v


def expand_block_pary(d, n_d: int) -> np.ndarray:
    """p-ary block -> ternary parallel block, significance-major layout."""
    block = [int(x) for x in d]
    per_digit = [p2t(x, n_d) for x in block]
    out: list[int] = []
    for sig in range(n_d):  # index 0 of p2t output is the most significant
        out.extend(t[sig] for t in per_digit)
    return np.array(out, dtype=np.int64)


def collapse_block_pary(a, n_d: int, p: int, rng: np.random.Generator | None = None):
    """Inverse of expand_block_pary; out-of-alphabet values are flagged."""
    a = np.asarray(a, dtype=np.int64)
    users = a.size // n_d
    digits = np.zeros(users, dtype=np.int64)
    for sig in range(n_d):
        digits = 3 * digits + a[sig * users : (sig + 1) * users]
    bad = digits >= p
    if bad.any():
        if rng is None:
            rng = np.random.default_rng(0)
        digits[bad] = rng.integers(0, p, size=int(bad.sum()))
    return digits, bad


def encode_parallel(a, gpll, out_field: PrimeField | None = None) -> FieldVector:
    """FFSP via the parallel generator matrix: w = a * G_pll.

    `out_field` selects the accumulation field for binary-built stacks
    (they admit both mod-2 and mod-3 sums); default is the stack's own
    field.
    """
    from .eaconstruct import ParallelGeneratorMatrix

    mat = gpll.matrix if isinstance(gpll, ParallelGeneratorMatrix) else gpll
    f = out_field or mat.field
    a = np.asarray(a, dtype=np.int64)
    if a.shape != (mat.shape[0],):
        raise ValueError(f"parallel block length {a.shape} != {mat.shape[0]} rows")
    return FieldVector(f, (a @ mat.as_array()) % f.p)


def encode_cfsp(code: EACode, d) -> tuple[ExactComplex, ...]:
    """Complex-field sum pattern: exact per-coordinate sum of constellation rows."""
    block = _check_block(code, d)
    if code.complex_set is None:
        raise ValueError("code carries no complex generator set")
    rows = [code.complex_set[dj][j] for j, dj in enumerate(block)]
    out = []
    for coord in range(code.m):
        s = rows[0][coord]
        for r in rows[1:]:
            s = s + r[coord]
        out.append(s)
    return tuple(out)


# --------------------------------------------------------------------------
# Uniqueness verification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UspmReport:
    ok: bool
    domain: str  # "finite" | "complex"
    n_blocks: int
    n_distinct: int
    rank_ok: bool | None = None
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {
            "ok": self.ok,
            "domain": self.domain,
            "blocks": self.n_blocks,
            "distinct_sum_patterns": self.n_distinct,
        }
        if self.rank_ok is not None:
            out["rank_ok"] = self.rank_ok
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _all_blocks(p: int, users: int):
    return itertools.product(range(p), repeat=users)


def verify_uspm_ff(code: EACode, budget: int = 10**6) -> UspmReport:
    """Exhaustively certify d <-> w uniqueness in the finite field.

    Checks both injectivity of the sum-pattern map and, per block, full
    rank of the active rows of its generator (users transmitting the
    zero element contribute nothing and are excluded).  A failing code
    yields a concrete witness: a colliding block pair, or the first
    block with dependent active rows.
    """
    n_blocks = code.p**code.n_users
    if n_blocks > budget:
        raise BudgetExceededError(
            f"{n_blocks} blocks exceed the budget {budget}; additive-inverse codes "
            "can instead be certified by rank(G^1) alone"
        )
    seen: dict[bytes, tuple[int, ...]] = {}
    collision = None
    users = code.n_users
    entry_arrays = [
        np.stack([a.entry(d).as_array() for d in range(code.p)]) for a in code.assemblages
    ]
    for block in _all_blocks(code.p, users):
        acc = entry_arrays[0][block[0]].copy()
        for j in range(1, users):
            acc += entry_arrays[j][block[j]]
        key = (acc % code.field.p).astype(np.int8).tobytes()
        if key in seen and collision is None:
            collision = {"block_a": list(seen[key]), "block_b": list(block)}
        seen.setdefault(key, block)

    rank_witness = None
    for block in _all_blocks(code.p, users):
        rows = [
            entry_arrays[j][dj]
            for j, dj in enumerate(block)
            if entry_arrays[j][dj].any()
        ]
        if not rows:
            continue
        r = rank(np.stack(rows), code.field.p)
        if r != len(rows):
            rank_witness = {"block": list(block), "rank": r, "needed": len(rows)}
            break

    ok = collision is None and rank_witness is None
    return UspmReport(
        ok=ok,
        domain="finite",
        n_blocks=n_blocks,
        n_distinct=len(seen),
        rank_ok=rank_witness is None,
        witness=collision or rank_witness,
    )


def verify_uspm_cf(code: EACode, budget: int = 10**6) -> UspmReport:
    """Certify d <-> r uniqueness of complex-field sum patterns (exact arithmetic)."""
    if code.complex_set is None:
        raise ValueError("code carries no complex generator set")
    n_blocks = code.p**code.n_users
    if n_blocks > budget:
        raise BudgetExceededError(f"{n_blocks} blocks exceed the budget {budget}")
    seen: dict[tuple, tuple[int, ...]] = {}
    collision = None
    for block in _all_blocks(code.p, code.n_users):
        r = encode_cfsp(code, block)
        key = tuple((c.re, c.im) for c in r)
        if key in seen and collision is None:
            collision = {
                "block_a": list(seen[key]),
                "block_b": list(block),
                "sum_pattern": [str(c) for c in r],
            }
        seen.setdefault(key, block)
    return UspmReport(
        ok=collision is None,
        domain="complex",
        n_blocks=n_blocks,
        n_distinct=len(seen),
        witness=collision,
    )


# --------------------------------------------------------------------------
# Table decoding
# --------------------------------------------------------------------------

class DecodeTable:
    """Inverse of the block -> sum-pattern map, built by enumeration."""

    def __init__(self, code: EACode, budget: int = 10**6):
        n_blocks = code.p**code.n_users
        if n_blocks > budget:
            raise BudgetExceededError(f"{n_blocks} blocks exceed the budget {budget}")
        self.code = code
        ff: dict[tuple[int, ...], tuple[int, ...]] | None = {}
        for block in _all_blocks(code.p, code.n_users):
            key = encode_ffsp(code, block).coords
            if ff is not None and key in ff:
                # finite-field collisions are normal for overloaded codes
                # decoded in the complex field; otherwise they are fatal
                if code.complex_set is None:
                    raise ValueError("code is not uniquely decodable; verify before decoding")
                ff = None
                break
            if ff is not None:
                ff[key] = block
        self._ff = ff
        self._cf: dict[tuple, tuple[int, ...]] | None = None
        if code.complex_set is not None:
            self._cf = {}
            for block in _all_blocks(code.p, code.n_users):
                r = encode_cfsp(code, block)
                self._cf[tuple((c.re, c.im) for c in r)] = block

    def decode(self, w) -> tuple[int, ...]:
        if self._ff is None:
            raise ValueError("finite-field sum patterns collide; decode in the complex field")
        key = w.coords if isinstance(w, FieldVector) else tuple(int(x) for x in w)
        try:
            return self._ff[key]
        except KeyError:
            raise UncorrectableBlockError(f"sum pattern {key} is outside the code image") from None

    def decode_cfsp(self, r: tuple[ExactComplex, ...]) -> tuple[int, ...]:
        if self._cf is None:
            raise ValueError("code carries no complex generator set")
        key = tuple((c.re, c.im) for c in r)
        try:
            return self._cf[key]
        except KeyError:
            raise UncorrectableBlockError("complex sum pattern is outside the code image") from None


_TABLE_CACHE: dict[int, DecodeTable] = {}


def table_decode(code: EACode, w) -> tuple[int, ...]:
    """Invert one FFSP block; exact inverse of encode_ffsp."""
    table = _TABLE_CACHE.get(id(code))
    if table is None or table.code is not code:
        table = DecodeTable(code)
        _TABLE_CACHE[id(code)] = table
    return table.decode(w)


# --------------------------------------------------------------------------
# Parity-check derivation
# --------------------------------------------------------------------------

def derive_parity_check(G: FieldMatrix) -> FieldMatrix:
    """Parity-check matrix H with G H^T = 0, for a full-row-rank G.

    For systematic G = [I | P] this is [-P^T | I]; non-systematic inputs
    are handled through column-tracked elimination, keeping H in the
    original column order.
    """
    p = G.field.p
    a = G.as_array()
    k, n = a.shape
    rref, pivots = row_reduce(a, p)
    if len(pivots) != k:
        raise ValueError(f"generator has rank {len(pivots)}, need full row rank {k}")
    free = [c for c in range(n) if c not in pivots]
    h = np.zeros((n - k, n), dtype=np.int64)
    for r, fcol in enumerate(free):
        h[r, fcol] = 1
        for i, pcol in enumerate(pivots):
            h[r, pcol] = (-int(rref[i, fcol])) % p
    return FieldMatrix(G.field, h)


# --------------------------------------------------------------------------
# q-ary sum-product decoding
# --------------------------------------------------------------------------

@dataclass
class QspaResult:
    codeword: np.ndarray
    converged: bool
    iterations: int


class QspaDecoder:
    """Probability-domain sum-product decoder on a GF(p) parity-check graph.

    Check updates run as circular convolutions over Z_p (tiny FFTs) with
    prefix/suffix products, so the whole decoder is vectorized over
    edges and over a batch of frames.  Hard-decision ties go to the
    smallest field element; messages are renormalized every iteration.
    """

    def __init__(self, H: FieldMatrix | np.ndarray, p: int | None = None):
        if isinstance(H, FieldMatrix):
            p = H.field.p
            H = H.as_array()
        if p is None:
            raise TypeError("bare-array H needs the modulus p")
        self.p = int(p)
        self.H = np.asarray(H, dtype=np.int64) % p
        self.n_checks, self.n = self.H.shape
        cj, vj = np.nonzero(self.H)
        self.edge_check = cj
        self.edge_var = vj
        self.edge_coeff = self.H[cj, vj]
        self.n_edges = cj.size
        q = self.p

        # permutations x -> h*x and the inverse, per edge
        coeffs = self.edge_coeff
        inv = np.array([pow(int(c), q - 2, q) for c in coeffs], dtype=np.int64)
        sym = np.arange(q, dtype=np.int64)
        self.perm_fwd = (inv[:, None] * sym[None, :]) % q  # m'(t) = m(h^-1 t)
        self.perm_back = ((-coeffs[:, None]) % q * sym[None, :]) % q  # msg(x) = g(-h x)

        # group edges by check and by variable, padded to the max degree
        self.by_check, self.check_mask = self._group(self.edge_check, self.n_checks)
        self.by_var, self.var_mask = self._group(self.edge_var, self.n)

    def _group(self, owner: np.ndarray, n_groups: int) -> tuple[np.ndarray, np.ndarray]:
        counts = np.bincount(owner, minlength=n_groups)
        width = int(counts.max()) if counts.size else 0
        idx = np.full((n_groups, width), -1, dtype=np.int64)
        fill = np.zeros(n_groups, dtype=np.int64)
        for e, g in enumerate(owner):
            idx[g, fill[g]] = e
            fill[g] += 1
        return idx, idx >= 0

    @staticmethod
    def _excl_product(terms: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """All-but-self products along axis -2 via prefix/suffix scans."""
        fill = np.ones_like(terms)
        t = np.where(mask[..., None], terms, fill)
        pre = np.cumprod(t, axis=-2)
        suf = np.cumprod(t[..., ::-1, :], axis=-2)[..., ::-1, :]
        left = np.ones_like(t)
        left[..., 1:, :] = pre[..., :-1, :]
        right = np.ones_like(t)
        right[..., :-1, :] = suf[..., 1:, :]
        return left * right

    def decode(
        self,
        priors: np.ndarray,
        max_iters: int = 50,
        damping: float = 0.0,
    ) -> QspaResult:
        """Decode one frame or a batch.

        priors: (n, q) or (batch, n, q) per-position probability vectors.
        Returns hard decisions once every check is satisfied, or after
        max_iters; `converged` reflects the syndrome test.
        """
        single = priors.ndim == 2
        pri_full = priors[None] if single else priors
        b = pri_full.shape[0]
        q = self.p
        if pri_full.shape[1] != self.n or pri_full.shape[2] != q:
            raise ValueError(f"priors must be (batch, {self.n}, {q})")
        pri_full = np.clip(pri_full.astype(np.float64), 1e-300, None)
        pri_full = pri_full / pri_full.sum(axis=2, keepdims=True)

        hard = np.argmax(pri_full, axis=2)
        done = self._syndrome_ok(hard)
        iters_used = np.full(b, max_iters, dtype=np.int64)
        iters_used[done] = 0

        active = np.nonzero(~done)[0]
        pri = pri_full[active]
        msg_vc = pri[:, self.edge_var, :].copy()
        flat_c = self.by_check[self.check_mask]
        flat_v = self.by_var[self.var_mask]
        for it in range(1, max_iters + 1):
            bb = active.size
            if bb == 0:
                break
            fwd = np.broadcast_to(self.perm_fwd[None], (bb, self.n_edges, q))
            back = np.broadcast_to(self.perm_back[None], (bb, self.n_edges, q))

            # check update, in the Fourier domain of Z_q
            permuted = np.take_along_axis(msg_vc, fwd, axis=2)
            spec = np.fft.fft(permuted, axis=-1)
            grouped = spec[:, self.by_check, :]  # (bb, checks, dc, q)
            ext = self._excl_product(grouped, self.check_mask)
            conv = np.fft.ifft(ext, axis=-1).real
            conv = np.clip(conv, 1e-300, None)
            msg_cv = np.zeros((bb, self.n_edges, q))
            msg_cv[:, flat_c, :] = conv[:, self.check_mask, :]
            msg_cv = np.take_along_axis(msg_cv, back, axis=2)
            msg_cv /= msg_cv.sum(axis=2, keepdims=True)

            # variable update
            grouped_v = msg_cv[:, self.by_var, :]  # (bb, n, dv, q)
            ext_v = self._excl_product(grouped_v, self.var_mask)
            new_vc = np.zeros_like(msg_vc)
            new_vc[:, flat_v, :] = pri[:, self.edge_var[flat_v], :] * ext_v[:, self.var_mask, :]
            new_vc = np.clip(new_vc, 1e-300, None)
            new_vc /= new_vc.sum(axis=2, keepdims=True)
            if damping > 0:
                new_vc = (1 - damping) * new_vc + damping * msg_vc
            msg_vc = new_vc

            # posterior, hard decision, and per-frame convergence
            prod_in = np.where(self.var_mask[None, :, :, None], grouped_v, 1.0).prod(axis=2)
            cand = np.argmax(pri * prod_in, axis=2)
            hard[active] = cand
            ok = self._syndrome_ok(cand)
            iters_used[active[ok]] = it
            if ok.any():
                keep = ~ok
                active = active[keep]
                pri = pri[keep]
                msg_vc = msg_vc[keep]

        done = self._syndrome_ok(hard)
        hard = hard.astype(np.int64)
        if single:
            return QspaResult(hard[0], bool(done[0]), int(iters_used[0]))
        return QspaResult(hard, done, iters_used)

    def _syndrome_ok(self, hard: np.ndarray) -> np.ndarray:
        syn = (hard @ self.H.T) % self.p
        return ~syn.any(axis=1)


def qspa_decode(
    H: FieldMatrix | np.ndarray,
    priors: np.ndarray,
    max_iters: int = 50,
    p: int | None = None,
    damping: float = 0.0,
) -> QspaResult:
    """One-shot q-ary sum-product decode; see QspaDecoder for the mechanics."""
    return QspaDecoder(H, p=p).decode(np.asarray(priors, dtype=np.float64), max_iters, damping)
