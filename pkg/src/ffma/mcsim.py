"""Monte Carlo transmission over AWGN / Gaussian multiple-access channels.

GF(p̆) symbols modulate to scaled symmetric residues (3ASK for ternary,
BPSK for binary), so the noiseless superposition of J users lands on an
integer lattice whose point determines the finite-field sum pattern.
The receiver turns each received sample into a posterior over FFSP
values by enumerating that lattice, then hands the posteriors to a
table/ML or QSPA decoder.

Frames are seeded by (master seed, grid point, frame batch), which makes
curves bit-identical however the work is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .eacodec import QspaDecoder, derive_parity_check
from .ffcore import FieldMatrix, PrimeField, rank, row_reduce, symmetric_lift

_FRAME_BATCH = 256


@dataclass(frozen=True)
class ModulationMap:
    """Amplitude map for one field characteristic, unit average symbol energy."""

    p_char: int
    int_levels: tuple[int, ...]  # integer lattice coordinates, index = symbol
    scale: float  # amplitude = scale * level

    @classmethod
    def for_field_char(cls, p_char: int) -> "ModulationMap":
        if p_char == 2:
            return cls(2, (-1, 1), 1.0)
        levels = tuple(symmetric_lift(u, p_char) for u in range(p_char))
        energy = sum(l * l for l in levels) / p_char
        return cls(p_char, levels, 1.0 / math.sqrt(energy))

    @property
    def amplitudes(self) -> np.ndarray:
        return self.scale * np.array(self.int_levels, dtype=np.float64)

    def ffsp_of_level_sum(self, total: int, J: int) -> int:
        """Finite-field sum of J symbols whose integer levels add to `total`."""
        if self.p_char == 2:
            return ((total + J) // 2) % 2
        return total % self.p_char


def modulate(symbols: np.ndarray, mu: float, mmap: ModulationMap) -> np.ndarray:
    """x_i = sqrt(mu) * a(symbol_i); zero-power sections emit exact zeros."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if mu == 0.0:
        return np.zeros(np.shape(symbols), dtype=np.float64)
    return math.sqrt(mu) * mmap.amplitudes[np.asarray(symbols, dtype=np.int64)]


def transmit_superposed(
    signals: Sequence[np.ndarray], sigma2: float, rng: np.random.Generator
) -> np.ndarray:
    """Elementwise sum of the users' signals plus N(0, sigma2) per DoF."""
    shapes = {np.shape(s) for s in signals}
    if len(shapes) != 1:
        raise ValueError("superposed sections must share one shape")
    total = np.sum(np.stack(signals), axis=0)
    return total + rng.normal(0.0, math.sqrt(sigma2), size=total.shape)


def _sum_level_distribution(mmap: ModulationMap, J: int) -> tuple[np.ndarray, np.ndarray]:
    """All reachable J-fold level sums and their tuple counts (iterated convolution)."""
    offset = -min(mmap.int_levels)
    base = np.zeros(max(mmap.int_levels) + offset + 1, dtype=np.float64)
    for l in mmap.int_levels:
        base[l + offset] += 1.0
    counts = np.array([1.0])
    for _ in range(J):
        counts = np.convolve(counts, base)
    sums = np.arange(counts.size) - J * offset
    keep = counts > 0
    return sums[keep], counts[keep]


def detect_ffsp_posteriors(
    y: np.ndarray,
    J: int,
    mu: float,
    mmap: ModulationMap,
    sigma2: float,
    lattice_budget: int = 10**5,
) -> np.ndarray:
    """Per-DoF posterior over FFSP values given the superposed observation.

    Enumerates the J-user amplitude lattice (collapsed by multiplicity),
    computes Gaussian likelihoods, and marginalizes lattice points onto
    their finite-field sums.  Oversized lattices fall back to a hard
    decision: round to the nearest reachable lattice sum, then reduce.
    """
    y = np.asarray(y, dtype=np.float64)
    q = mmap.p_char
    sums, counts = _sum_level_distribution(mmap, J)
    if sums.size > lattice_budget:
        return _hard_fallback(y, J, mu, mmap, sums)
    centers = math.sqrt(mu) * mmap.scale * sums.astype(np.float64)
    # log-likelihood per (DoF, lattice point), stabilized per DoF
    ll = -((y[:, None] - centers[None, :]) ** 2) / (2.0 * sigma2)
    ll += np.log(counts)[None, :]
    ll -= ll.max(axis=1, keepdims=True)
    weights = np.exp(ll)
    ffsp = np.array([mmap.ffsp_of_level_sum(int(s), J) for s in sums])
    post = np.zeros((y.size, q))
    for v in range(q):
        sel = ffsp == v
        if sel.any():
            post[:, v] = weights[:, sel].sum(axis=1)
    post /= post.sum(axis=1, keepdims=True)
    return post


def _hard_fallback(y, J, mu, mmap, sums) -> np.ndarray:
    q = mmap.p_char
    unit = math.sqrt(mu) * mmap.scale
    nearest = np.clip(np.round(y / unit), sums.min(), sums.max()).astype(np.int64)
    reachable = set(int(s) for s in sums)
    post = np.full((y.size, q), 1e-12)
    for i, s in enumerate(nearest):
        while s not in reachable:  # parity of the lattice can exclude a rounded sum
            s += 1 if (y[i] / unit - s) > 0 else -1
        post[i, mmap.ffsp_of_level_sum(int(s), J)] = 1.0
    post /= post.sum(axis=1, keepdims=True)
    return post


def analytic_ser(p_char: int, esn0: float, mmap: ModulationMap | None = None) -> float:
    """Exact ML symbol-error probability of the amplitude map on the AWGN channel.

    esn0 is Es/N0 with Es the unit average symbol energy; noise variance
    per DoF is 1/(2 esn0).  Decision thresholds sit midway between
    neighboring amplitudes, which is exact for 1-D constellations.
    """
    if esn0 <= 0:
        raise ValueError("esn0 must be positive")
    mmap = mmap or ModulationMap.for_field_char(p_char)
    amps = np.sort(mmap.amplitudes)
    sigma = math.sqrt(1.0 / (2.0 * esn0))

    def qfunc(x: float) -> float:
        return 0.5 * erfc(x / math.sqrt(2.0))

    p_err = 0.0
    for i, a in enumerate(amps):
        if i > 0:
            p_err += qfunc((a - amps[i - 1]) / 2.0 / sigma)
        if i < amps.size - 1:
            p_err += qfunc((amps[i + 1] - a) / 2.0 / sigma)
    return p_err / amps.size


def ebn0_at_ser(p_char: int, target_ser: float) -> float:
    """Eb/N0 (dB) at which the uncoded analytic SER hits the target."""
    bits = math.log2(p_char)

    def ser_at_db(db: float) -> float:
        esn0 = bits * 10.0 ** (db / 10.0)
        return analytic_ser(p_char, esn0)

    lo, hi = -10.0, 30.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ser_at_db(mid) > target_ser:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# LDPC ensembles
# --------------------------------------------------------------------------

def ldpc_ensemble(
    n: int,
    k: int,
    p_char: int,
    column_weight: int = 3,
    seed: int = 0,
    max_attempts: int = 50,
) -> tuple[FieldMatrix, FieldMatrix]:
    """Random regular-column-weight parity-check pair (H, G) over GF(p̆).

    Columns get `column_weight` entries on the least-loaded rows, a
    swap pass knocks out 4-cycles, and rank-deficient draws are
    resampled.  G is systematic ([I | P]); columns of H are permuted to
    match, so G @ H.T = 0 in the returned orientation.
    """
    if not (0 < k < n) or column_weight < 2:
        raise ValueError("need 0 < k < n and column_weight >= 2")
    f = PrimeField(p_char)
    rows = n - k
    rng = np.random.default_rng(seed)
    fallback = None
    for attempt in range(max_attempts):
        H = _draw_regular(rows, n, p_char, column_weight, rng)
        _reduce_4cycles(H, p_char, rng)
        if rank(H, p_char) != rows:
            continue
        try:
            Hp, G = _systematize(H, p_char)
        except ValueError:
            continue
        pair = FieldMatrix(f, Hp), FieldMatrix(f, G)
        if girth_at_least_6(Hp):
            return pair
        if fallback is None:  # keep a full-rank draw; callers can report its girth
            fallback = pair
    if fallback is not None:
        return fallback
    raise RuntimeError(f"no full-rank ensemble draw after {max_attempts} attempts")


def _draw_regular(rows: int, n: int, p: int, wc: int, rng: np.random.Generator) -> np.ndarray:
    H = np.zeros((rows, n), dtype=np.int64)
    load = np.zeros(rows, dtype=np.int64)
    for c in range(n):
        order = np.lexsort((rng.random(rows), load))
        picks = order[:wc]
        vals = rng.integers(1, p, size=wc) if p > 2 else np.ones(wc, dtype=np.int64)
        H[picks, c] = vals
        load[picks] += 1
    return H


def _reduce_4cycles(H: np.ndarray, p: int, rng: np.random.Generator, passes: int = 30) -> None:
    """Greedy edge moves until no two columns share two rows (best effort)."""
    rows, n = H.shape
    for _ in range(passes):
        supports = [set(map(int, np.nonzero(H[:, c])[0])) for c in range(n)]
        moved = False
        clean = True
        for c in range(n):
            conflict = _first_conflict(supports, c, n)
            if conflict is None:
                continue
            clean = False
            r1, r2 = conflict
            r_from = int(rng.choice([r1, r2]))
            order = rng.permutation(rows)
            for r_to in order:
                r_to = int(r_to)
                if r_to in supports[c]:
                    continue
                new_sup = (supports[c] - {r_from}) | {r_to}
                if all(
                    len(new_sup & supports[c2]) <= 1 for c2 in range(n) if c2 != c
                ):
                    H[r_to, c] = H[r_from, c]
                    H[r_from, c] = 0
                    supports[c] = new_sup
                    moved = True
                    break
        if clean or not moved:
            break


def _first_conflict(supports, c, n):
    for c2 in range(n):
        if c2 == c:
            continue
        shared = supports[c] & supports[c2]
        if len(shared) >= 2:
            it = iter(sorted(shared))
            return next(it), next(it)
    return None


def _inv_mod(B: np.ndarray, p: int) -> np.ndarray:
    rows = B.shape[0]
    aug = np.hstack([B % p, np.eye(rows, dtype=np.int64)])
    rref, pivots = row_reduce(aug, p)
    if pivots != list(range(rows)):
        raise ValueError("matrix is singular")
    return rref[:, rows:]


def _systematize(H: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Permute columns so H = [A | B] with B invertible; return (H_perm, G)."""
    rows, n = H.shape
    k = n - rows
    _, pivots = row_reduce(H, p)
    if len(pivots) != rows:
        raise ValueError("rank-deficient H")
    info_cols = [c for c in range(n) if c not in set(pivots)]
    perm = info_cols + list(pivots)
    Hp = H[:, perm]
    A, B = Hp[:, :k], Hp[:, k:]
    P = (-(_inv_mod(B, p) @ A)) % p  # parity rows: par^T = P @ u^T
    G = np.hstack([np.eye(k, dtype=np.int64), P.T % p])
    return Hp, G % p


def girth_at_least_6(H: FieldMatrix | np.ndarray) -> bool:
    """True when no two columns share two rows (no 4-cycles)."""
    a = H.as_array() if isinstance(H, FieldMatrix) else np.asarray(H)
    overlap = (a != 0).astype(np.int64)
    gram = overlap.T @ overlap
    np.fill_diagonal(gram, 0)
    return bool((gram <= 1).all())


# --------------------------------------------------------------------------
# End-to-end pipelines
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelConfig:
    seed: int = 0
    max_frames: int = 10**6
    max_frame_errors: int = 200


@dataclass
class FramePipeline:
    """One simulated link: layout, multiuser code, powers, decoder choice.

    The systematic (n, k) code over GF(p̆) carries J users' digits in
    disjoint info slices (k >= J * k_info, remainder zero-padded); the
    n - k parity DoFs carry every user's parity superposed.
    """

    label: str
    p_char: int
    n: int
    k_info: int  # digits per user
    J: int = 1
    G: FieldMatrix | None = None  # systematic generator; None = uncoded (n == J*k_info)
    H: FieldMatrix | None = None
    G_gc: FieldMatrix | None = None  # optional outer channel code (systematic)
    H_gc: FieldMatrix | None = None
    mu1: float = 1.0
    mu2: float = 1.0
    muc: float = 1.0
    decoder: str = "qspa"  # "qspa" | "ml-table" | "hard"
    qspa_iters: int = 50
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.G is None:
            if self.n != self.J * self.k_info:
                raise ValueError("uncoded pipeline needs n == J * k_info")
            self.k = self.n
        else:
            self.k = self.G.shape[0]
            if self.G.shape[1] != self.n:
                raise ValueError("generator width must equal n")
            if self.k < self.J * self.k_info:
                raise ValueError("k must cover J * k_info information digits")
            if self.decoder != "ml-table":
                lead = self.G.as_array()[:, : self.k]
                if not np.array_equal(lead, np.eye(self.k, dtype=np.int64)):
                    raise ValueError("positional decoding needs a systematic generator [I | P]")
        if self.decoder == "qspa" and self.G is not None and self.H is None:
            self.H = derive_parity_check(self.G)
        if self.G_gc is not None:
            if self.G is None:
                raise ValueError("an outer channel code needs an inner multiuser code")
            self.k_gc, self.n_gc = self.G_gc.shape
            if self.k_gc < self.n:
                raise ValueError("channel-code info length must cover the inner codeword")
            lead = self.G_gc.as_array()[:, : self.k_gc]
            if not np.array_equal(lead, np.eye(self.k_gc, dtype=np.int64)):
                raise ValueError("the outer channel code must be systematic [I | P]")
            if self.H_gc is None:
                self.H_gc = derive_parity_check(self.G_gc)
        else:
            self.k_gc = self.n_gc = self.n

    @property
    def q_parity(self) -> int:
        return self.n - self.k

    @property
    def r_parity(self) -> int:
        return self.n_gc - self.k_gc

    @property
    def dofs(self) -> int:
        return self.n_gc

    @property
    def bits_per_digit(self) -> float:
        return math.log2(self.p_char)

    def frame_energy(self) -> float:
        """Expected transmit energy per frame, summed over users (pads are free)."""
        return self.J * (
            self.k_info * self.mu1 + self.q_parity * self.mu2 + self.r_parity * self.muc
        )

    def sigma2_for_ebn0(self, ebn0_db: float) -> float:
        info_bits = self.J * self.k_info * self.bits_per_digit
        eb = self.frame_energy() / info_bits
        return eb / (2.0 * 10.0 ** (ebn0_db / 10.0))


@dataclass
class BERPoint:
    ebn0_db: float
    ser: float
    ber: float
    frames: int
    symbol_errors: int
    bit_errors: int
    frame_errors: int
    n_symbols: int = 0

    def ser_ci(self, z: float = 3.0) -> float:
        """Half-width of the z-sigma binomial confidence interval on SER."""
        if self.n_symbols == 0:
            return math.inf
        return z * math.sqrt(max(self.ser * (1.0 - self.ser), 0.0) / self.n_symbols)

    def csv_row(self, pipe: FramePipeline, seed: int) -> dict:
        return {
            "scheme": pipe.label,
            "p": pipe.p_char,
            "eta": pipe.k / pipe.n if pipe.G is not None else 1.0,
            "J": pipe.J,
            "ebn0_db": self.ebn0_db,
            "ser": self.ser,
            "ber": self.ber,
            "frames": self.frames,
            "errors": self.symbol_errors,
            "seed": seed,
        }


@dataclass
class BERCurve:
    pipeline: FramePipeline
    seed: int
    points: list[BERPoint]

    def csv_rows(self) -> list[dict]:
        return [pt.csv_row(self.pipeline, self.seed) for pt in self.points]


def _natural_bits(symbols: np.ndarray, p: int) -> np.ndarray:
    width = max(1, math.ceil(math.log2(p)))
    out = np.zeros(symbols.shape + (width,), dtype=np.int64)
    v = symbols.copy()
    for b in range(width):
        out[..., b] = v & 1
        v >>= 1
    return out


def run_pipeline(
    pipe: FramePipeline, ebn0_grid_db: Sequence[float], channel: ChannelConfig
) -> BERCurve:
    """Simulate the pipeline over the Eb/N0 grid and count digit/bit errors.

    Digits are drawn uniformly, encoded, modulated with the section
    powers, superposed, and detected back to per-DoF posteriors; the
    decoder then recovers every user's digits.  Stops a point at
    max_frame_errors frame errors or max_frames frames.
    """
    mmap = ModulationMap.for_field_char(pipe.p_char)
    decoder = None
    if pipe.decoder == "qspa" and pipe.H is not None:
        if pipe.G_gc is not None:
            # joint graph: outer-code checks plus inner checks on the
            # systematic prefix of the outer codeword
            h_mc = np.zeros((pipe.H.shape[0], pipe.n_gc), dtype=np.int64)
            h_mc[:, : pipe.n] = pipe.H.as_array()
            stacked = np.vstack([pipe.H_gc.as_array(), h_mc])
            decoder = QspaDecoder(stacked, p=pipe.p_char)
        else:
            decoder = QspaDecoder(pipe.H)
    codebook = None
    if pipe.decoder == "ml-table":
        if pipe.G_gc is not None:
            raise ValueError("ml-table decoding does not support an outer channel code")
        codebook = _enumerate_codebook(pipe)
    points = []
    for pt_idx, ebn0_db in enumerate(ebn0_grid_db):
        points.append(
            _run_point(pipe, mmap, decoder, codebook, float(ebn0_db), pt_idx, channel)
        )
    return BERCurve(pipe, channel.seed, points)


def _enumerate_codebook(pipe: FramePipeline) -> tuple[np.ndarray, np.ndarray]:
    total_digits = pipe.J * pipe.k_info
    if pipe.p_char**total_digits > 10**5:
        raise ValueError("ml-table decoding is for small codes only")
    msgs = np.indices((pipe.p_char,) * total_digits).reshape(total_digits, -1).T
    u = np.zeros((msgs.shape[0], pipe.k), dtype=np.int64)
    u[:, :total_digits] = msgs
    G = pipe.G.as_array() if pipe.G is not None else np.eye(pipe.n, dtype=np.int64)
    return msgs, (u @ G) % pipe.p_char


def _run_point(
    pipe: FramePipeline,
    mmap: ModulationMap,
    decoder: QspaDecoder | None,
    codebook: np.ndarray | None,
    ebn0_db: float,
    pt_idx: int,
    channel: ChannelConfig,
) -> BERPoint:
    sigma2 = pipe.sigma2_for_ebn0(ebn0_db)
    p = pipe.p_char
    total_digits = pipe.J * pipe.k_info
    frames = symbol_errors = bit_errors = frame_errors = 0
    batch_start = 0
    while frames < channel.max_frames and frame_errors < channel.max_frame_errors:
        b = min(_FRAME_BATCH, channel.max_frames - frames)
        rng = np.random.default_rng(
            np.random.SeedSequence((channel.seed, pt_idx, batch_start))
        )
        digits = rng.integers(0, p, size=(b, total_digits))
        decoded = _transmit_batch(pipe, mmap, decoder, codebook, digits, sigma2, rng)
        errs = decoded != digits
        symbol_errors += int(errs.sum())
        bits_tx = _natural_bits(digits, p)
        bits_rx = _natural_bits(decoded, p)
        bit_errors += int((bits_tx != bits_rx).sum())
        frame_errors += int(errs.any(axis=1).sum())
        frames += b
        batch_start += b
    n_digits = frames * total_digits
    n_bits = n_digits * max(1, math.ceil(math.log2(p)))
    return BERPoint(
        ebn0_db=ebn0_db,
        ser=symbol_errors / n_digits,
        ber=bit_errors / n_bits,
        frames=frames,
        symbol_errors=symbol_errors,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        n_symbols=n_digits,
    )


def _transmit_batch(
    pipe: FramePipeline,
    mmap: ModulationMap,
    decoder: QspaDecoder | None,
    codebook: np.ndarray | None,
    digits: np.ndarray,
    sigma2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    b = digits.shape[0]
    p = pipe.p_char
    n, k, J = pipe.n, pipe.k, pipe.J
    n_total, k_gc = pipe.n_gc, pipe.k_gc
    total_digits = J * pipe.k_info
    u = np.zeros((b, k), dtype=np.int64)
    u[:, :total_digits] = digits
    if pipe.G is None:
        per_user = []
        for j in range(J):
            cw = np.zeros((b, n), dtype=np.int64)
            sl = slice(j * pipe.k_info, (j + 1) * pipe.k_info)
            cw[:, sl] = u[:, sl]
            per_user.append(cw)
    else:
        G = pipe.G.as_array()
        per_user = []
        for j in range(J):
            uj = np.zeros((b, k), dtype=np.int64)
            sl = slice(j * pipe.k_info, (j + 1) * pipe.k_info)
            uj[:, sl] = u[:, sl]
            per_user.append((uj @ G) % p)
    if pipe.G_gc is not None:
        G_gc = pipe.G_gc.as_array()
        wrapped = []
        for cw in per_user:
            padded = np.zeros((b, k_gc), dtype=np.int64)
            padded[:, :n] = cw
            wrapped.append((padded @ G_gc) % p)
        per_user = wrapped

    # info slices are orthogonal (one user active); parity DoFs superpose all J
    amp = mmap.amplitudes
    x = np.zeros((b, n_total))
    info_len = total_digits
    for j, cw in enumerate(per_user):
        sl = slice(j * pipe.k_info, (j + 1) * pipe.k_info)
        x[:, sl] = math.sqrt(pipe.mu1) * amp[cw[:, sl]]
    if n > k:
        parity = np.zeros((b, n - k))
        for cw in per_user:
            parity += math.sqrt(pipe.mu2) * amp[cw[:, k:n]]
        x[:, k:n] = parity
    if n_total > k_gc:
        parity = np.zeros((b, n_total - k_gc))
        for cw in per_user:
            parity += math.sqrt(pipe.muc) * amp[cw[:, k_gc:]]
        x[:, k_gc:] = parity
    y = x + rng.normal(0.0, math.sqrt(sigma2), size=x.shape)

    # per-DoF posteriors over the sum pattern w
    post = np.zeros((b, n_total, p))
    post[:, :, 0] = 1.0  # zero-pad sections are known
    flat_info = detect_ffsp_posteriors(
        y[:, :info_len].ravel(), 1, pipe.mu1, mmap, sigma2
    ).reshape(b, info_len, p)
    post[:, :info_len, :] = flat_info
    if n > k:
        post[:, k:n, :] = detect_ffsp_posteriors(
            y[:, k:n].ravel(), J, pipe.mu2, mmap, sigma2
        ).reshape(b, n - k, p)
    if n_total > k_gc:
        post[:, k_gc:, :] = detect_ffsp_posteriors(
            y[:, k_gc:].ravel(), J, pipe.muc, mmap, sigma2
        ).reshape(b, n_total - k_gc, p)

    if pipe.decoder == "ml-table":
        msgs, words = codebook
        logp = np.log(np.clip(post, 1e-300, None))
        # score every codeword: sum of per-position log posteriors
        scores = logp[:, np.arange(n)[None, :], words].sum(axis=2)
        return msgs[np.argmax(scores, axis=1)]
    if pipe.decoder == "hard" or pipe.G is None:
        w_hat = np.argmax(post, axis=2)
    else:
        res = decoder.decode(post, max_iters=pipe.qspa_iters)
        w_hat = res.codeword
    return w_hat[:, :total_digits]
