"""Degrees-of-freedom accounting, coding rates, and channel capacities.

A transmit frame splits into sections: K information DoFs per user, Q
multiuser-code parity DoFs, and (with an outer channel code) R extra
parity DoFs.  Capacities are sums of per-section Gaussian terms
C(x) = 0.5*log2(1+x); the closed-form optimal power split is equal
power per received section, which the grid oracle cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class PowerConstraintError(ValueError):
    """Supplied power factors violate the total-power constraint."""


def gaussian_capacity(x: float) -> float:
    """C(x) = 0.5 * log2(1 + x), bits per real DoF."""
    return 0.5 * math.log2(1.0 + x)


@dataclass(frozen=True)
class SystemDims:
    """Section lengths and user counts of one FFMA configuration.

    K: information DoFs per user; Q: multiuser-code parity DoFs;
    m: multiuser-code length; R: channel-code parity DoFs (0 if absent);
    N: channel-code length (defaults to m when R = 0, else m + R);
    J_mc: users per block; T: blocks.  Total users J = J_mc * T.
    """

    K: int
    Q: int
    m: int
    R: int = 0
    N: int | None = None
    J_mc: int = 1
    T: int = 1
    p: int = 2

    def __post_init__(self):
        for name in ("K", "Q", "m", "R", "J_mc", "T"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.N is None:
            object.__setattr__(self, "N", self.m + self.R)
        if self.J_mc < 1 or self.T < 1:
            raise ValueError("J_mc and T must be >= 1")

    @property
    def J(self) -> int:
        return self.J_mc * self.T

    @property
    def M(self) -> int:
        return self.J_mc * self.K


@dataclass(frozen=True)
class PAV:
    """Per-section power scale factors (mu1, mu2[, muc])."""

    mu1: float
    mu2: float
    muc: float = 0.0
    form: str = "regular-td"  # or "regular-cc"

    def as_tuple(self) -> tuple[float, ...]:
        return (self.mu1, self.mu2) if self.form == "regular-td" else (self.mu1, self.mu2, self.muc)

    @property
    def mu_pas(self) -> float:
        return self.mu1 / self.mu2 if self.mu2 else math.inf

    def check_power(self, dims: SystemDims, total: float, rel_tol: float = 1e-9) -> None:
        used = dims.K * self.mu1 + dims.Q * self.mu2
        if self.form == "regular-cc":
            used += dims.R * self.muc
        if not math.isclose(used, total, rel_tol=rel_tol, abs_tol=1e-12):
            raise PowerConstraintError(f"power {used} != budget {total}")


def loading_factor(dims: SystemDims) -> float:
    """Occupied over available DoFs of the multiuser code, M/m."""
    if dims.m <= 0:
        raise ValueError("m must be positive")
    return dims.M / dims.m


def coding_rate(dims: SystemDims) -> float:
    """Bits per DoF of the multiuser code: (M/m) * log2 p."""
    return loading_factor(dims) * math.log2(dims.p)


def parity_rate(K: int, Q: int, p: int) -> float:
    """Rate of the multiuser-code parity section: min(K, Q)/Q * log2 p."""
    if Q <= 0:
        raise ValueError("parity rate needs Q > 0")
    return min(K, Q) / Q * math.log2(p)


def gc_parity_rate(K: int, R: int, p: int) -> float:
    """Rate of the channel-code parity section: min(K, R)/R * log2 p."""
    if R <= 0:
        raise ValueError("channel-code parity rate needs R > 0")
    return min(K, R) / R * math.log2(p)


def classify_sequence(K: int, Q: int, p: int = 2) -> str:
    """'single-rate' when the parity section runs at the information rate."""
    del p
    return "single-rate" if K >= Q else "multirate"


@dataclass(frozen=True)
class RateProfile:
    """Per-section rates (bits/DoF) and loading factors of one transmit frame."""

    info_rate: float
    info_load: float
    mc_parity_rate: float | None
    mc_parity_load: float | None
    gc_parity_rate: float | None
    gc_parity_load: float | None
    classification: str


def rate_profile(dims: SystemDims) -> RateProfile:
    """Section-by-section rate breakdown; the info section always runs at log2 p."""
    log2p = math.log2(dims.p)
    mc_rate = parity_rate(dims.K, dims.Q, dims.p) if dims.Q else None
    gc_rate = gc_parity_rate(dims.K, dims.R, dims.p) if dims.R else None
    return RateProfile(
        info_rate=log2p,
        info_load=1.0,
        mc_parity_rate=mc_rate,
        mc_parity_load=(min(dims.K, dims.Q) / dims.Q) if dims.Q else None,
        gc_parity_rate=gc_rate,
        gc_parity_load=(min(dims.K, dims.R) / dims.R) if dims.R else None,
        classification=classify_sequence(dims.K, dims.Q),
    )


@dataclass(frozen=True)
class CapacityReport:
    scenario: str
    dims: SystemDims
    gamma_a: float
    pav: PAV
    sections: tuple[tuple[str, int, float, float], ...]  # (name, count, mu, bits/DoF)
    total_bits: float
    bits_per_dof: float
    at_optimum: bool

    @property
    def mu_pas(self) -> float:
        return self.pav.mu_pas

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "gamma_a": self.gamma_a,
            "pav": list(self.pav.as_tuple()),
            "mu_pas": self.mu_pas if math.isfinite(self.mu_pas) else None,
            "sections": [list(s) for s in self.sections],
            "capacity_bits": self.total_bits,
            "bits_per_dof": self.bits_per_dof,
            "at_optimum": self.at_optimum,
        }

    def csv_row(self) -> dict:
        d = self.dims
        return {
            "scenario": self.scenario,
            "p": d.p,
            "K": d.K,
            "Q": d.Q,
            "R": d.R,
            "m": d.m,
            "N": d.N,
            "J_mc": d.J_mc,
            "T": d.T,
            "gamma_a": self.gamma_a,
            "mu1": self.pav.mu1,
            "mu2": self.pav.mu2,
            "muc": self.pav.muc,
            "capacity_bits": self.total_bits,
            "bits_per_dof": self.bits_per_dof,
        }


def _report(scenario, dims, gamma_a, pav, terms, dofs, at_optimum) -> CapacityReport:
    total = sum(count * cap for _, count, _, cap in terms)
    return CapacityReport(
        scenario=scenario,
        dims=dims,
        gamma_a=gamma_a,
        pav=pav,
        sections=tuple(terms),
        total_bits=total,
        bits_per_dof=total / dofs,
        at_optimum=at_optimum,
    )


def capacity_su_tdma(dims: SystemDims, gamma_a: float, pav: PAV | None = None) -> CapacityReport:
    """Single-user capacity over m DoFs: K*C(mu1 g) + Q*C(mu2 g).

    Without an explicit PAV, equal power mu1 = mu2 = m/(K+Q) is optimal,
    giving (K+Q) * C(m*g/(K+Q)).
    """
    if gamma_a <= 0:
        raise ValueError("gamma_a must be positive")
    K, Q, m = dims.K, dims.Q, dims.m
    at_opt = pav is None
    if pav is None:
        mu = m / (K + Q)
        pav = PAV(mu if K else 0.0, mu if Q else 0.0, form="regular-td")
    pav.check_power(dims, m)
    terms = [
        ("info", K, pav.mu1, gaussian_capacity(pav.mu1 * gamma_a)),
        ("mc-parity", Q, pav.mu2, gaussian_capacity(pav.mu2 * gamma_a)),
    ]
    return _report("su-tdma", dims, gamma_a, pav, [t for t in terms if t[1]], m, at_opt)


def capacity_su_ccma(dims: SystemDims, gamma_a: float, pav: PAV | None = None) -> CapacityReport:
    """Single-user capacity over N DoFs with an outer channel code."""
    if gamma_a <= 0:
        raise ValueError("gamma_a must be positive")
    K, Q, R, N = dims.K, dims.Q, dims.R, dims.N
    at_opt = pav is None
    if pav is None:
        mu = N / (K + Q + R)
        pav = PAV(mu if K else 0.0, mu if Q else 0.0, mu if R else 0.0, form="regular-cc")
    pav.check_power(dims, N)
    terms = [
        ("info", K, pav.mu1, gaussian_capacity(pav.mu1 * gamma_a)),
        ("mc-parity", Q, pav.mu2, gaussian_capacity(pav.mu2 * gamma_a)),
        ("gc-parity", R, pav.muc, gaussian_capacity(pav.muc * gamma_a)),
    ]
    return _report("su-ccma", dims, gamma_a, pav, [t for t in terms if t[1]], N, at_opt)


def capacity_mu_tdma(dims: SystemDims, gamma_a: float, pav: PAV | None = None) -> CapacityReport:
    """J_mc-user sum capacity: per-user info orthogonal, parity superposed.

    KJ*C(mu1 g) + Q*C(J mu2 g); the optimum mu1 = J mu2 with
    mu2 = m/(KJ+Q) is the multiuser equal power allocation, so
    mu_pas = J_mc at the optimum.
    """
    if gamma_a <= 0:
        raise ValueError("gamma_a must be positive")
    K, Q, m, J = dims.K, dims.Q, dims.m, dims.J_mc
    at_opt = pav is None
    if pav is None:
        mu2 = m / (K * J + Q)
        pav = PAV(J * mu2 if K else 0.0, mu2 if Q else 0.0, form="regular-td")
    pav.check_power(dims, m)
    terms = [
        ("info", K * J, pav.mu1, gaussian_capacity(pav.mu1 * gamma_a)),
        ("mc-parity", Q, pav.mu2, gaussian_capacity(J * pav.mu2 * gamma_a)),
    ]
    return _report("mu-tdma", dims, gamma_a, pav, [t for t in terms if t[1]], m, at_opt)


def capacity_mu_ccma(dims: SystemDims, gamma_a: float, pav: PAV | None = None) -> CapacityReport:
    """J-user sum capacity with T blocks and an outer channel code.

    KJ*C(mu1 g) + QT*C(J_mc mu2 g) + R*C(J muc g); the optimum is
    muc = N/(KJ+QT+R), mu1 = J muc, mu2 = T muc.
    """
    if gamma_a <= 0:
        raise ValueError("gamma_a must be positive")
    K, Q, R, N, J_mc, T = dims.K, dims.Q, dims.R, dims.N, dims.J_mc, dims.T
    J = dims.J
    at_opt = pav is None
    if pav is None:
        muc = N / (K * J + Q * T + R)
        pav = PAV(J * muc if K else 0.0, T * muc if Q else 0.0, muc if R else 0.0, form="regular-cc")
    pav.check_power(dims, N)
    terms = [
        ("info", K * J, pav.mu1, gaussian_capacity(pav.mu1 * gamma_a)),
        ("mc-parity", Q * T, pav.mu2, gaussian_capacity(J_mc * pav.mu2 * gamma_a)),
        ("gc-parity", R, pav.muc, gaussian_capacity(J * pav.muc * gamma_a)),
    ]
    return _report("mu-ccma", dims, gamma_a, pav, [t for t in terms if t[1]], N, at_opt)


# --------------------------------------------------------------------------
# Grid oracle
# --------------------------------------------------------------------------

def grid_oracle(
    objective: Callable[[np.ndarray], np.ndarray],
    lengths: Sequence[int],
    total: float,
    step: float = 1e-3,
) -> tuple[np.ndarray, float]:
    """Exhaustive scan of the power simplex {sum len_i * mu_i = total}.

    `objective` receives an (N, n_sections) array of candidate PAVs and
    returns N values.  The simplex is sampled at relative resolution
    `step`: each free coordinate walks [0, total/len_i] in steps of
    step * total/len_i, and the last section absorbs the remainder.
    Returns (best mu vector, best value).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    lens = [int(x) for x in lengths if x > 0]
    if len(lens) != len(lengths):
        raise ValueError("grid oracle sections must have positive length")
    n = len(lens)
    if n == 1:
        mu = np.array([[total / lens[0]]])
        return mu[0], float(objective(mu)[0])
    ticks = np.arange(0.0, 1.0 + step / 2, step)
    if n == 2:
        mu1 = ticks * (total / lens[0])
        mu2 = (total - lens[0] * mu1) / lens[1]
        ok = mu2 >= -1e-15
        cand = np.stack([mu1[ok], np.clip(mu2[ok], 0.0, None)], axis=1)
    elif n == 3:
        g1 = ticks * (total / lens[0])
        g2 = ticks * (total / lens[1])
        m1, m2 = np.meshgrid(g1, g2, indexing="ij")
        m3 = (total - lens[0] * m1 - lens[1] * m2) / lens[2]
        ok = m3 >= -1e-15
        cand = np.stack([m1[ok], m2[ok], np.clip(m3[ok], 0.0, None)], axis=1)
    else:
        raise ValueError("grid oracle supports 1-3 sections")
    vals = np.asarray(objective(cand), dtype=np.float64)
    best = int(np.argmax(vals))
    return cand[best], float(vals[best])


def tdma_objective(dims: SystemDims, gamma_a: float, multiuser: bool = False):
    """Vectorized sum-capacity objective over (mu1, mu2) candidates."""
    K, Q, J = dims.K, dims.Q, (dims.J_mc if multiuser else 1)

    def f(mu: np.ndarray) -> np.ndarray:
        c1 = 0.5 * np.log2(1.0 + mu[:, 0] * gamma_a)
        c2 = 0.5 * np.log2(1.0 + J * mu[:, 1] * gamma_a)
        return K * J * c1 + Q * c2

    return f


def ccma_objective(dims: SystemDims, gamma_a: float, multiuser: bool = False):
    """Vectorized sum-capacity objective over (mu1, mu2, muc) candidates."""
    K, Q, R = dims.K, dims.Q, dims.R
    J_mc = dims.J_mc if multiuser else 1
    T = dims.T if multiuser else 1
    J = J_mc * T

    def f(mu: np.ndarray) -> np.ndarray:
        c1 = 0.5 * np.log2(1.0 + mu[:, 0] * gamma_a)
        c2 = 0.5 * np.log2(1.0 + J_mc * mu[:, 1] * gamma_a)
        c3 = 0.5 * np.log2(1.0 + J * mu[:, 2] * gamma_a)
        return K * J * c1 + Q * T * c2 + R * c3

    return f
