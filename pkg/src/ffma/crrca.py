"""Capacity-to-rate ratio (CRR) analysis and capacity-aligned power allocation.

The CRR of a section is lambda = C/R.  For a multirate frame the error
floor tracks the worst section, so the aligned allocation maximizes
min lambda over sections subject to the power budget; at the optimum
the section CRRs are equal.  When every section already runs at the
same rate the aligned allocation collapses to equal power.

The p-ary-vs-binary comparison equates the two systems' CRRs at a
common Eb/N0; the resulting power ratio mu_pas against the spectral
efficiency gain log2(p) is the three-way verdict on p-ary transmission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .ratecap import gaussian_capacity

_BRACKET_EPS = 1e-12
_BISECT_ITERS = 200


def crr(C: float, R: float) -> float:
    """Capacity-to-rate ratio lambda = C / R."""
    if R <= 0:
        raise ValueError("rate must be positive")
    return C / R


def fano_bound(lam: float, M: int, p: int) -> float:
    """Converse word-error floor max(0, 1 - lambda - 1/(M log2 p))."""
    if M < 1 or p < 2:
        raise ValueError("need M >= 1 and p >= 2")
    return max(0.0, 1.0 - lam - 1.0 / (M * math.log2(p)))


def gamma_from_ebn0(ebn0_db: float, rate: float, mu: float = 1.0, factor: float = 2.0) -> float:
    """Per-DoF SNR from Eb/N0 (dB): gamma = factor * mu * rate * Eb/N0."""
    return factor * mu * rate * 10.0 ** (ebn0_db / 10.0)


@dataclass(frozen=True)
class CAResult:
    mu1: float
    mu2: float
    mu_pas: float
    crr_info: float
    crr_parity: float
    converged: bool
    iterations: int
    method: str  # "epa" | "mu-epa" | "bisection"

    def to_json(self) -> dict:
        return {
            "mu1": self.mu1,
            "mu2": self.mu2,
            "mu_pas": self.mu_pas,
            "crr_info": self.crr_info,
            "crr_parity": self.crr_parity,
            "converged": self.converged,
            "iterations": self.iterations,
            "method": self.method,
        }


def _ca_two_section(K: int, Q: int, m: int, gamma_a: float, p: int, J: int) -> CAResult:
    """Equalize the info and parity CRRs along K*mu1 + Q*mu2 = m."""
    log2p = math.log2(p)
    r_info = log2p
    r_parity = (min(K * J, Q) / Q) * log2p

    def crr_pair(mu1: float) -> tuple[float, float]:
        mu2 = (m - K * mu1) / Q
        lam1 = gaussian_capacity(mu1 * gamma_a) / r_info
        lam2 = gaussian_capacity(J * mu2 * gamma_a) / r_parity
        return lam1, lam2

    lo, hi = _BRACKET_EPS, m / K - _BRACKET_EPS
    lam1_lo, lam2_lo = crr_pair(lo)
    lam1_hi, lam2_hi = crr_pair(hi)
    if not (lam1_lo < lam1_hi and lam2_lo > lam2_hi):
        raise RuntimeError("CRRs are not monotone along the constraint line")
    iterations = 0
    for _ in range(_BISECT_ITERS):
        iterations += 1
        mid = 0.5 * (lo + hi)
        lam1, lam2 = crr_pair(mid)
        if lam1 < lam2:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    mu1 = 0.5 * (lo + hi)
    mu2 = (m - K * mu1) / Q
    lam1, lam2 = crr_pair(mu1)
    converged = abs(lam1 - lam2) <= 1e-9 * max(lam1, lam2)
    return CAResult(mu1, mu2, mu1 / mu2, lam1, lam2, converged, iterations, "bisection")


def ca_allocate_su(K: int, Q: int, m: int, gamma_a: float, p: int = 2) -> CAResult:
    """Capacity-aligned power split for a single user.

    K >= Q makes the frame single-rate and the aligned split is exactly
    equal power (mu_pas = 1); otherwise the two CRRs are equalized by
    bisection on mu1.
    """
    if K < 0 or Q < 0 or K + Q == 0 or m <= 0:
        raise ValueError("need nonnegative K, Q with K + Q > 0 and m > 0")
    if gamma_a <= 0:
        raise ValueError("gamma_a must be positive")
    if Q == 0 or K >= Q:
        mu = m / (K + Q)
        lam = gaussian_capacity(mu * gamma_a) / math.log2(p)
        return CAResult(mu, mu, 1.0, lam, lam, True, 0, "epa")
    return _ca_two_section(K, Q, m, gamma_a, p, J=1)


def ca_allocate_mu(K: int, Q: int, m: int, gamma_a: float, p: int = 2, J: int = 1) -> CAResult:
    """Capacity-aligned power split for J users with superposed parity.

    K*J >= Q pins the aligned split to the multiuser equal power
    allocation (mu1 = J*mu2, mu_pas = J); below that, the info CRR
    C(mu1 g)/log2 p and parity CRR C(J mu2 g)/((KJ/Q) log2 p) are
    equalized by bisection.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    if gamma_a <= 0:
        raise ValueError("gamma_a must be positive")
    if Q == 0 or K * J >= Q:
        mu2 = m / (K * J + Q)
        mu1 = J * mu2
        lam1 = gaussian_capacity(mu1 * gamma_a) / math.log2(p)
        lam2 = gaussian_capacity(J * mu2 * gamma_a) / math.log2(p) if Q else lam1
        return CAResult(mu1, mu2, float(J), lam1, lam2, True, 0, "mu-epa")
    return _ca_two_section(K, Q, m, gamma_a, p, J=J)


def ca_allocate_sections(
    lengths: Sequence[int],
    rates: Sequence[float],
    total: float,
    gamma_a: float,
    gains: Sequence[float] | None = None,
) -> list[float]:
    """Generic max-min CRR split over any number of sections.

    Section i holds `lengths[i]` DoFs at rate `rates[i]` and sees SNR
    gains[i] * mu_i * gamma_a.  The common aligned CRR is found by
    bisection on lambda (power spent grows monotonically with lambda).
    Only the two-section splits above are pinned to reference results;
    treat longer splits as a numeric convenience.
    """
    n = len(lengths)
    if n == 0 or len(rates) != n:
        raise ValueError("lengths and rates must be equal-length and non-empty")
    gains = list(gains) if gains is not None else [1.0] * n
    if len(gains) != n:
        raise ValueError("gains must match sections")

    def power_at(lam: float) -> float:
        return sum(
            L * (2.0 ** (2.0 * lam * R) - 1.0) / (g * gamma_a)
            for L, R, g in zip(lengths, rates, gains)
        )

    lo, hi = 0.0, 1.0
    while power_at(hi) < total:
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("alignment level diverged")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if power_at(mid) < total:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return [(2.0 ** (2.0 * lam * R) - 1.0) / (g * gamma_a) for R, g in zip(rates, gains)]


@dataclass(frozen=True)
class CRRReport:
    """Per-section CRRs of one allocated frame, their minimum, and the error floor."""

    lam_info: float
    lam_parity: float
    min_crr: float
    fano_floor: float
    sum_objective: float  # lam_info + parity CRR in its capacity-form denominator

    def __post_init__(self):
        assert self.min_crr <= self.lam_info + 1e-12
        assert self.min_crr <= self.lam_parity + 1e-12


def crr_report(K: int, Q: int, m: int, gamma_a: float, p: int, pav, J: int = 1) -> CRRReport:
    """CRRs of the info and parity sections under an explicit power split."""
    mu1, mu2 = (pav.mu1, pav.mu2) if hasattr(pav, "mu1") else (pav[0], pav[1])
    log2p = math.log2(p)
    lam1 = gaussian_capacity(mu1 * gamma_a) / log2p
    lam2 = gaussian_capacity(J * mu2 * gamma_a) / ((min(K * J, Q) / Q) * log2p)
    lam2_cap = gaussian_capacity(J * mu2 * gamma_a) / ((K * J / Q) * log2p)
    min_crr = min(lam1, lam2)
    return CRRReport(
        lam_info=lam1,
        lam_parity=lam2,
        min_crr=min_crr,
        fano_floor=fano_bound(min_crr, K, p),
        sum_objective=lam1 + lam2_cap,
    )


@dataclass(frozen=True)
class CapacityCrrReport:
    """The two objectives whose argmaxes the max-capacity/min-error split compares."""

    mu1: float
    mu2: float
    lam_info: float
    lam_parity: float
    lam_parity_capacity_form: float  # denominator K/Q regardless of min{K,Q}
    sum_objective: float
    min_objective: float
    objectives_share_argmax: bool


def capacity_vs_crr(K: int, Q: int, m: int, gamma_a: float, p: int, pav) -> CapacityCrrReport:
    """Evaluate both the capacity-equivalent sum of CRRs and the min CRR.

    The sum form lam1 + lam2' (with the parity denominator K/Q) is a
    rescaled sum capacity; the min form is the alignment objective.
    They share an argmax exactly when the frame is single-rate or when
    K <= Q makes the two parity denominators coincide.
    """
    mu1, mu2 = (pav.mu1, pav.mu2) if hasattr(pav, "mu1") else (pav[0], pav[1])
    log2p = math.log2(p)
    c1 = gaussian_capacity(mu1 * gamma_a)
    c2 = gaussian_capacity(mu2 * gamma_a)
    lam1 = c1 / log2p
    lam2 = c2 / ((min(K, Q) / Q) * log2p)
    lam2_cap = c2 / ((K / Q) * log2p)
    return CapacityCrrReport(
        mu1=mu1,
        mu2=mu2,
        lam_info=lam1,
        lam_parity=lam2,
        lam_parity_capacity_form=lam2_cap,
        sum_objective=lam1 + lam2_cap,
        min_objective=min(lam1, lam2),
        objectives_share_argmax=(K == Q) or (K <= Q),
    )


# --------------------------------------------------------------------------
# p-ary vs binary power scaling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PASCurvePoint:
    p: int
    eta: float
    ebn0_db: float
    J: int
    mu_pas: float
    gain: float  # spectral-efficiency gain log2 p
    verdict: str
    gamma_b: float
    gamma_p: float

    def csv_row(self) -> dict:
        return {
            "p": self.p,
            "eta": self.eta,
            "ebn0_db": self.ebn0_db,
            "J": self.J,
            "mu_pas": self.mu_pas,
            "log2p": self.gain,
            "verdict": self.verdict,
        }


def pas_verdict(mu_pas: float, p: int) -> str:
    gain = math.log2(p)
    if mu_pas < gain:
        return "p-ary better"
    if mu_pas == gain:
        return "equal"
    return "worse"


def pas_pary_su(p: int, eta: float, ebn0_db: float, snr_factor: float = 2.0) -> PASCurvePoint:
    """Power ratio of a p-ary system against the binary reference (one user).

    With gamma_b = snr_factor * eta * Eb/N0 at the unit-power binary
    reference, equal CRRs give gamma_p = (1+gamma_b)^log2(p) - 1 and
    mu_pas = (gamma_p/gamma_b) / log2 p.
    """
    return pas_pary_mu(p, eta, ebn0_db, J=1, snr_factor=snr_factor)


def pas_pary_mu(p: int, eta: float, ebn0_db: float, J: int = 1, snr_factor: float = 2.0) -> PASCurvePoint:
    """Power ratio of a p-ary system against the binary reference, J users.

    Aligns log2(1+J*gamma_p)/R_p with log2(1+J*gamma_b)/R_b where
    R_p = eta log2 p and R_b = eta; closed form
    gamma_p = ((1+J*gamma_b)^log2(p) - 1)/J.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    if J < 1:
        raise ValueError("J must be >= 1")
    gain = math.log2(p)
    gamma_b = gamma_from_ebn0(ebn0_db, eta, mu=1.0, factor=snr_factor)
    if p == 2:
        gamma_p, mu_pas = gamma_b, 1.0
    else:
        x = J * gamma_b
        gamma_p = ((1.0 + x) ** gain - 1.0) / J
        mu_pas = (gamma_p / gamma_b) / gain
    return PASCurvePoint(
        p=p, eta=eta, ebn0_db=ebn0_db, J=J, mu_pas=mu_pas, gain=gain,
        verdict=pas_verdict(mu_pas, p), gamma_b=gamma_b, gamma_p=gamma_p,
    )


def pas_alignment_oracle(
    p: int, eta: float, ebn0_db: float, J: int = 1, snr_factor: float = 2.0
) -> float:
    """Bisection solve of the CRR-alignment equation, independent of the closed form."""
    gain = math.log2(p)
    gamma_b = gamma_from_ebn0(ebn0_db, eta, mu=1.0, factor=snr_factor)
    target = math.log2(1.0 + J * gamma_b) / eta

    def h(gamma_p: float) -> float:
        return math.log2(1.0 + J * gamma_p) / (eta * gain) - target

    lo, hi = 0.0, max(gamma_b, 1.0)
    while h(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("alignment bracket diverged")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    gamma_p = 0.5 * (lo + hi)
    return (gamma_p / gamma_b) / gain
