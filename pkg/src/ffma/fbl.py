"""Finite-blocklength normal-approximation rate bounds.

The achievable rate at blocklength m and error probability eps is
capacity minus a dispersion penalty sqrt(V/m) * Qinv(eps) plus the
0.5*log2(m)/m correction; the O(1/m) remainder is dropped.  Four
scenarios share one interface, parameterized by the received per-DoF
SNR S:

  shannon   C(S)
  p2p       single stream over all m DoFs
  gmac      J equal-power users fully superposed (sum dispersion
            V(S) + V_cr(J, S/J))
  pa-ffma   orthogonal per-user info sections, superposed parity
            (dispersion V(S)/(JK) + V_cr(J, S/J)/Q with Q = m - JK)

Eb/N0 = S / (2 * rate) with the noise at unit variance per DoF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfc, erfcinv

from .ratecap import SystemDims, capacity_mu_tdma, capacity_su_tdma, gaussian_capacity

SCENARIOS = ("shannon", "p2p", "gmac", "pa-ffma")


def gaussian_q(x: float) -> float:
    """Complementary Gaussian CDF."""
    return 0.5 * erfc(x / math.sqrt(2.0))


def gaussian_q_inv(eps: float) -> float:
    """Inverse of gaussian_q on (0, 1)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    return math.sqrt(2.0) * float(erfcinv(2.0 * eps))


def dispersion(P: float) -> float:
    """AWGN channel dispersion V(P) = P(P+2) / (2(1+P)^2), in bits^2."""
    if P < 0:
        raise ValueError("power must be nonnegative")
    return P * (P + 2.0) / (2.0 * (1.0 + P) ** 2)


def cross_dispersion(J: int, P: float) -> float:
    """Multiuser cross-dispersion V_cr(J, P) = J(J-1)P^2 / (2(1+JP)^2)."""
    if J < 1:
        raise ValueError("J must be >= 1")
    if P < 0:
        raise ValueError("power must be nonnegative")
    return J * (J - 1) * P * P / (2.0 * (1.0 + J * P) ** 2)


@dataclass(frozen=True)
class FBLReport:
    scenario: str
    rate_bound: float  # bits per DoF
    capacity_per_dof: float
    dispersion_penalty: float
    log_term: float
    m: int
    eps: float
    P_avg: float
    out_of_regime: bool  # eps > 0.5 puts the bound above capacity

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "rate_bound": self.rate_bound,
            "capacity_per_dof": self.capacity_per_dof,
            "dispersion_penalty": self.dispersion_penalty,
            "log_term": self.log_term,
            "m": self.m,
            "eps": self.eps,
            "P_avg": self.P_avg,
            "out_of_regime": self.out_of_regime,
        }


def _log_term(m: int) -> float:
    return math.log2(m) / (2.0 * m)


def fbl_rate_su(dims: SystemDims, P_avg: float, eps: float) -> FBLReport:
    """Single-user achievable rate bound at equal power allocation."""
    if dims.m <= 0:
        raise ValueError("m must be positive")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    cap = capacity_su_tdma(dims, P_avg).total_bits / dims.m
    penalty = math.sqrt(dispersion(P_avg) / dims.m) * gaussian_q_inv(eps)
    bound = cap - penalty + _log_term(dims.m)
    return FBLReport("p2p", bound, cap, penalty, _log_term(dims.m), dims.m, eps, P_avg, eps > 0.5)


def fbl_rate_mu(dims: SystemDims, P_avg: float, eps: float) -> FBLReport:
    """Multiuser sum-rate bound at the multiuser equal power allocation.

    Requires the fully loaded split Q = m - J*K > 0: info dispersion is
    averaged over the JK orthogonal DoFs, interference over the Q
    superposed ones.
    """
    J, K, m = dims.J_mc, dims.K, dims.m
    if dims.Q != m - J * K or dims.Q <= 0:
        raise ValueError("multiuser bound needs Q = m - J*K > 0")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    rep = capacity_mu_tdma(dims, P_avg)
    cap = rep.total_bits / m
    mu1, mu2 = rep.pav.mu1, rep.pav.mu2
    var = dispersion(mu1 * P_avg) / (J * K) + cross_dispersion(J, mu2 * P_avg) / dims.Q
    penalty = math.sqrt(var) * gaussian_q_inv(eps)
    bound = cap - penalty + _log_term(m)
    return FBLReport("pa-ffma", bound, cap, penalty, _log_term(m), m, eps, P_avg, eps > 0.5)


def scenario_rate(scenario: str, S: float, m: int, K: int, J: int, eps: float) -> float:
    """Achievable bits/DoF at received per-DoF SNR S for one scenario."""
    if scenario == "shannon":
        return gaussian_capacity(S)
    qinv = gaussian_q_inv(eps)
    log_term = _log_term(m)
    if scenario == "p2p":
        return gaussian_capacity(S) - math.sqrt(dispersion(S) / m) * qinv + log_term
    if scenario == "gmac":
        var = (dispersion(S) + cross_dispersion(J, S / J)) / m
        return gaussian_capacity(S) - math.sqrt(var) * qinv + log_term
    if scenario == "pa-ffma":
        Q = m - J * K
        if Q <= 0:
            raise ValueError("pa-ffma scenario needs J*K < m")
        var = dispersion(S) / (J * K) + cross_dispersion(J, S / J) / Q
        return gaussian_capacity(S) - math.sqrt(var) * qinv + log_term
    raise ValueError(f"unknown scenario {scenario!r}; pick one of {SCENARIOS}")


@dataclass(frozen=True)
class MinEbn0Result:
    scenario: str
    spectral_efficiency: float
    ebn0_db: float
    received_snr: float

    def csv_row(self, m: int, K: int, J: int, eps: float) -> dict:
        return {
            "scenario": self.scenario,
            "J": J,
            "spectral_efficiency": self.spectral_efficiency,
            "min_ebn0_db": self.ebn0_db,
            "m": m,
            "K": K,
            "eps": eps,
        }


class BracketError(RuntimeError):
    """Root bracketing for the rate equation failed."""


def min_ebn0(
    target_rate: float,
    m: int,
    K: int,
    J: int,
    eps: float,
    scenario: str,
    tol: float = 1e-9,
) -> MinEbn0Result:
    """Minimum Eb/N0 (dB) at which `scenario` supports target_rate bits/DoF.

    Bisects the received per-DoF SNR until the rate bound meets the
    target within `tol`; Eb/N0 = S / (2 * rate).
    """
    if target_rate <= 0:
        raise ValueError("target rate must be positive")

    def f(S: float) -> float:
        return scenario_rate(scenario, S, m, K, J, eps) - target_rate

    lo, hi = 1e-12, 1.0
    for _ in range(200):
        if f(hi) >= 0:
            break
        hi *= 2.0
        if hi > 1e12:
            raise BracketError(f"target rate {target_rate} unreachable for {scenario}")
    else:  # pragma: no cover
        raise BracketError("bracket growth did not terminate")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
        if abs(f(hi)) < tol and (hi - lo) < tol * max(1.0, hi):
            break
    S = hi
    ebn0 = S / (2.0 * target_rate)
    return MinEbn0Result(scenario, target_rate, 10.0 * math.log10(ebn0), S)
