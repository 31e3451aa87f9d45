"""SINRs, rates and secrecy capacities from scalar link gains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LinkGains:
    """Per-unit-power link gains.

    Attributes
    ----------
    a : ndarray (B,)
        Bob gains ``|q_b^H H_b f_b|^2 zeta_b / noise``.
    e : ndarray (B, B)
        Eve gains ``|q_E^(b)H H_E f_k|^2 zeta_E`` for target ``b`` and stream ``k``.
    cross : ndarray (B, B)
        Residual Bob gains ``|q_b^H H_b f_k|^2 zeta_b``; only off-diagonal entries
        are used and they vanish under perfect CSI.
    noise : float
        Noise power.
    """

    a: np.ndarray
    e: np.ndarray
    cross: np.ndarray
    noise: float

    def __post_init__(self) -> None:
        self.a = np.asarray(self.a, dtype=float)
        self.e = np.atleast_2d(np.asarray(self.e, dtype=float))
        self.cross = np.atleast_2d(np.asarray(self.cross, dtype=float))
        b = self.a.size
        if self.e.shape != (b, b) or self.cross.shape != (b, b):
            raise ValueError(f"gain shapes {self.e.shape}, {self.cross.shape} do not match {b} users")

    @property
    def n_users(self) -> int:
        return self.a.size

    @classmethod
    def perfect(cls, a, e, noise: float) -> "LinkGains":
        a = np.asarray(a, dtype=float)
        return cls(a, e, np.zeros((a.size, a.size)), noise)


def bob_sinr_all(gains: LinkGains, alpha, beta) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    off = gains.cross.copy()
    np.fill_diagonal(off, 0.0)
    leak = off @ (alpha + beta)
    return gains.a * alpha * gains.noise / (leak + gains.noise)


def eve_sinr_all(gains: LinkGains, alpha, beta) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    e = gains.e
    own = np.diag(e)
    signal = own * alpha
    # (i) own AN, (ii)+(iii) other streams' signal and AN, (iv) noise
    denom = own * beta + (e @ (alpha + beta) - own * (alpha + beta)) + gains.noise
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(signal > 0.0, signal / denom, 0.0)
    return out


def bob_sinr(gains: LinkGains, b: int, alpha, beta) -> float:
    return float(bob_sinr_all(gains, alpha, beta)[b])


def eve_sinr(gains: LinkGains, b: int, alpha, beta) -> float:
    return float(eve_sinr_all(gains, alpha, beta)[b])


@dataclass
class SecrecyReport:
    bob_rate: np.ndarray
    eve_rate: np.ndarray
    secrecy: np.ndarray

    @property
    def min_secrecy(self) -> float:
        return float(self.secrecy.min())

    @property
    def sum_secrecy(self) -> float:
        return float(self.secrecy.sum())


def secrecy_gaps(gains: LinkGains, alpha, beta) -> np.ndarray:
    """Unclipped ``R_b - R_E^b``."""
    return np.log2(1.0 + bob_sinr_all(gains, alpha, beta)) - np.log2(1.0 + eve_sinr_all(gains, alpha, beta))


def secrecy_report(gains: LinkGains, alpha, beta) -> SecrecyReport:
    rb = np.log2(1.0 + bob_sinr_all(gains, alpha, beta))
    re = np.log2(1.0 + eve_sinr_all(gains, alpha, beta))
    return SecrecyReport(rb, re, np.maximum(rb - re, 0.0))


def report_from_sinr(gamma_bob, gamma_eve) -> SecrecyReport:
    rb = np.log2(1.0 + np.asarray(gamma_bob, dtype=float))
    re = np.log2(1.0 + np.asarray(gamma_eve, dtype=float))
    return SecrecyReport(rb, re, np.maximum(rb - re, 0.0))
