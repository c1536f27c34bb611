"""
Reference bit error probabilities and binomial confidence intervals.

All functions take the linear per-symbol SNR es_n0 = E / N0. The `*_ber_*`
pair evaluates the closed forms the modem is benchmarked against
(Q(sqrt(E / (log2 M * N0))) coherent, exp(-E / (2 log2 M * N0)) / 2
non-coherent). These coincide with the exact orthogonal-signalling bit error
probability only for M = 2; the `exact_*` pair gives the exact M-ary values.
"""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from scipy import integrate, special, stats

from utils.errors import ConfigError


def _check(es_n0: float, M: int) -> None:
    if es_n0 < 0 or math.isnan(es_n0):
        raise ConfigError(f"E/N0 must be non-negative, got {es_n0}")
    if M < 2 or M & (M - 1):
        raise ConfigError(f"modulation order {M} is not a power of two")


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = P(X > x), X ~ N(0, 1)"""
    return float(0.5 * special.erfc(x / np.sqrt(2.0)))


# -----------------------------------------------------------------------------
# Benchmark Curves
# -----------------------------------------------------------------------------
def theory_ber_coherent(es_n0: float, M: int) -> float:
    _check(es_n0, M)
    return q_function(math.sqrt(es_n0 / math.log2(M)))


def theory_ber_noncoherent(es_n0: float, M: int) -> float:
    _check(es_n0, M)
    return 0.5 * math.exp(-es_n0 / (2.0 * math.log2(M)))


# -----------------------------------------------------------------------------
# Exact M-ary Orthogonal Signalling
# -----------------------------------------------------------------------------
def _symbol_to_bit(Pe: float, M: int) -> float:
    return M / (2.0 * (M - 1)) * Pe


def exact_ber_coherent(es_n0: float, M: int) -> float:
    """
    Pe = integral phi(y - a) * (1 - Phi(y)^(M-1)) dy with a = sqrt(2 E / N0),
    converted to bits with every wrong symbol equally likely
    """
    _check(es_n0, M)
    a = math.sqrt(2.0 * es_n0)

    def integrand(y: float) -> float:
        miss = -math.expm1((M - 1) * special.log_ndtr(y))
        return math.exp(-0.5 * (y - a) ** 2) / math.sqrt(2 * math.pi) * miss

    Pe, _ = integrate.quad(integrand, a - 12.0, a + 12.0, epsabs=0.0, epsrel=1e-10, limit=200)
    return _symbol_to_bit(Pe, M)


def exact_ber_noncoherent(es_n0: float, M: int) -> float:
    """Pe = sum_k (-1)^(k+1) C(M-1, k) / (k+1) * exp(-k / (k+1) * E / N0)"""
    _check(es_n0, M)
    Pe = 0.0
    for k in range(1, M):
        Pe += (-1) ** (k + 1) * special.comb(M - 1, k, exact=True) / (k + 1) \
            * math.exp(-k / (k + 1) * es_n0)
    return _symbol_to_bit(max(Pe, 0.0), M)


# -----------------------------------------------------------------------------
# Confidence Intervals
# -----------------------------------------------------------------------------
def wilson_interval(errors: int, bits: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for errors / bits; (0, 1) when nothing was counted"""
    if bits < 0 or not 0 <= errors <= max(bits, 0):
        raise ConfigError(f"invalid error count {errors} out of {bits} bits")
    if bits == 0:
        return 0.0, 1.0
    ci = stats.binomtest(errors, bits).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)
