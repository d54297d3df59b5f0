"""Parameter estimation for the Pólya urn document model."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DivergenceError, DomainError

__all__ = [
    "McEstimate",
    "SmoothingHyper",
    "derive_mu_prime",
    "digamma",
    "doc_side_estimates",
    "edcm_fixed_point",
    "estimate_mc",
]

# B_2k / 2k for k = 1..7
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# 10 rather than 6 keeps the first omitted term below 1e-16
_SHIFT_TO = 10.0


def _digamma_scalar(x):
    if not x > 0.0:
        raise DomainError(f"digamma is only defined here for x > 0, got {x}")
    acc = 0.0
    while x < _SHIFT_TO:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    for coeff in reversed(_ASYMPTOTIC):
        series = series * inv2 + coeff
    return acc + math.log(x) - 0.5 / x - series * inv2


def digamma(x):
    """psi(x) = d/dx log Gamma(x) for x > 0.

    Shifts the argument up to ``x >= 10`` with ``psi(x) = psi(x+1) - 1/x``,
    then sums the asymptotic series through ``x**-14``. Accepts scalars
    or arrays.
    """
    if np.ndim(x) == 0:
        return _digamma_scalar(float(x))
    x = np.array(x, dtype=np.float64)
    if not np.all(x > 0.0):
        raise DomainError("digamma is only defined here for x > 0")
    acc = np.zeros_like(x)
    low = x < _SHIFT_TO
    while low.any():
        acc[low] -= 1.0 / x[low]
        x[low] += 1.0
        low = x < _SHIFT_TO
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for coeff in reversed(_ASYMPTOTIC):
        series = series * inv2 + coeff
    return acc + np.log(x) - 0.5 / x - series * inv2


@dataclass(frozen=True)
class McEstimate:
    m_c: float
    iterations: int
    converged: bool
    residual: float
    uninformative: bool = False


@dataclass(frozen=True)
class SmoothingHyper:
    omega: float
    m_c: float

    @property
    def mu_prime(self):
        return derive_mu_prime(self.omega, self.m_c)


def _length_histogram(idx_or_lengths):
    """``(distinct lengths, multiplicities, sum of vector lengths, n)`` over non-empty docs."""
    if hasattr(idx_or_lengths, "doc_lengths"):
        lengths = idx_or_lengths.doc_lengths
        types = idx_or_lengths.doc_types
    else:
        lengths, types = (np.asarray(a, dtype=np.int64) for a in idx_or_lengths)
    keep = lengths > 0
    lengths = lengths[keep]
    types = types[keep]
    uniq, counts = np.unique(lengths, return_counts=True)
    return uniq.astype(np.float64), counts.astype(np.float64), int(types.sum()), int(keep.sum())


def edcm_fixed_point(m, lengths, counts, sum_types, n):
    """One application of ``m <- S / (sum_j psi(|d_j| + m) - n psi(m))``."""
    denom = float(np.dot(counts, digamma(lengths + m))) - n * digamma(m)
    # a vanishing denominator means m has run off to infinity
    return sum_types / denom if denom != 0.0 else math.inf


def estimate_mc(idx, init=200.0, tol=1e-8, max_iter=100):
    """Estimate the background concentration ``m_c`` by fixed-point iteration.

    ``idx`` is an index, or a pair ``(lengths, vector_lengths)`` of arrays.
    Empty documents are excluded. Iterates are not damped; a non-positive
    or non-finite iterate raises :class:`DivergenceError`.
    """
    if not init > 0 or not math.isfinite(init):
        raise DomainError("init must be a positive finite number")
    lengths, counts, sum_types, n = _length_histogram(idx)
    if n == 0:
        raise DomainError("no non-empty documents")
    # every psi(1+m) - psi(m) = 1/m term makes the update the identity
    uninformative = bool(np.all(lengths == 1.0))
    m = float(init)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = edcm_fixed_point(m, lengths, counts, sum_types, n)
        if not math.isfinite(new) or new <= 0.0:
            raise DivergenceError(
                f"iterate {it} left the positive reals ({new!r}); last m={m!r}",
                last_value=m,
                iterations=it,
            )
        change = abs(new - m) / m
        m = new
        if change < tol:
            converged = True
            break
    residual = abs(edcm_fixed_point(m, lengths, counts, sum_types, n) - m) / m
    return McEstimate(m_c=m, iterations=it, converged=converged, residual=residual,
                      uninformative=uninformative)


def _exact(value):
    # read floats by their shortest decimal form, so 0.8 means 4/5
    return Fraction(repr(float(value))) if isinstance(value, float) else Fraction(value)


def derive_mu_prime(omega, m_c):
    """``mu' = omega / (1 - omega) * m_c``, computed in exact rationals.

    ``omega`` is taken at its shortest decimal value, so
    ``derive_mu_prime(0.8, m) == 4 * m`` holds exactly.
    """
    if not 0.0 < omega < 1.0:
        raise DomainError(f"omega must lie in (0, 1), got {omega}")
    if not m_c > 0.0 or not math.isfinite(m_c):
        raise DomainError(f"m_c must be positive, got {m_c}")
    w = _exact(omega)
    return float(w / (1 - w) * _exact(m_c))


def doc_side_estimates(d):
    """``(m_d, lambda_jm) = (|d vec|, |d vec| / |d|)`` for a :class:`DocStats`."""
    if d.length_tokens < 1:
        raise DomainError(f"document {d.doc_id!r} is empty")
    return float(d.length_types), d.length_types / d.length_tokens
