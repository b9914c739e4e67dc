"""Orthonormal shifted Legendre polynomials and polynomial extrapolation weights.

``extrapolation_weights(q, beta_bar)`` returns the weights ``v_1..v_q``
that, applied to values observed at lags ``1..q``, least-squares fit a
polynomial of degree ``p(q) <= beta_bar - 1`` in ``lag / q`` and evaluate
it at lag 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .core import DomainError

RANK_RTOL = 1e-9


def _legendre_values(k: int, x: np.ndarray):
    """Standard Legendre ``L_k(x)`` and ``L_k'(x)`` by three-term recurrence."""
    l_prev, l_cur = np.ones_like(x), x.copy()
    d_prev, d_cur = np.zeros_like(x), np.ones_like(x)
    if k == 0:
        return l_prev, d_prev
    for m in range(1, k):
        l_next = ((2 * m + 1) * x * l_cur - m * l_prev) / (m + 1)
        # derivative recurrence: L'_{m+1} = L'_{m-1} + (2m+1) L_m
        d_next = d_prev + (2 * m + 1) * l_cur
        l_prev, l_cur = l_cur, l_next
        d_prev, d_cur = d_cur, d_next
    return l_cur, d_cur


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > 1):
        raise DomainError("shifted Legendre polynomials are evaluated on [0, 1]")
    return z


def shifted_legendre(k: int, z):
    """``phi_k(z) = sqrt(2k+1) L_k(2z - 1)``, orthonormal on [0, 1]."""
    if k < 0:
        raise DomainError("degree must be nonnegative")
    z = _check_z(z)
    val, _ = _legendre_values(k, 2.0 * np.atleast_1d(z) - 1.0)
    out = math.sqrt(2 * k + 1) * val
    return float(out[0]) if z.ndim == 0 else out


def shifted_legendre_derivative(k: int, z):
    if k < 0:
        raise DomainError("degree must be nonnegative")
    z = _check_z(z)
    _, der = _legendre_values(k, 2.0 * np.atleast_1d(z) - 1.0)
    out = 2.0 * math.sqrt(2 * k + 1) * der
    return float(out[0]) if z.ndim == 0 else out


def shifted_legendre_rodrigues(k: int, z):
    """Reference evaluation from ``sqrt(2k+1)/k! d^k/dz^k (z(z-1))^k``."""
    z = _check_z(z)
    base = P.polypow([0.0, -1.0, 1.0], k)  # (z^2 - z)^k
    coef = P.polyder(base, k) / math.factorial(k) if k else base
    return math.sqrt(2 * k + 1) * P.polyval(z, coef)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    q: int
    p: int
    entries: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.sum(_singular_values(self.entries) > RANK_RTOL * math.sqrt(self.q)))


def _singular_values(mat):
    return np.linalg.svd(mat, compute_uv=False)


def design_matrix(q: int, p: int) -> DesignMatrix:
    """``q x (p+1)`` matrix with entries ``phi_{j-1}(i/q)``."""
    if q < 1 or p < 0:
        raise DomainError("need q >= 1 and p >= 0")
    z = np.arange(1, q + 1) / q
    cols = [shifted_legendre(j, z) for j in range(p + 1)]
    return DesignMatrix(q, p, np.column_stack(cols))


def _full_column_rank(mat: np.ndarray, q: int) -> bool:
    if mat.shape[0] < mat.shape[1]:
        return False
    return _singular_values(mat)[-1] > RANK_RTOL * math.sqrt(q)


@lru_cache(maxsize=None)
def p_of_q(q: int, beta_bar: int) -> int:
    """Largest ``p < beta_bar`` with ``design_matrix(q, p)`` of full column rank."""
    if beta_bar < 1 or q < 1:
        raise DomainError("need q >= 1 and beta_bar >= 1")
    best = 0
    for p in range(1, beta_bar):
        if not _full_column_rank(design_matrix(q, p).entries, q):
            break
        best = p
    return best


@dataclass(frozen=True, eq=False)
class ExtrapolationWeights:
    q: int
    p: int
    v: np.ndarray
    norm2: float


@lru_cache(maxsize=None)
def projection_coefficients(q: int, beta_bar: int):
    """``(p, a, norm2)`` with ``a = (U^T U)^{-1} U_0^T`` so that ``v_i = U_i a``.

    ``norm2 = sqrt(U_0 a)`` equals ``||v||_2`` without forming ``v``.
    """
    p = p_of_q(q, beta_bar)
    u = design_matrix(q, p).entries
    u0 = np.array([shifted_legendre(j, 0.0) for j in range(p + 1)])
    gram = u.T @ u
    chol = np.linalg.cholesky(gram)
    a = np.linalg.solve(chol.T, np.linalg.solve(chol, u0))
    a.setflags(write=False)
    return p, a, math.sqrt(max(float(u0 @ a), 0.0))


@lru_cache(maxsize=4096)
def extrapolation_weights(q: int, beta_bar: int) -> ExtrapolationWeights:
    p, a, _ = projection_coefficients(q, beta_bar)
    v = design_matrix(q, p).entries @ a
    v.setflags(write=False)
    return ExtrapolationWeights(q, p, v, float(np.linalg.norm(v)))


def variance_term(w: ExtrapolationWeights, delta: float) -> float:
    """``||v||_2 sqrt(2 ln(pi^2 q^2 / delta))``."""
    return radius_for(w.norm2, w.q, delta)


def radius_for(norm2, q, delta):
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    q = np.asarray(q, dtype=float)
    out = norm2 * np.sqrt(2.0 * np.log(math.pi**2 * q**2 / delta))
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def shifted_legendre_coefficients(k: int) -> np.ndarray:
    """Power-basis coefficients of ``phi_k`` (lowest degree first)."""
    base = np.zeros(k + 1)
    base[k] = 1.0
    # L_k(2z - 1) in powers of z
    coef = np.polynomial.legendre.leg2poly(base)
    shifted = np.zeros(1)
    lin = np.array([-1.0, 2.0])
    power = np.ones(1)
    for c in coef:
        shifted = P.polyadd(shifted, c * power)
        power = P.polymul(power, lin)
    out = math.sqrt(2 * k + 1) * np.asarray(shifted, dtype=float)
    out.setflags(write=False)
    return out
