"""Entropic functionals, all in bits.

Infinite divergences (support violations) are returned as ``math.inf`` and are
never capped.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .qcore import DensityOperator, DimensionError, as_matrix, ptrace

SUPPORT_TOL = 1e-10
LN2 = math.log(2.0)


def _herm(m) -> np.ndarray:
    m = as_matrix(m)
    return (m + m.conj().T) / 2


def eigvals_psd(m) -> np.ndarray:
    """Eigenvalues of a Hermitian PSD matrix with roundoff negatives clipped to 0."""
    return np.clip(np.linalg.eigvalsh(_herm(m)), 0.0, None)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return shannon_entropy([p, 1.0 - p])


def von_neumann_entropy(rho) -> float:
    """``-tr rho log2 rho`` with ``0 log 0 = 0``."""
    return shannon_entropy(eigvals_psd(rho))


def relative_entropy(rho, sigma) -> float:
    """``tr rho (log2 rho - log2 sigma)``; ``inf`` when supp(rho) is not inside supp(sigma)."""
    r = _herm(rho)
    s = _herm(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    sv, svec = np.linalg.eigh(s)
    weights = np.einsum("ji,jk,ki->i", svec.conj(), r, svec).real
    on = sv > SUPPORT_TOL
    if weights[~on].sum() > SUPPORT_TOL:
        return math.inf
    cross = float((weights[on] * np.log2(sv[on])).sum())
    return -von_neumann_entropy(r) - cross


def _split(rho: DensityOperator, labels: Sequence[str] | str) -> list[int]:
    if isinstance(labels, str):
        labels = [labels]
    return [rho.index(lbl) for lbl in labels]


def entropy_of(rho: DensityOperator, labels: Sequence[str] | str) -> float:
    """Entropy of the marginal on ``labels``."""
    idx = _split(rho, labels)
    if len(idx) == len(rho.dims):
        return von_neumann_entropy(rho.matrix)
    return von_neumann_entropy(ptrace(rho.matrix, rho.shape, idx))


def mutual_information(rho: DensityOperator, cut) -> float:
    """``I(A:B) = S(A) + S(B) - S(AB)`` for ``cut = (labels_A, labels_B)``.

    The two sides must partition ``rho``'s labels.
    """
    side_a, side_b = cut
    side_a = [side_a] if isinstance(side_a, str) else list(side_a)
    side_b = [side_b] if isinstance(side_b, str) else list(side_b)
    if sorted(side_a + side_b) != sorted(rho.labels) or set(side_a) & set(side_b):
        raise ValueError(f"cut {cut} does not partition labels {rho.labels}")
    if not side_a or not side_b:
        raise ValueError("both sides of the cut must be non-empty")
    return entropy_of(rho, side_a) + entropy_of(rho, side_b) - von_neumann_entropy(rho.matrix)


def conditional_entropy(rho: DensityOperator, given) -> float:
    """``H(rest | given) = S(all) - S(given)``."""
    idx = _split(rho, given)
    if len(idx) == len(rho.dims):
        raise ValueError("conditioning on every subsystem leaves nothing")
    return von_neumann_entropy(rho.matrix) - entropy_of(rho, given)


def mutual_information_array(mat: np.ndarray, dims: Sequence[int], a: Sequence[int], b: Sequence[int]) -> float:
    """Array version of :func:`mutual_information` on index groups ``a`` and ``b``.

    Subsystems in neither group are traced out.
    """
    sa = von_neumann_entropy(ptrace(mat, dims, a))
    sb = von_neumann_entropy(ptrace(mat, dims, b))
    sab = von_neumann_entropy(ptrace(mat, dims, list(a) + list(b)))
    return sa + sb - sab


def psd_power(m: np.ndarray, t: float, tol: float = SUPPORT_TOL) -> np.ndarray:
    """``m**t`` on the support of a PSD matrix (zero on the kernel)."""
    vals, vecs = np.linalg.eigh(_herm(m))
    on = vals > tol
    powered = np.zeros_like(vals)
    powered[on] = vals[on] ** t
    return (vecs * powered) @ vecs.conj().T


def sandwiched_renyi(rho, sigma, alpha: float) -> float:
    """Sandwiched Renyi divergence of order ``alpha > 1``."""
    if not alpha > 1:
        raise ValueError("sandwiched_renyi requires alpha > 1; use relative_entropy for the limit")
    r = _herm(rho)
    s = _herm(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    sv, svec = np.linalg.eigh(s)
    weights = np.einsum("ji,jk,ki->i", svec.conj(), r, svec).real
    on = sv > SUPPORT_TOL
    if weights[~on].sum() > SUPPORT_TOL:
        return math.inf
    gamma = (svec[:, on] * sv[on] ** ((1 - alpha) / (2 * alpha))) @ svec[:, on].conj().T
    mu = eigvals_psd(gamma @ r @ gamma)
    q = float((mu**alpha).sum())
    return math.log2(q) / (alpha - 1)


def _renyi_term(a: float, b: float, alpha: float) -> float:
    if a == 0.0:
        return 0.0
    if b == 0.0:
        return math.inf if alpha > 1 else 0.0
    return a**alpha * b ** (1 - alpha)


def binary_renyi(x: float, y: float, alpha: float) -> float:
    """Renyi divergence of order ``alpha`` between Bernoulli(x) and Bernoulli(y)."""
    for v in (x, y):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"probability {v} outside [0, 1]")
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    total = _renyi_term(x, y, alpha) + _renyi_term(1 - x, 1 - y, alpha)
    if math.isinf(total):
        return math.inf
    if total == 0.0:
        return math.inf
    return math.log2(total) / (alpha - 1)
