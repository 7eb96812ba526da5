"""Relative entropy of discord, discord of formation, and the discord gap check.

The measured side is the second subsystem of the bipartite state unless
``measured`` says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import map_ordered, spawn_rngs
from .entropy import von_neumann_entropy
from .qcore import (
    BipartitePureState,
    DensityOperator,
    DimensionError,
    haar_unitary,
    ptrace,
    sorted_eigh,
)

FD_STEP = 1e-5
PURE_TOL = 1e-10


@dataclass(frozen=True)
class Decomposition:
    """Convex decomposition ``sum_x w_x rho^x``."""

    weights: np.ndarray
    components: tuple[DensityOperator, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        comps = tuple(self.components)
        if w.size != len(comps) or not comps:
            raise ValueError("need one weight per component")
        if np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-10:
            raise ValueError(f"weights {w} are not a probability vector")
        if len({c.dims for c in comps}) != 1:
            raise DimensionError("components live on different spaces")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    def reconstruct(self) -> np.ndarray:
        return sum(w * c.matrix for w, c in zip(self.weights, self.components))


def eigen_decomposition(rho: DensityOperator, tol: float = 1e-12) -> Decomposition:
    """Spectral decomposition into pure components."""
    vals, vecs = sorted_eigh(rho.matrix)
    keep = vals > tol
    w = vals[keep] / vals[keep].sum()
    comps = [DensityOperator(np.outer(v, v.conj()), rho.dims) for v in vecs[:, keep].T]
    return Decomposition(w, tuple(comps))


def _bipartite(rho: DensityOperator, measured: str | None) -> tuple[np.ndarray, int, int]:
    if len(rho.dims) != 2:
        raise DimensionError(f"expected a bipartite state, got {rho.dims}")
    j = 1 if measured is None else rho.index(measured)
    m = rho.matrix
    d_keep, d_meas = rho.shape[1 - j], rho.shape[j]
    if j == 0:
        m = m.reshape(d_meas, d_keep, d_meas, d_keep).transpose(1, 0, 3, 2).reshape(m.shape)
    return m, d_keep, d_meas


def _dephased_entropy(t: np.ndarray, u: np.ndarray) -> float:
    """``S(sum_y (1 (x) P_y) rho (1 (x) P_y))`` with ``P_y = u|y><y|u^dag``.

    ``t`` is ``rho`` reshaped to ``(dA, dB, dA, dB)``. Blocks in the rotated
    basis are ``<y|u^dag rho u|y>``; the dephased state is their direct sum.
    """
    rot = np.einsum("by,abce,ez->aycz", u.conj(), t, u)
    blocks = np.einsum("ayby->yab", rot)
    vals = np.linalg.eigvalsh((blocks + blocks.conj().transpose(0, 2, 1)) / 2).ravel()
    vals = vals[vals > 0]
    return float(-(vals * np.log2(vals)).sum())


def _off_diagonal_generators(d: int) -> list[np.ndarray]:
    # diagonal generators only rephase basis vectors, which leaves the dephased state unchanged
    gens = []
    for j in range(d):
        for k in range(j + 1, d):
            h = np.zeros((d, d), dtype=np.complex128)
            h[j, k] = h[k, j] = 1 / np.sqrt(2)
            gens.append(h)
            h = np.zeros((d, d), dtype=np.complex128)
            h[j, k], h[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            gens.append(h)
    return gens


def _retract(u: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    q, r = np.linalg.qr(u @ (np.eye(len(u)) + 1j * t * h))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _descend(t: np.ndarray, u0: np.ndarray, gens, max_iter: int, window: int, tol: float):
    f = lambda u: _dephased_entropy(t, u)
    u, val = u0, f(u0)
    history = [val]
    step = 1.0
    for it in range(max_iter):
        grad = np.array([(f(_retract(u, h, FD_STEP)) - f(_retract(u, h, -FD_STEP))) / (2 * FD_STEP) for h in gens])
        gnorm2 = float(grad @ grad)
        if gnorm2 < 1e-20:
            break
        direction = -sum(g * h for g, h in zip(grad, gens))
        step = min(step * 2, 4.0)
        while step > 1e-12:
            cand = _retract(u, direction, step)
            cval = f(cand)
            if cval <= val - 1e-4 * step * gnorm2:
                u, val = cand, cval
                break
            step /= 2
        else:
            break
        history.append(val)
        if len(history) > window and history[-window - 1] - val < tol:
            break
    return val, u, it + 1


def relative_entropy_of_discord(
    rho: DensityOperator,
    restarts: int = 32,
    seed: int = 0,
    measured: str | None = None,
    max_iter: int = 2000,
) -> float:
    """Upper estimate of ``min_basis S(dephased rho) - S(rho)`` over measurement bases on one side.

    Restart 0 uses the computational basis and restart 1 the eigenbasis of the
    measured marginal; the rest are Haar random.
    """
    m, d_keep, d_meas = _bipartite(rho, measured)
    s_rho = von_neumann_entropy(m)
    if d_meas == 1:
        return 0.0
    t = m.reshape(d_keep, d_meas, d_keep, d_meas)
    gens = _off_diagonal_generators(d_meas)
    starts = [np.eye(d_meas, dtype=np.complex128), sorted_eigh(ptrace(m, (d_keep, d_meas), [1]))[1]]
    rngs = spawn_rngs(seed, max(restarts, 1))
    starts = (starts + [haar_unitary(d_meas, r) for r in rngs])[: max(restarts, 1)]
    runs = map_ordered(lambda u0: _descend(t, u0, gens, max_iter, 50, 1e-9), starts)
    best = min(r[0] for r in runs)
    return max(best - s_rho, 0.0)


def _is_pure(m: np.ndarray) -> bool:
    return np.linalg.eigvalsh(m).max() > 1 - PURE_TOL


def discord_of_formation_value(
    rho: DensityOperator,
    dec: Decomposition | None = None,
    restarts: int = 32,
    seed: int = 0,
    measured: str | None = None,
) -> float:
    """``sum_x w_x D_R(rho^x)`` for a decomposition of ``rho``; an upper bound on ``D_F``.

    Pure components use the reduced-state entropy exactly. Without ``dec``
    the spectral decomposition is used.
    """
    dec = eigen_decomposition(rho) if dec is None else dec
    if dec.components[0].dims != rho.dims:
        raise DimensionError("decomposition lives on a different space")
    if np.abs(dec.reconstruct() - rho.matrix).max() > 1e-8:
        raise ValueError("decomposition does not reconstruct the state")
    seeds = np.random.SeedSequence(seed).spawn(len(dec.components))
    return float(sum(w * _component_discord(c, s, restarts, measured) for w, c, s in zip(dec.weights, dec.components, seeds) if w > 0))


def _component_discord(c: DensityOperator, ss, restarts: int, measured) -> float:
    if len(c.dims) != 2:
        raise DimensionError("components must be bipartite")
    if _is_pure(c.matrix):
        return von_neumann_entropy(ptrace(c.matrix, c.shape, [0]))
    return relative_entropy_of_discord(c, restarts, ss, measured)


def entanglement_of_formation_pure(phi: BipartitePureState) -> float:
    """Entropy of either reduced state of a pure bipartite state."""
    lam = phi.schmidt[phi.schmidt > 0]
    return float(-(lam * np.log2(lam)).sum()) + 0.0


@dataclass(frozen=True)
class GapReport:
    holds: bool
    slack: float
    gap: float


def gap_bound_check(chi: float, i_rho: float, df_upper: float, chi_rho: float | None = None, tol: float = 1e-3) -> GapReport:
    """Check ``chi_rho - chi <= I_rho - chi <= D_F`` up to ``tol``.

    ``slack`` is ``df_upper - (i_rho - chi)``.
    """
    gap = i_rho - chi
    slack = df_upper - gap
    holds = slack >= -tol
    if chi_rho is not None:
        holds = holds and chi_rho - chi <= gap + tol
    return GapReport(bool(holds), float(slack), float(gap))
