"""Holevo and mutual-information capacities, with and without a preshared assist.

Encoders are parameterized by Stinespring isometries ``V = W (W^dag W)^{-1/2}``
and optimized jointly with softmax ensemble weights by L-BFGS on analytic
gradients. Gradients of a real function ``f`` of a complex array ``Z`` use the
convention ``df = Re tr(grad^dag dZ)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax, xlogy

from ._parallel import map_ordered, spawn_rngs
from .channels import ChoiMatrix, QuantumChannel, apply_local, random_channel, replacement_channel
from .entropy import (
    LN2,
    mutual_information_array,
    psd_power,
    shannon_entropy,
    von_neumann_entropy,
)
from .qcore import (
    BipartitePureState,
    DensityOperator,
    DimensionError,
    as_matrix,
    ptrace,
    purify,
    random_density_matrix,
    sorted_eigh,
    _complete_basis,
)

ENTROPY_FLOOR = 1e-15
SUPPORT_TOL = 1e-12
KKT_TOL = 1e-6
DIRECTIONS = ("lower", "upper", "exact", "unverified_upper")


# ---------------------------------------------------------------------------
# result types


@dataclass(frozen=True)
class EncodingEnsemble:
    """Probabilities ``p_x`` paired with encoding channels ``E^x``."""

    probs: np.ndarray
    encoders: tuple[QuantumChannel, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        enc = tuple(self.encoders)
        if p.size != len(enc) or not enc:
            raise ValueError("need one probability per encoder")
        if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-10:
            raise ValueError("ensemble weights are not a probability vector")
        if len({(e.d_in, e.d_out) for e in enc}) != 1:
            raise DimensionError("encoders have inconsistent dimensions")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "encoders", enc)

    @property
    def size(self) -> int:
        return len(self.encoders)

    @property
    def states(self) -> list[np.ndarray]:
        """Signal states, for ensembles whose encoders prepare states from a trivial input."""
        if self.encoders[0].d_in != 1:
            raise ValueError("encoders take a nontrivial input; they are not state preparations")
        return [e(np.eye(1)) for e in self.encoders]


@dataclass(frozen=True)
class CapacityEstimate:
    """A value in bits with its bound direction and how it was obtained."""

    value: float
    direction: str
    witness: object = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class IsometryEncoder:
    """Stinespring isometry ``V: E_A -> A (x) F``; rows are ordered ``(a, f)``."""

    isometry: np.ndarray
    d_a: int
    d_f: int

    def __post_init__(self):
        v = as_matrix(self.isometry)
        if v.shape[0] != self.d_a * self.d_f:
            raise DimensionError(f"isometry has {v.shape[0]} rows, expected {self.d_a * self.d_f}")
        if np.abs(v.conj().T @ v - np.eye(v.shape[1])).max() > 1e-10:
            raise ValueError("matrix is not an isometry")
        object.__setattr__(self, "isometry", v)

    def to_channel(self) -> QuantumChannel:
        v = self.isometry.reshape(self.d_a, self.d_f, -1)
        return QuantumChannel(v.transpose(1, 0, 2), "encoder")


# ---------------------------------------------------------------------------
# entropy helpers (nats internally)


def _entropy_and_grad(omega: np.ndarray):
    """``S(omega)`` in nats and ``dS/domega = -(ln omega + 1)`` for a batch of matrices."""
    vals, vecs = np.linalg.eigh(omega)
    vals = np.clip(vals, 0.0, None)
    s = -xlogy(vals, vals).sum(-1)
    lg = np.log(np.maximum(vals, ENTROPY_FLOOR)) + 1.0
    g = -(vecs * lg[..., None, :]) @ np.conj(np.swapaxes(vecs, -1, -2))
    return s, g


def _log_on_support(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    lg = np.where(vals > SUPPORT_TOL, np.log(np.maximum(vals, SUPPORT_TOL)), 0.0)
    return (vecs * lg) @ vecs.conj().T


def _support_violation(n: QuantumChannel, sigma: np.ndarray) -> bool:
    """True when some input drives ``n``'s output outside ``supp(sigma)``."""
    vals, vecs = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    off = vecs[:, vals <= SUPPORT_TOL]
    if off.shape[1] == 0:
        return False
    return np.linalg.eigvalsh(n.adjoint(off @ off.conj().T)).max() > SUPPORT_TOL


# ---------------------------------------------------------------------------
# assists


@dataclass(frozen=True)
class _Assist:
    matrix: np.ndarray
    d_ea: int
    d_eb: int
    support: np.ndarray  # d_ea x r, orthonormal basis of supp(rho_EA)
    factor: np.ndarray  # (r, d_eb, rank): restricted state = R R^dag
    s_eb: float  # nats

    @property
    def r(self) -> int:
        return self.support.shape[1]


def _as_assist(rho_assist) -> _Assist:
    if rho_assist is None:
        m, d_ea, d_eb = np.eye(1, dtype=np.complex128), 1, 1
    else:
        if isinstance(rho_assist, BipartitePureState):
            rho_assist = rho_assist.density()
        if not isinstance(rho_assist, DensityOperator) or len(rho_assist.dims) != 2:
            raise DimensionError("assist must be a bipartite DensityOperator or BipartitePureState")
        m = rho_assist.matrix
        d_ea, d_eb = rho_assist.shape
    rho_ea = ptrace(m, (d_ea, d_eb), [0])
    vals, vecs = sorted_eigh(rho_ea)
    q = vecs[:, vals > SUPPORT_TOL]
    t = m.reshape(d_ea, d_eb, d_ea, d_eb)
    restricted = np.einsum("ai,aebf,bj->iejf", q.conj(), t, q).reshape(q.shape[1] * d_eb, -1)
    mu, w = np.linalg.eigh((restricted + restricted.conj().T) / 2)
    keep = mu > SUPPORT_TOL
    factor = (w[:, keep] * np.sqrt(mu[keep])).reshape(q.shape[1], d_eb, -1)
    s_eb = von_neumann_entropy(ptrace(m, (d_ea, d_eb), [1])) * LN2
    return _Assist(m, d_ea, d_eb, q, factor, s_eb)


# ---------------------------------------------------------------------------
# encoder parameterization shared by all optimizers


class _EncoderProblem:
    """Maps raw matrices ``W_x`` to outputs ``omega_x = (N o E_x (x) id)(rho)`` and back."""

    def __init__(self, n: QuantumChannel, assist: _Assist, d_f: int | None = None):
        self.kraus = n.kraus
        self.n = n
        self.assist = assist
        self.d_a, self.d_b = n.d_in, n.d_out
        self.r = assist.r
        self.d_f = d_f or self.d_a * self.r
        self.dim = self.d_b * assist.d_eb
        self.eye_eb = np.eye(assist.d_eb)

    @property
    def w_shape(self) -> tuple[int, int]:
        return self.d_a * self.d_f, self.r

    def polar(self, w: np.ndarray):
        s = np.conj(np.swapaxes(w, -1, -2)) @ w
        sv, su = np.linalg.eigh(s)
        sv = np.maximum(sv, 1e-300)
        t = (su * sv[..., None, :] ** -0.5) @ np.conj(np.swapaxes(su, -1, -2))
        return w @ t, (sv, su, t)

    def polar_backprop(self, g_v: np.ndarray, w: np.ndarray, aux) -> np.ndarray:
        sv, su, t = aux
        y = np.conj(np.swapaxes(w, -1, -2)) @ g_v
        m = np.conj(np.swapaxes(su, -1, -2)) @ y @ su
        fs = sv**-0.5
        num = fs[..., :, None] - fs[..., None, :]
        den = sv[..., :, None] - sv[..., None, :]
        close = np.abs(den) <= 1e-12 * np.maximum(sv[..., :, None], sv[..., None, :])
        deriv = -0.5 * sv ** -1.5
        f = np.where(close, np.broadcast_to(deriv[..., :, None], den.shape), num / np.where(close, 1.0, den))
        z = su @ (f * m) @ np.conj(np.swapaxes(su, -1, -2))
        z_h = (z + np.conj(np.swapaxes(z, -1, -2))) / 2
        return g_v @ t + 2 * w @ z_h

    def outputs(self, v: np.ndarray) -> np.ndarray:
        x = v.shape[0]
        vv = v.reshape(x, self.d_a, self.d_f, self.r)
        lk = np.einsum("kba,xafi->xkfbi", self.kraus, vv).reshape(x, -1, self.d_b, self.r)
        y = np.einsum("xcbi,ieu->xbecu", lk, self.assist.factor)
        return y.reshape(x, self.dim, -1)

    def backprop(self, g_y: np.ndarray) -> np.ndarray:
        x = g_y.shape[0]
        k = self.kraus.shape[0]
        rank = self.assist.factor.shape[2]
        g5 = g_y.reshape(x, self.d_b, self.assist.d_eb, k * self.d_f, rank)
        g_l = np.einsum("xbecu,ieu->xcbi", g5, self.assist.factor.conj())
        g_l = g_l.reshape(x, k, self.d_f, self.d_b, self.r)
        return np.einsum("kba,xkfbi->xafi", self.kraus.conj(), g_l).reshape(x, *self.w_shape)

    def ptrace_eb(self, omega: np.ndarray) -> np.ndarray:
        d_b, d_eb = self.d_b, self.assist.d_eb
        return np.einsum("xaebe->xab", omega.reshape(-1, d_b, d_eb, d_b, d_eb))

    # -- packing

    def pack(self, theta: np.ndarray | None, w: np.ndarray) -> np.ndarray:
        parts = [] if theta is None else [theta]
        return np.concatenate(parts + [w.real.ravel(), w.imag.ravel()])

    def unpack(self, x: np.ndarray, count: int, with_theta: bool):
        off = count if with_theta else 0
        half = (x.size - off) // 2
        w = (x[off : off + half] + 1j * x[off + half :]).reshape(count, *self.w_shape)
        return (x[:off] if with_theta else None), w

    def random_w(self, count: int, rng: np.random.Generator) -> np.ndarray:
        shape = (count, *self.w_shape)
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    def w_from_channel(self, ch: QuantumChannel) -> np.ndarray:
        """Isometry of a channel restricted to the assist support, padded to ``d_f``."""
        if ch.d_in == 1 and self.assist.d_ea != 1:
            ch = replacement_channel(ch(np.eye(1)), self.assist.d_ea)
        if ch.d_in != self.assist.d_ea or ch.d_out != self.d_a:
            raise DimensionError("warm-start encoder has the wrong dimensions")
        ks = np.einsum("kab,bi->kai", ch.kraus, self.assist.support)
        if ks.shape[0] > self.d_f:
            restricted = QuantumChannel(ks)
            ks = ChoiMatrix.from_channel(restricted).to_channel().kraus
        if ks.shape[0] > self.d_f:
            raise ValueError("warm-start encoder needs a larger environment")
        pad = np.zeros((self.d_f - ks.shape[0], self.d_a, self.r), dtype=np.complex128)
        ks = np.concatenate([ks, pad])
        return ks.transpose(1, 0, 2).reshape(self.w_shape)

    def encoder_channel(self, v: np.ndarray) -> QuantumChannel:
        """Full encoder on ``E_A``: the isometry on the support, a fixed state elsewhere."""
        q = self.assist.support
        ks = list(v.reshape(self.d_a, self.d_f, self.r).transpose(1, 0, 2) @ q.conj().T)
        full = _complete_basis(q, self.assist.d_ea)
        for col in full[:, self.r :].T:
            k = np.zeros((self.d_a, self.assist.d_ea), dtype=np.complex128)
            k[0] = col.conj()
            ks.append(k)
        return QuantumChannel(np.array(ks), "encoder")


# ---------------------------------------------------------------------------
# ensemble objectives: chi_rho (kind "chi") and I_rho (kind "mutual")


def _ensemble_terms(prob: _EncoderProblem, p: np.ndarray, omega: np.ndarray, kind: str):
    s_x, g_x = _entropy_and_grad(omega)
    if kind == "mutual":
        om_b = prob.ptrace_eb(omega)
        bar = np.einsum("x,xab->ab", p, om_b)
        s_bar, g_bar = _entropy_and_grad(bar)
        lin = np.einsum("ab,xba->x", g_bar, om_b).real - s_x
        g_bar = np.kron(g_bar, prob.eye_eb)
        value = s_bar + prob.assist.s_eb - p @ s_x
    else:
        bar = np.einsum("x,xab->ab", p, omega)
        s_bar, g_bar = _entropy_and_grad(bar)
        lin = np.einsum("ab,xba->x", g_bar, omega).real - s_x
        value = s_bar - p @ s_x
    return value, lin, g_bar, g_x


def _ensemble_objective(prob: _EncoderProblem, x: np.ndarray, count: int, kind: str):
    theta, w = prob.unpack(x, count, True)
    p = softmax(theta)
    v, aux = prob.polar(w)
    y = prob.outputs(v)
    omega = y @ np.conj(np.swapaxes(y, -1, -2))
    value, lin, g_bar, g_x = _ensemble_terms(prob, p, omega, kind)
    gam = p[:, None, None] * (g_bar[None] - g_x)
    g_w = prob.polar_backprop(prob.backprop(2 * gam @ y), w, aux)
    g_theta = p * (lin - p @ lin)
    return value / LN2, prob.pack(g_theta, g_w) / LN2


def _ensemble_value(prob: _EncoderProblem, p: np.ndarray, v: np.ndarray, kind: str) -> float:
    y = prob.outputs(v)
    omega = y @ np.conj(np.swapaxes(y, -1, -2))
    return _ensemble_terms(prob, p, omega, kind)[0] / LN2


def _tilt_polish(prob: _EncoderProblem, p: np.ndarray, v: np.ndarray, kind: str, max_iter: int = 20000, tol: float = 1e-13):
    """Closed-form probability tilt ``p_x <- p_x 2^{D_x}`` with the signal states held fixed."""
    y = prob.outputs(v)
    omega = y @ np.conj(np.swapaxes(y, -1, -2))
    value, lin, _, _ = _ensemble_terms(prob, p, omega, kind)
    for _ in range(max_iter):
        q = p * np.exp(lin - lin.max())
        q /= q.sum()
        new_value, new_lin, _, _ = _ensemble_terms(prob, q, omega, kind)
        if new_value < value - 1e-15:
            break
        step = np.abs(q - p).max()
        p, value, lin = q, new_value, new_lin
        if step < tol:
            break
    return p, value / LN2, lin / LN2


@dataclass
class _Run:
    value: float
    p: np.ndarray
    v: np.ndarray
    iterations: int
    residual: float


def _run_ensemble(prob: _EncoderProblem, theta0, w0, kind: str, max_iter: int) -> _Run:
    count = w0.shape[0]
    x0 = prob.pack(theta0, w0)
    fun = lambda x: tuple(-a for a in _ensemble_objective(prob, x, count, kind))
    res = minimize(fun, x0, jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-10, "maxcor": 30})
    theta, w = prob.unpack(res.x, count, True)
    v, _ = prob.polar(w)
    p = softmax(theta)
    value = _ensemble_value(prob, p, v, kind)
    start_value = _ensemble_value(prob, softmax(theta0), prob.polar(w0)[0], kind)
    if start_value > value:
        p, v, value = softmax(theta0), prob.polar(w0)[0], start_value
    return _Run(value, p, v, int(res.nit), float(np.abs(res.jac).max()))


def _optimize_ensemble(
    n: QuantumChannel,
    assist: _Assist,
    kind: str,
    count: int,
    restarts: int,
    seed: int,
    max_iter: int,
    warm_start,
    d_f: int | None,
    polish: bool,
):
    prob = _EncoderProblem(n, assist, d_f)
    starts = []
    for rng in spawn_rngs(seed, restarts):
        starts.append((rng.standard_normal(count), prob.random_w(count, rng)))
    warm = [] if warm_start is None else [warm_start] if isinstance(warm_start, EncodingEnsemble) else list(warm_start)
    for ens in warm:
        w0 = np.array([prob.w_from_channel(e) for e in ens.encoders])
        theta0 = np.log(np.maximum(ens.probs, 1e-300))
        starts.append((theta0, w0))
    if not starts:
        raise ValueError("need at least one restart or a warm start")
    runs = map_ordered(lambda s: _run_ensemble(prob, s[0], s[1], kind, max_iter), starts)
    best = max(runs, key=lambda r: r.value)
    if polish:
        p, value, _ = _tilt_polish(prob, best.p, best.v, kind)
        if value >= best.value:
            best = _Run(value, p, best.v, best.iterations, best.residual)
    encoders = tuple(prob.encoder_channel(v) for v in best.v)
    witness = EncodingEnsemble(best.p, encoders)
    prov = {
        "restarts": restarts,
        "iterations": best.iterations,
        "residual": best.residual,
        "seed": seed,
        "ensemble_size": count,
        "env_dim": prob.d_f,
        "warm_starts": len(warm),
    }
    return CapacityEstimate(float(best.value), "lower", witness, prov), prob, best


# ---------------------------------------------------------------------------
# re-evaluation of witnesses


def ensemble_outputs(n: QuantumChannel, ens: EncodingEnsemble, rho_assist=None) -> list[np.ndarray]:
    """``omega_x = (N o E^x (x) id)(rho)`` on ``B (x) E_B``."""
    a = _as_assist(rho_assist)
    out = []
    for e in ens.encoders:
        if e.d_in != a.d_ea:
            raise DimensionError(f"encoder input {e.d_in} does not match assist dimension {a.d_ea}")
        m = apply_local(n.compose(e), a.matrix, (a.d_ea, a.d_eb), 0)
        out.append(m)
    return out


def assisted_values(n: QuantumChannel, ens: EncodingEnsemble, rho_assist=None) -> tuple[float, float]:
    """``(I(X:B E_B), I(X E_B:B))`` of the cq state generated by ``ens``."""
    a = _as_assist(rho_assist)
    omegas = ensemble_outputs(n, ens, rho_assist)
    p = ens.probs
    dims = (n.d_out, a.d_eb)
    avg = sum(pi * o for pi, o in zip(p, omegas))
    cond = sum(pi * von_neumann_entropy(o) for pi, o in zip(p, omegas))
    chi = von_neumann_entropy(avg) - cond
    mutual = von_neumann_entropy(ptrace(avg, dims, [0])) + a.s_eb / LN2 - cond
    return chi, mutual


def random_cq_state(rng: np.random.Generator, d_x: int = 3, d_b: int = 2, d_e: int = 2):
    """Random ``sum_x p_x |x><x| (x) omega_x`` on ``X B E`` with every ``omega_x`` sharing one ``E`` marginal.

    Returns ``(probs, blocks)``; each block is ordered ``B (x) E``.
    """
    p = rng.dirichlet(np.ones(d_x))
    rho_e = random_density_matrix(d_e, rng)
    vals, vecs = np.linalg.eigh(rho_e)
    v = (vecs * np.sqrt(np.clip(vals, 0.0, None))).reshape(-1)  # purification on E (x) R
    blocks = []
    for _ in range(d_x):
        out = apply_local(random_channel(d_e, d_b, rng), np.outer(v, v.conj()), (d_e, d_e), 1)
        blocks.append(out.reshape(d_e, d_b, d_e, d_b).transpose(1, 0, 3, 2).reshape(d_b * d_e, -1))
    return p, blocks, d_b, d_e


def lemma2_residual(probs, blocks, d_b: int, d_e: int) -> float:
    """``|[I(X E:B) - I(X:B E)] - I(B:E)|`` for a cq state given as weighted ``B (x) E`` blocks."""
    d_x = len(probs)
    size = d_b * d_e
    omega = np.zeros((d_x * size,) * 2, dtype=np.complex128)
    for x, (px, blk) in enumerate(zip(probs, blocks)):
        omega[x * size : (x + 1) * size, x * size : (x + 1) * size] = px * blk
    dims = (d_x, d_b, d_e)
    diff = mutual_information_array(omega, dims, [0, 2], [1]) - mutual_information_array(omega, dims, [0], [1, 2])
    avg = sum(px * blk for px, blk in zip(probs, blocks))
    return abs(diff - mutual_information_array(avg, (d_b, d_e), [0], [1]))


def average_output(n: QuantumChannel, ens: EncodingEnsemble, rho_assist=None) -> np.ndarray:
    return sum(pi * o for pi, o in zip(ens.probs, ensemble_outputs(n, ens, rho_assist)))


# ---------------------------------------------------------------------------
# unassisted quantities


def mutual_information_wrt(n: QuantumChannel, rho, purification: BipartitePureState | None = None) -> float:
    """``I(A':B)`` of ``(N (x) id)(phi)`` for a purification ``phi`` of ``rho``.

    The purification's first factor is the channel input.
    """
    m = as_matrix(rho)
    if m.shape != (n.d_in, n.d_in):
        raise DimensionError(f"state is {m.shape[0]}-dim, channel input is {n.d_in}-dim")
    phi = purify(m) if purification is None else purification
    if phi.dims[0] != n.d_in:
        raise DimensionError("purification does not act on the channel input")
    if np.abs(phi.reduced_A() - m).max() > 1e-8:
        raise ValueError("purification does not reduce to rho")
    v = phi.vector
    out = apply_local(n, np.outer(v, v.conj()), phi.dims, 0)
    dims = (n.d_out, phi.dims[1])
    return von_neumann_entropy(ptrace(out, dims, [0])) + von_neumann_entropy(ptrace(out, dims, [1])) - von_neumann_entropy(out)


def _coherent_objective(n: QuantumChannel, x: np.ndarray):
    d = n.d_in
    a = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
    mm = a @ a.conj().T
    t = np.trace(mm).real
    rho = mm / t
    s1, g1 = _entropy_and_grad(rho)
    s2, g2 = _entropy_and_grad(n(rho))
    s3, g3 = _entropy_and_grad(n.complementary(rho))
    gam = g1 + n.adjoint(g2) - n.complementary_adjoint(g3)
    gam = (gam + gam.conj().T) / 2
    gp = (gam - np.trace(gam @ rho).real * np.eye(d)) / t
    g_a = 2 * gp @ a
    return (s1 + s2 - s3) / LN2, np.concatenate([g_a.real.ravel(), g_a.imag.ravel()]) / LN2, rho


def channel_mutual_information(n: QuantumChannel, restarts: int = 4, seed: int = 0, max_iter: int = 5000) -> CapacityEstimate:
    """``I(N) = max_rho I(N|rho)``; the objective is concave so every local maximum is global.

    The witness is the maximizing input state.
    """
    d = n.d_in

    def run(rng):
        a0 = np.eye(d) + 0.3 * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        x0 = np.concatenate([a0.real.ravel(), a0.imag.ravel()])
        fun = lambda x: tuple(-z for z in _coherent_objective(n, x)[:2])
        res = minimize(fun, x0, jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "ftol": 1e-16, "gtol": 1e-11})
        value, grad, rho = _coherent_objective(n, res.x)
        return value, rho, int(res.nit), float(np.abs(grad).max())

    runs = map_ordered(run, spawn_rngs(seed, max(restarts, 1)))
    value, rho, nit, resid = max(runs, key=lambda r: r[0])
    exact = mutual_information_wrt(n, rho)
    prov = {"restarts": restarts, "iterations": nit, "residual": resid, "seed": seed}
    return CapacityEstimate(float(exact), "lower", DensityOperator(rho), prov)


def holevo_information(
    n: QuantumChannel,
    ensemble_size: int | None = None,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 5000,
) -> CapacityEstimate:
    """Lower bound on ``chi(N)`` from an optimized pure-state ensemble.

    The witness is an ensemble of state preparations (encoders with a
    one-dimensional input); its weights satisfy the tilt fixed point.
    """
    count = ensemble_size or n.d_out**2
    est, _, _ = _optimize_ensemble(n, _as_assist(None), "chi", count, restarts, seed, max_iter, None, 1, True)
    return est


def holevo_kkt_spread(n: QuantumChannel, ens: EncodingEnsemble, min_weight: float = 1e-3) -> float:
    """Spread of ``D(N(rho_x) || sigma)`` over ensemble members with weight above ``min_weight``."""
    from .entropy import relative_entropy

    sigma = average_output(n, ens)
    outs = ensemble_outputs(n, ens)
    ds = [relative_entropy(o, sigma) for o, p in zip(outs, ens.probs) if p > min_weight]
    return float(max(ds) - min(ds))


# ---------------------------------------------------------------------------
# single-encoder maximization (upper bounds, output-entropy minimization)


def _stiefel_residual(v: np.ndarray, g_v: np.ndarray) -> float:
    sym = v.conj().T @ g_v
    sym = (sym + sym.conj().T) / 2
    return float(np.abs(g_v - v @ sym).max())


def _maximize_encoder(
    prob: _EncoderProblem,
    h: Callable[[np.ndarray], tuple[float, np.ndarray]],
    restarts: int,
    seed: int,
    max_iter: int,
    extra_starts: tuple = (),
):
    """Maximize ``h(omega)`` over one encoder; ``h`` returns value and ``dh/domega``.

    ``extra_starts`` are raw matrices ``W`` tried after the random restarts.
    """

    def objective(x):
        _, w = prob.unpack(x, 1, False)
        v, aux = prob.polar(w)
        y = prob.outputs(v)
        omega = (y @ np.conj(np.swapaxes(y, -1, -2)))[0]
        val, g = h(omega)
        g_w = prob.polar_backprop(prob.backprop(2 * (g @ y[0])[None]), w, aux)
        return val, prob.pack(None, g_w)

    def run(start):
        x0 = prob.pack(None, start[None])
        res = minimize(lambda x: tuple(-z for z in objective(x)), x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "ftol": 1e-16, "gtol": 1e-12, "maxcor": 30})
        _, w = prob.unpack(res.x, 1, False)
        v, aux = prob.polar(w)
        y = prob.outputs(v)
        omega = (y @ np.conj(np.swapaxes(y, -1, -2)))[0]
        val, g = h(omega)
        g_v = prob.backprop(2 * (g @ y[0])[None])[0]
        return val, v[0], int(res.nit), _stiefel_residual(v[0], g_v)

    starts = [prob.random_w(1, rng)[0] for rng in spawn_rngs(seed, max(restarts, 1))] + list(extra_starts)
    runs = map_ordered(run, starts)
    return max(runs, key=lambda r: r[0])


def _identity_starts(prob: _EncoderProblem, n: QuantumChannel) -> tuple:
    """The identity encoder as a deterministic start, when the assist fits the channel input."""
    if prob.assist.d_ea != n.d_in:
        return ()
    return (prob.w_from_channel(QuantumChannel(np.eye(n.d_in)[None])),)


def _upper_estimate(value: float, residual: float, witness, prov: dict) -> CapacityEstimate:
    prov = dict(prov, residual=residual)
    direction = "upper" if residual < KKT_TOL else "unverified_upper"
    return CapacityEstimate(float(value), direction, witness, prov)


def holevo_upper_bound(n: QuantumChannel, sigma, restarts: int = 16, seed: int = 0, max_iter: int = 5000) -> CapacityEstimate:
    """``max_psi D(N(psi) || sigma)`` over pure inputs, an upper bound on ``chi(N)`` for any ``sigma``.

    Labelled ``upper`` only when the inner maximization converged to a
    stationary point (residual below ``KKT_TOL``).
    """
    s = as_matrix(sigma)
    if s.shape != (n.d_out, n.d_out):
        raise DimensionError("sigma must live on the channel output")
    witness = DensityOperator(s)
    prov = {"restarts": restarts, "seed": seed}
    if _support_violation(n, s):
        return CapacityEstimate(math.inf, "upper", witness, dict(prov, residual=0.0, iterations=0))
    log_s = _log_on_support(s)
    prob = _EncoderProblem(n, _as_assist(None), 1)

    def h(omega):
        s_om, g = _entropy_and_grad(omega)
        val = -s_om - np.trace(omega @ log_s).real
        return val / LN2, (-g - log_s) / LN2

    val, v, nit, resid = _maximize_encoder(prob, h, restarts, seed, max_iter)
    return _upper_estimate(val, resid, witness, dict(prov, iterations=nit, argmax=v.ravel()))


# ---------------------------------------------------------------------------
# assisted quantities


def _default_count(n: QuantumChannel, a: _Assist) -> int:
    return (n.d_out * a.d_eb) ** 2


def assisted_holevo(
    n: QuantumChannel,
    rho_assist,
    ensemble_size: int | None = None,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 5000,
    warm_start=None,
    env_dim: int | None = None,
) -> CapacityEstimate:
    """Lower bound on ``chi_rho(N) = max I(X:B E_B)`` with encoders on ``E_A``.

    ``warm_start`` (one ensemble or a list) adds extra restarts; state
    ensembles (one-dimensional encoder input) are lifted to replacement
    encoders, so a Holevo witness seeds a value at least ``chi``.
    """
    a = _as_assist(rho_assist)
    count = ensemble_size or _default_count(n, a)
    est, _, _ = _optimize_ensemble(n, a, "chi", count, restarts, seed, max_iter, warm_start, env_dim, True)
    return est


def assisted_mutual(
    n: QuantumChannel,
    rho_assist,
    ensemble_size: int | None = None,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 5000,
    warm_start=None,
    env_dim: int | None = None,
) -> CapacityEstimate:
    """Lower bound on ``I_rho(N) = max I(X E_B:B)``.

    Any ensemble scores at least as high here as under ``assisted_holevo``,
    so warm-starting from that witness keeps the two estimates ordered.
    """
    a = _as_assist(rho_assist)
    count = ensemble_size or _default_count(n, a)
    est, _, _ = _optimize_ensemble(n, a, "mutual", count, restarts, seed, max_iter, warm_start, env_dim, True)
    return est


def assisted_mutual_upper(
    n: QuantumChannel,
    rho_assist,
    sigma_b,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 5000,
) -> CapacityEstimate:
    """``max_E D((N o E (x) id)(rho) || sigma_B (x) rho_EB)``, an upper bound on ``I_rho(N)``."""
    a = _as_assist(rho_assist)
    s = as_matrix(sigma_b)
    if s.shape != (n.d_out, n.d_out):
        raise DimensionError("sigma_B must live on the channel output")
    witness = DensityOperator(s)
    prov = {"restarts": restarts, "seed": seed}
    if _support_violation(n, s):
        return CapacityEstimate(math.inf, "upper", witness, dict(prov, residual=0.0, iterations=0))
    log_s = np.kron(_log_on_support(s), np.eye(a.d_eb))
    prob = _EncoderProblem(n, a)

    def h(omega):
        s_om, g = _entropy_and_grad(omega)
        val = -s_om - np.trace(omega @ log_s).real + a.s_eb
        return val / LN2, (-g - log_s) / LN2

    val, v, nit, resid = _maximize_encoder(prob, h, restarts, seed, max_iter, _identity_starts(prob, n))
    return _upper_estimate(val, resid, witness, dict(prov, iterations=nit, encoder=prob.encoder_channel(v)))


def covariant_assisted_capacity(
    n: QuantumChannel,
    rho_assist,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 5000,
) -> CapacityEstimate:
    """``S(N(pi)) + S(rho_EB) - min_E S((N o E (x) id)(rho))`` for a covariant channel.

    The caller vouches for covariance. The inner minimum is found
    numerically, so the value is reported as a lower bound.
    """
    a = _as_assist(rho_assist)
    prob = _EncoderProblem(n, a)

    def h(omega):
        s_om, g = _entropy_and_grad(omega)
        return -s_om / LN2, -g / LN2

    neg_min, v, nit, resid = _maximize_encoder(prob, h, restarts, seed, max_iter)
    value = von_neumann_entropy(n(np.eye(n.d_in) / n.d_in)) + a.s_eb / LN2 + neg_min
    prov = {"restarts": restarts, "seed": seed, "iterations": nit, "residual": resid, "min_output_entropy": -neg_min}
    return CapacityEstimate(float(value), "lower", prob.encoder_channel(v), prov)


def max_sandwiched_divergence(
    n: QuantumChannel,
    rho_assist,
    sigma_b,
    alpha: float,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 5000,
) -> CapacityEstimate:
    """``max_E D~_alpha((N o E (x) id)(rho) || sigma_B (x) rho_EB)`` over encoders."""
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    a = _as_assist(rho_assist)
    s = as_matrix(sigma_b)
    prov = {"restarts": restarts, "seed": seed, "alpha": alpha}
    if _support_violation(n, s):
        return CapacityEstimate(math.inf, "upper", DensityOperator(s), dict(prov, residual=0.0, iterations=0))
    rho_eb = ptrace(a.matrix, (a.d_ea, a.d_eb), [1])
    c = (1 - alpha) / (2 * alpha)
    gamma = np.kron(psd_power(s, c), psd_power(rho_eb, c))
    prob = _EncoderProblem(n, a)

    def h(omega):
        m = gamma @ omega @ gamma
        mu = np.clip(np.linalg.eigvalsh((m + m.conj().T) / 2), 0.0, None)
        q = float((mu**alpha).sum())
        grad = alpha * gamma @ psd_power(m, alpha - 1, 0.0) @ gamma / (q * (alpha - 1) * LN2)
        return math.log2(q) / (alpha - 1), grad

    val, v, nit, resid = _maximize_encoder(prob, h, restarts, seed, max_iter, _identity_starts(prob, n))
    return CapacityEstimate(float(val), "lower", prob.encoder_channel(v), dict(prov, iterations=nit, residual=resid))


# ---------------------------------------------------------------------------
# closed forms


def _schmidt_vector(schmidt) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(schmidt, dtype=float))
    if lam.size == 1:
        lam = np.array([lam[0], 1 - lam[0]])
    if np.any(lam < -1e-12) or abs(lam.sum() - 1) > 1e-10:
        raise ValueError(f"invalid Schmidt coefficients {lam}")
    return np.clip(lam, 0.0, None)


def erasure_assisted_capacity(d: int, p: float, schmidt) -> float:
    """``(1 - p)(log d + H(lambda))`` for the erasure channel with a pure assist."""
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    lam = _schmidt_vector(schmidt)
    if lam.size > d:
        raise ValueError("Schmidt rank exceeds the channel dimension")
    return (1 - p) * (math.log2(d) + shannon_entropy(lam))


@dataclass(frozen=True)
class PinchingCapacity:
    i_n: float
    p_star: np.ndarray
    chi_lower: float
    gap_bound: float
    rho_star: np.ndarray


def pinching_capacity(dims) -> PinchingCapacity:
    """Closed forms for the block pinching channel with block sizes ``dims``."""
    dims = np.asarray(dims, dtype=int)
    if dims.size == 0 or np.any(dims < 1):
        raise ValueError("block dimensions must be positive")
    delta = float((dims**2).sum())
    p_star = dims**2 / delta
    h = shannon_entropy(p_star)
    rho_star = np.diag(np.repeat(dims / delta, dims))
    return PinchingCapacity(math.log2(delta), p_star, math.log2(delta) - h, h, rho_star)


def optimal_pinching_assist(dims) -> BipartitePureState:
    """Purification of the optimal pinching input ``sum_i (d_i / Delta) Pi_i``."""
    rho = pinching_capacity(dims).rho_star
    lam = np.diag(rho).real
    eye = np.eye(lam.size, dtype=np.complex128)
    return BipartitePureState(lam, eye, eye)


def identity_encoding(n: QuantumChannel, rho_assist) -> EncodingEnsemble:
    """Single-letter ensemble that feeds ``E_A`` straight into the channel."""
    a = _as_assist(rho_assist)
    if a.d_ea != n.d_in:
        raise DimensionError(f"assist side has dimension {a.d_ea}, channel input {n.d_in}")
    return EncodingEnsemble(np.ones(1), (QuantumChannel(np.eye(n.d_in)[None], "identity"),))


def shor_rate(n: QuantumChannel, phi: BipartitePureState) -> float:
    """``I(B:E_B)`` of ``(N (x) id)(phi)``: the rate of identity encoding."""
    d_ea, d_eb = phi.dims
    if d_ea != n.d_in:
        raise DimensionError(f"assist side has dimension {d_ea}, channel input {n.d_in}")
    v = phi.vector
    out = apply_local(n, np.outer(v, v.conj()), (d_ea, d_eb), 0)
    dims = (n.d_out, d_eb)
    return von_neumann_entropy(ptrace(out, dims, [0])) + von_neumann_entropy(ptrace(out, dims, [1])) - von_neumann_entropy(out)


@dataclass(frozen=True)
class StrongConverse:
    rate: float
    alpha: float
    div_value: float
    exponent: float

    def succ_bound(self, n: int) -> float:
        """``2^{-n * exponent}``, capped at 1."""
        return min(1.0, 2.0 ** (-n * self.exponent))

    def threshold(self, target: float) -> int | None:
        """Smallest blocklength with ``succ_bound(n) < target``; ``None`` if the exponent is not positive."""
        if not 0 < target < 1 or self.exponent <= 0:
            return None
        n = max(1, math.ceil(math.log2(1 / target) / self.exponent) - 1)
        while self.succ_bound(n) >= target:
            n += 1
        return n


def strong_converse_exponent(rate: float, alpha: float, div_value: float) -> StrongConverse:
    """Exponent ``((alpha - 1) / alpha)(R - div)`` of the success-probability bound."""
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    exponent = (alpha - 1) / alpha * (rate - div_value)
    return StrongConverse(float(rate), float(alpha), float(div_value), float(exponent))
