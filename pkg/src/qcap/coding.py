"""Desk-scale coding machinery: semi-global operations, type classes, and the
dephasing/permutation gap evaluated exactly at small blocklength."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channels import QuantumChannel, all_kraus_products, apply_local, identity_channel
from .entropy import von_neumann_entropy
from .qcore import (
    BipartitePureState,
    DimensionError,
    _check_perm,
    _complete_basis,
    compose_perms,
    kron_all,
    permutation_operator,
    permute_systems,
    ptrace,
    weyl_phase_set,
)

DEFAULT_ENTRY_CAP = 2**20


# ---------------------------------------------------------------------------
# semi-global operations


@dataclass(frozen=True)
class SemiGlobalOp:
    """Local channels ``E^1 (x) ... (x) E^n`` followed by the permutation ``perm`` of the outputs.

    ``perm`` is 0-based: the output at position ``i`` moves to ``perm[i]``.
    """

    locals: tuple[QuantumChannel, ...]
    perm: tuple[int, ...]

    def __post_init__(self):
        locs = tuple(self.locals)
        perm = _check_perm(self.perm)
        if len(locs) != len(perm):
            raise DimensionError("need one local channel per position")
        if len({(c.d_in, c.d_out) for c in locs}) != 1:
            raise DimensionError("local channels must share input and output dimensions")
        object.__setattr__(self, "locals", locs)
        object.__setattr__(self, "perm", perm)

    @property
    def n(self) -> int:
        return len(self.perm)

    def as_channel(self) -> QuantumChannel:
        p = permutation_operator(self.perm, self.locals[0].d_out)
        ks = all_kraus_products([c.kraus for c in self.locals])
        return QuantumChannel(p @ ks, "semi-global")

    def apply(self, rho) -> np.ndarray:
        m = np.asarray(rho, dtype=np.complex128)
        d_in, d_out = self.locals[0].d_in, self.locals[0].d_out
        dims = [d_in] * self.n
        for i, c in enumerate(self.locals):
            m = apply_local(c, m, dims, i)
            dims[i] = d_out
        p = permutation_operator(self.perm, d_out)
        return p @ m @ p.conj().T


def normalize_rounds(rounds: Sequence[tuple[Sequence[int], Sequence[QuantumChannel]]]) -> SemiGlobalOp:
    """Collapse rounds of (permutation, then local channels) into a single semi-global operation.

    The system that starts at position ``j`` visits positions
    ``Pi_1(j), Pi_2(j), ...`` with ``Pi_r = pi_r o ... o pi_1``, so its
    net local channel is the composition of the channels met there, and the
    net permutation is ``Pi_R``.
    """
    if not rounds:
        raise ValueError("need at least one round")
    n = len(rounds[0][0])
    cum = tuple(range(n))
    d_prev = None
    nets: list[QuantumChannel | None] = [None] * n
    for perm, locs in rounds:
        perm = _check_perm(perm)
        locs = tuple(locs)
        if len(perm) != n or len(locs) != n:
            raise DimensionError("every round must cover the same number of positions")
        dims = {(c.d_in, c.d_out) for c in locs}
        if len(dims) != 1:
            raise DimensionError("local channels within a round must share dimensions")
        d_in, d_out = dims.pop()
        if d_prev is not None and d_in != d_prev:
            raise DimensionError(f"round expects {d_in}-dim inputs, previous round produced {d_prev}")
        cum = compose_perms(perm, cum)
        for j in range(n):
            step = locs[cum[j]]
            nets[j] = step if nets[j] is None else step.compose(nets[j])
        d_prev = d_out
    return SemiGlobalOp(tuple(nets), cum)


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class TypeClass:
    """Sequences of length ``n`` with symbol counts ``counts``."""

    counts: tuple[int, ...]
    size: int
    probability: object  # probability of one sequence of this type

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def type(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.n) for c in self.counts)


def _compositions(n: int, k: int):
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        counts = []
        for b in bars + (n + k - 1,):
            counts.append(b - prev - 1)
            prev = b
        yield tuple(counts)


def enumerate_types(alphabet_size: int, n: int, source: Sequence | None = None) -> list[TypeClass]:
    """All type classes of length-``n`` sequences over ``alphabet_size`` symbols.

    ``source`` is the i.i.d. symbol distribution (uniform by default, as exact
    fractions); each class carries the probability of one of its sequences.
    """
    if n < 1 or alphabet_size < 1:
        raise ValueError("need n >= 1 and a nonempty alphabet")
    src = [Fraction(1, alphabet_size)] * alphabet_size if source is None else list(source)
    if len(src) != alphabet_size:
        raise ValueError("source length must equal the alphabet size")
    out = []
    for counts in _compositions(n, alphabet_size):
        size = math.factorial(n)
        prob = 1
        for c, q in zip(counts, src):
            size //= math.factorial(c)
            prob = prob * q**c
        out.append(TypeClass(counts, size, prob))
    return out


# ---------------------------------------------------------------------------
# the dephasing/permutation construction


def _phase_unitaries(phi: BipartitePureState) -> list[np.ndarray]:
    d = phi.dims[0]
    basis = _complete_basis(phi.basis_A, d)
    return list(weyl_phase_set(phi.reduced_A(), basis=basis).operators)


def _check_cap(m: QuantumChannel, phi: BipartitePureState, n: int, cap: int):
    d, d_eb = phi.dims
    size = math.factorial(n) * d**n * (m.d_out * d_eb) ** n
    if size > cap:
        raise ValueError(f"construction needs {size} entries, above the cap {cap}")


def _blocks(m: QuantumChannel, phi: BipartitePureState, n: int):
    """Conditional states ``M^n o P^pi o Z^u (phi^n)`` on ``B^n E_B^n``, one per ``(pi, u)``."""
    d, d_eb = phi.dims
    if m.d_in != d:
        raise DimensionError(f"channel input {m.d_in} does not match E_A dimension {d}")
    vec = np.ones(1, dtype=np.complex128)
    for _ in range(n):
        vec = np.kron(vec, phi.vector)
    # (E_A E_B)^n -> E_A^n E_B^n
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    vec = vec.reshape([d, d_eb] * n).transpose(order).reshape(d**n, d_eb**n)
    zs = _phase_unitaries(phi)
    kraus = all_kraus_products([m.kraus] * n)
    out = []
    for pi in itertools.permutations(range(n)):
        p = permutation_operator(pi, d)
        for u in itertools.product(range(d), repeat=n):
            psi = p @ kron_all(zs[k] for k in u) @ vec
            cols = np.einsum("kab,bc->ack", kraus, psi).reshape(-1, kraus.shape[0])
            out.append(cols @ cols.conj().T)
    return out


def _sigma(m: QuantumChannel, phi: BipartitePureState) -> np.ndarray:
    v = phi.vector
    return apply_local(m, np.outer(v, v.conj()), phi.dims, 0)


def _mi(mat: np.ndarray, d_left: int, d_right: int) -> float:
    dims = (d_left, d_right)
    return von_neumann_entropy(ptrace(mat, dims, [0])) + von_neumann_entropy(ptrace(mat, dims, [1])) - von_neumann_entropy(mat)


@dataclass(frozen=True)
class Lemma8Result:
    lhs: float
    bound: float
    mi_sigma: float  # I(B:E_B) of the single-letter state
    label_information: float  # I(labels : B^n E_B^n) of the block ensemble

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound + 1e-8


def lemma8_gap(m: QuantumChannel, phi: BipartitePureState, n: int, size_cap: int = DEFAULT_ENTRY_CAP) -> Lemma8Result:
    """``n I(B:E_B)_sigma - I(labels : B^n E_B^n)_omega`` and the bound ``d log2(n + 1)``.

    The labels are a uniformly random permutation of the ``n`` copies of
    ``E_A`` and independent uniform phase labels; the classical registers are
    kept as an explicit list of conditional states.
    """
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    _check_cap(m, phi, n, size_cap)
    d, d_eb = phi.dims
    blocks = _blocks(m, phi, n)
    avg = sum(blocks) / len(blocks)
    holevo = von_neumann_entropy(avg) - float(np.mean([von_neumann_entropy(b) for b in blocks]))
    mi = _mi(_sigma(m, phi), m.d_out, d_eb)
    return Lemma8Result(n * mi - holevo, d * math.log2(n + 1), mi, holevo)


@dataclass(frozen=True)
class DephasingReport:
    n: int
    conditional_entropy_gap: float  # |H(B^n E_B^n | labels) - n S(sigma_{B E_B})|
    reduced_b_gap: float  # max-abs distance of omega_{B^n} from sigma_B^n
    reduced_eb_gap: float  # max-abs distance of omega_{E_B^n} from phi_{E_B}^n
    mutual_gap: float  # |lhs - I(B^n : E_B^n)_omega|

    @property
    def holds(self) -> bool:
        return max(self.conditional_entropy_gap, self.reduced_b_gap, self.reduced_eb_gap, self.mutual_gap) < 1e-9


def dephasing_mutual_chain(m: QuantumChannel, phi: BipartitePureState, n: int = 1, size_cap: int = DEFAULT_ENTRY_CAP) -> DephasingReport:
    """Check the entropy and marginal identities behind the gap bound at blocklength ``n``."""
    _check_cap(m, phi, n, size_cap)
    d, d_eb = phi.dims
    d_b = m.d_out
    blocks = _blocks(m, phi, n)
    avg = sum(blocks) / len(blocks)
    sigma = _sigma(m, phi)
    cond = float(np.mean([von_neumann_entropy(b) for b in blocks]))
    cond_gap = abs(cond - n * von_neumann_entropy(sigma))
    dims = [d_b] * n + [d_eb] * n
    om_b = ptrace(avg, dims, list(range(n)))
    om_eb = ptrace(avg, dims, list(range(n, 2 * n)))
    sig_b = ptrace(sigma, (d_b, d_eb), [0])
    phi_eb = phi.reduced_B()
    b_gap = float(np.abs(om_b - kron_all([sig_b] * n)).max())
    eb_gap = float(np.abs(om_eb - kron_all([phi_eb] * n)).max())
    res = lemma8_gap(m, phi, n, size_cap)
    mutual_gap = abs(res.lhs - _mi(avg, d_b**n, d_eb**n))
    return DephasingReport(n, cond_gap, b_gap, eb_gap, mutual_gap)
