"""Dense linear algebra and quantum-state primitives.

Everything here works on plain ``numpy`` complex arrays; the small
``DensityOperator`` / ``BipartitePureState`` wrappers only add validated
subsystem bookkeeping on top.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
CLIP_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when operator shapes or subsystem dimensions do not line up."""


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-d complex128 array."""
    if isinstance(a, DensityOperator):
        return a.matrix
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _normalize_dims(dims, total: int | None = None) -> tuple[tuple[str, int], ...]:
    if dims is None:
        if total is None:
            raise DimensionError("dims required")
        return (("A", int(total)),)
    if isinstance(dims, dict):
        items = list(dims.items())
    else:
        items = list(dims)
        if items and not isinstance(items[0], (tuple, list)):
            letters = string.ascii_uppercase
            items = [(letters[i], d) for i, d in enumerate(items)]
    out = tuple((str(lbl), int(d)) for lbl, d in items)
    labels = [lbl for lbl, _ in out]
    if len(set(labels)) != len(labels):
        raise DimensionError(f"duplicate subsystem labels {labels}")
    if any(d < 1 for _, d in out):
        raise DimensionError(f"subsystem dimensions must be positive: {out}")
    return out


@dataclass(frozen=True)
class DensityOperator:
    """Unit-trace positive semidefinite matrix on a labelled tensor factorization.

    ``dims`` is an ordered tuple of ``(label, dimension)`` pairs, e.g.
    ``(("A", 2), ("B", 2))``. A list of plain integers is accepted and
    labelled ``A, B, C, ...``.
    """

    matrix: np.ndarray
    dims: tuple[tuple[str, int], ...] = field(default=None)

    def __post_init__(self):
        m = as_matrix(self.matrix).copy()
        dims = _normalize_dims(self.dims, m.shape[0])
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        if int(np.prod([d for _, d in dims])) != m.shape[0]:
            raise DimensionError(f"dims {dims} do not match matrix size {m.shape[0]}")
        if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        if abs(np.trace(m).real - 1) > TRACE_TOL:
            raise ValueError(f"density matrix trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.shape[self.index(label)]

    def relabel(self, labels: Sequence[str]) -> "DensityOperator":
        if len(labels) != len(self.dims):
            raise DimensionError("relabel needs one label per subsystem")
        return DensityOperator(self.matrix, tuple(zip(labels, self.shape)))

    def eigvalsh(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)

    def __repr__(self):
        dims = ", ".join(f"{lbl}:{d}" for lbl, d in self.dims)
        return f"DensityOperator([{dims}])"


# ---------------------------------------------------------------------------
# tensor products and marginals


def tensor(a, b):
    """Kronecker product. Two ``DensityOperator`` inputs keep their labels."""
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        if set(a.labels) & set(b.labels):
            raise DimensionError(f"label clash between {a.labels} and {b.labels}")
        return DensityOperator(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for m in mats:
        out = np.kron(out, m)
    return out


def ptrace(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of ``mat`` over every subsystem index not in ``keep``.

    The kept subsystems appear in the order given by ``keep``.
    """
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = list(keep)
    drop = [i for i in range(n) if i not in keep]
    t = np.asarray(mat).reshape(dims + dims)
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    dk = int(np.prod([dims[i] for i in keep]))
    dd = int(np.prod([dims[i] for i in drop]))
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    return np.einsum("iaja->ij", t)


def partial_trace(m: DensityOperator, keep: Sequence[str] | str) -> DensityOperator:
    """Marginal of ``m`` on the subsystems labelled ``keep``."""
    if isinstance(keep, str):
        keep = [keep]
    idx = [m.index(lbl) for lbl in keep]
    red = ptrace(m.matrix, m.shape, idx)
    return DensityOperator(red, tuple(m.dims[i] for i in idx))


def permute_systems(mat: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor ``k`` is input factor ``order[k]``."""
    dims = [int(d) for d in dims]
    n = len(dims)
    t = np.asarray(mat).reshape(dims + dims)
    t = t.transpose(list(order) + [n + i for i in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)


# ---------------------------------------------------------------------------
# spectra and purifications


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            c = col[nz[0]]
            out[:, j] = col * (abs(c) / c)
    return out


def sorted_eigh(rho: np.ndarray, decimals: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with a deterministic basis.

    Eigenvalues descend; eigenvectors have their first nonzero component real
    positive, and ties are ordered by the position of that component. A
    diagonal input keeps the computational basis.
    """
    rho = as_matrix(rho)
    offdiag = rho - np.diag(np.diag(rho))
    if np.abs(offdiag).max(initial=0.0) < 1e-14:
        vals = np.diag(rho).real.copy()
        vecs = np.eye(rho.shape[0], dtype=np.complex128)
    else:
        vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
        vecs = _phase_fix(vecs)

    def key(j):
        col = vecs[:, j]
        first = int(np.flatnonzero(np.abs(col) > 1e-12)[0])
        return (-round(float(vals[j]), decimals), first, tuple(-np.round(np.abs(col), decimals)))

    order = sorted(range(len(vals)), key=key)
    return vals[order], vecs[:, order]


@dataclass(frozen=True)
class BipartitePureState:
    """Pure state ``sum_i sqrt(schmidt[i]) |a_i>|b_i>`` on ``E_A (x) E_B``."""

    schmidt: np.ndarray
    basis_A: np.ndarray
    basis_B: np.ndarray
    labels: tuple[str, str] = ("EA", "EB")

    def __post_init__(self):
        lam = np.asarray(self.schmidt, dtype=float).ravel()
        a = np.asarray(self.basis_A, dtype=np.complex128)
        b = np.asarray(self.basis_B, dtype=np.complex128)
        if np.any(lam < -1e-12) or abs(lam.sum() - 1) > 1e-12:
            raise ValueError(f"invalid Schmidt coefficients {lam}")
        if a.shape[1] != lam.size or b.shape[1] != lam.size:
            raise DimensionError("need one basis column per Schmidt coefficient")
        for basis in (a, b):
            if np.abs(basis.conj().T @ basis - np.eye(lam.size)).max() > 1e-10:
                raise ValueError("Schmidt basis columns are not orthonormal")
        lam = np.clip(lam, 0.0, None)
        for arr in (lam, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "schmidt", lam)
        object.__setattr__(self, "basis_A", a)
        object.__setattr__(self, "basis_B", b)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_schmidt(cls, schmidt, labels=("EA", "EB")) -> "BipartitePureState":
        """``sum_i sqrt(lambda_i)|ii>`` in the computational basis.

        A scalar ``lambda`` means the two-qubit state ``(lambda, 1 - lambda)``.
        """
        lam = np.atleast_1d(np.asarray(schmidt, dtype=float))
        if lam.size == 1:
            lam = np.array([lam[0], 1 - lam[0]])
        eye = np.eye(lam.size, dtype=np.complex128)
        return cls(lam, eye, eye, labels)

    @classmethod
    def from_vector(cls, psi, d_a: int, d_b: int, labels=("EA", "EB")) -> "BipartitePureState":
        psi = np.asarray(psi, dtype=np.complex128).reshape(d_a, d_b)
        psi = psi / np.linalg.norm(psi)
        u, s, vh = np.linalg.svd(psi)
        r = min(d_a, d_b)
        lam = s[:r] ** 2
        return cls(lam / lam.sum(), u[:, :r], vh[:r].T, labels)

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_A.shape[0], self.basis_B.shape[0]

    @property
    def vector(self) -> np.ndarray:
        amp = np.sqrt(self.schmidt)
        m = (self.basis_A * amp) @ self.basis_B.T
        return m.reshape(-1)

    def density(self) -> DensityOperator:
        v = self.vector
        return DensityOperator(np.outer(v, v.conj()), tuple(zip(self.labels, self.dims)))

    def reduced_A(self) -> np.ndarray:
        return (self.basis_A * self.schmidt) @ self.basis_A.conj().T

    def reduced_B(self) -> np.ndarray:
        return (self.basis_B * self.schmidt) @ self.basis_B.conj().T


def purify(rho, label: str = "R") -> BipartitePureState:
    """Purification ``sum_i sqrt(p_i)|e_i>|i>`` of ``rho`` onto a reference of size rank(rho).

    The first factor is the original system.
    """
    if isinstance(rho, DensityOperator):
        if len(rho.dims) == 1:
            labels = (rho.labels[0], label)
        else:
            labels = ("".join(rho.labels), label)
        m = rho.matrix
    else:
        m = as_matrix(rho)
        labels = ("A", label)
    vals, vecs = sorted_eigh(m)
    vals = np.where(vals < CLIP_TOL, 0.0, vals)
    keep = vals > 0
    lam = vals[keep] / vals[keep].sum()
    r = int(keep.sum())
    return BipartitePureState(lam, vecs[:, keep], np.eye(r, dtype=np.complex128), labels)


# ---------------------------------------------------------------------------
# Weyl phases, dephasing, permutations


@dataclass(frozen=True)
class WeylPhaseSet:
    """Diagonal phase unitaries ``Z^u = sum_z exp(2 pi i u z / d)|z><z|`` in a fixed basis."""

    base_state: np.ndarray
    basis: np.ndarray
    operators: tuple[np.ndarray, ...]

    @property
    def d(self) -> int:
        return len(self.operators)

    def __getitem__(self, u: int) -> np.ndarray:
        return self.operators[u % self.d]


def weyl_phase_set(rho, basis: np.ndarray | None = None) -> WeylPhaseSet:
    """Phase operators diagonal in the eigenbasis of ``rho``.

    ``basis`` overrides the eigenbasis; it must diagonalize ``rho``.
    """
    m = as_matrix(rho)
    d = m.shape[0]
    if basis is None:
        _, basis = sorted_eigh(m)
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.shape != (d, d):
        raise DimensionError(f"basis shape {basis.shape} does not match dimension {d}")
    z = np.arange(d)
    ops = []
    for u in range(d):
        phases = np.exp(2j * np.pi * u * z / d)
        ops.append((basis * phases) @ basis.conj().T)
    return WeylPhaseSet(m, basis, tuple(ops))


def _complete_basis(cols: np.ndarray, d: int) -> np.ndarray:
    """Extend orthonormal columns to a full unitary."""
    r = cols.shape[1]
    if r == d:
        return cols
    proj = np.eye(d) - cols @ cols.conj().T
    extra = []
    for j in range(d):
        v = proj[:, j]
        for e in extra:
            v = v - e * (e.conj() @ v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            extra.append(v / nrm)
        if len(extra) == d - r:
            break
    return np.column_stack([cols] + extra)


def dephase_ensemble(phi: BipartitePureState) -> DensityOperator:
    """Uniform average of ``(Z^u (x) 1) phi (Z^u (x) 1)^dag`` over the Schmidt-basis phases.

    The result is the classical-quantum state ``sum_z lambda_z |z><z| (x) phi_{E_B|z}``.
    """
    d_a, d_b = phi.dims
    basis = _complete_basis(phi.basis_A, d_a)
    zs = weyl_phase_set(phi.reduced_A(), basis=basis)
    rho = phi.density().matrix
    out = np.zeros_like(rho)
    eye_b = np.eye(d_b)
    for z in zs.operators:
        u = np.kron(z, eye_b)
        out += u @ rho @ u.conj().T
    out /= zs.d
    return DensityOperator(out, tuple(zip(phi.labels, phi.dims)))


def _check_perm(perm: Sequence[int]) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
    return perm


def compose_perms(p2: Sequence[int], p1: Sequence[int]) -> tuple[int, ...]:
    """``p2 o p1`` as a 0-based tuple (apply ``p1`` first)."""
    return tuple(p2[p1[i]] for i in range(len(p1)))


def invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def permutation_operator(perm: Sequence[int], d: int) -> np.ndarray:
    """Unitary moving the factor at position ``i`` to position ``perm[i]``.

    ``perm`` is 0-based. Basis vectors map as
    ``|x_0 ... x_{n-1}> -> |x_{perm^-1(0)} ... x_{perm^-1(n-1)}>``, so
    ``P(p2) @ P(p1) == P(compose_perms(p2, p1))``.
    """
    perm = _check_perm(perm)
    n = len(perm)
    inv = invert_perm(perm)
    dim = d**n
    digits = np.array(np.unravel_index(np.arange(dim), (d,) * n)).T
    # output digit k is input digit inv[k]
    out_index = np.ravel_multi_index(tuple(digits[:, inv].T), (d,) * n)
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[out_index, np.arange(dim)] = 1.0
    return p


# ---------------------------------------------------------------------------
# random objects


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_state(dims, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    dims = _normalize_dims(dims)
    d = int(np.prod([k for _, k in dims]))
    return DensityOperator(random_density_matrix(d, rng, rank), dims)


def maximally_entangled(d: int, labels=("EA", "EB")) -> BipartitePureState:
    return BipartitePureState.from_schmidt(np.full(d, 1.0 / d), labels)
