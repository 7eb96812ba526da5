"""Completely positive trace-preserving maps in Kraus form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .qcore import (
    DensityOperator,
    DimensionError,
    as_matrix,
    haar_unitary,
    random_density_matrix,
)

KRAUS_TOL = 1e-10
DEFAULT_SIZE_CAP = 4096


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map ``rho -> sum_k K_k rho K_k^dag``.

    ``kraus`` has shape ``(num_kraus, d_out, d_in)``. Redundant Kraus operators
    are allowed.
    """

    kraus: np.ndarray
    name: str = ""

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3:
            raise DimensionError(f"Kraus array must be 3-d, got shape {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ValueError("Kraus operators have non-finite entries")
        gram = np.einsum("kba,kbc->ac", k.conj(), k)
        if np.abs(gram - np.eye(k.shape[2])).max() > KRAUS_TOL:
            raise ValueError("Kraus operators are not trace preserving")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def d_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def d_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def num_kraus(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho) -> np.ndarray:
        m = as_matrix(rho)
        if m.shape != (self.d_in, self.d_in):
            raise DimensionError(f"channel expects {self.d_in}x{self.d_in} input, got {m.shape}")
        return np.einsum("kab,bc,kdc->ad", self.kraus, m, self.kraus.conj())

    def adjoint(self, x) -> np.ndarray:
        """Heisenberg-picture map ``X -> sum_k K_k^dag X K_k``."""
        return np.einsum("kba,bc,kcd->ad", self.kraus.conj(), as_matrix(x), self.kraus)

    def complementary(self, rho) -> np.ndarray:
        """Environment output ``[tr(K_i rho K_j^dag)]_{ij}``."""
        return np.einsum("iab,bc,jac->ij", self.kraus, as_matrix(rho), self.kraus.conj())

    def complementary_adjoint(self, y) -> np.ndarray:
        return np.einsum("ij,iba,jbc->ac", as_matrix(y), self.kraus.conj(), self.kraus)

    def compose(self, first: "QuantumChannel") -> "QuantumChannel":
        """``self o first``: apply ``first`` then ``self``."""
        if first.d_out != self.d_in:
            raise DimensionError(f"cannot compose {first.d_out}-dim output into {self.d_in}-dim input")
        k = np.einsum("iab,jbc->ijac", self.kraus, first.kraus)
        return QuantumChannel(k.reshape(-1, self.d_out, first.d_in), _join(self.name, first.name, "o"))

    def tensor(self, other: "QuantumChannel") -> "QuantumChannel":
        k = np.einsum("iab,jcd->ijacbd", self.kraus, other.kraus)
        k = k.reshape(self.num_kraus * other.num_kraus, self.d_out * other.d_out, self.d_in * other.d_in)
        return QuantumChannel(k, _join(self.name, other.name, "x"))

    def choi(self) -> "ChoiMatrix":
        return ChoiMatrix.from_channel(self)

    def __repr__(self):
        tag = f"{self.name}, " if self.name else ""
        return f"QuantumChannel({tag}{self.d_in}->{self.d_out}, {self.num_kraus} Kraus)"


def _join(a: str, b: str, op: str) -> str:
    return f"({a} {op} {b})" if a and b else ""


@dataclass(frozen=True)
class ChoiMatrix:
    """``J = sum_ij |i><j| (x) N(|i><j|)`` on ``in (x) out``."""

    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.d_in * self.d_out,) * 2:
            raise DimensionError("Choi matrix size does not match d_in * d_out")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -KRAUS_TOL:
            raise ValueError("Choi matrix is not positive semidefinite")
        red = np.einsum("iaja->ij", m.reshape(self.d_in, self.d_out, self.d_in, self.d_out))
        if np.abs(red - np.eye(self.d_in)).max() > KRAUS_TOL:
            raise ValueError("Choi matrix is not trace preserving")

    @classmethod
    def from_channel(cls, n: QuantumChannel) -> "ChoiMatrix":
        vecs = n.kraus.transpose(0, 2, 1).reshape(n.num_kraus, -1)
        return cls(vecs.T @ vecs.conj(), n.d_in, n.d_out)

    def to_channel(self, tol: float = 1e-12, name: str = "") -> QuantumChannel:
        vals, vecs = np.linalg.eigh((self.matrix + self.matrix.conj().T) / 2)
        keep = vals > tol
        k = (vecs[:, keep] * np.sqrt(vals[keep])).T.reshape(-1, self.d_in, self.d_out)
        return QuantumChannel(k.transpose(0, 2, 1), name)


# ---------------------------------------------------------------------------
# application on labelled states


def apply(n: QuantumChannel, rho: DensityOperator, acting_on: str, out_label: str | None = None) -> DensityOperator:
    """Apply ``n`` to subsystem ``acting_on`` of ``rho``."""
    i = rho.index(acting_on)
    if rho.shape[i] != n.d_in:
        raise DimensionError(f"subsystem {acting_on} has dimension {rho.shape[i]}, channel expects {n.d_in}")
    left = int(np.prod(rho.shape[:i]))
    right = int(np.prod(rho.shape[i + 1 :]))
    t = rho.matrix.reshape(left, n.d_in, right, left, n.d_in, right)
    out = np.einsum("kba,larmes,kce->lbrmcs", n.kraus, t, n.kraus.conj())
    d = left * n.d_out * right
    dims = list(rho.dims)
    dims[i] = (out_label or acting_on, n.d_out)
    return DensityOperator(out.reshape(d, d), tuple(dims))


def apply_local(n: QuantumChannel, mat: np.ndarray, dims: Sequence[int], i: int) -> np.ndarray:
    """Array version of :func:`apply` on factor ``i`` of ``dims``."""
    left = int(np.prod(dims[:i]))
    right = int(np.prod(dims[i + 1 :]))
    t = np.asarray(mat).reshape(left, n.d_in, right, left, n.d_in, right)
    out = np.einsum("kba,larmes,kce->lbrmcs", n.kraus, t, n.kraus.conj())
    d = left * n.d_out * right
    return out.reshape(d, d)


# ---------------------------------------------------------------------------
# named channels


def _check_prob(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name}={x} outside [0, 1]")
    return x


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel(np.eye(d)[None], f"id{d}")


def unitary_channel(u) -> QuantumChannel:
    return QuantumChannel(as_matrix(u)[None], "unitary")


def erasure_channel(d: int, p: float) -> QuantumChannel:
    """``rho -> (1-p) rho + p|e><e|`` with the erasure flag as the last basis vector."""
    p = _check_prob(p, "p")
    embed = np.zeros((d + 1, d))
    embed[:d, :d] = np.eye(d)
    ks = [np.sqrt(1 - p) * embed]
    for i in range(d):
        k = np.zeros((d + 1, d))
        k[d, i] = np.sqrt(p)
        ks.append(k)
    return QuantumChannel(np.array(ks), f"erasure(d={d},p={p:g})")


def pinching_channel(dims: Sequence[int]) -> QuantumChannel:
    """Block-diagonal projection ``rho -> sum_i Pi_i rho Pi_i``."""
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("pinching needs at least one block")
    if any(d < 1 for d in dims):
        raise ValueError(f"block dimensions must be >= 1, got {dims}")
    total = sum(dims)
    ks = []
    start = 0
    for d in dims:
        proj = np.zeros((total, total))
        proj[start : start + d, start : start + d] = np.eye(d)
        ks.append(proj)
        start += d
    return QuantumChannel(np.array(ks), f"pinching{tuple(dims)}")


def weyl_operators(d: int) -> list[np.ndarray]:
    """The ``d**2`` generalized Pauli operators ``X^a Z^b``."""
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b) for a in range(d) for b in range(d)]


def depolarizing_channel(d: int, q: float) -> QuantumChannel:
    """``rho -> (1-q) rho + q 1/d``."""
    q = _check_prob(q, "q")
    ks = [np.sqrt(1 - q) * np.eye(d)] + [np.sqrt(q) / d * w for w in weyl_operators(d)]
    return QuantumChannel(np.array(ks), f"depolarizing(d={d},q={q:g})")


def replacement_channel(state, d_in: int) -> QuantumChannel:
    """``X -> tr(X) state``."""
    s = as_matrix(state)
    vals, vecs = np.linalg.eigh((s + s.conj().T) / 2)
    vals = np.clip(vals, 0, None)
    ks = []
    for j in range(len(vals)):
        if vals[j] <= 0:
            continue
        for i in range(d_in):
            k = np.zeros((s.shape[0], d_in), dtype=np.complex128)
            k[:, i] = np.sqrt(vals[j]) * vecs[:, j]
            ks.append(k)
    return QuantumChannel(np.array(ks), "replacement")


def random_channel(d_in: int, d_out: int, rng: np.random.Generator, kraus_rank: int | None = None) -> QuantumChannel:
    """Channel from a Haar-random isometry ``d_in -> d_out * kraus_rank``."""
    r = kraus_rank or d_in * d_out
    if d_out * r < d_in:
        raise ValueError(f"Kraus rank {r} is too small for a {d_in}->{d_out} channel")
    u = haar_unitary(d_out * r, rng)[:, :d_in]
    return QuantumChannel(u.reshape(d_out, r, d_in).transpose(1, 0, 2), f"random({d_in}->{d_out})")


def tensor_power(n: QuantumChannel, count: int, size_cap: int = DEFAULT_SIZE_CAP) -> QuantumChannel:
    """``n`` tensored with itself ``count`` times."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if (n.d_in * n.d_out) ** count > size_cap:
        raise ValueError(f"tensor power exceeds size cap {size_cap}")
    out = n
    for _ in range(count - 1):
        out = out.tensor(n)
    return QuantumChannel(out.kraus, f"{n.name}^{count}" if n.name else "")


# ---------------------------------------------------------------------------
# covariance


@dataclass(frozen=True)
class CovarianceReport:
    max_violation: float
    samples: int
    seed: int
    violations: tuple[float, ...] = field(default=(), repr=False)


def _default_output_rep(n: QuantumChannel) -> Callable[[np.ndarray], np.ndarray]:
    if n.name.startswith("erasure") and n.d_out == n.d_in + 1:
        def rep(g):
            out = np.eye(n.d_out, dtype=np.complex128)
            out[: n.d_in, : n.d_in] = g
            return out
        return rep
    if n.d_in == n.d_out:
        return lambda g: g
    raise ValueError(f"no output representation available for {n!r}; pass output_rep")


def check_unitary_covariance(
    n: QuantumChannel,
    samples: int = 20,
    seed: int = 0,
    output_rep: Callable[[np.ndarray], np.ndarray] | None = None,
    group: Callable[[np.random.Generator], np.ndarray] | None = None,
) -> CovarianceReport:
    """Largest ``|N(g rho g^dag) - f(g) N(rho) f(g)^dag|_max`` over sampled ``g`` and random ``rho``.

    ``group`` samples input unitaries (Haar by default); ``output_rep`` maps
    them to the output side (identity, or ``g (+) 1`` for erasure channels).
    """
    rep = output_rep or _default_output_rep(n)
    rng = np.random.default_rng(seed)
    sample = group or (lambda r: haar_unitary(n.d_in, r))
    viol = []
    for _ in range(samples):
        g = sample(rng)
        rho = random_density_matrix(n.d_in, rng)
        f = rep(g)
        lhs = n(g @ rho @ g.conj().T)
        rhs = f @ n(rho) @ f.conj().T
        viol.append(float(np.abs(lhs - rhs).max()))
    return CovarianceReport(max(viol) if viol else 0.0, samples, seed, tuple(viol))


# ---------------------------------------------------------------------------
# spec format: named constructors or explicit Kraus lists of [re, im] pairs


def _complex_array(obj) -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def complex_to_pairs(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def channel_from_spec(spec: dict) -> QuantumChannel:
    """Build a channel from its JSON-compatible description.

    Either ``{"name": ..., <params>}`` for a named constructor or
    ``{"kraus": [[[[re, im], ...], ...], ...]}`` for explicit operators.
    """
    if not isinstance(spec, dict):
        raise ValueError("channel spec must be an object")
    if "kraus" in spec:
        return QuantumChannel(_complex_array(spec["kraus"]), spec.get("name", "kraus"))
    name = spec.get("name")
    try:
        if name == "identity":
            return identity_channel(int(spec["d"]))
        if name == "erasure":
            return erasure_channel(int(spec["d"]), spec["p"])
        if name == "depolarizing":
            return depolarizing_channel(int(spec["d"]), spec["q"])
        if name == "pinching":
            return pinching_channel(spec["dims"])
        if name == "random":
            rng = np.random.default_rng(int(spec.get("seed", 0)))
            d_in = int(spec.get("d_in", spec.get("d", 2)))
            d_out = int(spec.get("d_out", d_in))
            return random_channel(d_in, d_out, rng, spec.get("rank"))
    except KeyError as exc:
        raise ValueError(f"channel {name!r} missing parameter {exc}") from None
    raise ValueError(f"unknown channel name {name!r}")


def channel_to_spec(n: QuantumChannel) -> dict:
    return {"name": n.name or "kraus", "kraus": complex_to_pairs(n.kraus)}


def all_kraus_products(kraus_sets: Sequence[np.ndarray]) -> np.ndarray:
    """Kraus operators of ``K^(1) (x) ... (x) K^(n)`` for the given Kraus arrays."""
    ops = []
    for combo in itertools.product(*[range(k.shape[0]) for k in kraus_sets]):
        op = np.ones((1, 1), dtype=np.complex128)
        for ks, j in zip(kraus_sets, combo):
            op = np.kron(op, ks[j])
        ops.append(op)
    return np.array(ops)
