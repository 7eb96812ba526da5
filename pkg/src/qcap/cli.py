"""``qcap`` command-line front end.

Usage: ``qcap <task> --spec FILE [--out FILE] [--seed N] [--restarts N] [--grid ...]``

The spec is a JSON document::

    {"channel": {"name": "erasure", "d": 2, "p": 0.5},
     "assist": {"schmidt": [0.5, 0.5]},
     "opts": {"restarts": 16, "ensemble_size": 16}}

Complex entries are ``[re, im]`` pairs. Exit codes: 0 ok, 1 a verification
check failed, 2 schema error, 3 dimension mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import capacity as cap
from .channels import QuantumChannel, _complex_array, channel_from_spec, erasure_channel, random_channel
from .coding import lemma8_gap
from .discord import discord_of_formation_value, gap_bound_check
from .qcore import BipartitePureState, DensityOperator, DimensionError, random_pure_vector

TASKS = (
    "chi",
    "mutual",
    "assisted-chi",
    "assisted-mutual",
    "assisted-upper",
    "covariant",
    "analytic",
    "sweep",
    "verify",
    "lemma8",
    "converse",
)


class SchemaError(ValueError):
    """Malformed or incomplete job spec."""


# ---------------------------------------------------------------------------
# spec parsing


@dataclass
class JobSpec:
    task: str
    channel: QuantumChannel | None
    channel_spec: dict
    assist: DensityOperator | BipartitePureState | None
    opts: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def opt(self, key, default=None):
        return self.opts.get(key, default)

    @property
    def seed(self) -> int:
        return int(self.opts.get("seed", 0))

    @property
    def restarts(self) -> int:
        return int(self.opts.get("restarts", 16))


def parse_assist(obj) -> DensityOperator | BipartitePureState | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise SchemaError("assist must be an object")
    if "schmidt" in obj:
        return BipartitePureState.from_schmidt(obj["schmidt"])
    if "vector" in obj:
        d_a, d_b = _pair(obj.get("dims"))
        return BipartitePureState.from_vector(_complex_array(obj["vector"]), d_a, d_b)
    if "matrix" in obj:
        d_a, d_b = _pair(obj.get("dims"))
        return DensityOperator(_complex_array(obj["matrix"]), (("EA", d_a), ("EB", d_b)))
    raise SchemaError("assist needs one of 'schmidt', 'vector', 'matrix'")


def _pair(dims):
    if not isinstance(dims, (list, tuple)) or len(dims) != 2:
        raise SchemaError("assist 'dims' must be [d_EA, d_EB]")
    return int(dims[0]), int(dims[1])


def _matrix(obj, name: str) -> np.ndarray:
    try:
        return _complex_array(obj)
    except (ValueError, TypeError, IndexError) as exc:
        raise SchemaError(f"{name}: {exc}") from None


def parse_spec(task: str, doc: dict) -> JobSpec:
    if not isinstance(doc, dict):
        raise SchemaError("spec must be a JSON object")
    opts = doc.get("opts", {}) or {}
    if not isinstance(opts, dict):
        raise SchemaError("opts must be an object")
    ch_spec = doc.get("channel")
    channel = None
    if ch_spec is not None and task != "sweep":
        try:
            channel = channel_from_spec(ch_spec)
        except DimensionError:
            raise
        except (ValueError, TypeError) as exc:
            raise SchemaError(f"channel: {exc}") from None
    try:
        assist = parse_assist(doc.get("assist"))
    except (SchemaError, DimensionError):
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"assist: {exc}") from None
    return JobSpec(task, channel, ch_spec or {}, assist, dict(opts), doc)


def parse_grid(tokens: list[str] | None) -> dict[str, list[float]]:
    """``name=start:stop:step`` or ``name=v1,v2,...`` tokens."""
    out = {}
    for tok in tokens or []:
        if "=" not in tok:
            raise SchemaError(f"grid token {tok!r} is not name=values")
        name, spec = tok.split("=", 1)
        out[name.strip()] = _grid_values(spec)
    return out


def _grid_values(spec) -> list[float]:
    if isinstance(spec, list):
        return [float(v) for v in spec]
    spec = str(spec)
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            count = int(round((stop - start) / step))
            return [round(start + i * step, 12) for i in range(count + 1)]
        return [float(v) for v in spec.split(",")]
    except ValueError:
        raise SchemaError(f"bad grid values {spec!r}") from None


# ---------------------------------------------------------------------------
# output


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if abs(v) < 1e-12:
        v = 0.0
    out = f"{v:.10g}"
    if not any(c in out for c in ".en"):
        out += ".0"
    return out


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def csv(self) -> str:
        lines = [",".join(self.header)] + [",".join(fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def human(self) -> str:
        cells = [self.header] + [[fmt(v) for v in row] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.header))]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def _estimate_table(name: str, est: cap.CapacityEstimate) -> Table:
    p = est.provenance
    return Table(
        ["quantity", "value_bits", "direction", "restarts", "iterations", "residual", "seed"],
        [[name, est.value, est.direction, p.get("restarts"), p.get("iterations"), p.get("residual"), p.get("seed")]],
    )


# ---------------------------------------------------------------------------
# tasks


def _need_channel(job: JobSpec) -> QuantumChannel:
    if job.channel is None:
        raise SchemaError(f"task {job.task} needs a 'channel'")
    return job.channel


def _need_assist(job: JobSpec):
    if job.assist is None:
        raise SchemaError(f"task {job.task} needs an 'assist'")
    return job.assist


def _opt_matrix(job: JobSpec, key: str):
    if key not in job.raw:
        return None
    val = job.raw[key]
    if val == "maximally_mixed":
        return "maximally_mixed"
    return _matrix(val, key)


def task_chi(job: JobSpec) -> Table:
    n = _need_channel(job)
    est = cap.holevo_information(n, job.opt("ensemble_size"), job.restarts, job.seed)
    return _estimate_table("chi", est)


def task_mutual(job: JobSpec) -> Table:
    n = _need_channel(job)
    est = cap.channel_mutual_information(n, job.opt("restarts", 4), job.seed)
    return _estimate_table("mutual", est)


def task_assisted(kind: str) -> Callable[[JobSpec], Table]:
    def run(job: JobSpec) -> Table:
        n, a = _need_channel(job), _need_assist(job)
        fn = cap.assisted_holevo if kind == "chi" else cap.assisted_mutual
        est = fn(n, a, job.opt("ensemble_size"), job.restarts, job.seed)
        return _estimate_table(f"assisted_{kind}", est)

    return run


def _sigma_b(job: JobSpec, n: QuantumChannel) -> np.ndarray:
    s = _opt_matrix(job, "sigma")
    if s is None:
        # the channel output at the maximizer of I(N|rho)
        rho = cap.channel_mutual_information(n, 4, job.seed).witness.matrix
        return n(rho)
    if isinstance(s, str):
        return np.eye(n.d_out) / n.d_out
    if s.shape != (n.d_out, n.d_out):
        raise DimensionError(f"sigma is {s.shape}, channel output is {n.d_out}-dim")
    return s


def task_assisted_upper(job: JobSpec) -> Table:
    n, a = _need_channel(job), _need_assist(job)
    est = cap.assisted_mutual_upper(n, a, _sigma_b(job, n), job.restarts, job.seed)
    return _estimate_table("assisted_mutual_upper", est)


def task_covariant(job: JobSpec) -> Table:
    n, a = _need_channel(job), _need_assist(job)
    est = cap.covariant_assisted_capacity(n, a, job.restarts, job.seed)
    return _estimate_table("covariant", est)


def task_analytic(job: JobSpec) -> Table:
    ch = job.channel_spec
    name = ch.get("name")
    if name == "erasure":
        a = _need_assist(job)
        if not isinstance(a, BipartitePureState):
            raise SchemaError("analytic erasure capacity needs a pure (Schmidt) assist")
        try:
            v = cap.erasure_assisted_capacity(int(ch["d"]), float(ch["p"]), a.schmidt)
        except KeyError as exc:
            raise SchemaError(f"channel missing {exc}") from None
        return Table(["quantity", "value_bits"], [["assisted_capacity", v]])
    if name == "pinching":
        pc = cap.pinching_capacity(ch.get("dims", []))
        rows = [["mutual", pc.i_n], ["chi_lower", pc.chi_lower], ["gap_bound", pc.gap_bound]]
        rows += [[f"p_star_{i}", v] for i, v in enumerate(pc.p_star)]
        return Table(["quantity", "value_bits"], rows)
    raise SchemaError("analytic task supports the erasure and pinching channels only")


def _sweep_grid(job: JobSpec, grid: dict) -> dict:
    out = {}
    for key, val in (job.opt("grid") or {}).items():
        out[key] = _grid_values(val)
    out.update(grid)
    return out


def task_sweep(job: JobSpec, grid: dict) -> Table:
    ch = job.channel_spec or {"name": "erasure", "d": 2}
    if ch.get("name", "erasure") != "erasure":
        raise SchemaError("sweep runs over erasure channels")
    d = int(ch.get("d", 2))
    g = _sweep_grid(job, grid)
    ps = g.get("p", _grid_values("0:1:0.1"))
    kind = job.opt("kind", "surface")
    if kind not in ("surface", "curves"):
        raise SchemaError(f"unknown sweep kind {kind!r}")
    if kind == "curves":
        lam = float(job.opt("lambda", 0.2))
        return sweep_fig4(ps, lam, d, numeric=bool(job.opt("numeric", True)), restarts=job.restarts,
                          seed=job.seed, ensemble_size=job.opt("ensemble_size", 16))
    lams = g.get("lambda", _grid_values("0:0.5:0.05"))
    numeric = bool(job.opt("numeric", False))
    table = Table(["p", "lambda", "capacity_bits"])
    for p in ps:
        for lam in lams:
            _check_prob(p, "p")
            _check_prob(lam, "lambda")
            if numeric:
                v = cap.assisted_mutual(erasure_channel(d, p), BipartitePureState.from_schmidt(_schmidt(lam, d)),
                                        job.opt("ensemble_size", 16), job.restarts, job.seed).value
            else:
                v = cap.erasure_assisted_capacity(d, p, _schmidt(lam, d))
            table.rows.append([p, lam, v])
    return table


def _check_prob(x, name):
    if not 0 <= x <= 1:
        raise SchemaError(f"{name}={x} outside [0, 1]")


def _schmidt(lam: float, d: int) -> np.ndarray:
    out = np.zeros(d)
    out[0], out[1] = lam, 1 - lam
    return out


def sweep_fig4(p_grid, lam: float = 0.2, d: int = 2, numeric: bool = True, restarts: int = 16, seed: int = 0, ensemble_size: int = 16) -> Table:
    """Columns ``p, chi, shor_rate, assisted_mutual, mutual`` for the erasure channel with a ``(lam, 1 - lam)`` assist."""
    phi = BipartitePureState.from_schmidt(_schmidt(lam, d))
    table = Table(["p", "chi", "shor_rate", "assisted_mutual", "mutual"])
    for p in p_grid:
        _check_prob(p, "p")
        n = erasure_channel(d, p)
        shor = cap.shor_rate(n, phi)
        if numeric:
            chi = cap.holevo_information(n, None, restarts, seed).value
            imut = cap.assisted_mutual(n, phi, ensemble_size, restarts, seed).value
            mut = cap.channel_mutual_information(n, 4, seed).value
        else:
            chi = (1 - p) * math.log2(d)
            imut = cap.erasure_assisted_capacity(d, p, phi.schmidt)
            mut = 2 * (1 - p) * math.log2(d)
        table.rows.append([p, chi, shor, imut, mut])
    return table


# -- verify


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool


def verify_checks(n: QuantumChannel, phi: BipartitePureState, restarts: int, seed: int, ensemble_size: int | None = None) -> list[Check]:
    """Named inequality checks on one channel with one pure assist."""
    checks = []
    rng = np.random.default_rng(seed)
    err = max(cap.lemma2_residual(*cap.random_cq_state(rng)) for _ in range(50))
    checks.append(Check("lemma2_identity", err, 1e-9, err < 1e-9))

    chi = cap.holevo_information(n, None, restarts, seed)
    chi_rho = cap.assisted_holevo(n, phi, ensemble_size, restarts, seed, warm_start=chi.witness)
    warm = [chi_rho.witness, cap.identity_encoding(n, phi)]
    i_rho = cap.assisted_mutual(n, phi, ensemble_size, restarts, seed, warm_start=warm)
    i_n = cap.channel_mutual_information(n, 4, seed)
    checks.append(Check("chi_le_chi_rho", chi.value - chi_rho.value, 1e-4, chi.value <= chi_rho.value + 1e-4))
    checks.append(Check("chi_rho_le_i_rho", chi_rho.value - i_rho.value, 1e-4, chi_rho.value <= i_rho.value + 1e-4))
    checks.append(Check("i_rho_le_i", i_rho.value - i_n.value, 1e-4, i_rho.value <= i_n.value + 1e-4))

    sigma = cap.average_output(n, chi.witness)
    chi_up = cap.holevo_upper_bound(n, sigma, restarts, seed)
    df = discord_of_formation_value(phi.density())
    gap = gap_bound_check(chi_up.value, i_rho.value, df, chi_rho.value)
    checks.append(Check("discord_gap_bound", i_rho.value - chi_up.value, df + 1e-3, gap.holds))

    shor = cap.shor_rate(n, phi)
    checks.append(Check("identity_encoding_dominance", shor - i_rho.value, 1e-4, i_rho.value >= shor - 1e-4))

    for k in (1, 2):
        res = lemma8_gap(n, phi, k)
        checks.append(Check(f"lemma8_n{k}", res.lhs, res.bound, -1e-8 <= res.lhs <= res.bound + 1e-8))
    return checks


def task_verify(job: JobSpec) -> tuple[Table, int]:
    n = job.channel
    if n is None:
        n = random_channel(2, 2, np.random.default_rng(job.seed))
    phi = job.assist
    if phi is None:
        rng = np.random.default_rng(job.seed + 1)
        phi = BipartitePureState.from_vector(random_pure_vector(n.d_in * n.d_in, rng), n.d_in, n.d_in)
    if not isinstance(phi, BipartitePureState):
        raise SchemaError("verify needs a pure assist")
    if phi.dims[0] != n.d_in:
        raise DimensionError("assist E_A dimension must equal the channel input dimension")
    checks = verify_checks(n, phi, job.opt("restarts", 4), job.seed, job.opt("ensemble_size"))
    table = Table(["check", "value", "bound", "passed"], [[c.name, c.value, c.bound, c.passed] for c in checks])
    return table, 0 if all(c.passed for c in checks) else 1


def task_lemma8(job: JobSpec) -> Table:
    n = _need_channel(job)
    phi = _need_assist(job)
    if not isinstance(phi, BipartitePureState):
        raise SchemaError("lemma8 needs a pure assist")
    if phi.dims[0] != n.d_in:
        raise DimensionError("assist E_A dimension must equal the channel input dimension")
    ns = job.opt("n", [1, 2, 3])
    ns = [ns] if isinstance(ns, int) else list(ns)
    table = Table(["n", "lhs", "bound", "holds"])
    for k in ns:
        res = lemma8_gap(n, phi, int(k))
        table.rows.append([int(k), res.lhs, res.bound, res.holds])
    return table


def task_converse(job: JobSpec) -> Table:
    n, a = _need_channel(job), _need_assist(job)
    try:
        rate = float(job.raw.get("rate", job.opt("rate")))
    except TypeError:
        raise SchemaError("converse needs a 'rate'") from None
    alpha = float(job.raw.get("alpha", job.opt("alpha", 2.0)))
    if alpha <= 1:
        raise SchemaError("alpha must exceed 1")
    target = float(job.opt("target", 0.01))
    s = _opt_matrix(job, "sigma")
    sigma = np.eye(n.d_out) / n.d_out if s is None or isinstance(s, str) else s
    div = cap.max_sandwiched_divergence(n, a, sigma, alpha, job.restarts, job.seed)
    sc = cap.strong_converse_exponent(rate, alpha, div.value)
    thr = sc.threshold(target)
    rows = [["rate", rate], ["alpha", alpha], ["div_value", div.value], ["exponent", sc.exponent],
            ["threshold_n", "" if thr is None else str(thr)],
            ["succ_bound_at_threshold", "" if thr is None else sc.succ_bound(thr)]]
    return Table(["quantity", "value"], rows)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcap", description="Entanglement-assisted capacity calculations.")
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--spec", help="JSON job spec ('-' for stdin)")
    ap.add_argument("--out", help="write CSV here")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--restarts", type=int)
    ap.add_argument("--grid", nargs="+", metavar="NAME=VALUES", help="e.g. p=0:1:0.1 lambda=0,0.2")
    return ap


def _load(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise SchemaError(f"cannot read spec: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"spec is not valid JSON: {exc}") from None


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        doc = _load(args.spec)
        job = parse_spec(args.task, doc)
        if args.seed is not None:
            job.opts["seed"] = args.seed
        if args.restarts is not None:
            job.opts["restarts"] = args.restarts
        grid = parse_grid(args.grid)
        status = 0
        if args.task == "verify":
            table, status = task_verify(job)
        elif args.task == "sweep":
            table = task_sweep(job, grid)
        else:
            table = DISPATCH[args.task](job)
    except DimensionError as exc:
        print(f"qcap: dimension mismatch: {exc}", file=sys.stderr)
        return 3
    except (SchemaError, ValueError, KeyError, TypeError) as exc:
        print(f"qcap: invalid spec: {exc}", file=sys.stderr)
        return 2
    stdout.write(table.human())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table.csv())
    return status


DISPATCH: dict[str, Callable[[JobSpec], Table]] = {
    "chi": task_chi,
    "mutual": task_mutual,
    "assisted-chi": task_assisted("chi"),
    "assisted-mutual": task_assisted("mutual"),
    "assisted-upper": task_assisted_upper,
    "covariant": task_covariant,
    "analytic": task_analytic,
    "lemma8": task_lemma8,
    "converse": task_converse,
}


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
