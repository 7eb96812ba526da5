"""Acceptance criteria, one test each; every test prints a PASS/FAIL verdict line."""

import io
import json
import math
import time

import numpy as np
import pytest

from qcap import capacity as cap
from qcap.channels import erasure_channel, identity_channel, pinching_channel, random_channel
from qcap.cli import run, sweep_fig4
from qcap.coding import lemma8_gap
from qcap.discord import discord_of_formation_value, eigen_decomposition
from qcap.qcore import BipartitePureState, DensityOperator, maximally_entangled, random_density_matrix, random_pure_vector

pytestmark = pytest.mark.slow

LOG5 = math.log2(5)


def hb(p):
    return 0.0 if p in (0, 1) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _product_assist(rng, d_a=2, d_b=2):
    m = np.kron(random_density_matrix(d_a, rng), random_density_matrix(d_b, rng))
    return DensityOperator(m, [("EA", d_a), ("EB", d_b)])


def _low_rank_assist(rng, rank, d=2):
    vs = [random_pure_vector(d * d, rng) for _ in range(rank)]
    w = rng.dirichlet(np.ones(rank))
    m = sum(wi * np.outer(v, v.conj()) for wi, v in zip(w, vs))
    return DensityOperator(m, [("EA", d), ("EB", d)])


def _separable_assist(rng, terms=3, d=2):
    w = rng.dirichlet(np.ones(terms))
    m = sum(wi * np.kron(random_density_matrix(d, rng), random_density_matrix(d, rng)) for wi in w)
    return DensityOperator(m, [("EA", d), ("EB", d)])


def test_01_erasure_grid(report):
    t0 = time.perf_counter()
    worst = 0.0
    for p in np.round(np.arange(11) * 0.1, 10):
        n = erasure_channel(2, p)
        for lam in np.round(np.arange(6) * 0.1, 10):
            phi = BipartitePureState.from_schmidt([lam, 1 - lam])
            est = cap.assisted_mutual(n, phi, ensemble_size=16, restarts=16, seed=0)
            worst = max(worst, abs(est.value - cap.erasure_assisted_capacity(2, p, [lam, 1 - lam])))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed < 600
    report("1 erasure analytic reproduction", ok, f"max error {worst:.2e} bits over 66 points, {elapsed:.0f} s")
    assert ok


def test_02_pinching(report):
    n = pinching_channel([1, 2])
    est = cap.channel_mutual_information(n)
    arg_err = float(np.abs(est.witness.matrix - np.diag([0.2, 0.4, 0.4])).max())
    phi = cap.optimal_pinching_assist([1, 2])
    rho_star = cap.pinching_capacity([1, 2]).rho_star
    up = cap.assisted_mutual_upper(n, phi, n(rho_star), restarts=16)
    low = cap.assisted_mutual(n, phi, ensemble_size=16, restarts=16)
    ok = (abs(est.value - LOG5) < 1e-5 and arg_err < 1e-4 and up.direction == "upper"
          and up.value <= LOG5 + 1e-3 and low.value >= LOG5 - 1e-3)
    report("2 pinching", ok, f"I={est.value:.7f} argmax err {arg_err:.1e}; I_rho in [{low.value:.6f}, {up.value:.6f}] ({up.direction})")
    assert ok


def test_03_strict_permutation_gap(report):
    n = pinching_channel([1, 2])
    phi = cap.optimal_pinching_assist([1, 2])
    est = cap.assisted_holevo(n, phi, ensemble_size=16, restarts=32)
    lo = LOG5 - hb(0.2) - 1e-3
    ok = lo <= est.value <= LOG5 - 0.01
    report("3 strict permutation gap", ok, f"chi_rho={est.value:.6f} in [{lo:.6f}, {LOG5 - 0.01:.6f}]")
    assert ok


def test_04_superdense_endpoints(report):
    n = identity_channel(2)
    ent = cap.assisted_mutual(n, maximally_entangled(2)).value
    prod = cap.assisted_mutual(n, BipartitePureState.from_schmidt([1.0, 0.0])).value
    ok = abs(ent - 2) < 1e-4 and abs(prod - 1) < 1e-4
    report("4 superdense endpoints", ok, f"entangled {ent:.6f}, product {prod:.6f}")
    assert ok


def test_05_erasure_curves(report):
    t0 = time.perf_counter()
    table = sweep_fig4(np.round(np.arange(11) * 0.1, 10), lam=0.2)
    csv = table.csv()
    elapsed = time.perf_counter() - t0
    rows = {round(r[0], 10): r for r in table.rows}
    gaps = []
    ok = elapsed < 300 and csv.count("\n") == 12
    for p in (0.2, 0.5, 0.8):
        _, chi, shor, imut, mut = rows[p]
        gaps.append((imut - shor, mut - imut))
        ok = ok and shor < imut - 0.01 and imut < mut - 0.01
    detail = ", ".join(f"p={p}: {a:.4f}/{b:.4f}" for p, (a, b) in zip((0.2, 0.5, 0.8), gaps))
    report("5 erasure curve strict gaps", ok, f"{detail}; {elapsed:.0f} s")
    assert ok


def test_06_ordering_chain(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    violations = 0
    worst = -math.inf
    pairs = 0
    for c in range(50):
        d_in, d_out = rng.integers(2, 4, size=2)
        d_in, d_out = int(d_in), int(d_out)
        n = random_channel(d_in, d_out, rng, kraus_rank=int(rng.integers(-(-d_in // d_out), 4)))
        chi = cap.holevo_information(n, restarts=2, seed=c)
        i_n = cap.channel_mutual_information(n, restarts=2, seed=c)
        for a in range(20):
            rank = int(rng.integers(1, 5))
            rho = _low_rank_assist(rng, rank)
            chi_rho = cap.assisted_holevo(n, rho, ensemble_size=4, restarts=1, seed=a, max_iter=100, warm_start=chi.witness)
            i_rho = cap.assisted_mutual(n, rho, restarts=0, warm_start=chi_rho.witness, max_iter=100)
            dirs = {chi.direction, chi_rho.direction, i_rho.direction, i_n.direction} == {"lower"}
            margins = (chi.value - chi_rho.value, chi_rho.value - i_rho.value, i_rho.value - i_n.value)
            worst = max(worst, *margins)
            if max(margins) > 1e-4 or not dirs:
                violations += 1
            pairs += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0
    report("6 ordering chain", ok, f"{pairs} pairs, {violations} violations, worst margin {worst:.2e} (tolerance 1e-4), {elapsed:.0f} s")
    assert ok


def test_07_dephasing_gap(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_low, worst_high = math.inf, -math.inf
    for _ in range(20):
        m = random_channel(2, 2, rng, kraus_rank=int(rng.integers(1, 5)))
        phi = BipartitePureState.from_vector(random_pure_vector(4, rng), 2, 2)
        for k in (1, 2, 3):
            res = lemma8_gap(m, phi, k)
            worst_low = min(worst_low, res.lhs)
            worst_high = max(worst_high, res.lhs - 2 * math.log2(k + 1))
    elapsed = time.perf_counter() - t0
    ok = worst_low >= -1e-8 and worst_high <= 1e-8 and elapsed < 120
    report("7 exact dephasing gap", ok, f"min lhs {worst_low:.2e}, max lhs - bound {worst_high:.3f}, {elapsed:.1f} s")
    assert ok


def test_08_mutual_identity(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(1000):
        d_x, d_b, d_e = rng.integers(2, 4, size=3)
        worst = max(worst, cap.lemma2_residual(*cap.random_cq_state(rng, int(d_x), int(d_b), int(d_e))))
    ok = worst < 1e-9
    report("8 mutual information identity", ok, f"max residual {worst:.2e} over 1000 states")
    assert ok


def test_09_discord_bound(report):
    rng = np.random.default_rng(9)
    n = erasure_channel(2, 0.3)
    chi_low = cap.holevo_information(n, restarts=4)
    chi_up = cap.holevo_upper_bound(n, cap.average_output(n, chi_low.witness), restarts=4)
    assert chi_up.direction == "upper"
    worst_ent = -math.inf
    for a in range(20):
        rho = _low_rank_assist(rng, int(rng.integers(1, 3)))
        warm = [chi_low.witness]
        chi_rho = cap.assisted_holevo(n, rho, ensemble_size=8, restarts=2, seed=a, warm_start=warm)
        i_rho = cap.assisted_mutual(n, rho, ensemble_size=8, restarts=2, seed=a, warm_start=[chi_rho.witness])
        df = discord_of_formation_value(rho, eigen_decomposition(rho))
        worst_ent = max(worst_ent, i_rho.value - chi_up.value - df)
    worst_sep = -math.inf
    for a in range(10):
        rho = _separable_assist(rng)
        i_rho = cap.assisted_mutual(n, rho, ensemble_size=8, restarts=4, seed=a, warm_start=[chi_low.witness])
        worst_sep = max(worst_sep, i_rho.value - chi_up.value)
    ok = worst_ent <= 1e-3 and worst_sep <= 1e-3
    report("9 discord bound", ok, f"max (I_rho - chi - D_F) {worst_ent:.4f}; separable max (I_rho - chi) {worst_sep:.2e}")
    assert ok


def test_10_strong_converse(report):
    n = identity_channel(2)
    div = cap.max_sandwiched_divergence(n, maximally_entangled(2), np.eye(2) / 2, 2.0)
    sc = cap.strong_converse_exponent(2.2, 2.0, div.value)
    thr = sc.threshold(0.01)
    ok = sc.exponent > 0 and thr is not None and all(sc.succ_bound(k) < 0.01 for k in range(thr, thr + 200))
    below = cap.strong_converse_exponent(1.8, 2.0, div.value)
    report("10 strong converse", ok, f"div={div.value:.6f}, exponent={sc.exponent:.4f}, threshold n={thr}; at R=1.8 exponent {below.exponent:.4f} (not asserted)")
    assert ok


def _cli_csv(tmp_path, task, doc, extra, tag):
    spec = tmp_path / f"{tag}.json"
    spec.write_text(json.dumps(doc))
    out = tmp_path / f"{tag}.csv"
    code = run([task, "--spec", str(spec), "--out", str(out)] + extra, io.StringIO())
    assert code in (0, 1)
    return out.read_bytes()


def test_11_determinism(report, tmp_path):
    jobs = [
        ("assisted-mutual", {"channel": {"name": "random", "seed": 11, "d_in": 2, "d_out": 2}, "assist": {"schmidt": 0.3}}, ["--seed", "4", "--restarts", "3"]),
        ("chi", {"channel": {"name": "depolarizing", "d": 2, "q": 0.3}}, ["--seed", "2", "--restarts", "3"]),
        ("sweep", {"opts": {"numeric": True, "ensemble_size": 4}}, ["--seed", "1", "--restarts", "2", "--grid", "p=0:1:0.5", "lambda=0.2"]),
        ("verify", {"channel": {"name": "random", "seed": 7}}, ["--seed", "7"]),
    ]
    same = []
    for k, (task, doc, extra) in enumerate(jobs):
        a = _cli_csv(tmp_path, task, doc, extra, f"{task}-a")
        b = _cli_csv(tmp_path, task, doc, extra, f"{task}-b")
        same.append(a == b and len(a) > 0)
    ok = all(same)
    report("11 determinism", ok, ", ".join(f"{j[0]}:{'identical' if s else 'DIFFERENT'}" for j, s in zip(jobs, same)))
    assert ok
