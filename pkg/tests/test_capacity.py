import math

import numpy as np
import pytest

from qcap.capacity import (
    CapacityEstimate,
    EncodingEnsemble,
    IsometryEncoder,
    _as_assist,
    _coherent_objective,
    _ensemble_objective,
    _EncoderProblem,
    assisted_holevo,
    assisted_mutual,
    assisted_mutual_upper,
    assisted_values,
    channel_mutual_information,
    covariant_assisted_capacity,
    erasure_assisted_capacity,
    holevo_information,
    holevo_kkt_spread,
    holevo_upper_bound,
    identity_encoding,
    lemma2_residual,
    max_sandwiched_divergence,
    mutual_information_wrt,
    optimal_pinching_assist,
    pinching_capacity,
    random_cq_state,
    shor_rate,
    strong_converse_exponent,
)
from qcap.channels import depolarizing_channel, erasure_channel, identity_channel, pinching_channel, random_channel
from qcap.qcore import (
    BipartitePureState,
    DensityOperator,
    DimensionError,
    haar_unitary,
    maximally_entangled,
    random_density_matrix,
)


def hb(p):
    return 0.0 if p in (0, 1) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _product_assist(d=2):
    e = np.zeros((d, d))
    e[0, 0] = 1
    return DensityOperator(np.kron(e, e), [("EA", d), ("EB", d)])


def _fd_check(fun, x, rng, count=6, h=1e-6):
    _, g = fun(x)
    worst = 0.0
    for _ in range(count):
        dx = rng.standard_normal(x.size)
        num = (fun(x + h * dx)[0] - fun(x - h * dx)[0]) / (2 * h)
        worst = max(worst, abs(num - g @ dx))
    return worst


def test_ensemble_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    n = random_channel(2, 2, rng, kraus_rank=2)
    rho = DensityOperator(random_density_matrix(4, rng), [("EA", 2), ("EB", 2)])
    prob = _EncoderProblem(n, _as_assist(rho))
    count = 3
    x = prob.pack(rng.standard_normal(count), prob.random_w(count, rng))
    for kind in ("chi", "mutual"):
        assert _fd_check(lambda z: _ensemble_objective(prob, z, count, kind), x, rng) < 1e-6


def test_coherent_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    n = random_channel(2, 3, rng, kraus_rank=2)
    x = rng.standard_normal(8)
    assert _fd_check(lambda z: _coherent_objective(n, z)[:2], x, rng) < 1e-6


def test_mutual_information_wrt_values():
    assert abs(mutual_information_wrt(identity_channel(2), np.eye(2) / 2) - 2) < 1e-10
    assert abs(mutual_information_wrt(erasure_channel(2, 0.3), np.eye(2) / 2) - 1.4) < 1e-10
    rho_star = np.diag([0.2, 0.4, 0.4])
    assert abs(mutual_information_wrt(pinching_channel([1, 2]), rho_star) - math.log2(5)) < 1e-10
    with pytest.raises(DimensionError):
        mutual_information_wrt(identity_channel(3), np.eye(2) / 2)


def test_mutual_information_purification_invariance():
    rng = np.random.default_rng(2)
    n = random_channel(2, 2, rng)
    rho = random_density_matrix(2, rng)
    vals, vecs = np.linalg.eigh(rho)
    other = BipartitePureState(vals, vecs, haar_unitary(3, rng)[:, :2])
    assert abs(mutual_information_wrt(n, rho) - mutual_information_wrt(n, rho, other)) < 1e-10


def test_channel_mutual_information_examples():
    est = channel_mutual_information(erasure_channel(2, 0.3))
    assert est.direction == "lower"
    assert abs(est.value - 1.4) < 1e-6
    est = channel_mutual_information(pinching_channel([1, 2]))
    assert abs(est.value - math.log2(5)) < 1e-5
    assert np.abs(est.witness.matrix - np.diag([0.2, 0.4, 0.4])).max() < 1e-4
    est = channel_mutual_information(identity_channel(2))
    assert abs(est.value - 2) < 1e-6
    assert np.abs(est.witness.matrix - np.eye(2) / 2).max() < 1e-4


def test_holevo_information_examples():
    est = holevo_information(erasure_channel(2, 0.3), ensemble_size=2, restarts=4)
    assert abs(est.value - 0.7) < 1e-6
    assert abs(holevo_information(identity_channel(2), restarts=4).value - 1) < 1e-6
    est = holevo_information(depolarizing_channel(2, 0.5), restarts=4)
    assert abs(est.value - (1 - hb(0.25))) < 1e-6


def test_holevo_witness_and_kkt():
    n = depolarizing_channel(2, 0.3)
    est = holevo_information(n, restarts=4)
    ens = est.witness
    assert isinstance(ens, EncodingEnsemble)
    chi, _ = assisted_values(n, ens)
    assert abs(chi - est.value) < 1e-6
    assert holevo_kkt_spread(n, ens) < 1e-5


def test_holevo_upper_bound_sandwich():
    est = holevo_upper_bound(identity_channel(2), np.eye(2) / 2, restarts=4)
    assert est.direction == "upper"
    assert abs(est.value - 1) < 1e-8
    n = erasure_channel(2, 0.3)
    up = holevo_upper_bound(n, n(np.eye(2) / 2), restarts=4)
    assert up.direction == "upper"
    assert abs(up.value - 0.7) < 1e-4
    inf = holevo_upper_bound(n, np.diag([0.5, 0.5, 0.0]), restarts=2)
    assert inf.value == math.inf


def test_assisted_examples():
    n = erasure_channel(2, 0.3)
    est = assisted_holevo(n, _product_assist(), restarts=4)
    assert abs(est.value - 0.7) < 1e-4
    bell = maximally_entangled(2)
    assert abs(assisted_holevo(identity_channel(2), bell, restarts=4).value - 2) < 1e-4
    phi = BipartitePureState.from_schmidt(0.2)
    ref = 0.5 * (1 + hb(0.2))
    est = assisted_holevo(erasure_channel(2, 0.5), phi, restarts=4)
    assert abs(est.value - ref) < 1e-4
    est = assisted_mutual(erasure_channel(2, 0.5), phi, restarts=4)
    assert abs(est.value - ref) < 1e-4


def test_assisted_witness_reevaluates():
    rng = np.random.default_rng(3)
    n = random_channel(2, 2, rng, kraus_rank=2)
    rho = DensityOperator(random_density_matrix(4, rng), [("EA", 2), ("EB", 2)])
    for fn, idx in ((assisted_holevo, 0), (assisted_mutual, 1)):
        est = fn(n, rho, ensemble_size=4, restarts=2)
        assert est.direction == "lower"
        assert abs(assisted_values(n, est.witness, rho)[idx] - est.value) < 1e-6
        assert set(est.provenance) >= {"restarts", "iterations", "residual", "seed"}


def test_assisted_mutual_upper_examples():
    n = erasure_channel(2, 0.3)
    est = assisted_mutual_upper(n, maximally_entangled(2), n(np.eye(2) / 2), restarts=4)
    assert est.direction == "upper"
    assert abs(est.value - 1.4) < 1e-3
    est = assisted_mutual_upper(identity_channel(2), maximally_entangled(2), np.eye(2) / 2, restarts=4)
    assert abs(est.value - 2) < 1e-6


def test_covariant_examples():
    for p, lam in ((0.3, 0.2), (0.6, 0.4)):
        est = covariant_assisted_capacity(erasure_channel(2, p), BipartitePureState.from_schmidt(lam), restarts=4)
        assert abs(est.value - (1 - p) * (1 + hb(lam))) < 1e-5
    est = covariant_assisted_capacity(erasure_channel(2, 0.3), _product_assist(), restarts=4)
    assert abs(est.value - 0.7) < 1e-5
    est = covariant_assisted_capacity(depolarizing_channel(2, 0.4), _product_assist(), restarts=4)
    assert abs(est.value - (1 - hb(0.2))) < 1e-5


def test_erasure_closed_form():
    assert abs(erasure_assisted_capacity(2, 0.3, [1.0, 0.0]) - 0.7) < 1e-12
    assert abs(erasure_assisted_capacity(3, 0.3, np.ones(3) / 3) - 2 * 0.7 * math.log2(3)) < 1e-12
    assert abs(erasure_assisted_capacity(2, 0.5, 0.2) - 0.5 * (1 + hb(0.2))) < 1e-12
    with pytest.raises(ValueError):
        erasure_assisted_capacity(2, 0.5, [0.5, 0.6])


def test_pinching_closed_forms():
    pc = pinching_capacity([1, 2])
    assert abs(pc.i_n - math.log2(5)) < 1e-12
    assert np.allclose(pc.p_star, [0.2, 0.8])
    assert abs(pc.chi_lower - (math.log2(5) - hb(0.2))) < 1e-12
    assert abs(pc.gap_bound - hb(0.2)) < 1e-12
    pc = pinching_capacity([3])
    assert abs(pc.i_n - 2 * math.log2(3)) < 1e-12 and pc.gap_bound == 0
    pc = pinching_capacity([1, 1])
    assert pc.i_n == 1 and pc.chi_lower == 0 and abs(pc.gap_bound - 1) < 1e-12
    chi = holevo_information(pinching_channel([1, 1]), restarts=2).value
    assert chi >= pc.chi_lower and abs(chi - 1) < 1e-6
    phi = optimal_pinching_assist([1, 2])
    assert np.allclose(phi.reduced_A(), np.diag([0.2, 0.4, 0.4]))


def test_shor_rate_examples():
    assert abs(shor_rate(identity_channel(2), maximally_entangled(2)) - 2) < 1e-10
    prod = BipartitePureState.from_schmidt([1.0, 0.0])
    assert abs(shor_rate(erasure_channel(2, 0.4), prod)) < 1e-10
    phi = BipartitePureState.from_schmidt(0.2)
    n = erasure_channel(2, 0.5)
    assert shor_rate(n, phi) < erasure_assisted_capacity(2, 0.5, 0.2) - 0.01


def test_identity_encoding_reproduces_shor_rate():
    rng = np.random.default_rng(4)
    n = random_channel(2, 2, rng)
    phi = BipartitePureState.from_vector(rng.standard_normal(4) + 1j * rng.standard_normal(4), 2, 2)
    ens = identity_encoding(n, phi)
    assert abs(assisted_values(n, ens, phi)[1] - shor_rate(n, phi)) < 1e-10


def test_lemma2_identity_small():
    rng = np.random.default_rng(5)
    for _ in range(20):
        assert lemma2_residual(*random_cq_state(rng)) < 1e-9


def test_strong_converse_arithmetic():
    sc = strong_converse_exponent(1.5, 2.0, 1.5)
    assert sc.exponent == 0 and sc.succ_bound(10) == 1.0 and sc.threshold(0.01) is None
    sc = strong_converse_exponent(2.5, 2.0, 1.5)
    assert sc.exponent == 0.5
    assert sc.succ_bound(10) == 2.0**-5
    n0 = sc.threshold(0.01)
    assert sc.succ_bound(n0) < 0.01 <= sc.succ_bound(n0 - 1)
    with pytest.raises(ValueError):
        strong_converse_exponent(1.0, 1.0, 0.5)


def test_sandwiched_divergence_superdense():
    est = max_sandwiched_divergence(identity_channel(2), maximally_entangled(2), np.eye(2) / 2, 2.0, restarts=4)
    assert abs(est.value - 2) < 1e-6
    sc = strong_converse_exponent(2.5, 2.0, est.value)
    assert sc.exponent > 0


def test_types_validation():
    with pytest.raises(ValueError):
        CapacityEstimate(1.0, "sideways")
    with pytest.raises(ValueError):
        EncodingEnsemble([0.5, 0.6], (identity_channel(2), identity_channel(2)))
    with pytest.raises(ValueError):
        IsometryEncoder(np.ones((2, 1)), 2, 1)
    v = haar_unitary(4, np.random.default_rng(6))[:, :2]
    ch = IsometryEncoder(v, 2, 2).to_channel()
    assert ch.d_in == 2 and ch.d_out == 2


def test_pinching_upper_with_few_restarts():
    n = pinching_channel([1, 2])
    phi = optimal_pinching_assist([1, 2])
    est = assisted_mutual_upper(n, phi, n(pinching_capacity([1, 2]).rho_star), restarts=1)
    assert est.direction == "upper"
    assert abs(est.value - math.log2(5)) < 1e-6
