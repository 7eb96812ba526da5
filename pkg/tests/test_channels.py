import numpy as np
import pytest

from qcap.channels import (
    ChoiMatrix,
    QuantumChannel,
    apply,
    channel_from_spec,
    channel_to_spec,
    check_unitary_covariance,
    depolarizing_channel,
    erasure_channel,
    identity_channel,
    pinching_channel,
    random_channel,
    replacement_channel,
    tensor_power,
    unitary_channel,
)
from qcap.qcore import DensityOperator, DimensionError, haar_unitary, random_density_matrix


def test_kraus_completeness_rejected():
    with pytest.raises(ValueError):
        QuantumChannel(np.array([np.eye(2) * 0.9]))
    with pytest.raises(DimensionError):
        QuantumChannel(np.zeros((2, 2, 2, 2)))


def test_identity_and_unitary_action():
    rng = np.random.default_rng(0)
    rho = random_density_matrix(3, rng)
    assert np.allclose(identity_channel(3)(rho), rho)
    u = haar_unitary(3, rng)
    assert np.abs(unitary_channel(u)(rho) - u @ rho @ u.conj().T).max() < 1e-12


def test_erasure_action():
    rho = np.array([[0.6, 0.2j], [-0.2j, 0.4]])
    out = erasure_channel(2, 0.3)(rho)
    ref = np.zeros((3, 3), dtype=complex)
    ref[:2, :2] = 0.7 * rho
    ref[2, 2] = 0.3
    assert np.abs(out - ref).max() < 1e-12


def test_erasure_bad_probability():
    with pytest.raises(ValueError):
        erasure_channel(2, 1.2)


def test_pinching_zeroes_off_blocks():
    rng = np.random.default_rng(1)
    rho = random_density_matrix(3, rng)
    out = pinching_channel([1, 2])(rho)
    ref = rho.copy()
    ref[0, 1:] = 0
    ref[1:, 0] = 0
    assert np.abs(out - ref).max() < 1e-12


def test_depolarizing_action():
    rng = np.random.default_rng(2)
    rho = random_density_matrix(3, rng)
    out = depolarizing_channel(3, 0.4)(rho)
    assert np.abs(out - (0.6 * rho + 0.4 * np.eye(3) / 3)).max() < 1e-12


def test_replacement_action():
    rng = np.random.default_rng(3)
    s = random_density_matrix(2, rng)
    rep = replacement_channel(s, 3)
    assert np.abs(rep(random_density_matrix(3, rng)) - s).max() < 1e-12


def test_adjoint_duality():
    rng = np.random.default_rng(4)
    n = random_channel(2, 3, rng)
    rho = random_density_matrix(2, rng)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert abs(np.trace(x @ n(rho)) - np.trace(n.adjoint(x) @ rho)) < 1e-12


def test_complementary_of_isometry_extension():
    rng = np.random.default_rng(5)
    n = random_channel(2, 2, rng, kraus_rank=3)
    rho = random_density_matrix(2, rng)
    v = n.kraus.transpose(1, 0, 2).reshape(6, 2)  # B (x) E
    full = (v @ rho @ v.conj().T).reshape(2, 3, 2, 3)
    assert np.abs(np.einsum("aiaj->ij", full) - n.complementary(rho)).max() < 1e-12
    assert np.abs(np.einsum("aibi->ab", full) - n(rho)).max() < 1e-12
    y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert abs(np.trace(y @ n.complementary(rho)) - np.trace(n.complementary_adjoint(y) @ rho)) < 1e-12


def test_compose_and_tensor():
    rng = np.random.default_rng(6)
    a, b = random_channel(2, 3, rng), random_channel(3, 2, rng)
    rho = random_density_matrix(2, rng)
    assert np.abs(b.compose(a)(rho) - b(a(rho))).max() < 1e-12
    with pytest.raises(DimensionError):
        a.compose(a)
    r1, r2 = random_density_matrix(2, rng), random_density_matrix(3, rng)
    assert np.abs(a.tensor(b)(np.kron(r1, r2)) - np.kron(a(r1), b(r2))).max() < 1e-12


def test_choi_roundtrip():
    rng = np.random.default_rng(7)
    n = random_channel(2, 3, rng, kraus_rank=2)
    j = n.choi()
    # direct sum over matrix units
    ref = np.zeros((6, 6), dtype=complex)
    for i in range(2):
        for k in range(2):
            e = np.zeros((2, 2))
            e[i, k] = 1
            ref += np.kron(e, n(e))
    assert np.abs(j.matrix - ref).max() < 1e-12
    m = j.to_channel()
    rho = random_density_matrix(2, rng)
    assert np.abs(m(rho) - n(rho)).max() < 1e-12
    assert m.num_kraus == 2


def test_choi_rejects_non_tp():
    with pytest.raises(ValueError):
        ChoiMatrix(np.eye(4), 2, 2)


def test_apply_on_labelled_subsystem():
    rng = np.random.default_rng(8)
    ra, rb = random_density_matrix(2, rng), random_density_matrix(2, rng)
    rho = DensityOperator(np.kron(ra, rb), [("A", 2), ("B", 2)])
    n = erasure_channel(2, 0.25)
    out = apply(n, rho, "A", "A'")
    assert out.dims == (("A'", 3), ("B", 2))
    assert np.abs(out.matrix - np.kron(n(ra), rb)).max() < 1e-12
    with pytest.raises(DimensionError):
        apply(identity_channel(3), rho, "B")


def test_tensor_power_matches_kron():
    rng = np.random.default_rng(9)
    n = random_channel(2, 2, rng, kraus_rank=2)
    n2 = tensor_power(n, 2)
    r1, r2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
    assert np.abs(n2(np.kron(r1, r2)) - np.kron(n(r1), n(r2))).max() < 1e-12
    with pytest.raises(ValueError):
        tensor_power(n, 7)


def test_covariance_checks():
    assert check_unitary_covariance(erasure_channel(2, 0.4)).max_violation < 1e-12
    assert check_unitary_covariance(depolarizing_channel(3, 0.2)).max_violation < 1e-12
    rng = np.random.default_rng(10)
    assert check_unitary_covariance(random_channel(2, 2, rng)).max_violation > 1e-3
    rep = check_unitary_covariance(pinching_channel([1, 2]))
    assert rep.max_violation > 1e-3


def test_channel_spec_roundtrip():
    n = channel_from_spec({"name": "erasure", "d": 2, "p": 0.3})
    m = channel_from_spec(channel_to_spec(n))
    rng = np.random.default_rng(11)
    rho = random_density_matrix(2, rng)
    assert np.abs(n(rho) - m(rho)).max() < 1e-12
    with pytest.raises(ValueError):
        channel_from_spec({"name": "erasure", "d": 2})
    with pytest.raises(ValueError):
        channel_from_spec({"name": "nope"})
    a = channel_from_spec({"name": "random", "seed": 3, "d_in": 2, "d_out": 3})
    b = channel_from_spec({"name": "random", "seed": 3, "d_in": 2, "d_out": 3})
    assert np.array_equal(a.kraus, b.kraus)


def test_random_channel_rank_too_small():
    with pytest.raises(ValueError):
        random_channel(3, 2, np.random.default_rng(0), kraus_rank=1)
