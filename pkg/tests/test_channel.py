import json
import math

import numpy as np
import pytest

from capgaps import channel as C
from capgaps.entropic import entropy
from capgaps.linalg import PAULI_X, PAULI_Y, PAULI_Z, DimensionError, ebit
from conftest import random_channel, random_density, random_unitary

PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)


def pauli_eigenstates():
    states = []
    for s in (PAULI_X, PAULI_Y, PAULI_Z):
        for sign in (1, -1):
            states.append((np.eye(2) + sign * s) / 2)
    return states


def test_qchannel_rejects_non_tp():
    with pytest.raises(C.InvalidChannelError):
        C.QChannel(np.array([0.9 * np.eye(2)]))


def test_apply_identity(rng):
    rho = random_density(3, rng)
    assert np.allclose(C.apply(C.identity_channel(3), rho), rho)


def test_apply_complete_depolarizing_pauli_form(rng):
    # uniform Pauli Kraus at weight 1/2
    ch = C.QChannel(np.array([np.eye(2), PAULI_X, PAULI_Y, PAULI_Z]) / 2)
    out = C.apply(ch, random_density(2, rng))
    assert np.allclose(out, np.eye(2) / 2)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.37, 0.5, 1.0])
def test_apply_dephasing_on_plus(p):
    out = C.apply(C.dephasing(p), PLUS)
    assert np.allclose(out, (np.eye(2) + (1 - 2 * p) * PAULI_X) / 2)


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        C.apply(C.identity_channel(2), np.eye(3) / 3)


def test_choi_examples():
    assert np.allclose(C.choi_matrix(C.identity_channel(2)), ebit(2))
    assert np.allclose(C.choi_matrix(C.completely_depolarizing(2)), np.eye(4) / 4)
    pauli_form = C.QChannel(np.array([np.eye(2), PAULI_X, PAULI_Y, PAULI_Z]) / 2)
    assert np.allclose(C.choi_matrix(pauli_form), np.eye(4) / 4)


def test_choi_entry_formula(rng):
    ch = random_channel(2, 3, 2, rng)
    c = C.choi_matrix(ch)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2))
            unit[i, j] = 1
            out = C.apply(ch, unit)
            for a in range(3):
                for b in range(3):
                    assert abs(c[a * 2 + i, b * 2 + j] - out[a, b] / 2) < 1e-14


def test_choi_invariants(rng):
    ch = random_channel(3, 2, 4, rng)
    C.choi_from_kraus(ch).validate()


@pytest.mark.parametrize("dims", [(2, 2, 1), (2, 2, 3), (2, 3, 4), (3, 2, 5)])
def test_choi_kraus_roundtrip(dims, rng):
    d_in, d_out, r = dims
    ch = random_channel(d_in, d_out, r, rng)
    c = C.choi_from_kraus(ch)
    back = C.choi_from_kraus(C.kraus_from_choi(c))
    assert np.max(np.abs(back.matrix - c.matrix)) < 1e-10


def test_kraus_from_ebit():
    ch = C.kraus_from_choi(C.ChoiMatrix(2, 2, ebit(2)))
    assert ch.n_kraus == 1
    k = ch.kraus[0]
    # unique up to a global phase
    assert np.allclose(k * np.conj(k[0, 0]) / abs(k[0, 0]), np.eye(2))


def test_kraus_from_maximally_mixed_choi():
    ch = C.kraus_from_choi(C.ChoiMatrix(2, 2, np.eye(4) / 4))
    assert ch.n_kraus == 4
    assert np.allclose([np.linalg.norm(k) for k in ch.kraus], 1 / math.sqrt(2))
    assert np.allclose(ch(np.eye(2)), np.eye(2))
    for s in (PAULI_X, PAULI_Y, PAULI_Z):
        assert np.allclose(ch(s), 0)


def test_kraus_count_follows_rank(rng):
    ch = random_channel(2, 2, 3, rng)
    c = C.choi_from_kraus(ch)
    w = np.linalg.eigvalsh(c.matrix)
    assert np.sum(w > 1e-10) == 3
    assert C.kraus_from_choi(c).n_kraus == 3


def test_kraus_from_invalid_choi():
    bad = np.diag([0.5, 0.0, 0.5, 0.0])  # marginal is not maximally mixed
    with pytest.raises(C.InvalidChoiError):
        C.kraus_from_choi(C.ChoiMatrix(2, 2, bad))


def test_channel_rank_examples():
    assert C.channel_rank(C.identity_channel(2)) == 1
    assert C.channel_rank(C.completely_depolarizing(2)) == 4
    for g in (0.1, 0.5, 0.9):
        assert C.channel_rank(C.amplitude_damping(g)) == 2


def test_channel_rank_matches_kraus_gram(rng):
    for r in range(1, 5):
        ch = random_channel(2, 2, r, rng)
        # same channel with the last Kraus operator split into two equal halves
        k = ch.kraus
        split = C.QChannel(np.concatenate([k[:-1], k[-1:] / np.sqrt(2), k[-1:] / np.sqrt(2)]))
        for c in (ch, split):
            gram = np.einsum("iab,jab->ij", c.kraus.conj(), c.kraus)
            assert C.channel_rank(c) == np.linalg.matrix_rank(gram, tol=1e-10) == r


def test_complementary_of_identity():
    env = C.complementary(C.identity_channel(2))
    assert (env.d_in, env.d_out) == (2, 1)
    assert np.allclose(env(np.eye(2) / 2), [[1.0]])


def test_complementary_dephasing_environment():
    env = C.complementary(C.dephasing(0.5))(np.eye(2) / 2)
    w = np.linalg.eigvalsh(env)
    assert np.allclose(w[w > 1e-12], [0.5, 0.5])


def test_complementary_matches_environment_formula(rng):
    ch = random_channel(2, 2, 3, rng)
    rho = random_density(2, rng)
    env = C.complementary(ch)(rho)
    k = ch.kraus
    for i in range(3):
        for j in range(3):
            # rho_E = sum_ij tr(rho K_i^dag K_j) |j><i|
            assert abs(env[j, i] - np.trace(rho @ k[i].conj().T @ k[j])) < 1e-14


def test_complementary_entropy_equality(rng):
    for _ in range(50):
        d_in, d_out = rng.integers(2, 4), rng.integers(2, 4)
        r = max(int(rng.integers(1, 5)), -(-d_in // d_out))
        ch = random_channel(d_in, d_out, r, rng)
        psi = random_density(d_in, rng, rank=1)
        assert abs(entropy(ch(psi)) - entropy(C.complementary(ch)(psi))) < 1e-8


def test_compose_identity(rng):
    ch = random_channel(2, 3, 2, rng)
    composed = C.compose(C.identity_channel(3), ch)
    assert np.max(np.abs(C.choi_matrix(composed) - C.choi_matrix(ch))) < 1e-12


@pytest.mark.parametrize("p,q", [(0.1, 0.2), (0.3, 0.45), (0.5, 0.9)])
def test_compose_dephasing(p, q):
    composed = C.compose(C.dephasing(p), C.dephasing(q))
    assert C.choi_distance(composed, C.dephasing(p + q - 2 * p * q)) < 1e-12


def test_compose_replacement(rng):
    ch = random_channel(2, 2, 3, rng)
    repl = C.completely_depolarizing(2)
    assert C.choi_distance(C.compose(repl, ch), repl) < 1e-12


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        C.compose(C.identity_channel(2), C.identity_channel(3))


def test_tensor_pow(rng):
    ch = random_channel(2, 2, 2, rng)
    assert C.choi_distance(C.tensor_pow(ch, 1), ch) == 0
    ident = C.tensor_pow(C.identity_channel(2), 3)
    assert ident.n_kraus == 1 and np.allclose(ident.kraus[0], np.eye(8))
    for r in (1, 2, 3, 4):
        ch = random_channel(2, 2, r, rng)
        assert C.channel_rank(C.tensor_pow(ch, 2)) == r * r


def test_tensor_pow_matches_kron_action(rng):
    a = random_channel(2, 2, 2, rng)
    rho1, rho2 = random_density(2, rng), random_density(2, rng)
    out = C.tensor_pow(a, 2)(np.kron(rho1, rho2))
    assert np.allclose(out, np.kron(a(rho1), a(rho2)))


def test_tensor_pow_cap():
    with pytest.raises(C.CapacityGuardError):
        C.tensor_pow(C.identity_channel(2), 8)


def test_affine_examples():
    aff = C.affine_from_channel(C.identity_channel(2))
    assert np.allclose(aff.t, 0) and np.allclose(aff.T, np.eye(3))
    assert aff.t_frob == pytest.approx(math.sqrt(3))
    aff = C.affine_from_channel(C.completely_depolarizing(2))
    assert np.allclose(aff.t, 0) and np.allclose(aff.T, 0)
    for g in (0.2, 0.5, 0.8):
        aff = C.affine_from_channel(C.amplitude_damping(g))
        assert np.allclose(aff.t, [0, 0, g])
        s = math.sqrt(1 - g)
        assert np.allclose(aff.T, np.diag([s, s, 1 - g]))


def test_affine_reproduces_action(rng):
    for r in (1, 2, 3, 4):
        ch = random_channel(2, 2, r, rng)
        aff = C.affine_from_channel(ch)
        for rho in pauli_eigenstates():
            predicted = C.bloch_to_density(aff.apply(C.density_to_bloch(rho)))
            assert np.max(np.abs(predicted - ch(rho))) < 1e-8


def test_unital_channels_have_no_shift(rng):
    for _ in range(10):
        u = random_unitary(2, rng)
        mix = C.QChannel(np.array([np.sqrt(0.3) * u, np.sqrt(0.7) * PAULI_Z @ u]))
        assert np.linalg.norm(C.affine_from_channel(mix).t) < 1e-10


def test_affine_needs_qubits():
    with pytest.raises(DimensionError):
        C.affine_from_channel(C.identity_channel(3))


def test_json_roundtrip(tmp_path, rng):
    chans = [random_channel(2, 2, r, rng) for r in (1, 2, 3, 4)]
    path = tmp_path / "batch.json"
    C.dump_channels(chans, path, {"seed": 5})
    back, manifest = C.load_channels(path)
    assert manifest == {"seed": 5}
    for a, b in zip(chans, back):
        assert np.array_equal(a.kraus, b.kraus)


def test_json_single_channel_and_drift_repair(tmp_path):
    ch = C.amplitude_damping(0.3)
    obj = C.channel_to_dict(ch)
    obj["kraus"][0][0][0] *= 1 + 2e-7  # drift below the repair threshold
    path = tmp_path / "one.json"
    path.write_text(json.dumps(obj))
    [back], _ = C.load_channels(path)
    assert C.completeness_drift(back.kraus) < 1e-14
    assert C.choi_distance(back, ch) < 1e-6


def test_json_rejects_large_drift():
    obj = C.channel_to_dict(C.amplitude_damping(0.3))
    obj["kraus"][0][0][0] *= 1 + 1e-4
    with pytest.raises(C.InvalidChannelError):
        C.channel_from_dict(obj)


def test_noise_parsing():
    assert C.choi_distance(C.noise_from_string("bitflip:0.1"), C.bitflip(0.1)) == 0
    assert C.choi_distance(C.noise_from_string("amplitude_damping:0.25"), C.amplitude_damping(0.25)) == 0
    for bad in ("bitflip", "foo:0.1", "dephasing:1.5"):
        with pytest.raises(ValueError):
            C.noise_from_string(bad)
