import math

import numpy as np
import pytest

from capgaps import capacity as Q
from capgaps import channel as C
from capgaps.entropic import coherent_information, entropy
from capgaps.optimize import OptimizerConfig, multistart_maximize, nelder_mead
from capgaps.sampling import SampleSpec, sample_channel
from conftest import random_unitary

CFG = OptimizerConfig(restarts=8, seed=3)
IDENT = C.identity_channel(2)
REPL = C.completely_depolarizing(2)
DEPH = C.completely_dephasing()


def z_grid_max(ch, n=200):
    """Brute-force max of I_c over diagonal inputs diag(p, 1-p)."""
    return max(coherent_information(np.diag([p, 1 - p]), ch) for p in np.linspace(0, 1, n))


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    assert OptimizerConfig().restarts == 16
    assert CFG.with_seed(9).seed == 9


def test_nelder_mead_quadratic():
    res = nelder_mead(lambda x: float(np.sum((x - [1.0, -2.0, 0.5]) ** 2)), np.zeros(3), 0.5, 5000, 1e-14)
    assert res.converged
    assert np.allclose(res.x, [1.0, -2.0, 0.5], atol=1e-5)


def test_nelder_mead_rosenbrock():
    rosen = lambda x: (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
    res = nelder_mead(rosen, np.array([-1.2, 1.0]), 0.3, 5000, 1e-16)
    assert np.allclose(res.x, [1, 1], atol=1e-4)


def test_constant_objective_converges_immediately():
    opt = Q.optimize_input(lambda rho: 0.0, 2, CFG)
    assert opt.value == 0.0
    assert opt.diagnostics.iterations == 0 and opt.diagnostics.converged


def test_multistart_tie_keeps_first():
    _, value, diag = multistart_maximize(lambda x: 1.0, [np.zeros(2)] * 4, 0.1, CFG)
    assert value == 1.0 and diag.best_restart == 0


@pytest.mark.parametrize("d", [2, 3])
def test_entropy_maximized_at_maximally_mixed(d):
    rho, value = Q.optimize_input(entropy, d, OptimizerConfig(restarts=4, seed=1))
    assert value == pytest.approx(math.log2(d), abs=1e-6)
    assert np.max(np.abs(rho - np.eye(d) / d)) < 1e-3


def test_optimize_input_deterministic():
    f = lambda rho: coherent_information(rho, C.amplitude_damping(0.2))
    a = Q.optimize_input(f, 2, CFG)
    b = Q.optimize_input(f, 2, CFG)
    assert a.value == b.value and np.array_equal(a.rho, b.rho)


def test_amplitude_damping_matches_grid_oracle():
    ch = C.amplitude_damping(0.2)
    oracle = z_grid_max(ch)
    assert Q.optimize_input(lambda rho: coherent_information(rho, ch), 2, CFG).value == pytest.approx(oracle, abs=1e-4)
    assert Q.q5_one_shot(ch, CFG) == pytest.approx(oracle, abs=1e-4)


def test_amplitude_damping_half_has_zero_q5():
    ch = C.amplitude_damping(0.5)
    assert abs(z_grid_max(ch)) < 1e-12
    assert abs(Q.q5_one_shot(ch, CFG)) < 1e-4


def test_general_dimension_path_matches_qubit_path():
    ch = C.amplitude_damping(0.2)
    slow = Q.optimize_input(lambda rho: coherent_information(rho, ch), 2, CFG).value
    fast = Q.q5_one_shot(ch, CFG)
    assert abs(slow - fast) < 1e-6


def test_closed_forms():
    assert Q.q1_capacity(IDENT) == pytest.approx(1.0, abs=1e-9)
    assert Q.q1_capacity(REPL) == pytest.approx(-1.0, abs=1e-9)
    assert abs(Q.q1_capacity(DEPH)) < 1e-9
    assert Q.q1_floored(REPL) == 0.0
    for ch, q2 in ((IDENT, 1.0), (REPL, 0.0), (DEPH, 0.5)):
        assert Q.q2_capacity(ch) == pytest.approx(q2, abs=1e-9)
        assert Q.q2_capacity(ch) == (1 + Q.q1_capacity(ch)) / 2


def test_optimized_examples():
    assert Q.q5_one_shot(IDENT, CFG) == pytest.approx(1.0, abs=1e-6)
    assert abs(Q.q5_one_shot(REPL, CFG)) < 1e-6
    assert Q.q4_capacity(IDENT, CFG) == pytest.approx(1.0, abs=1e-6)
    assert abs(Q.q4_capacity(REPL, CFG)) < 1e-6
    assert Q.q4_capacity(DEPH, CFG) == pytest.approx(0.5, abs=1e-6)


def test_ea_classical():
    assert np.allclose(Q.ea_classical(IDENT, CFG), (2, 2), atol=1e-6)
    assert np.allclose(Q.ea_classical(REPL, CFG), (0, 0), atol=1e-6)
    assert np.allclose(Q.ea_classical(DEPH, CFG), (1, 1), atol=1e-6)


def test_qutrit_capacities():
    ident = C.identity_channel(3)
    cfg = OptimizerConfig(restarts=3, seed=0)
    assert Q.q2_capacity(ident) == pytest.approx(math.log2(3), abs=1e-9)
    assert Q.q4_capacity(ident, cfg) == pytest.approx(math.log2(3), abs=1e-5)
    assert Q.q5_one_shot(ident, cfg) == pytest.approx(math.log2(3), abs=1e-5)


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_ordering_chain(rank):
    for ch in sample_channel(SampleSpec(rank, 15, 11)):
        rep = Q.capacity_report(ch, CFG)
        assert rep.q5 >= max(0.0, rep.q1) - 1e-7
        assert rep.q4 >= rep.q2 - 1e-7
        assert rep.q5 <= rep.q2 + 1e-6
        assert rep.q4 <= (1 + rep.q5) / 2 + 1e-6
        assert rep.dq24 <= rep.dq15 / 2 + 1e-6


def test_report_gap_identities():
    rep = Q.capacity_report(C.amplitude_damping(0.3), CFG)
    assert rep.q2 == 0.5 * (1 + rep.q1)
    assert rep.dq15 == rep.q5 - rep.q1
    assert rep.dq25 == rep.q2 - rep.q5
    assert rep.dq24 == rep.q4 - rep.q2
    assert rep.dq23 is None and rep.dq34 is None
    assert rep.rank == 2
    assert set(rep.diagnostics) == {"q5", "q4"}


def test_q4_restarts_agree():
    for ch in sample_channel(SampleSpec(3, 5, 2)):
        values = [Q.q4_capacity(ch, OptimizerConfig(restarts=1, seed=s)) for s in range(4)]
        values += [Q.q4_capacity(ch, OptimizerConfig(restarts=5, seed=s)) for s in range(3)]
        assert max(values) - min(values) < 1e-6


def test_unitary_conjugation_invariance(rng):
    for ch in sample_channel(SampleSpec(2, 5, 4)):
        u, w = random_unitary(2, rng), random_unitary(2, rng)
        rotated = C.QChannel(np.einsum("ab,kbc,cd->kad", w, ch.kraus, u))
        a, b = Q.capacity_report(ch, CFG), Q.capacity_report(rotated, CFG)
        for name in ("q1", "q2", "q4", "q5"):
            assert abs(getattr(a, name) - getattr(b, name)) < 1e-6
