import math

import numpy as np
import pytest

import replica_mud as rm


def test_perfect_csi_identities():
    p = rm.SystemParams(beta=0.5, sigma_n2=0.2)
    s = rm.solve_fixed_point(p, rm.ReceiverSpec(rm.Estimator.ML, rm.Mode.PERFECT))
    assert abs(s.m - s.q) < 1e-10
    assert abs(s.E - s.F) < 1e-10
    assert 0.0 < rm.ber(s) < 0.5


def test_branches_and_free_energy():
    p = rm.SystemParams(beta=0.5, sigma_n2=0.2, delta_h2=0.1)
    spec = rm.ReceiverSpec(rm.Estimator.ML, rm.Mode.DIRECT)
    branches, energies, selected = rm.solve_all_branches(p, spec)
    assert len(branches) == len(energies) >= 1
    assert rm.free_energy(p, spec, branches[selected]) == pytest.approx(energies[selected])


def test_closed_form_efficiency():
    s = rm.solve_linear(rm.SystemParams(0.5, 0.2, 0.0), rm.Mode.COMPENSATED)
    assert s.E * 0.2 == pytest.approx((0.3 + math.sqrt(0.89)) / 2, abs=1e-10)


def test_gauss_expect():
    assert rm.gauss_expect(rm.Integrand.TANH, 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_pic_and_fading():
    fb = rm.FeedbackModel(0.4, rm.FilterKind.UNCONDITIONAL)
    p = rm.SystemParams(0.5, 0.2, 0.1)
    s = rm.solve_pic(p, rm.PowerDistribution.equal_power(), fb)
    assert 0.0 < rm.pic_efficiency(p, fb, s) <= 1.0
    law = rm.PowerDistribution.rayleigh(32)
    known = rm.solve_flat_fading(0.5, 0.2, law, False)
    mism = rm.solve_flat_fading(0.5, 0.2, law, True)
    assert mism <= known


def test_monte_carlo():
    sc = rm.Scenario()
    sc.K, sc.N, sc.P = 4, 40, 8
    inst = rm.generate_instance(sc, 0)
    assert inst.true_codes.shape == (40, 4)
    r = rm.simulate_symbol(inst, [1, -1, 1, 1], 3)
    soft = rm.detect_io(inst, r, rm.Mode.DIRECT, rm.Estimator.ML)
    assert np.all(np.abs(soft) <= 1.0)
    res = rm.run_ber_experiment(sc, rm.Detector.IO_EXACT, rm.Mode.DIRECT, 1000, 2)
    assert res.trials == 8000
    assert res.std_err == pytest.approx(math.sqrt(res.ber * (1 - res.ber) / res.trials))


def test_training():
    alpha, value = rm.optimize_alpha(rm.TrainingProblem(coherence_time=200, beta=1.0))
    assert 0.0 < alpha < 1.0
    assert value >= rm.spectral_efficiency(rm.TrainingProblem(coherence_time=200, beta=1.0), 0.2)


def test_errors():
    with pytest.raises(ValueError):
        rm.solve_fixed_point(rm.SystemParams(beta=-1.0), rm.ReceiverSpec())
    with pytest.raises(rm.DomainError):
        rm.spectral_efficiency(rm.TrainingProblem(coherence_time=1, snr_db=0.0), 0.5)
    big = rm.Scenario()
    big.K, big.N, big.P = 25, 60, 10
    with pytest.raises(rm.ResourceLimit):
        rm.run_ber_experiment(big, rm.Detector.IO_EXACT, rm.Mode.DIRECT, 1000, 1)


def test_cli():
    code, out, err = rm.run_cli(["replica-sweep", "--delta-h2", "0:0.2:3"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# replica-mud replica-sweep")
    assert len(lines) == 5
    assert rm.run_cli(["replica-sweep", "--bogus"])[0] == 2
