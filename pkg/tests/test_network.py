import numpy as np
import pytest

from rpusim import prng
from rpusim.arrays import DeviceArraySpec, ReadoutConfig
from rpusim.network import (BASELINE, RULE_BASELINE, RULE_DW_FOLLOWS_ETA,
                            RULE_FIXED_DW, STOCHASTIC, LrSchedule, Network,
                            NetworkConfig)
from rpusim.streams import TranslatorConfig

TOY = NetworkConfig(layer_sizes=(6, 4, 3, 2))


def make_net(mode=BASELINE, rule=RULE_BASELINE, cfg=TOY, spec=None,
             readout=None, alpha_out=np.inf, seed=1, bl=10):
    return Network(cfg, spec or DeviceArraySpec(1, 1), readout or ReadoutConfig(),
                   alpha_out, TranslatorConfig(bl=bl), mode, rule, seed)


class TestConfigs:
    def test_network_config_validation(self):
        with pytest.raises(ValueError):
            NetworkConfig(layer_sizes=(10,)).validate()
        with pytest.raises(ValueError):
            NetworkConfig(temperature=0.0).validate()
        with pytest.raises(NotImplementedError):
            NetworkConfig(temperature=2.0).validate()

    def test_schedule_validation(self):
        LrSchedule.paper_default().validate()
        with pytest.raises(ValueError):
            LrSchedule(((0, 10, 0.01), (11, 20, 0.005))).validate()  # gap
        with pytest.raises(ValueError):
            LrSchedule(((0, 10, 0.01), (5, 20, 0.005))).validate()  # overlap
        with pytest.raises(ValueError):
            LrSchedule(((0, 10, -1.0),)).validate()

    def test_paper_schedule_rates(self):
        s = LrSchedule.paper_default()
        assert [s.eta_for(e) for e in (0, 9, 10, 19, 20, 29)] == \
            [0.01, 0.01, 0.005, 0.005, 0.0025, 0.0025]


class TestForward:
    def test_softmax_is_a_probability_simplex(self):
        net = make_net()
        rng = np.random.default_rng(0)
        for i in range(10):
            _, probs = net.forward_pass(rng.uniform(0, 1, 6), key=prng.derive(i))
            assert probs.min() >= 0
            assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_zero_preactivations_give_uniform_softmax(self):
        net = make_net(cfg=NetworkConfig(layer_sizes=(4, 3, 10)))
        for st in net.states:
            st.W[:] = 0.0
        _, probs = net.forward_pass(np.ones(4), key=prng.derive(1))
        assert np.allclose(probs, 0.1, atol=1e-12)

    def test_sigmoid_at_zero_is_half(self):
        net = make_net()
        for st in net.states:
            st.W[:] = 0.0
        acts, _ = net.forward_pass(np.zeros(6), key=prng.derive(1))
        assert np.allclose(acts[1][:-1], 0.5, atol=1e-15)
        assert acts[1][-1] == 1.0  # bias slot stays on

    def test_argmax_invariant_under_positive_scaling(self):
        net = make_net(seed=3)
        x = np.random.default_rng(1).uniform(0, 1, 6)
        _, probs = net.forward_pass(x, key=prng.derive(2))
        net.states[-1].W *= 7.5
        _, scaled = net.forward_pass(x, key=prng.derive(2))
        assert np.argmax(probs) == np.argmax(scaled)


class TestBackward:
    def test_exact_output_means_zero_deltas(self):
        net = make_net()
        x = np.full(6, 0.5)
        acts, probs = net.forward_pass(x, key=prng.derive(1))
        onehot = np.zeros(2)
        onehot[1] = 1.0
        deltas = net.backward_pass(acts, onehot, 1, key=prng.derive(2))
        assert all(np.allclose(d, 0, atol=1e-15) for d in deltas)

    def test_finite_difference_gradients(self):
        # central differences on the cross-entropy loss, every weight
        net = make_net(seed=5)
        rng = np.random.default_rng(7)
        x = rng.uniform(0, 1, 6)
        label = 1
        key = prng.derive(0)

        def loss():
            _, probs = net.forward_pass(x, key=key)
            return -np.log(probs[label])

        acts, probs = net.forward_pass(x, key=key)
        deltas = net.backward_pass(acts, probs, label, key=key)
        worst = 0.0
        h = 1e-6
        for l, st in enumerate(net.states):
            grad = np.outer(acts[l], deltas[l])
            for i in range(st.W.shape[0]):
                for j in range(st.W.shape[1]):
                    keep = st.W[i, j]
                    st.W[i, j] = keep + h
                    up = loss()
                    st.W[i, j] = keep - h
                    dn = loss()
                    st.W[i, j] = keep
                    fd = (up - dn) / (2 * h)
                    denom = max(abs(fd), abs(grad[i, j]), 1e-8)
                    worst = max(worst, abs(fd - grad[i, j]) / denom)
        assert worst < 1e-5

    def test_ideal_stochastic_deltas_match_baseline(self):
        base = make_net(seed=4)
        stoch = make_net(mode=STOCHASTIC, rule=RULE_FIXED_DW, seed=4)
        x = np.random.default_rng(2).uniform(0, 1, 6)
        key = prng.derive(3)
        a1, p1 = base.forward_pass(x, key=key)
        a2, p2 = stoch.forward_pass(x, key=key)
        assert np.allclose(p1, p2, atol=1e-12)
        d1 = base.backward_pass(a1, p1, 0, key=key)
        d2 = stoch.backward_pass(a2, p2, 0, key=key)
        for u, v in zip(d1, d2):
            assert np.allclose(u, v, atol=1e-12)


class TestTraining:
    def test_single_step_decreases_loss(self, toy_data):
        imgs, labels, _, _ = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        net = make_net(cfg=cfg, seed=6)
        x, label = imgs[0].astype(float), int(labels[0])
        key = prng.derive(0)

        def loss():
            _, probs = net.forward_pass(x, key=key)
            return -np.log(probs[label])

        before = loss()
        sched = LrSchedule.constant(0.05, 1)
        sched.validate()
        net.train_epoch(imgs[:1], labels[:1], 0, sched)
        assert loss() < before

    def test_deterministic_replay(self, toy_data):
        imgs, labels, timgs, tlabels = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        sched = LrSchedule.constant(0.05, 3)
        runs = []
        for _ in range(2):
            net = make_net(cfg=cfg, mode=STOCHASTIC, rule=RULE_DW_FOLLOWS_ETA,
                           spec=DeviceArraySpec(1, 1, sigma_c2c=0.5), seed=11)
            runs.append(net.train(imgs, labels, timgs, tlabels, sched, 3))
        a, b = runs
        assert [r.error_percent for r in a.epochs] == \
            [r.error_percent for r in b.epochs]
        assert [r.saturation_fraction for r in a.epochs] == \
            [r.saturation_fraction for r in b.epochs]

    def test_toy_problem_is_learnable_both_modes(self, toy_data):
        imgs, labels, timgs, tlabels = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        sched = LrSchedule.constant(0.3, 20)
        for mode, rule in ((BASELINE, RULE_BASELINE),
                           (STOCHASTIC, RULE_DW_FOLLOWS_ETA)):
            net = make_net(cfg=cfg, mode=mode, rule=rule, seed=2)
            run = net.train(imgs, labels, timgs, tlabels, sched, 20)
            assert run.final_error < 10.0, mode
            assert run.epochs[0].error_percent > run.final_error

    def test_saturation_statistic_reports_clamps(self, toy_data):
        imgs, labels, timgs, tlabels = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        # gain far above 1/|delta| forces clamped translator inputs
        net = Network(cfg, DeviceArraySpec(1, 1, dw_min_mean=1e-6),
                      ReadoutConfig(), np.inf, TranslatorConfig(bl=10),
                      STOCHASTIC, RULE_FIXED_DW, 13)
        sched = LrSchedule.constant(0.05, 1)
        sched.validate()
        sat = net.train_epoch(imgs, labels, 0, sched)
        assert sat > 0.0

    def test_evaluate_error_matches_recount(self, toy_data):
        imgs, labels, timgs, tlabels = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        net = make_net(cfg=cfg, seed=8)
        got = net.evaluate_error(timgs[:100], tlabels[:100], epoch=0)
        wrong = 0
        for i in range(min(100, timgs.shape[0])):
            key = prng.fold(prng.derive(8, prng.PH_EVAL, 0), i)
            _, probs = net.forward_pass(timgs[i].astype(float), key=key)
            wrong += int(np.argmax(probs) != tlabels[i])
        assert got == pytest.approx(100.0 * wrong / min(100, timgs.shape[0]))

    def test_single_forced_correct_sample_scores_zero(self, toy_data):
        imgs, labels, _, _ = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        net = make_net(cfg=cfg, seed=9)
        x = imgs[:1]
        _, probs = net.forward_pass(x[0].astype(float),
                                    key=prng.fold(prng.derive(9, prng.PH_EVAL, 0), 0))
        forced = np.array([int(np.argmax(probs))], dtype=np.int64)
        assert net.evaluate_error(x, forced, epoch=0) == 0.0


class TestCheckpoint:
    def test_round_trip_restores_weights(self, tmp_path, toy_data):
        imgs, labels, timgs, tlabels = toy_data
        cfg = NetworkConfig(layer_sizes=(16, 8, 4, 2))
        net = make_net(cfg=cfg, seed=10)
        sched = LrSchedule.constant(0.05, 1)
        sched.validate()
        net.train_epoch(imgs, labels, 0, sched)
        net.save_checkpoint(tmp_path / "ck")
        err = net.evaluate_error(timgs, tlabels, epoch=5)

        other = make_net(cfg=cfg, seed=999)
        other.load_checkpoint(tmp_path / "ck")
        assert other.evaluate_error(timgs, tlabels, epoch=5) == err
        for a, b in zip(net.states, other.states):
            assert np.array_equal(a.W, b.W)

    def test_architecture_mismatch_rejected(self, tmp_path):
        net = make_net(seed=1)
        net.save_checkpoint(tmp_path / "ck")
        other = make_net(cfg=NetworkConfig(layer_sizes=(6, 4, 2)), seed=1)
        with pytest.raises(ValueError):
            other.load_checkpoint(tmp_path / "ck")
