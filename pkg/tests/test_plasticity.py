import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genmem.network import ControllerState, Genotype, NetworkTopology, synapse_count
from genmem.plasticity import (PlasticityConfig, PlasticityError, PlasticityState, apply_update,
                               begin_trial, effective_rate, end_trial, hebbian_step, update_traces)

TINY = NetworkTopology((2, 2))


def tiny_state(weights=(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)):
    g = Genotype(np.array(weights, dtype=float), TINY)
    return g, ControllerState.from_genotype(g), begin_trial(PlasticityState(TINY), g)


def oracle_step(T, W, pre, post, rate, decay=0.95, update=0.05, w_max=2.0):
    """Double loop over a single (2 -> 2) layer; W rows are [w0, w1, bias]."""
    T = [row[:] for row in T]
    W = [row[:] for row in W]
    total = 0.0
    for j in range(len(post)):
        for i in range(len(pre)):
            T[j][i] = decay * T[j][i] + update * (post[j] * pre[i])
            dw = rate * T[j][i]
            total += abs(dw)
            W[j][i] = min(max(W[j][i] + dw, -w_max), w_max)
    return T, W, total


class TestEffectiveRate:
    def test_low_fitness(self):
        assert effective_rate(0.002, 0.1) == pytest.approx(0.0004, abs=1e-18)

    def test_high_fitness(self):
        assert effective_rate(0.002, 0.9) == pytest.approx(0.0018, abs=1e-18)

    def test_floor_boundary(self):
        assert effective_rate(0.002, 0.2) == pytest.approx(0.0004, abs=1e-18)

    def test_fitness_clamped(self):
        assert effective_rate(0.002, 1.7) == 0.002
        assert effective_rate(0.002, -3.0) == pytest.approx(0.0004, abs=1e-18)

    @given(n=st.floats(0, 1), f1=st.floats(0.2, 1), f2=st.floats(0.2, 1))
    def test_monotone_above_floor(self, n, f1, f2):
        lo, hi = sorted((f1, f2))
        assert effective_rate(n, lo) <= effective_rate(n, hi)

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            effective_rate(-0.1, 0.5)


class TestConfig:
    def test_defaults(self):
        c = PlasticityConfig()
        assert (c.fitness_floor, c.trace_decay, c.trace_update, c.weight_clip) == (0.2, 0.95, 0.05, 2.0)
        assert c.trace_bound == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("kw", [{"trace_decay": 1.0}, {"trace_update": 0.0}, {"weight_clip": 0.0},
                                    {"base_rate": -1.0}, {"base_rate": float("nan")}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            PlasticityConfig(**kw)


class TestTraces:
    def test_first_step(self):
        _, _, ps = tiny_state()
        traces = update_traces(ps, [np.ones(2), np.ones(2)])
        np.testing.assert_allclose(traces[0], np.full((2, 2), 0.05), atol=1e-15)

    def test_second_step(self):
        _, _, ps = tiny_state()
        update_traces(ps, [np.ones(2), np.ones(2)])
        traces = update_traces(ps, [np.ones(2), np.ones(2)])
        np.testing.assert_allclose(traces[0], np.full((2, 2), 0.0975), atol=1e-15)

    def test_pure_decay(self):
        _, _, ps = tiny_state()
        ps.flat_traces[:] = [0.4, -0.2, 0.1, 1.0]
        start = ps.flat_traces.copy()
        for _ in range(30):
            update_traces(ps, [np.zeros(2), np.zeros(2)])
        np.testing.assert_allclose(ps.flat_traces, start * 0.95 ** 30, rtol=1e-12)

    def test_outer_product_orientation(self):
        _, _, ps = tiny_state()
        traces = update_traces(ps, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        # row = post neuron, column = pre neuron
        np.testing.assert_allclose(traces[0], [[0.0, 0.0], [0.05, 0.0]], atol=1e-15)

    def test_bound_under_persistent_activity(self):
        _, _, ps = tiny_state()
        for _ in range(2000):
            update_traces(ps, [np.ones(2), -np.ones(2)])
            assert np.abs(ps.flat_traces).max() <= 1.0 + 1e-9
        assert np.abs(ps.flat_traces).min() > 0.999

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_bound_random(self, seed):
        r = np.random.default_rng(seed)
        ps = PlasticityState()
        sizes = ps.topology.layer_sizes
        for _ in range(300):
            update_traces(ps, [r.uniform(-1, 1, n) for n in sizes])
            assert np.abs(ps.flat_traces).max() <= 1.0 + 1e-9

    def test_shapes_match_weights(self):
        ps = PlasticityState()
        assert [t.shape for t in ps.traces] == [(7, 16), (5, 7), (8, 5), (4, 8), (2, 4)]
        assert ps.flat_traces.size == synapse_count(NetworkTopology())

    def test_shape_mismatch(self):
        _, _, ps = tiny_state()
        with pytest.raises(ValueError):
            update_traces(ps, [np.ones(3), np.ones(2)])


class TestApplyUpdate:
    def test_zero_rate(self):
        g, c, ps = tiny_state((2.5, -1.0, 0.3, 0.1, 0.2, 0.0))
        update_traces(ps, [np.ones(2), np.ones(2)])
        assert apply_update(ps, c, 0.0) == 0.0
        assert np.array_equal(c.effective_weights, g.weights)

    def test_clip_at_max(self):
        _, c, ps = tiny_state((1.99, 0.0, 0.0, 0.0, 0.0, 0.0))
        ps.flat_traces[:] = [1.0, 0.0, 0.0, 0.0]
        apply_update(ps, c, 0.05)
        assert c.effective_weights[0] == 2.0

    def test_single_weight(self):
        _, c, ps = tiny_state((0.5, 0.0, 0.0, 0.0, 0.0, 0.0))
        ps.flat_traces[:] = [0.0975, 0.0, 0.0, 0.0]
        apply_update(ps, c, 0.0018)
        assert c.effective_weights[0] == pytest.approx(0.5 + 0.0018 * 0.0975, abs=1e-12)
        assert c.effective_weights[0] == pytest.approx(0.5001755, abs=1e-12)

    def test_biases_untouched(self):
        g, c, ps = tiny_state((0.1, 0.2, 0.7, 0.3, 0.4, -0.6))
        for _ in range(50):
            update_traces(ps, [np.ones(2), np.ones(2)])
            apply_update(ps, c, 0.1)
        assert c.effective_weights[2] == 0.7 and c.effective_weights[5] == -0.6
        assert ps.cumulative_abs_change > 0

    def test_cumulative_is_pre_clip(self):
        _, c, ps = tiny_state((2.0, 2.0, 0.0, 2.0, 2.0, 0.0))
        ps.flat_traces[:] = 1.0
        delta = apply_update(ps, c, 0.1)
        assert delta == pytest.approx(0.4, abs=1e-15)
        assert np.all(c.effective_weights[[0, 1, 3, 4]] == 2.0)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), f_lo=st.floats(0.2, 1), f_hi=st.floats(0.2, 1))
    def test_larger_fitness_larger_change(self, seed, f_lo, f_hi):
        f_lo, f_hi = sorted((f_lo, f_hi))
        r = np.random.default_rng(seed)
        traces = r.uniform(-1, 1, 4)
        deltas = []
        for f in (f_lo, f_hi):
            _, c, ps = tiny_state()
            ps.flat_traces[:] = traces
            before = c.effective_weights.copy()
            apply_update(ps, c, effective_rate(0.01, f))
            deltas.append(np.abs(c.effective_weights - before))
        assert np.all(deltas[1] >= deltas[0])


class TestTrialBoundaries:
    def test_no_updates(self, random_genotype):
        c = ControllerState.from_genotype(random_genotype)
        ps = begin_trial(PlasticityState(), random_genotype)
        assert end_trial(ps, c) == 0.0
        assert np.array_equal(c.effective_weights, random_genotype.weights)

    def test_revert_after_many_updates(self, random_genotype, rng):
        c = ControllerState.from_genotype(random_genotype)
        ps = begin_trial(PlasticityState(), random_genotype)
        cfg = PlasticityConfig(0.05)
        for _ in range(1000):
            c.forward(rng.uniform(0, 1, 16))
            hebbian_step(ps, c, rng.uniform(), cfg)
        assert not np.array_equal(c.effective_weights, random_genotype.weights)
        end_trial(ps, c)
        assert np.array_equal(c.effective_weights, random_genotype.weights)

    def test_trials_independent(self, random_genotype, rng):
        inputs = rng.uniform(0, 1, (200, 16))
        fits = rng.uniform(0, 1, 200)
        cfg = PlasticityConfig(0.01)
        c = ControllerState.from_genotype(random_genotype)
        ps = PlasticityState()
        changes = []
        for _ in range(2):
            begin_trial(ps, random_genotype)
            for x, f in zip(inputs, fits):
                c.forward(x)
                hebbian_step(ps, c, f, cfg)
            changes.append(end_trial(ps, c))
        assert changes[0] == changes[1] > 0

    def test_end_without_begin(self):
        with pytest.raises(PlasticityError):
            end_trial(PlasticityState(), ControllerState())

    def test_double_end(self, random_genotype):
        c = ControllerState.from_genotype(random_genotype)
        ps = begin_trial(PlasticityState(), random_genotype)
        end_trial(ps, c)
        with pytest.raises(PlasticityError):
            end_trial(ps, c)


def test_vectorised_matches_double_loop(rng):
    g, c, ps = tiny_state(rng.uniform(-2, 2, 6))
    T = [[0.0, 0.0], [0.0, 0.0]]
    W = [list(c.effective_weights[0:3]), list(c.effective_weights[3:6])]
    for _ in range(500):
        pre, post = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        rate = rng.uniform(0, 0.05)
        update_traces(ps, [pre, post])
        total = apply_update(ps, c, rate)
        T, W, want = oracle_step(T, W, list(pre), list(post), rate)
        np.testing.assert_allclose(ps.traces[0], T, rtol=0, atol=1e-12)
        np.testing.assert_allclose(c.effective_weights.reshape(2, 3), W, rtol=0, atol=1e-12)
        assert total == pytest.approx(want, abs=1e-12)
