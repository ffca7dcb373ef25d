import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistwalk import kernels
from persistwalk.laws import make_law
from persistwalk.parallel import chunk_ranges, map_chunks
from persistwalk.rng import mix64, mix64_array, numpy_generator, rep_keys, stream_key, uniforms

LAWS = ["simple", "slackened:p0=1/2", "lattice:{2:1/3,-1:2/3}", "geom2:q+=1/2,q-=3/4",
        "laplace", "exp2:l+=1,l-=2", "uexp:{-1:1/4,-2:1/4}", "normal"]
BACKENDS = kernels.available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")


class TestRng:
    def test_mix64_matches_array(self):
        z = np.array([0, 1, 2 ** 63, 2 ** 64 - 1], dtype=np.uint64)
        assert [int(v) for v in mix64_array(z)] == [mix64(int(v)) for v in z]

    def test_uniforms_in_open_interval(self):
        keys = rep_keys(stream_key(1, "u"), 0, 10000)
        u = uniforms(keys, 1)
        assert u.min() > 0 and u.max() < 1
        assert abs(u.mean() - 0.5) < 0.02

    def test_streams_differ(self):
        assert stream_key(1, "a") != stream_key(1, "b")
        assert stream_key(1, "a") != stream_key(2, "a")

    def test_rep_keys_are_positional(self):
        k = stream_key(5, "s")
        assert np.array_equal(rep_keys(k, 0, 10)[3:7], rep_keys(k, 3, 7))

    def test_seed_required(self):
        with pytest.raises(ValueError):
            stream_key(None, "x")

    def test_numpy_generator_reproducible(self):
        a = numpy_generator(3, "x", 2).random(5)
        b = numpy_generator(3, "x", 2).random(5)
        c = numpy_generator(3, "x", 3).random(5)
        assert np.array_equal(a, b) and not np.array_equal(a, c)


class TestParallel:
    def test_chunk_ranges_cover(self):
        r = chunk_ranges(10, 3)
        assert r == [(0, 3), (3, 6), (6, 9), (9, 10)]

    def test_map_chunks_order_independent_of_workers(self):
        f = lambda a, b: list(range(a, b))
        one = map_chunks(f, 100, workers=1, chunk=7)
        many = map_chunks(f, 100, workers=4, chunk=7)
        assert one == many
        assert sum(one, []) == list(range(100))


class TestDrawSteps:
    @pytest.mark.parametrize("spec", ["simple", "lattice:{2:1/3,-1:2/3}", "geom2:q+=1/2,q-=3/4"])
    def test_lattice_frequencies(self, spec):
        law = make_law(spec)
        u = uniforms(rep_keys(stream_key(0, "f"), 0, 200000), 1)
        x = kernels.draw_steps(law.kernel, u)
        for k in range(-3, 4):
            assert abs(np.mean(x == k) - float(law.pmf(k))) < 5e-3

    def test_continuous_moments(self):
        law = make_law("exp2:l+=1,l-=2")
        u = uniforms(rep_keys(stream_key(0, "e"), 0, 200000), 1)
        x = kernels.draw_steps(law.kernel, u)
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - float(law.sigma2)) < 0.03


@needs_both
class TestBackendEquivalence:
    @pytest.mark.parametrize("spec", LAWS)
    def test_draw_steps(self, spec):
        kl = make_law(spec).kernel
        u = uniforms(rep_keys(stream_key(9, "d"), 0, 5000), 1)
        a = kernels.draw_steps(kl, u, backend="cython")
        b = kernels.draw_steps(kl, u, backend="python")
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)

    # zero-cycles (mode 3) only exist for integer-valued walks
    @pytest.mark.parametrize("spec, mode", [(s, m) for s in LAWS for m in range(4)
                                            if m < 3 or make_law(s).integer_valued])
    @pytest.mark.parametrize("tilted", [False, True])
    def test_walk_fail_times(self, spec, mode, tilted):
        law = make_law(spec)
        keys = rep_keys(stream_key(1, "w"), 0, 2000)
        a = kernels.walk_fail_times(law.kernel, keys, 300, mode, tilted, backend="cython")
        b = kernels.walk_fail_times(law.kernel, keys, 300, mode, tilted, backend="python")
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("spec", LAWS)
    def test_cycle_kernel(self, spec):
        kl = make_law(spec).kernel
        keys = rep_keys(stream_key(2, "c"), 0, 2000)
        for args in [(500, 500, -1, 0.0), (64, 0, 10, 5.0), (1000, 50, -1, 0.0)]:
            a = kernels.cycle_kernel(kl, keys, *args, backend="cython")
            b = kernels.cycle_kernel(kl, keys, *args, backend="python")
            for x, y in zip(a, b):
                np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-9, equal_nan=True)

    def test_cycle_kernel_with_start(self):
        kl = make_law("lattice:{2:1/3,-1:2/3}").kernel
        keys = rep_keys(stream_key(2, "c"), 0, 500)
        start = np.where(np.arange(500) % 2 == 0, 1.0, 2.0)
        a = kernels.cycle_kernel(kl, keys, 500, 500, start=start, backend="cython")
        b = kernels.cycle_kernel(kl, keys, 500, 500, start=start, backend="python")
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    @pytest.mark.parametrize("spec", ["simple", "slackened:p0=1/2", "lattice:{2:1/3,-1:2/3}", "geom2:q+=1/2,q-=3/4"])
    def test_zero_cycle_kernel(self, spec):
        kl = make_law(spec).kernel
        keys = rep_keys(stream_key(3, "z"), 0, 2000)
        for cap, stop in [(400, -1), (400, 20)]:
            a = kernels.zero_cycle_kernel(kl, keys, cap, stop, backend="cython")
            b = kernels.zero_cycle_kernel(kl, keys, cap, stop, backend="python")
            for x, y in zip(a, b):
                np.testing.assert_array_equal(x, y)

    @pytest.mark.parametrize("spec", LAWS)
    @pytest.mark.parametrize("mode", [0, 1])
    def test_chain_kernel(self, spec, mode):
        kl = make_law(spec).kernel
        keys = rep_keys(stream_key(4, "ch"), 0, 1000)
        a = kernels.chain_kernel(kl, keys, 5, 64, 2000, mode, backend="cython")
        b = kernels.chain_kernel(kl, keys, 5, 64, 2000, mode, backend="python")
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)


class TestKernelSemantics:
    def test_survivors_marked_n_plus_one(self):
        kl = make_law("simple").kernel
        t = kernels.walk_fail_times(kl, rep_keys(stream_key(1, "s"), 0, 1000), 10, 0, False)
        assert t.min() >= 1 and t.max() == 11

    def test_tilted_first_step_positive(self):
        kl = make_law("laplace").kernel
        t = kernels.walk_fail_times(kl, rep_keys(stream_key(1, "s"), 0, 1000), 1, 1, True)
        assert np.all(t == 2)

    def test_theta_only_cap(self):
        kl = make_law("simple").kernel
        tp, _, tm, _, fl, _ = kernels.cycle_kernel(kl, rep_keys(stream_key(1, "t"), 0, 1000), 8, 0)
        assert np.all((fl & kernels.FLAG_PLUS_CENSORED) == (tp >= 8))
        assert np.all(tm == 0)

    def test_stop_flag(self):
        kl = make_law("laplace").kernel
        tp, xp, _, _, fl, _ = kernels.cycle_kernel(kl, rep_keys(stream_key(1, "t"), 0, 2000), 10 ** 6, 0, 5, 3.0)
        stopped = (fl & kernels.FLAG_STOPPED) != 0
        assert np.all(tp[stopped] > 5) and np.all(xp[stopped] > 3.0)
        ended = fl == kernels.FLAG_MINUS_SKIPPED
        assert np.all((tp[ended] <= 5) | (xp[ended] <= 3.0))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["simple", "laplace", "lattice:{2:1/3,-1:2/3}"]), st.integers(0, 2 ** 40),
       st.integers(1, 60))
def test_integrated_fail_time_matches_direct_path(spec, seed, N):
    law = make_law(spec)
    keys = rep_keys(stream_key(seed, "h"), 0, 50)
    t = kernels.walk_fail_times(law.kernel, keys, N, kernels.MODE_INTEGRATED, False)
    for i, key in enumerate(keys):
        u = np.array([uniforms(np.array([key]), k)[0] for k in range(1, N + 1)])
        A = np.cumsum(np.cumsum(kernels.draw_steps(law.kernel, u, backend="python")))
        neg = np.flatnonzero(A < 0)
        assert t[i] == (neg[0] + 1 if neg.size else N + 1)
