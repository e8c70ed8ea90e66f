"""Graph-scheme filter: acceptance test, back-substitution, queries, updates."""

import random

import pytest

from bloomier.errors import BuildError, InputError, UnknownKeyError
from bloomier.graph_filter import (BuildGraph, GraphParams, back_substitute,
                                   build, build_mutable, is_simple_acyclic,
                                   query)


class TestAcceptance:
    def test_path_is_acyclic(self):
        assert is_simple_acyclic(BuildGraph(3, [(0, 1), (1, 2)]))

    def test_triangle_is_cyclic(self):
        assert not is_simple_acyclic(BuildGraph(3, [(0, 1), (1, 2), (2, 0)]))

    def test_self_loop_rejected(self):
        assert not is_simple_acyclic(BuildGraph(1, [(0, 0)]))

    def test_parallel_edge_rejected(self):
        assert not is_simple_acyclic(BuildGraph(3, [(0, 1), (1, 0)]))

    def test_forest_random(self):
        # A random forest built edge-by-edge is accepted by construction.
        rng = random.Random(0)
        edges = [(rng.randrange(i), i) for i in range(1, 200)]
        assert is_simple_acyclic(BuildGraph(200, edges))


class TestBackSubstitute:
    def test_hand_example(self):
        # One key, table of 3: root g[0] = 0, then g[1] = (1 - 0 - 5) mod 8.
        g = back_substitute(BuildGraph(3, [(0, 1)]), [1], [5], 8)
        assert g == [0, 4, 0]

    def test_star_one_step(self):
        # Leaves of a star each get (f - h3) mod m in one substitution.
        edges = [(0, i) for i in range(1, 5)]
        g = back_substitute(BuildGraph(5, edges), [9, 9, 9, 9], [2, 3, 4, 5], 16)
        assert g[0] == 0
        assert g[1:] == [(9 - 2) % 16, (9 - 3) % 16, (9 - 4) % 16, (9 - 5) % 16]

    def test_isolated_vertices_stay_zero(self):
        g = back_substitute(BuildGraph(5, [(1, 3)]), [7], [0], 10)
        assert g[0] == g[2] == g[4] == 0

    def test_random_forest_recheck(self):
        # Equation-recheck oracle: every edge equation must hold after solve.
        rng = random.Random(7)
        n, m = 100, 12
        edges, values, h3s = [], [], []
        for i in range(1, n + 1):
            edges.append((rng.randrange(i), i))
            values.append(rng.randrange(m))
            h3s.append(rng.randrange(m))
        g = back_substitute(BuildGraph(n + 1, edges), values, h3s, m)
        for (u, v), f, h3 in zip(edges, values, h3s):
            assert (g[u] + g[v] + h3) % m == f

    def test_cycle_raises_internal_assertion(self):
        with pytest.raises(AssertionError):
            back_substitute(BuildGraph(3, [(0, 1), (1, 2), (2, 0)]),
                            [1, 2, 3], [0, 0, 0], 8)


class TestBuild:
    def test_empty_filter(self):
        f = build([], GraphParams(m=1 << 16, k=8), master_seed=1)
        assert f.table == [] and f.n == 0
        # Queries fall back to the offset hash alone; about 2^-8 of them
        # land inside the value range.
        answered = sum(f.query(b"key_%d" % i) is not None for i in range(4096))
        assert 0 < answered < 200

    def test_single_pair(self):
        f = build([(b"only", 3)], GraphParams(m=64, k=4, c="3"), 5)
        assert f.query(b"only") == 3
        assert f.table_len == 3

    def test_exhaustive_correctness(self):
        pairs = [(b"key_%d" % i, (i * 13) % 256 ) for i in range(1000)]
        f = build(pairs, GraphParams(m=1 << 16, k=8), 42)
        assert all(f.query(kb) == v for kb, v in pairs)

    def test_duplicate_keys_rejected(self):
        with pytest.raises(InputError):
            build([(b"a", 1), (b"a", 2)], GraphParams(m=4, k=1), 0)

    def test_value_out_of_range_rejected(self):
        with pytest.raises(InputError):
            build([(b"a", 2)], GraphParams(m=4, k=1), 0)

    def test_attempts_recorded_and_deterministic(self):
        pairs = [(b"k%d" % i, i) for i in range(4)]
        f = build(pairs, GraphParams(m=256, k=8, c="2.25"), 2)
        assert f.attempts == 2
        g = build(pairs, GraphParams(m=256, k=8, c="2.25"), 2)
        assert g.table == f.table and g.attempt == f.attempt

    def test_max_tries_exhausted(self):
        pairs = [(b"k%d" % i, i) for i in range(4)]
        with pytest.raises(BuildError) as exc:
            build(pairs, GraphParams(m=256, k=8, c="2.25", max_tries=1), 2)
        assert exc.value.attempts == 1

    def test_str_and_int_keys_accepted(self):
        f = build([("text", 1), (77, 2)], GraphParams(m=16, k=2, c="4"), 3)
        assert f.query("text") == 1 and f.query(77) == 2

    def test_exact_ceiling_table_size(self):
        # c = 2.09 times 100 keys is exactly 209 slots, no float drift.
        f = build([(b"key_%d" % i, 0) for i in range(100)],
                  GraphParams(m=2, k=1, c="2.09"), 0)
        assert f.table_len == 209


class TestQuery:
    def test_never_bot_when_range_covers_ring(self):
        pairs = [(b"key_%d" % i, i % 2) for i in range(50)]
        f = build(pairs, GraphParams(m=2, k=1), 3)
        assert all(f.query(b"non_%d" % i) is not None for i in range(2000))

    def test_module_level_alias(self):
        f = build([(b"a", 1)], GraphParams(m=16, k=2, c="4"), 1)
        assert query(f, b"a") == 1

    def test_false_positive_rate_small_scale(self):
        pairs = [(b"key_%d" % i, i % 256) for i in range(1000)]
        f = build(pairs, GraphParams(m=1 << 16, k=8), 11)
        n_samples = 10 ** 5
        hits = sum(f.query(b"fp_%d" % i) is not None for i in range(n_samples))
        rate, expect = hits / n_samples, 2 ** -8
        sigma = (expect * (1 - expect) / n_samples) ** 0.5
        assert abs(rate - expect) <= 4 * sigma


class TestMutable:
    PAIRS = [(b"key_%d" % i, (i * 7) % 16) for i in range(1000)]
    PARAMS = GraphParams(m=1 << 8, k=4)

    def test_noop_cap_matches_plain_build(self):
        params = GraphParams(m=256, k=4, component_cap=10 ** 9)
        mf = build_mutable(self.PAIRS, params, 5)
        pf = build(self.PAIRS, params, 5)
        assert mf.table == pf.table and mf.attempt == pf.attempt

    def test_update_changes_one_key_only(self):
        mf = build_mutable(self.PAIRS, self.PARAMS, 9)
        target = b"key_123"
        mf.update_value(target, 15)
        for kb, v in self.PAIRS:
            assert mf.query(kb) == (15 if kb == target else v)

    def test_update_to_same_value_is_query_idempotent(self):
        mf = build_mutable(self.PAIRS, self.PARAMS, 9)
        before = [mf.query(kb) for kb, _ in self.PAIRS]
        mf.update_value(b"key_5", self.PAIRS[5][1])
        assert [mf.query(kb) for kb, _ in self.PAIRS] == before

    def test_repeated_updates_stay_consistent(self):
        mf = build_mutable(self.PAIRS, self.PARAMS, 9)
        current = dict(self.PAIRS)
        rng = random.Random(0)
        for _ in range(50):
            kb = b"key_%d" % rng.randrange(1000)
            val = rng.randrange(16)
            mf.update_value(kb, val)
            current[kb] = val
        assert all(mf.query(kb) == v for kb, v in current.items())

    def test_unknown_key_rejected(self):
        mf = build_mutable(self.PAIRS, self.PARAMS, 9)
        with pytest.raises(UnknownKeyError):
            mf.update_value(b"definitely_not_stored", 1)

    def test_component_sizes_respect_cap(self):
        mf = build_mutable(self.PAIRS, self.PARAMS, 9)
        sizes = {}
        for v in range(len(mf.table)):
            root = mf.component_of[v]
            sizes[root] = sizes.get(root, 0) + 1
        assert max(sizes.values()) <= mf.component_cap

    def test_value_out_of_range_on_update(self):
        mf = build_mutable(self.PAIRS, self.PARAMS, 9)
        with pytest.raises(InputError):
            mf.update_value(b"key_1", 16)

    def test_mutable_build_accepts_within_default_budget(self):
        # Default cap is ceil(8 ln n); acceptance within 64 tries should be
        # routine at c = 2.5 (joint per-try success ~ 0.25).
        for seed in range(5):
            mf = build_mutable(self.PAIRS, self.PARAMS, seed)
            assert all(mf.query(kb) == v for kb, v in self.PAIRS)

    def test_default_cap_calibration_at_scale(self):
        # Monte Carlo behind the ceil(8 ln n) default: at n = 1e4, c = 2.5
        # the capped build must land inside max_tries=64 on >= 99/100 seeds.
        pairs = [(b"key_%d" % i, 0) for i in range(10 ** 4)]
        params = GraphParams(m=2, k=1, max_tries=64)
        accepted = 0
        for seed in range(100):
            try:
                build_mutable(pairs, params, seed)
                accepted += 1
            except BuildError:
                pass
        assert accepted >= 99
