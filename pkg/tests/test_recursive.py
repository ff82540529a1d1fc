import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from hdsynth.circuit import (
    L2,
    L3,
    Circuit,
    Cinc,
    ControlledU,
    Dims,
    Multiplexor,
    UcrX,
    count_gates,
    sigma,
    simulate,
)
from hdsynth.counting import cinc_upper_bound, odd_counts, partition_tree
from hdsynth.numerics import NotUnitaryError, haar_random_unitary
from hdsynth.synthesis import (
    SynthOptions,
    csd_step,
    decompose_recursive,
    eliminate_commuting,
    lower_to_cinc,
    split_zv,
    synth_unitary,
    v_support,
)


def ucrx_oracle(g, n):
    return scipy.linalg.expm(-1j * np.kron(sigma("x", g.i, g.j, n), np.diag(g.angles)))


def expected_eliminations(n):
    return sum(2 ** (k - 1) * c for k, c in enumerate(odd_counts(n), start=1))


def pair_sets(c):
    _, vs = split_zv(c)
    return [sorted((g.i, g.j) for g in v) for v in vs]


class TestCsdStep:
    def test_identity(self):
        r = csd_step(np.eye(6), 3, 2)
        for g in r.v_factors:
            np.testing.assert_array_equal(g.angles, 0)
        np.testing.assert_allclose(r.u @ r.u_prime, np.eye(6), atol=1e-14)

    def test_block_diagonal(self):
        x = scipy.linalg.block_diag(haar_random_unitary(4, 1), haar_random_unitary(6, 2))
        r = csd_step(x, 5, 2)
        for g in r.v_factors:
            np.testing.assert_allclose(g.angles, 0, atol=1e-12)
        assert np.linalg.norm(r.u @ r.u_prime - x) <= 1e-12

    def test_five_levels(self):
        x = haar_random_unitary(10, 3)
        r = csd_step(x, 5, 2)
        assert [(g.i, g.j) for g in r.v_factors] == [(1, 3), (2, 4)]
        assert np.linalg.norm(r.reconstruct() - x) <= 1e-9 * np.sqrt(10)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(2, 6), m=st.integers(2, 3), seed=st.integers(0, 2**31))
    def test_invariants(self, n, m, seed):
        x = haar_random_unitary(n * m, seed)
        r = csd_step(x, n, m)
        assert len(r.v_factors) == n // 2
        assert np.linalg.norm(r.reconstruct() - x) <= 1e-9 * np.sqrt(n * m)
        v = np.eye(n * m, dtype=complex)
        for g in r.v_factors:
            assert g.j == n // 2 + g.i
            assert np.all(g.angles >= 0) and np.all(g.angles <= np.pi / 2)
            v = v @ ucrx_oracle(g, n)
        np.testing.assert_allclose(r.v_matrix(), v, atol=1e-10)
        # u and u' are block diagonal on the (n1 m, n2 m) split
        p = (n // 2) * m
        for a in (r.u, r.u_prime):
            assert np.allclose(a[:p, p:], 0) and np.allclose(a[p:, :p], 0)

    def test_rejects_size_mismatch(self):
        with pytest.raises(ValueError):
            csd_step(np.eye(6), 4, 2)


class TestDecompose:
    def test_qubit_pair(self):
        c = decompose_recursive(haar_random_unitary(4, 0), Dims(2, 2))
        assert [g.kind for g in c] == ["multiplexor", "ucr_x", "multiplexor"]
        assert c.level == L2

    def test_three_levels(self):
        c = decompose_recursive(haar_random_unitary(6, 0), Dims(3, 2))
        assert pair_sets(c) == [[(2, 3)], [(1, 2)], [(2, 3)]]

    def test_five_levels_pair_sets(self):
        c = decompose_recursive(haar_random_unitary(10, 0), Dims(5, 2))
        v3, v2, v1 = [(4, 5)], [(1, 2), (3, 4)], [(1, 3), (2, 4)]
        assert pair_sets(c) == [v3, v2, v3, v1, v3, v2, v3]

    @pytest.mark.parametrize("n", range(2, 9))
    def test_structure_law(self, n):
        m = 2
        x = haar_random_unitary(n * m, n)
        c = decompose_recursive(x, Dims(n, m))
        zs, vs = split_zv(c)
        d = partition_tree(n).d
        assert len(zs) == 2**d and len(vs) == 2**d - 1
        assert np.linalg.norm(simulate(c) - x) <= 1e-9 * np.sqrt(n * m)

    def test_v_blocks_match_exponentials(self):
        n, m = 5, 3
        c = decompose_recursive(haar_random_unitary(15, 8), Dims(n, m))
        _, vs = split_zv(c)
        for v in vs:
            got = simulate(Circuit(c.dims, v))
            want = np.eye(n * m, dtype=complex)
            for g in v:
                want = ucrx_oracle(g, n) @ want
            assert np.linalg.norm(got - want) <= 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitaryError):
            decompose_recursive(np.ones((4, 4)), Dims(2, 2))
        with pytest.raises(ValueError):
            decompose_recursive(np.eye(6), Dims(2, 2))


class TestElimination:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_count_and_soundness(self, n):
        m = 2
        c = decompose_recursive(haar_random_unitary(n * m, 50 + n), Dims(n, m))
        out, eliminated = eliminate_commuting(c)
        assert eliminated == expected_eliminations(n)
        assert np.linalg.norm(simulate(out) - simulate(c)) <= 1e-10 * np.sqrt(n * m)

    @pytest.mark.parametrize("n,expect", [(3, 3), (4, 0), (5, 15)])
    def test_examples(self, n, expect):
        c = decompose_recursive(haar_random_unitary(n * 3, 1), Dims(n, 3))
        assert eliminate_commuting(c)[1] == expect

    def test_controlled_factors_stay_on_support(self):
        c = decompose_recursive(haar_random_unitary(10, 2), Dims(5, 2))
        out, _ = eliminate_commuting(c)
        # application order: ... V-block, controlled factors, LocalB pivot, next V-block ...
        support, checked = set(), 0
        for g in out.gates:
            if isinstance(g, UcrX):
                support |= {g.i, g.j}
            elif isinstance(g, ControlledU):
                assert g.control_level in support
                checked += 1
            elif g.kind == "local_b":
                support = set()
        assert checked == 7 * 4 - 15  # 7 V-blocks, n - 1 factors each, 15 eliminated

    def test_rejects_malformed(self):
        d = Dims(2, 2)
        mux = Multiplexor([np.eye(2)] * 2)
        v = UcrX(1, 2, [0.1, 0.2])
        for gates in ([v, mux], [mux, v], [mux, mux], [mux, Cinc(1), mux], []):
            with pytest.raises(ValueError, match="malformed"):
                eliminate_commuting(Circuit(d, gates))

    def test_support(self):
        assert v_support([UcrX(1, 3, [0, 0]), UcrX(2, 4, [0, 0])]) == {1, 2, 3, 4}


class TestLowering:
    def test_relocation(self):
        u = haar_random_unitary(3, 4)
        c = Circuit(Dims(3, 3), [ControlledU(1, u)])
        low = lower_to_cinc(c)
        assert low.level == L3
        cincs = [g for g in low if isinstance(g, Cinc)]
        assert len(cincs) == 2 and all(g.control_level == 3 for g in cincs)
        assert np.linalg.norm(simulate(low) - simulate(c)) <= 1e-10 * 3

    def test_locals_merged(self):
        c = decompose_recursive(haar_random_unitary(8, 4), Dims(4, 2))
        low = lower_to_cinc(c)
        kinds = [g.kind for g in low]
        for a, b in zip(kinds, kinds[1:]):
            assert not (a == b and a != "cinc")
        assert {k for k in kinds} <= {"local_a", "local_b", "cinc"}


class TestPipeline:
    def test_identity_pruned_is_empty(self):
        c, rep = synth_unitary(np.eye(9), Dims(3, 3), SynthOptions(prune_identity=True))
        assert len(c) == 0 and rep.cinc_count == 0 and rep.reconstruction_error == 0

    @pytest.mark.parametrize("dims,expect", [((5, 3), 74), ((7, 2), 166), ((4, 2), 48), ((2, 3), 8)])
    def test_published_counts(self, dims, expect):
        d = Dims(*dims)
        x = haar_random_unitary(d.total, 12)
        c, rep = synth_unitary(x, d)
        assert rep.cinc_count == expect == count_gates(c)["cinc"]
        assert rep.reconstruction_error <= 1e-8 * np.sqrt(d.total)
        assert all(g.control_level == d.n for g in c if isinstance(g, Cinc))

    @pytest.mark.parametrize("n", range(2, 17))
    def test_count_law(self, n):
        for m in (2, 3) if n <= 8 else (2,):
            d = Dims(n, m)
            x = haar_random_unitary(d.total, 1000 + n)
            _, rep = synth_unitary(x, d)
            assert rep.cinc_count == cinc_upper_bound(n)
            assert rep.reconstruction_error <= 1e-8 * np.sqrt(d.total)

    def test_without_elimination(self):
        d = Dims(5, 2)
        x = haar_random_unitary(10, 3)
        _, rep = synth_unitary(x, d, SynthOptions(run_elimination=False))
        assert rep.cinc_count == 74 + 2 * 15 and rep.eliminated == 0

    def test_pruning_never_increases_count(self):
        d = Dims(5, 2)
        x = scipy.linalg.block_diag(haar_random_unitary(4, 1), haar_random_unitary(6, 2))
        _, rep = synth_unitary(x, d, SynthOptions(prune_identity=True))
        assert rep.cinc_count <= cinc_upper_bound(5)
        assert rep.reconstruction_error <= 1e-8 * np.sqrt(10)

    def test_l2_target(self):
        d = Dims(3, 2)
        c, rep = synth_unitary(haar_random_unitary(6, 2), d, SynthOptions(target_level=L2))
        assert c.level == L2 and rep.eliminated == 3
        assert rep.reconstruction_error <= 1e-8 * np.sqrt(6)

    def test_report_fields(self):
        _, rep = synth_unitary(haar_random_unitary(6, 2), Dims(3, 2))
        doc = rep.as_dict()
        for key in ("cinc_count", "eliminated", "reconstruction_error", "partition_tree", "per_kind_counts"):
            assert key in doc
        assert doc["partition_tree"] == [[3], [1, 2]]

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitaryError) as info:
            synth_unitary(np.diag([1, 1, 1, 1.1]), Dims(2, 2))
        assert info.value.defect > 0.1

    def test_bad_option(self):
        with pytest.raises(ValueError):
            SynthOptions(target_level="L9")
