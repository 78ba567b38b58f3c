import numpy as np
import pytest

from evidex.errors import SinkhornUnderflowError, TransportError
from evidex.textproc import build_document
from evidex.transport import (
    CostMatrix,
    backend_name,
    cost_matrix,
    emd_exact,
    epsilon_for,
    get_kernels,
    sinkhorn,
    wmd,
    wrd,
)

from conftest import make_table, random_ot_instance
from oracles import min_cost_transport


def doc(tokens, table):
    return build_document(tokens, table)


class TestCostMatrix:
    def test_one_dimensional_distances(self):
        table = make_table({"x": [0.0], "u": [0.0], "v": [2.0]})
        a = doc(["x"], table)
        b = doc(["u", "v"], table)
        assert np.array_equal(cost_matrix(a, b, table).costs, [[0.0, 2.0]])

    def test_identical_documents_zero_diagonal(self):
        table = make_table({"p": [1.0, 2.0], "q": [-1.0, 0.5], "r": [3.0, 3.0]})
        d = doc(["p", "q", "r"], table)
        costs = cost_matrix(d, d, table).costs
        assert np.array_equal(np.diag(costs), [0.0, 0.0, 0.0])

    def test_three_four_five(self):
        table = make_table({"p": [0.0, 3.0], "q": [4.0, 0.0]})
        a, b = doc(["p"], table), doc(["q"], table)
        assert np.array_equal(cost_matrix(a, b, table).costs, [[5.0]])

    def test_rejects_negative_costs(self):
        with pytest.raises(TransportError):
            CostMatrix(np.array([[-0.1]]))


class TestExactSolver:
    def test_two_by_two(self):
        r = emd_exact([0.5, 0.5], [0.5, 0.5], [[0.0, 2.0], [1.0, 1.0]])
        assert r.distance == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(r.plan.mass, [[0.5, 0.0], [0.0, 0.5]], atol=1e-12)
        assert r.iterations == 0
        assert r.converged

    def test_single_mass(self):
        assert emd_exact([1.0], [1.0], [[3.7]]).distance == pytest.approx(3.7)

    def test_identical_marginals_zero_diagonal(self):
        w = [0.2, 0.3, 0.5]
        C = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]])
        assert emd_exact(w, w, C).distance == 0.0

    def test_marginal_sum_mismatch(self):
        with pytest.raises(TransportError, match="marginal sums"):
            emd_exact([0.7, 0.7], [0.5, 0.5], [[1.0, 1.0], [1.0, 1.0]])

    def test_dimension_mismatch(self):
        with pytest.raises(TransportError, match="dimension mismatch"):
            emd_exact([0.5, 0.5], [1.0], [[1.0], [1.0], [1.0]])

    def test_nonpositive_weights(self):
        with pytest.raises(TransportError, match="strictly positive"):
            emd_exact([1.0, 0.0], [0.5, 0.5], [[1.0, 1.0], [1.0, 1.0]])

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(202)
        for _ in range(40):
            a, b, C = random_ot_instance(rng)
            assert emd_exact(a, b, C).distance == pytest.approx(
                min_cost_transport(a, b, C), abs=1e-9
            )

    def test_plan_marginals(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            a, b, C = random_ot_instance(rng, max_side=7)
            plan = emd_exact(a, b, C).plan
            assert np.abs(plan.mass.sum(axis=1) - a).max() < 1e-9
            assert np.abs(plan.mass.sum(axis=0) - b).max() < 1e-9
            assert plan.mass.sum() == pytest.approx(1.0, abs=1e-9)
            assert (plan.mass >= 0).all()

    def test_dual_certificate(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            a, b, C = random_ot_instance(rng, max_side=7)
            r = emd_exact(a, b, C)
            u, v = r.potentials
            reduced = C - u[:, None] - v[None, :]
            assert reduced.min() >= -1e-9
            on_support = np.abs(reduced[r.plan.mass > 1e-12])
            assert on_support.max(initial=0.0) <= 1e-9


class TestSinkhorn:
    def test_two_by_two_near_exact(self):
        r = sinkhorn([0.5, 0.5], [0.5, 0.5], [[0.0, 2.0], [1.0, 1.0]],
                     epsilon=0.01, tol=1e-4)
        assert abs(r.distance - 0.5) < 0.01
        assert r.converged

    def test_default_tolerance_converges_generically(self):
        rng = np.random.default_rng(77)
        a, b, C = random_ot_instance(rng)
        r = sinkhorn(a, b, C, epsilon=0.1 * np.median(C))
        assert r.converged
        assert r.iterations < 10000

    def test_maximal_entropy_limit(self):
        a = np.array([0.4, 0.6])
        b = np.array([0.3, 0.2, 0.5])
        C = np.array([[1.0, 2.0, 0.5], [0.7, 1.1, 3.0]])
        r = sinkhorn(a, b, C, epsilon=1e6 * C.max())
        outer = np.outer(a, b)
        assert np.abs(r.plan.mass - outer).max() < 1e-4
        assert r.distance == pytest.approx((outer * C).sum(), rel=1e-3)

    def test_identical_documents_lower_bound(self):
        w = [0.5, 0.5]
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        r = sinkhorn(w, w, C, epsilon=0.05)
        assert 0.0 <= r.distance <= 0.0 + 10 * 0.05

    def test_never_below_exact(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            a, b, C = random_ot_instance(rng)
            exact = emd_exact(a, b, C).distance
            for rel in (1.0, 0.1, 0.01):
                r = sinkhorn(a, b, C, epsilon=rel * float(np.median(C)))
                assert r.distance >= exact - 1e-9

    def test_epsilon_monotone_accuracy(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            a, b, C = random_ot_instance(rng)
            exact = emd_exact(a, b, C).distance
            med = float(np.median(C))
            errs = [
                abs(sinkhorn(a, b, C, epsilon=rel * med).distance - exact)
                for rel in (1.0, 0.1, 0.01)
            ]
            assert errs[0] >= errs[1] - 1e-12
            assert errs[1] >= errs[2] - 1e-12

    def test_plan_marginals_tight(self):
        rng = np.random.default_rng(10)
        a, b, C = random_ot_instance(rng, max_side=6)
        plan = sinkhorn(a, b, C, epsilon=0.05 * float(np.median(C))).plan
        assert np.abs(plan.mass.sum(axis=1) - a).max() < 1e-9
        assert np.abs(plan.mass.sum(axis=0) - b).max() < 1e-9
        assert plan.mass.sum() == pytest.approx(1.0, abs=1e-9)

    def test_plain_mode_underflow(self):
        # Row 0 of exp(-C/eps) underflows entirely in plain mode.
        C = np.array([[5000.0, 4000.0], [1.0, 0.0]])
        with pytest.raises(SinkhornUnderflowError, match="log-domain"):
            sinkhorn([0.5, 0.5], [0.5, 0.5], C, epsilon=1.0, log_domain=False)
        # Log-domain handles the same instance.
        exact = emd_exact([0.5, 0.5], [0.5, 0.5], C).distance
        r = sinkhorn([0.5, 0.5], [0.5, 0.5], C, epsilon=1.0)
        assert r.distance == pytest.approx(exact, abs=0.1)

    def test_plain_mode_matches_log_mode(self):
        rng = np.random.default_rng(12)
        a, b, C = random_ot_instance(rng)
        eps = 0.5 * float(np.median(C))
        r_log = sinkhorn(a, b, C, epsilon=eps)
        r_plain = sinkhorn(a, b, C, epsilon=eps, log_domain=False)
        assert r_plain.distance == pytest.approx(r_log.distance, abs=1e-9)

    def test_invalid_epsilon(self):
        with pytest.raises(TransportError, match="epsilon"):
            sinkhorn([1.0], [1.0], [[1.0]], epsilon=0.0)


class TestEpsilonFor:
    def test_median_scaling(self):
        c = CostMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert epsilon_for(c, 0.05) == pytest.approx(0.05 * 2.5)

    def test_zero_median_falls_back_to_mean(self):
        c = CostMatrix(np.array([[0.0, 0.0], [0.0, 4.0]]))
        assert epsilon_for(c, 0.05) == pytest.approx(0.05 * 1.0)

    def test_all_zero_costs(self):
        c = CostMatrix(np.zeros((2, 2)))
        assert epsilon_for(c, 0.05) == 0.05


class TestWMD:
    def test_self_distance_zero(self):
        table = make_table({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0]})
        d = doc(["a", "b", "b", "c"], table)
        assert wmd(d, d, table) == 0.0

    def test_one_word_documents(self):
        table = make_table({"cat": [1.0, 2.0], "dog": [4.0, -2.0]})
        a, b = doc(["cat"], table), doc(["dog"], table)
        assert wmd(a, b, table) == pytest.approx(5.0)

    def test_matches_oracle_on_4x4_support(self):
        rng = np.random.default_rng(21)
        vocab = {f"w{i}": rng.normal(size=4).tolist() for i in range(8)}
        table = make_table(vocab)
        a = doc(["w0", "w1", "w1", "w2", "w3"], table)
        b = doc(["w4", "w5", "w6", "w6", "w7"], table)
        C = cost_matrix(a, b, table)
        assert wmd(a, b, table) == pytest.approx(
            min_cost_transport(a.weights, b.weights, C.costs), abs=1e-9
        )

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(22)
        vocab = {f"w{i}": rng.normal(size=4).tolist() for i in range(12)}
        table = make_table(vocab)
        names = list(vocab)
        for _ in range(15):
            docs = []
            for _ in range(3):
                k = int(rng.integers(2, 6))
                docs.append(doc(list(rng.choice(names, size=k)), table))
            a, b, c = docs
            dab, dba = wmd(a, b, table), wmd(b, a, table)
            assert abs(dab - dba) <= 1e-12 * max(dab, 1.0)
            assert wmd(a, c, table) <= dab + wmd(b, c, table) + 1e-9
            assert wmd(a, a, table) == 0.0


class TestWRD:
    def test_self_distance(self):
        table = make_table({"a": [1.0, 2.0], "b": [3.0, -1.0]})
        d = doc(["a", "b"], table)
        assert wrd(d, d, table) == 0.0

    def test_parallel_vectors_scale_invariant(self):
        table = make_table({"long": [2.0, 4.0], "short": [1.0, 2.0]})
        a, b = doc(["long"], table), doc(["short"], table)
        assert wrd(a, b, table) == 0.0

    def test_orthogonal_vectors(self):
        table = make_table({"x": [1.0, 0.0], "y": [0.0, 1.0]})
        a, b = doc(["x"], table), doc(["y"], table)
        assert wrd(a, b, table) == pytest.approx(1.0)

    def test_zero_norm_vector_named(self):
        table = make_table({"ghost": [0.0, 0.0], "real": [1.0, 0.0]})
        a, b = doc(["ghost"], table), doc(["real"], table)
        with pytest.raises(TransportError, match="ghost"):
            wrd(a, b, table)


class TestBackends:
    def test_backend_reports_name(self):
        assert backend_name() in {"python", "compiled"}

    def test_backends_agree_bitwise_on_emd(self):
        try:
            compiled = get_kernels("compiled")
        except ImportError:
            pytest.skip("compiled kernels not built")
        python = get_kernels("python")
        rng = np.random.default_rng(31)
        for _ in range(25):
            a, b, C = random_ot_instance(rng, max_side=8)
            b = b * (a.sum() / b.sum())
            pc = compiled.emd_kernel(a, b, C)
            pp = python.emd_kernel(a, b, C)
            assert np.array_equal(pc[0], pp[0])
            assert pc[4] == pp[4] == 0

    def test_backends_agree_on_sinkhorn(self):
        try:
            compiled = get_kernels("compiled")
        except ImportError:
            pytest.skip("compiled kernels not built")
        python = get_kernels("python")
        rng = np.random.default_rng(32)
        a, b, C = random_ot_instance(rng)
        b = b * (a.sum() / b.sum())
        eps = 0.1 * float(np.median(C))
        rc = compiled.sinkhorn_log_kernel(a, b, C, eps, 1e-6, 10000)
        rp = python.sinkhorn_log_kernel(a, b, C, eps, 1e-6, 10000)
        assert np.abs(rc[0] - rp[0]).max() < 1e-12
        assert rc[1] == rp[1]
