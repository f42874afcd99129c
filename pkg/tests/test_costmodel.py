import math

import numpy as np
import pytest

from clusterforest import (
    Dataset,
    clustering_cost,
    eval_cost,
    kp_load_cost,
    measure_norms,
    retrain_cost_breakdown,
    weights_update_cost,
)


def flog2(x):
    return max(1.0, math.log2(x)) if x > 0 else 1.0


class TestEvalCost:
    def test_unit(self):
        assert eval_cost(1, 1, 1) == 1

    def test_porto_parameters(self):
        assert eval_cost(4, 2, 38) == 304

    def test_linear_in_d(self):
        assert eval_cost(3, 2, 20) == 2 * eval_cost(3, 2, 10)


class TestKpLoadCost:
    def test_two_cells(self):
        assert kp_load_cost(2, 1) == 2.0  # log2(2) = 1

    def test_formula_value(self):
        n, d = 10**6, 10
        assert kp_load_cost(n, d) == pytest.approx(n * d * math.log2(n * d) ** 2)

    def test_doubling_ratio_slightly_above_two(self):
        r = kp_load_cost(2000, 10) / kp_load_cost(1000, 10)
        assert 2.0 < r < 2.5


class TestClusteringCost:
    def test_all_ones_is_positive(self):
        assert clustering_cost(1, 1, 1, 1, 1, 1.0, 1.0, 0.5, 2, 1.0, 1.0) > 0.0

    def test_linear_in_iterations(self):
        a = clustering_cost(100, 5, 2, 10, 2, 0.1, 0.1, 0.1, 8, 1.0, 1.0)
        b = clustering_cost(100, 5, 2, 20, 2, 0.1, 0.1, 0.1, 8, 1.0, 1.0)
        assert b == pytest.approx(2.0 * a)

    def test_k_growth_factor(self):
        # independent transcription of the displayed expression
        def oracle(k):
            return (
                flog2(100 * 5) ** 2
                * 10
                * 2
                * k ** (3 * 2)
                * 5
                * flog2(k) ** 2
                * flog2(8) ** 2
                * flog2(1 / 0.1) ** 2
                / (0.1**2 * 0.1)
            )

        a = clustering_cost(100, 5, 2, 10, 2, 0.1, 0.1, 0.1, 8, 1.0, 1.0)
        b = clustering_cost(100, 5, 3, 10, 2, 0.1, 0.1, 0.1, 8, 1.0, 1.0)
        assert a == pytest.approx(oracle(2))
        assert b == pytest.approx(oracle(3))
        # the k^(3D) part alone contributes (3/2)^6
        assert (b / a) == pytest.approx((3 / 2) ** 6 * (flog2(3) / flog2(2)) ** 2)


class TestRetrainBreakdown:
    def test_empty_batch_components_vanish(self):
        out = retrain_cost_breakdown(n=1000, n_new=0, d=10, k=2, n_iter=5, depth=2)
        assert out["load_new"] == 0.0
        assert out["weights_update"] == 0.0
        assert out["clustering"] > 0.0
        assert out["leaf_label"] > 0.0

    def test_eta_vs_pearson_ratio_is_class_count(self):
        eta = weights_update_cost(100, 7, 5, "eta")
        pearson = weights_update_cost(100, 7, 5, "pearson")
        assert eta / pearson == 5.0

    def test_full_breakdown_against_oracle(self):
        n, n_new, d, k, K, D, M = 10**5, 10**3, 38, 4, 1000, 2, 2
        eps = 0.1
        p = 16
        out = retrain_cost_breakdown(
            n=n, n_new=n_new, d=d, k=k, n_iter=K, depth=D, n_classes=M, weight_method="eta",
            eps1=eps, eps2=eps, eps3=eps, delta=eps, p=p, eta1=1.0, eta2=1.0, eta3=1.0,
        )
        nt = n + n_new
        # spreadsheet-style recomputation of each component
        assert out["load_new"] == pytest.approx(n_new * d * flog2(n_new * d) ** 2)
        assert out["weights_update"] == pytest.approx(n_new * d * M)
        c1 = (
            K * D * k ** (3 * D) * d * flog2(k) ** 2 * flog2(p) ** 2 * flog2(1 / eps) ** 2
        ) / (eps**2 * eps)
        assert out["clustering"] == pytest.approx(flog2(nt * d) ** 2 * c1)
        c2 = (D * k ** (3 * D) * d * flog2(k) * flog2(p) * flog2(1 / eps)) / (eps * eps)
        c3 = c2 * M * flog2(nt * flog2(M)) * flog2(M)
        assert out["leaf_label"] == pytest.approx(flog2(nt * d) ** 2 * c3)

    def test_monotone_in_each_size_parameter(self):
        base = dict(n=1000, n_new=100, d=10, k=2, n_iter=10, depth=2, n_classes=2)
        grids = {
            "n": [1000, 4000, 16000],
            "n_new": [100, 400, 1600],
            "d": [10, 20, 40],
            "k": [2, 3, 4],
            "n_iter": [10, 20, 40],
            "depth": [2, 3, 4],
            "n_classes": [2, 4, 8],
        }
        for param, values in grids.items():
            totals = []
            for v in values:
                kwargs = dict(base)
                kwargs[param] = v
                out = retrain_cost_breakdown(**kwargs)
                totals.append(sum(out.values()))
            assert totals == sorted(totals), f"not monotone in {param}: {totals}"

    def test_weights_update_independent_of_history_size(self):
        a = retrain_cost_breakdown(n=10**4, n_new=100, d=10, k=2, n_iter=5, depth=2)
        b = retrain_cost_breakdown(n=10**7, n_new=100, d=10, k=2, n_iter=5, depth=2)
        assert a["weights_update"] == b["weights_update"]
        assert a["load_new"] == b["load_new"]


class TestMeasureNorms:
    def test_direct_formulas(self):
        ds = Dataset(np.array([[3.0, 4.0], [1.0, 0.0]]), np.array([2.0, 1.0]), ())
        norms = measure_norms(ds)
        assert norms["eta1"] == 25.0  # max row norm squared: (3,4)
        assert norms["eta2"] == 4.0  # column norms: sqrt(10) and 4
        assert norms["eta3"] == pytest.approx(math.sqrt(5.0))
