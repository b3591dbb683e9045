import random

import numpy as np
import pytest
import scipy.stats

from glens.errors import DegenerateSample, EmptyInput, MissingSplit
from glens.stats_report import (
    GroupStats,
    accuracy_table,
    aggregate_perplexity,
    aggregate_pss,
    category_distribution,
    group_stats,
    pss_significance,
    regularized_incomplete_beta,
    t_two_sided_p,
    welch_t_test,
)


def rec(category, score=None, model="m", split="synthetic-icon", pass_label="full",
        perplexity=None):
    r = {"model_id": model, "category": category, "split": split, "pass": pass_label}
    if score is not None:
        r["pss"] = {"score": score}
    if perplexity is not None:
        r["perplexity"] = perplexity
    return r


class TestGroupStats:
    def test_identical_values(self):
        s = group_stats([0.5, 0.5, 0.5])
        assert s == GroupStats(3, 0.5, 0.0)

    def test_hand_computed(self):
        s = group_stats([0.2, 0.4, 0.6])
        assert s.n == 3
        assert s.mean == pytest.approx(0.4, abs=1e-15)
        assert s.std == pytest.approx(0.2, abs=1e-12)

    def test_single_value_has_no_std(self):
        s = group_stats([0.7])
        assert s.n == 1 and s.std is None

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            group_stats([])

    def test_order_invariant_exactly(self):
        values = [random.Random(4).uniform(0, 1) for _ in range(500)]
        shuffled = list(values)
        random.Random(5).shuffle(shuffled)
        a, b = group_stats(values), group_stats(shuffled)
        assert a.mean == b.mean and a.std == b.std  # fsum makes this exact


class TestIncompleteBeta:
    def test_against_scipy(self):
        rng = np.random.Generator(np.random.PCG64(17))
        for _ in range(300):
            a = float(rng.uniform(0.2, 50))
            b = float(rng.uniform(0.2, 50))
            x = float(rng.uniform(0, 1))
            ours = regularized_incomplete_beta(a, b, x)
            ref = scipy.stats.beta.cdf(x, a, b)
            assert ours == pytest.approx(ref, abs=1e-10)

    def test_endpoints(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_t_tail_against_scipy(self):
        rng = np.random.Generator(np.random.PCG64(18))
        for _ in range(300):
            t = float(rng.normal(0, 3))
            dof = float(rng.uniform(1, 200))
            assert t_two_sided_p(t, dof) == pytest.approx(
                2 * scipy.stats.t.sf(abs(t), dof), abs=1e-10
            )


class TestWelch:
    def test_identical_groups(self):
        a = [1.0, 2.0, 3.0]
        r = welch_t_test(a, list(a))
        assert r.t == 0.0
        assert r.p == 1.0
        assert not r.significant

    def test_known_pair_against_reference(self):
        a = [1.0, 2.0, 3.0, 4.0, 5.0]
        b = [2.0, 3.0, 4.0, 5.0, 6.0]
        ref = scipy.stats.ttest_ind(a, b, equal_var=False)
        r = welch_t_test(a, b)
        assert r.t == pytest.approx(ref.statistic, abs=1e-9)
        assert r.p == pytest.approx(ref.pvalue, abs=1e-9)

    def test_random_pairs_against_reference(self):
        rng = np.random.Generator(np.random.PCG64(19))
        for _ in range(100):
            n1 = int(rng.integers(2, 60))
            n2 = int(rng.integers(2, 60))
            a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), n1).tolist()
            b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), n2).tolist()
            ref = scipy.stats.ttest_ind(a, b, equal_var=False)
            r = welch_t_test(a, b)
            assert r.t == pytest.approx(ref.statistic, abs=1e-9)
            assert r.p == pytest.approx(ref.pvalue, abs=1e-9)
            assert r.dof == pytest.approx(ref.df, abs=1e-9)

    def test_pooled_variant_against_reference(self):
        rng = np.random.Generator(np.random.PCG64(20))
        a = rng.normal(0, 1, 20).tolist()
        b = rng.normal(0.5, 1, 25).tolist()
        ref = scipy.stats.ttest_ind(a, b, equal_var=True)
        r = welch_t_test(a, b, pooled=True)
        assert r.t == pytest.approx(ref.statistic, abs=1e-9)
        assert r.p == pytest.approx(ref.pvalue, abs=1e-9)
        assert r.dof == len(a) + len(b) - 2

    def test_swap_negates_t_preserves_p(self):
        rng = np.random.Generator(np.random.PCG64(22))
        a = rng.normal(0, 1, 12).tolist()
        b = rng.normal(1, 2, 9).tolist()
        r1, r2 = welch_t_test(a, b), welch_t_test(b, a)
        assert r1.t == pytest.approx(-r2.t, abs=1e-12)
        assert r1.p == pytest.approx(r2.p, abs=1e-12)
        assert r1.dof == pytest.approx(r2.dof, abs=1e-12)

    def test_degenerate_sample(self):
        with pytest.raises(DegenerateSample):
            welch_t_test([1.0, 1.0, 1.0], [2.0, 2.0])

    def test_too_small(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0], [1.0, 2.0])


class TestAggregatePss:
    def test_identical_scores(self):
        records = [rec("correct", 0.5)] * 3
        out = aggregate_pss(records)
        assert out["correct"] == GroupStats(3, 0.5, 0.0)

    def test_misleading_and_confusion_merge(self):
        records = [
            rec("misleading", 0.2),
            rec("confusion", 0.4),
            rec("correct", 0.9),
        ]
        out = aggregate_pss(records)
        assert set(out) == {"correct", "other"}
        assert out["other"].n == 2
        assert out["other"].mean == pytest.approx(0.3)

    def test_merge_equals_premerged_stream(self):
        rng = np.random.Generator(np.random.PCG64(23))
        cats = ["misleading", "confusion"]
        records = [rec(cats[int(rng.integers(0, 2))], float(rng.uniform(0, 1)))
                   for _ in range(200)]
        merged = aggregate_pss(records)["other"]
        pre = aggregate_pss([rec("confusion", r["pss"]["score"]) for r in records])
        assert merged == pre["other"]

    def test_empty_categories_absent(self):
        out = aggregate_pss([rec("biased", 0.4), rec("biased", 0.6)])
        assert set(out) == {"biased"}

    def test_unscored_records_skipped(self):
        out = aggregate_pss([rec("correct", 0.5), rec("correct")])
        assert out["correct"].n == 1

    def test_order_invariance(self):
        rng = np.random.Generator(np.random.PCG64(24))
        records = [
            rec(["correct", "biased", "confusion"][int(rng.integers(0, 3))],
                float(rng.uniform(0, 1)))
            for _ in range(300)
        ]
        shuffled = list(records)
        random.Random(6).shuffle(shuffled)
        assert aggregate_pss(records) == aggregate_pss(shuffled)


class TestSignificance:
    def test_pairs_present(self):
        rng = np.random.Generator(np.random.PCG64(25))
        records = (
            [rec("correct", float(v)) for v in rng.normal(0.6, 0.1, 30)]
            + [rec("biased", float(v)) for v in rng.normal(0.55, 0.1, 30)]
            + [rec("confusion", float(v)) for v in rng.normal(0.3, 0.1, 30)]
        )
        out = pss_significance(records)
        assert set(out) == {"biased_vs_correct", "other_vs_correct", "biased_vs_other"}
        assert out["other_vs_correct"].significant

    def test_missing_group_is_none(self):
        out = pss_significance([rec("correct", 0.5), rec("correct", 0.6)])
        assert out["biased_vs_correct"] is None


class TestCategoryDistribution:
    def test_single_record(self):
        out = category_distribution([rec("correct")])
        assert out["m"]["correct"] == 1.0
        assert out["m"]["misleading"] == 0.0

    def test_hand_counted(self):
        records = [rec("correct"), rec("correct"), rec("biased"), rec("confusion")]
        out = category_distribution(records)["m"]
        assert out == {
            "correct": 0.5, "biased": 0.25, "misleading": 0.0, "confusion": 0.25,
        }

    def test_sums_to_one_per_model(self):
        rng = np.random.Generator(np.random.PCG64(26))
        cats = ["correct", "biased", "misleading", "confusion"]
        records = [
            rec(cats[int(rng.integers(0, 4))], model=f"m{int(rng.integers(0, 3))}")
            for _ in range(500)
        ]
        for dist in category_distribution(records).values():
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(v >= 0 for v in dist.values())

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            category_distribution([])


class TestAccuracyTable:
    def test_all_correct_single_split(self):
        records = [rec("correct", split="desktop-icon") for _ in range(4)]
        splits, rows = accuracy_table(records)
        assert splits == ["desktop-icon"]
        assert rows[0].by_split["desktop-icon"] == 100.0
        assert rows[0].average == 100.0

    def test_three_of_four(self):
        records = [rec("correct")] * 3 + [rec("biased")]
        _, rows = accuracy_table(records)
        assert rows[0].by_split["synthetic-icon"] == 75.0

    def test_unweighted_vs_weighted_average(self):
        records = (
            [rec("correct", split="a")] * 1
            + [rec("biased", split="a")] * 9          # a: 10%, n=10
            + [rec("correct", split="b")] * 9
            + [rec("biased", split="b")] * 1          # b: 90%, n=10... now unbalance
            + [rec("correct", split="b")] * 80        # b: 89/90
        )
        _, rows_u = accuracy_table(records)
        _, rows_w = accuracy_table(records, weighted=True)
        unweighted = (10.0 + 100.0 * 89 / 90) / 2
        weighted = 100.0 * 90 / 100
        assert rows_u[0].average == pytest.approx(unweighted, abs=1e-9)
        assert rows_w[0].average == pytest.approx(weighted, abs=1e-9)

    def test_missing_split(self):
        records = [rec("correct", split="a")]
        with pytest.raises(MissingSplit):
            accuracy_table(records, splits=["a", "b"])

    def test_full_pass_sorts_before_crop(self):
        records = [
            rec("correct", pass_label="crop"),
            rec("correct", pass_label="full"),
        ]
        _, rows = accuracy_table(records)
        assert [r.pass_label for r in rows] == ["full", "crop"]


class TestAggregatePerplexity:
    def test_grouped_unmerged(self):
        records = [
            rec("misleading", perplexity=1.3),
            rec("confusion", perplexity=1.33),
            rec("correct", perplexity=1.12),
        ]
        out = aggregate_perplexity(records)
        assert set(out) == {"misleading", "confusion", "correct"}
        assert out["correct"].mean == pytest.approx(1.12)
