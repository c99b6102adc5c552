from collections import Counter

import pytest
from scipy.stats import chisquare

from vasrp.bootstrap import (
    SamplingPlan,
    aggregate,
    bootstrap_profiles,
    profile_parameters,
    stratified_resample,
)
from vasrp.distributions import make_rng
from vasrp.pipeline import HyperParams, ResponseRecord, dataset_from_values, estimate_profile, normalize
from vasrp.simulation import condition_by_id, sample_condition


def build_dataset(item_sizes, polarities=None, seed=0):
    rng = make_rng(seed, 900)
    polarities = polarities or {item: "unipolar" for item in item_sizes}
    recs = []
    for item, size in item_sizes.items():
        for v in rng.uniform(5.0, 95.0, size):
            recs.append(ResponseRecord("u", item, polarities[item], float(v), 0.0, 100.0))
    return normalize(recs)


def unbalanced_cohort_dataset(seed=0):
    sizes = {"valence": 66, "arousal": 68, "fatigue": 13, "stress": 13,
             "anxiety": 14, "depression": 13, "sleepiness": 12}
    pol = {"valence": "bipolar", "arousal": "bipolar", "fatigue": "unipolar",
           "stress": "unipolar", "anxiety": "unipolar", "depression": "unipolar",
           "sleepiness": "unipolar"}
    return build_dataset(sizes, pol, seed=seed)


class TestStratifiedResample:
    def test_fixed_output_size_single_polarity(self):
        ds = build_dataset({"A": 5, "B": 50})
        out = stratified_resample(ds, SamplingPlan(30, 60, 1), make_rng(1))
        assert len(out) == 60
        source = {(r.item_id, r.raw_value) for r in ds.records}
        assert all((r.item_id, r.raw_value) in source for r in out.records)

    def test_two_polarity_cohort_shape(self):
        ds = unbalanced_cohort_dataset()
        out = stratified_resample(ds, SamplingPlan(300, 1800, 1), make_rng(2))
        assert len(out) == 3600
        counts = Counter(r.polarity for r in out.records)
        assert counts["unipolar"] == 1800
        assert counts["bipolar"] == 1800

    def test_singleton_items_resample_deterministically(self):
        # One record per item and one item per polarity: every sampling pool
        # is a single element, so the draw cannot depend on the seed.
        ds = build_dataset({"A": 1, "B": 1}, {"A": "unipolar", "B": "bipolar"})
        out1 = stratified_resample(ds, SamplingPlan(1, 4, 1), make_rng(3))
        out2 = stratified_resample(ds, SamplingPlan(1, 4, 1), make_rng(99))
        vals1 = sorted(r.raw_value for r in out1.records)
        vals2 = sorted(r.raw_value for r in out2.records)
        assert vals1 == vals2

    def test_resample_values_subset_of_source(self):
        ds = build_dataset({"A": 7, "B": 9, "C": 4})
        out = stratified_resample(ds, SamplingPlan(20, 50, 1), make_rng(4))
        source_vals = {r.raw_value for r in ds.records}
        assert {r.raw_value for r in out.records} <= source_vals

    def test_stratum_balance_chi_square(self):
        # Expected equal item proportions within a polarity after level 1.
        ds = build_dataset({"A": 5, "B": 50, "C": 17})
        rng = make_rng(5)
        counts = Counter()
        n_draws = 10_000
        out = stratified_resample(ds, SamplingPlan(100, n_draws, 1), rng)
        counts.update(r.item_id for r in out.records)
        observed = [counts[i] for i in ("A", "B", "C")]
        result = chisquare(observed)
        assert result.pvalue > 0.001

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            SamplingPlan(0, 10, 5)


class TestBootstrapProfiles:
    def test_single_replicate_equals_direct_estimate(self):
        ds = unbalanced_cohort_dataset()
        hp = HyperParams(family="gaussian")
        plan = SamplingPlan(50, 120, 1)
        run = bootstrap_profiles(ds, hp, plan, seed=11)
        assert len(run.profiles) == 1
        resampled = stratified_resample(ds, plan, make_rng(11, 0))
        direct = estimate_profile(resampled, hp)
        assert run.profiles[0].loglik == direct.loglik
        assert run.profiles[0].main.kind == direct.main.kind

    def test_replicates_mostly_match_full_data_selection(self):
        # Balanced single-item data: level 1 oversamples the item pool, so
        # each replicate is effectively a single resample of the source.
        x = sample_condition(condition_by_id(14), 1000, 0)
        ds = dataset_from_values(x)
        hp = HyperParams()
        full_kind = estimate_profile(ds, hp).main.kind
        run = bootstrap_profiles(ds, hp, SamplingPlan(10_000, 1000, 100), seed=0)
        assert run.n_failed == 0
        matches = sum(p.main.kind == full_kind for p in run.profiles)
        assert matches >= 90

    def test_order_is_by_replicate_index(self):
        ds = unbalanced_cohort_dataset()
        hp = HyperParams(family="gaussian")
        plan = SamplingPlan(40, 100, 3)
        run = bootstrap_profiles(ds, hp, plan, seed=21)
        singles = [
            bootstrap_profiles(ds, hp, SamplingPlan(40, 100, 1), seed=21).profiles[0]
        ]
        assert run.profiles[0].loglik == singles[0].loglik


class TestAggregate:
    def test_identical_replicates_have_zero_width(self):
        x = sample_condition(condition_by_id(21), 800, 0)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        summary = aggregate([prof] * 10)
        for stats in summary.params.values():
            assert stats.p5 == stats.median == stats.p95

    def test_median_zero_weight_clears_sub_onehots(self):
        x = sample_condition(condition_by_id(21), 800, 0)
        base = estimate_profile(dataset_from_values(x), HyperParams())
        assert base.sub.kind == "ers"
        no_tail = sample_condition(condition_by_id(14), 800, 0)
        none_prof = estimate_profile(dataset_from_values(no_tail), HyperParams())
        assert none_prof.sub.w_ade == 0.0
        summary = aggregate([none_prof, none_prof, base])
        assert summary.params["w_ade"].median == 0.0
        assert summary.features["is_ers"] == 0
        assert summary.features["is_drs"] == 0
        assert summary.features["is_ars"] == 0

    def test_permutation_invariance(self):
        profiles = [
            estimate_profile(
                dataset_from_values(sample_condition(condition_by_id(22), 600, s)),
                HyperParams(),
            )
            for s in range(5)
        ]
        a = aggregate(profiles)
        b = aggregate(list(reversed(profiles)))
        assert a == b

    def test_percentile_ordering(self):
        profiles = [
            estimate_profile(
                dataset_from_values(sample_condition(condition_by_id(25), 700, s)),
                HyperParams(),
            )
            for s in range(8)
        ]
        summary = aggregate(profiles)
        for stats in summary.params.values():
            assert stats.p5 <= stats.p25 <= stats.median <= stats.p75 <= stats.p95

    def test_bimodal_condition_onehot(self):
        # Bootstrapped replicates of a bimodal condition report is_bimrs.
        x = sample_condition(condition_by_id(17), 1000, 0)
        ds = dataset_from_values(x)
        hp = HyperParams()
        run = bootstrap_profiles(ds, hp, SamplingPlan(1000, 1000, 1000), seed=7)
        summary = aggregate(run.profiles, run.n_failed)
        assert summary.features["is_bimrs"] == 1
        assert summary.features["is_ers"] == 0
        assert summary.features["is_drs"] == 0
        assert summary.features["is_ars"] == 0

    def test_one_to_one_main_onehot(self):
        x = sample_condition(condition_by_id(14), 900, 1)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        summary = aggregate([prof])
        assert summary.features["is_mrs"] + summary.features["is_bimrs"] == 1

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_parameters_only_from_replicates_holding_them(self):
        x_tail = sample_condition(condition_by_id(21), 800, 0)
        with_tail = estimate_profile(dataset_from_values(x_tail), HyperParams())
        x_plain = sample_condition(condition_by_id(14), 800, 0)
        without = estimate_profile(dataset_from_values(x_plain), HyperParams())
        summary = aggregate([with_tail, without])
        assert summary.params["alpha_ade"].n == 1
        assert summary.params["w_ade"].n == 2

    def test_profile_parameters_keys(self):
        x = sample_condition(condition_by_id(17), 1000, 0)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        params = profile_parameters(prof)
        for key in ("w1", "w2", "alpha1", "beta1", "alpha2", "beta2", "mu1", "sigma1"):
            assert key in params
