import numpy as np
import pytest

from vasrp.distributions import (
    BetaParams,
    GaussianParams,
    Mixture2,
    cdf,
    log_pdf,
    make_rng,
    sample,
)
from vasrp.errors import InsufficientDataError
from vasrp.pipeline import (
    HyperParams,
    ResponseRecord,
    dataset_from_values,
    estimate_main,
    estimate_profile,
    estimate_subs,
    normalize,
    separation,
    split,
)
from vasrp.simulation import condition_by_id, sample_condition


def record(value, polarity="unipolar", scale=(0.0, 100.0), item="i1", user="u1"):
    return ResponseRecord(user, item, polarity, value, scale[0], scale[1])


class TestNormalize:
    def test_squeeze_applied_when_zero_present(self):
        recs = [record(0.0)] + [record(50.0)] * 9
        ds = normalize(recs)
        assert ds.values[0] == pytest.approx(0.05, abs=1e-9)

    def test_squeeze_applied_when_max_present(self):
        recs = [record(100.0)] + [record(50.0)] * 99
        ds = normalize(recs)
        assert ds.values[0] == pytest.approx(0.995, abs=1e-9)

    def test_interior_values_unchanged(self):
        recs = [record(v) for v in (20.0, 50.0, 80.0)]
        ds = normalize(recs)
        assert np.allclose(ds.values, [0.2, 0.5, 0.8])

    def test_all_values_strictly_inside_unit_interval(self):
        recs = [record(v) for v in (0.0, 100.0, 50.0)]
        ds = normalize(recs)
        assert np.all((ds.values > 0) & (ds.values < 1))

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            normalize([])

    def test_invalid_scale(self):
        with pytest.raises(ValueError, match="invalid scale"):
            normalize([ResponseRecord("u", "i", "unipolar", 1.0, 10.0, 0.0)])

    def test_value_outside_scale(self):
        with pytest.raises(ValueError, match="outside scale"):
            normalize([record(120.0)])

    def test_bipolar_flag(self):
        assert normalize([record(50.0)]).has_bipolar is False
        assert normalize([record(50.0, polarity="bipolar")]).has_bipolar is True


class TestSplit:
    def test_boundaries_belong_to_main(self):
        d_main, d_sub = split(np.array([0.05, 0.15, 0.5, 0.85, 0.95]), 0.15)
        assert list(d_main) == [0.15, 0.5, 0.85]
        assert list(d_sub) == [0.05, 0.95]

    def test_empty_tail(self):
        d_main, d_sub = split(np.linspace(0.2, 0.8, 20), 0.05)
        assert d_sub.size == 0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_partition(self, seed):
        x = make_rng(seed).uniform(0.001, 0.999, 400)
        d_main, d_sub = split(x, 0.15)
        assert d_main.size + d_sub.size == x.size

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            split([0.5], 0.6)


class TestSeparation:
    def test_hand_value_wide(self):
        mix = Mixture2(0.5, BetaParams(15, 45), BetaParams(45, 15))
        assert separation(mix, "beta") == pytest.approx(30 / 58, abs=1e-9)

    def test_hand_value_narrow(self):
        mix = Mixture2(0.5, BetaParams(15, 20), BetaParams(20, 15))
        assert separation(mix, "beta") == pytest.approx(5 / 33, abs=1e-9)

    def test_identical_components(self):
        mix = Mixture2(0.5, BetaParams(10, 10), BetaParams(10, 10))
        assert separation(mix, "beta") == 0.0

    def test_gaussian_uses_means(self):
        mix = Mixture2(0.5, GaussianParams(0.3, 0.1), GaussianParams(0.7, 0.1))
        assert separation(mix, "gaussian") == pytest.approx(0.4)


class TestEstimateMain:
    def test_unimodal_data_selects_mrs(self):
        x = sample_condition(condition_by_id(14), 1000, 0)
        d_main, _ = split(x, 0.15)
        main = estimate_main(d_main, True, HyperParams())
        assert main.kind == "mrs"

    def test_bimodal_data_selects_bimrs(self):
        x = sample_condition(condition_by_id(17), 1000, 0)
        d_main, _ = split(x, 0.15)
        main = estimate_main(d_main, True, HyperParams())
        assert main.kind == "bimrs"

    def test_gate_flips_narrow_bimodal_to_mrs(self):
        x = sample_condition(condition_by_id(19), 1000, 0)
        d_main, _ = split(x, 0.05)
        loose = estimate_main(d_main, True, HyperParams(th=0.05, accept_bidist=0.15))
        strict = estimate_main(d_main, True, HyperParams(th=0.05, accept_bidist=0.30))
        assert loose.kind == "bimrs"
        assert strict.kind == "mrs"

    def test_bimrs_needs_bipolar(self):
        x = sample_condition(condition_by_id(17), 1000, 0)
        d_main, _ = split(x, 0.15)
        main = estimate_main(d_main, False, HyperParams())
        assert main.kind != "bimrs"

    def test_small_sample_forces_base(self):
        main = estimate_main(np.array([0.4, 0.5, 0.6]), True, HyperParams())
        assert main.kind == "base"
        assert main.fit.k == 0

    def test_selected_beats_eligible_rivals(self):
        x = sample_condition(condition_by_id(18), 800, 1)
        d_main, _ = split(x, 0.15)
        main = estimate_main(d_main, True, HyperParams())
        for cand in main.candidates:
            if cand.eligible:
                assert main.fit.aic <= cand.fit.aic + 1e-9


class TestEstimateSubs:
    def test_u_shaped_tails_rank_ers_first(self):
        x = np.clip(make_rng(11).beta(0.1, 0.1, 1000), 1e-12, 1 - 1e-12)
        _, d_sub = split(x, 0.15)
        fits = dict(estimate_subs(d_sub, HyperParams()))
        from vasrp.estimation import ShapeClass

        assert fits[ShapeClass.ERS].loglik > fits[ShapeClass.DRS].loglik
        assert fits[ShapeClass.ERS].loglik > fits[ShapeClass.ARS].loglik

    def test_low_tail_ranks_drs_over_ars(self):
        x = make_rng(12).beta(1, 30, 600)
        _, d_sub = split(x, 0.15)
        fits = dict(estimate_subs(d_sub, HyperParams()))
        from vasrp.estimation import ShapeClass

        assert fits[ShapeClass.DRS].loglik > fits[ShapeClass.ARS].loglik

    def test_below_floor_returns_empty(self):
        assert estimate_subs(np.array([0.01, 0.99]), HyperParams()) == []


class TestEstimateProfile:
    def test_mixed_condition_recovers_both_parts(self):
        x = sample_condition(condition_by_id(21), 1000, 0)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        assert prof.main.kind == "mrs"
        assert prof.sub.kind == "ers"
        assert prof.sub.w_ade in (0.4, 0.5, 0.6)

    def test_pure_main_keeps_no_tail(self):
        x = sample_condition(condition_by_id(14), 1000, 0)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        assert prof.sub.kind == "none"
        assert prof.sub.w_ade == 0.0

    def test_bimodal_with_low_tail(self):
        x = sample_condition(condition_by_id(34), 1000, 0)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        assert prof.main.kind == "bimrs"
        assert prof.sub.kind == "drs"

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            estimate_profile(dataset_from_values([0.2, 0.5, 0.8]), HyperParams())

    def test_selected_aic_beats_all_candidates(self):
        x = sample_condition(condition_by_id(25), 900, 2)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        assert prof.aic <= min(c.fit.aic for c in prof.candidates) + 1e-9

    def test_density_is_exact_mixture_assembly(self):
        x = sample_condition(condition_by_id(31), 1000, 0)
        prof = estimate_profile(dataset_from_values(x), HyperParams())
        mix = prof.density()
        xs = np.linspace(0.01, 0.99, 57)
        lhs = np.exp(log_pdf(mix, xs))
        w = prof.sub.w_ade
        rhs = w * np.exp(log_pdf(prof.sub.params, xs)) + (1 - w) * np.exp(
            log_pdf(prof.main.params, xs)
        )
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_density_has_unit_mass(self):
        for cid in (14, 17, 21, 34):
            x = sample_condition(condition_by_id(cid), 1000, 0)
            prof = estimate_profile(dataset_from_values(x), HyperParams())
            mass = cdf(prof.density(), np.array([0.0, 1.0]))
            assert mass[1] - mass[0] == pytest.approx(1.0, abs=1e-4)

    def test_deterministic_given_data(self):
        x = sample_condition(condition_by_id(22), 800, 5)
        a = estimate_profile(dataset_from_values(x), HyperParams())
        b = estimate_profile(dataset_from_values(x), HyperParams())
        assert a.loglik == b.loglik
        assert a.aic == b.aic
        assert a.main.kind == b.main.kind
        assert a.sub == b.sub
        assert a.metrics == b.metrics

    @pytest.mark.parametrize("cid,seed", [(18, 0), (19, 1), (17, 2)])
    def test_raising_gate_never_creates_bimrs(self, cid, seed):
        x = sample_condition(condition_by_id(cid), 800, seed)
        ds = dataset_from_values(x)
        kinds = []
        for accept in (0.0, 0.1, 0.2, 0.3, 0.5, 0.8):
            prof = estimate_profile(ds, HyperParams(accept_bidist=accept))
            kinds.append(prof.main.kind)
        seen_non_bimrs = False
        for kind in kinds:
            if kind != "bimrs":
                seen_non_bimrs = True
            assert not (seen_non_bimrs and kind == "bimrs")

    def test_bipolar_gate_holds_for_any_data(self):
        for cid in (17, 18, 19):
            x = sample_condition(condition_by_id(cid), 600, 4)
            prof = estimate_profile(dataset_from_values(x, bipolar=False), HyperParams())
            assert prof.main.kind != "bimrs"
