//! Randomized invariants, checked against exhaustive reference
//! implementations on small instances.

mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;

use corefill::{
    frac, settle_at, vcg, vcg_pursuit, water_fill, Ad, ComparisonReport, CorePolytope,
    CountingOracle, DirectionPolicy, Frac, GeneratorConfig, Instance, InstanceOracle, Mechanism,
    Money, ReportRow, SlateFamily, SlateInstance, Span, UtilityVector, Valuation,
    ValuationProfile, WinnerOracle, XorFamily,
};
use support::{exhaustive_truncated_slate, exhaustive_truncated_xor};

fn small_xor_config() -> GeneratorConfig {
    GeneratorConfig::Xor(XorFamily {
        instances: 1,
        items: Span::new(2, 6),
        bidders: Span::new(1, 8),
        bids_per_bidder: Span::new(1, 3),
        value_cents: Span::new(1, 20_000),
    })
}

fn small_slate_config() -> GeneratorConfig {
    GeneratorConfig::Slate(SlateFamily {
        instances: 1,
        advertisers: Span::new(1, 5),
        ads_per_advertiser: Span::new(1, 2),
        lines_per_ad: Span::new(1, 8),
        bid_cents: Span::new(1, 300),
        pclick_percent: Span::new(1, 100),
        h: 3,
        m: 8,
    })
}

fn xor_instances() -> impl Strategy<Value = ValuationProfile> {
    any::<u64>().prop_map(|seed| {
        match small_xor_config().generate_one(seed, 0).expect("valid config") {
            Instance::Xor(profile) => profile,
            Instance::Slate(_) => unreachable!(),
        }
    })
}

fn slate_instances() -> impl Strategy<Value = SlateInstance> {
    any::<u64>().prop_map(|seed| {
        match small_slate_config().generate_one(seed, 0).expect("valid config") {
            Instance::Slate(slate) => slate,
            Instance::Xor(_) => unreachable!(),
        }
    })
}

/// Pairs an instance with a full-coverage utility vector, coordinates up
/// to a bit beyond the largest bid so truncation to zero gets exercised.
fn with_point<S, I>(instances: S, ids_of: fn(&I) -> Vec<u32>) -> impl Strategy<Value = (I, UtilityVector)>
where
    S: Strategy<Value = I>,
    I: std::fmt::Debug + Clone,
{
    instances.prop_flat_map(move |instance| {
        let ids = ids_of(&instance);
        let n = ids.len();
        (
            Just(instance),
            proptest::collection::vec(0u64..=220_000_000, n),
        )
            .prop_map(move |(instance, coords)| {
                let point = UtilityVector::from_pairs(
                    ids.iter().copied().zip(coords.into_iter().map(Money::from_micros)),
                );
                (instance, point)
            })
    })
}

fn epsilons() -> impl Strategy<Value = Money> {
    prop_oneof![Just(1u64), Just(100), Just(10_000)].prop_map(Money::from_micros)
}

fn all_coalitions(ids: &[u32]) -> Vec<BTreeSet<u32>> {
    (0..1usize << ids.len())
        .map(|mask| {
            ids.iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &id)| id)
                .collect()
        })
        .collect()
}

fn scaled_profile(profile: &ValuationProfile, k: u64) -> ValuationProfile {
    let bidders = profile
        .bidders()
        .iter()
        .map(|(id, v)| {
            let entries = v
                .entries()
                .iter()
                .map(|(b, m)| (b.clone(), Money::from_micros(m.micros() * k)))
                .collect();
            (*id, Valuation::from_entries(entries).expect("scaling keeps entries valid"))
        })
        .collect();
    ValuationProfile::new(profile.item_count(), bidders).expect("scaling keeps the profile valid")
}

fn scaled_slate(slate: &SlateInstance, k: u64) -> SlateInstance {
    let ads = slate
        .ads()
        .iter()
        .map(|ad| {
            let (num, den) = ad.pclick_parts();
            Ad::new(
                ad.advertiser(),
                ad.decoration(),
                ad.lines(),
                Money::from_micros(ad.bid().micros() * k),
                num,
                den,
            )
            .expect("scaling keeps scores exact")
        })
        .collect();
    SlateInstance::new(slate.slots(), slate.line_budget(), ads)
        .expect("scaling keeps the slate valid")
}

fn check_water_fill(oracle: &InstanceOracle, polytope: &CorePolytope, eps: Money) -> Result<(), TestCaseError> {
    let n = oracle.bidder_ids().len();
    for policy in [
        DirectionPolicy::Uniform,
        DirectionPolicy::TowardTarget(vcg(oracle).expect("vcg runs").utilities),
    ] {
        let run = water_fill(oracle, &policy, eps).expect("water filling runs");
        prop_assert!(run.oracle_calls <= run.call_budget, "budget exceeded");
        prop_assert!(run.iterations.len() <= n + 2, "too many iterations");
        let searches = run
            .iterations
            .iter()
            .filter(|it| it.after != it.before)
            .count();
        prop_assert!(searches <= n + 1, "more searches than bidders");
        // The opening probe sits at the zero point, so the first transition
        // may keep every bidder. Every later probe is outside the core and
        // must pin at least one.
        for (k, pair) in run.iterations.windows(2).enumerate() {
            let earlier: BTreeSet<u32> = pair[0].active.iter().copied().collect();
            let later: BTreeSet<u32> = pair[1].active.iter().copied().collect();
            prop_assert!(later.is_subset(&earlier), "active sets never grow");
            if k > 0 {
                prop_assert!(later.len() < earlier.len(), "active sets shrink past the start");
            }
        }

        let certificate = polytope
            .check_eps_bidder_optimal(&run.utilities, eps)
            .expect("certification runs");
        prop_assert!(certificate.in_core, "water filling left the core");
        prop_assert!(
            certificate.holds(),
            "utilities still raisable: {:?}",
            certificate.raisable
        );

        let priced = settle_at(oracle, &run.utilities).expect("core points settle");
        let paid: u128 = priced.payments.values().map(|p| p.micros() as u128).sum();
        prop_assert_eq!(priced.revenue.micros() as u128, paid);
        prop_assert_eq!(
            priced.revenue.micros() as u128 + run.utilities.total_micros(),
            oracle.total_welfare().micros() as u128
        );
        let baseline = vcg(oracle).expect("vcg runs");
        prop_assert!(priced.revenue >= baseline.revenue, "core revenue fell below VCG");
    }
    Ok(())
}

fn polytope_of(instance: &Instance) -> CorePolytope {
    match instance {
        Instance::Xor(p) => CorePolytope::from_profile(p).expect("small enough to certify"),
        Instance::Slate(s) => CorePolytope::from_slate(s).expect("small enough to certify"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn xor_oracle_matches_the_polytope_on_every_coalition(profile in xor_instances()) {
        let oracle = Instance::Xor(profile.clone()).build_oracle().unwrap();
        let polytope = CorePolytope::from_profile(&profile).unwrap();
        let zeros = UtilityVector::zero(profile.bidder_ids());
        for coalition in all_coalitions(&profile.bidder_ids()) {
            let solved = oracle.solve_restricted(&coalition, &zeros).unwrap();
            prop_assert_eq!(solved.max_welfare, polytope.coalition_value(&coalition).unwrap());
        }
    }

    #[test]
    fn slate_oracle_matches_the_polytope_on_every_coalition(slate in slate_instances()) {
        let instance = Instance::Slate(slate.clone());
        let oracle = instance.build_oracle().unwrap();
        let polytope = CorePolytope::from_slate(&slate).unwrap();
        let zeros = UtilityVector::zero(slate.advertisers());
        for coalition in all_coalitions(&slate.advertisers()) {
            let solved = oracle.solve_restricted(&coalition, &zeros).unwrap();
            prop_assert_eq!(solved.max_welfare, polytope.coalition_value(&coalition).unwrap());
        }
    }

    #[test]
    fn truncated_xor_solves_match_exhaustive_search(
        (profile, point) in with_point(xor_instances(), |p: &ValuationProfile| p.bidder_ids())
    ) {
        let oracle = Instance::Xor(profile.clone()).build_oracle().unwrap();
        let solved = oracle.solve(&point).unwrap();
        prop_assert_eq!(solved.max_welfare, exhaustive_truncated_xor(&profile, &point));
    }

    #[test]
    fn truncated_slate_solves_match_exhaustive_search(
        (slate, point) in with_point(slate_instances(), |s: &SlateInstance| s.advertisers())
    ) {
        let oracle = Instance::Slate(slate.clone()).build_oracle().unwrap();
        let solved = oracle.solve(&point).unwrap();
        prop_assert_eq!(solved.max_welfare, exhaustive_truncated_slate(&slate, &point));
    }

    #[test]
    fn witnesses_earn_their_reported_welfare(
        (profile, point) in with_point(xor_instances(), |p: &ValuationProfile| p.bidder_ids())
    ) {
        let oracle = Instance::Xor(profile.clone()).build_oracle().unwrap();
        let solved = oracle.solve(&point).unwrap();
        let mut recomputed = 0u64;
        for (id, bundle) in solved.witness.iter() {
            let value = oracle.declared_value(id, bundle);
            let gain = value.micros().saturating_sub(point.get_or_zero(id).micros());
            prop_assert!(gain > 0, "winner {} contributes nothing", id);
            recomputed += gain;
        }
        prop_assert_eq!(solved.max_welfare.micros(), recomputed);
        let winners: BTreeSet<u32> = solved.witness.winners().collect();
        prop_assert_eq!(&winners, &solved.winner_set);
    }

    #[test]
    fn membership_tests_agree_with_enumeration(
        (profile, point) in with_point(xor_instances(), |p: &ValuationProfile| p.bidder_ids())
    ) {
        let instance = Instance::Xor(profile.clone());
        let oracle = instance.build_oracle().unwrap();
        let polytope = CorePolytope::from_profile(&profile).unwrap();
        prop_assert_eq!(
            corefill::is_in_core(&oracle, &point).unwrap(),
            polytope.is_in_core(&point).unwrap()
        );
    }

    #[test]
    fn the_maximum_blocking_coalition_is_the_truncated_winner_set(
        (slate, point) in with_point(slate_instances(), |s: &SlateInstance| s.advertisers())
    ) {
        let instance = Instance::Slate(slate.clone());
        let oracle = instance.build_oracle().unwrap();
        let polytope = CorePolytope::from_slate(&slate).unwrap();
        let solved = oracle.solve(&point).unwrap();
        // The best blocking surplus over all coalitions equals the
        // truncated optimum, and the winner set attains it.
        prop_assert_eq!(
            polytope.max_blocking_value(&point).unwrap(),
            solved.max_welfare
        );
        let winners_value = polytope.coalition_value(&solved.winner_set).unwrap();
        let paid: u128 = solved
            .winner_set
            .iter()
            .map(|&id| point.get_or_zero(id).micros() as u128)
            .sum();
        prop_assert_eq!(
            winners_value.micros() as u128 - paid,
            solved.max_welfare.micros() as u128
        );
    }

    #[test]
    fn water_filling_lands_on_certified_points_for_bundles(
        profile in xor_instances(),
        eps in epsilons()
    ) {
        let instance = Instance::Xor(profile);
        let oracle = instance.build_oracle().unwrap();
        let polytope = polytope_of(&instance);
        check_water_fill(&oracle, &polytope, eps)?;
    }

    #[test]
    fn water_filling_lands_on_certified_points_for_slates(
        slate in slate_instances(),
        eps in epsilons()
    ) {
        let instance = Instance::Slate(slate);
        let oracle = instance.build_oracle().unwrap();
        let polytope = polytope_of(&instance);
        check_water_fill(&oracle, &polytope, eps)?;
    }

    #[test]
    fn vcg_spends_exactly_one_call_per_bidder_plus_one(profile in xor_instances()) {
        let instance = Instance::Xor(profile.clone());
        let oracle = instance.build_oracle().unwrap();
        let counting = CountingOracle::new(&oracle);
        let out = vcg(&counting).unwrap();
        prop_assert_eq!(counting.calls(), profile.bidder_count() as u64 + 1);

        // Payments are marginal externalities, checked against independent
        // coalition values.
        let polytope = CorePolytope::from_profile(&profile).unwrap();
        let total = polytope.total_value();
        let everyone: BTreeSet<u32> = profile.bidder_ids().into_iter().collect();
        for (id, bundle) in out.allocation.iter() {
            let mut others = everyone.clone();
            others.remove(&id);
            let without = polytope.coalition_value(&others).unwrap();
            let externality = total.checked_sub(without).unwrap();
            let value = oracle.declared_value(id, bundle);
            let paid = out.payments.get(&id).copied().unwrap_or(Money::ZERO);
            prop_assert_eq!(paid, value.checked_sub(externality).unwrap());
        }
        for &id in &profile.bidder_ids() {
            prop_assert!(out.utilities.get_or_zero(id) <= total);
        }
    }

    #[test]
    fn doubling_the_currency_scale_doubles_the_answer(
        profile in xor_instances(),
        k in prop_oneof![Just(2u64), Just(8), Just(1024)]
    ) {
        let base = Instance::Xor(profile.clone());
        let scaled = Instance::Xor(scaled_profile(&profile, k));
        let eps = Money::from_micros(1000);
        let eps_scaled = Money::from_micros(1000 * k);
        let run = water_fill(&base.build_oracle().unwrap(), &DirectionPolicy::Uniform, eps).unwrap();
        let scaled_run =
            water_fill(&scaled.build_oracle().unwrap(), &DirectionPolicy::Uniform, eps_scaled).unwrap();
        for &id in &profile.bidder_ids() {
            prop_assert_eq!(
                run.utilities.get_or_zero(id).micros() * k,
                scaled_run.utilities.get_or_zero(id).micros()
            );
        }
    }

    #[test]
    fn slate_scaling_is_exact_too(
        slate in slate_instances(),
        k in prop_oneof![Just(2u64), Just(1024)]
    ) {
        let eps = Money::from_micros(100);
        let eps_scaled = Money::from_micros(100 * k);
        let base = Instance::Slate(slate.clone());
        let scaled = Instance::Slate(scaled_slate(&slate, k));
        let run = water_fill(&base.build_oracle().unwrap(), &DirectionPolicy::Uniform, eps).unwrap();
        let scaled_run =
            water_fill(&scaled.build_oracle().unwrap(), &DirectionPolicy::Uniform, eps_scaled).unwrap();
        for id in slate.advertisers() {
            prop_assert_eq!(
                run.utilities.get_or_zero(id).micros() * k,
                scaled_run.utilities.get_or_zero(id).micros()
            );
        }
    }

    #[test]
    fn greedy_slates_never_beat_the_optimum(slate in slate_instances()) {
        let oracle = match Instance::Slate(slate).build_oracle().unwrap() {
            InstanceOracle::Slate(o) => o,
            InstanceOracle::Xor(_) => unreachable!(),
        };
        let best = corefill::gsp_optimal(&oracle).unwrap();
        let greedy = corefill::gsp_greedy(&oracle).unwrap();
        prop_assert!(greedy.welfare <= best.welfare);
        for out in [&best, &greedy] {
            for placement in &out.placements {
                prop_assert!(placement.expected_payment <= placement.score);
                let bid = oracle.instance().ads()[placement.ad_index].bid();
                prop_assert!(placement.cpc_micros <= frac(bid.micros() as i128, 1));
            }
        }
    }

    #[test]
    fn pursuit_runs_spend_their_extra_calls_on_the_vcg_target(
        profile in xor_instances(),
        eps in epsilons()
    ) {
        let instance = Instance::Xor(profile.clone());
        let oracle = instance.build_oracle().unwrap();
        let counting = CountingOracle::new(&oracle);
        let pursuit = vcg_pursuit(&counting, eps).unwrap();
        let n = profile.bidder_count() as u64;
        prop_assert_eq!(counting.calls(), pursuit.run.oracle_calls + n + 1);
    }

    #[test]
    fn report_rows_round_trip_through_csv(rows in report_rows()) {
        let report = ComparisonReport { rows, failures: vec![] };
        let mut buffer = Vec::new();
        report.write_csv(&mut buffer).unwrap();
        let back = ComparisonReport::read_csv(buffer.as_slice()).unwrap();
        prop_assert_eq!(back.rows, report.rows);
    }
}

fn fracs() -> impl Strategy<Value = Frac> {
    (1i128..=1_000_000_000, 1i128..=1_000_000).prop_map(|(n, d)| frac(n, d))
}

fn report_rows() -> impl Strategy<Value = Vec<ReportRow>> {
    let mechanism = prop_oneof![
        Just(Mechanism::Core),
        Just(Mechanism::VcgPursuit),
        Just(Mechanism::Vcg),
        Just(Mechanism::GspOpt),
        Just(Mechanism::GspGreedy),
    ];
    let row = (
        "[a-z][a-z0-9-]{0,12}",
        mechanism,
        0u64..=10_u64.pow(12),
        0u64..=10_u64.pow(12),
        fracs(),
        proptest::option::of(fracs()),
        0u64..=10_u64.pow(9),
        0u64..=10_000,
        proptest::option::of(fracs()),
    )
        .prop_map(
            |(
                instance_id,
                mechanism,
                welfare,
                revenue,
                literal,
                vs_vcg,
                runtime_us,
                oracle_calls,
                fairness,
            )| ReportRow {
                instance_id,
                mechanism,
                welfare: Money::from_micros(welfare),
                revenue_expected: Money::from_micros(revenue),
                revenue_literal: literal,
                revenue_vs_vcg: vs_vcg,
                runtime_us,
                oracle_calls,
                fairness,
            },
        );
    proptest::collection::vec(row, 0..12)
}
