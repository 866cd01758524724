use faultsearch::bitforge::{amplify_q, harvest_amplified, plan_amplifier, uniform_from_bits};
use faultsearch::harness::{estimate, run_scenario, Scenario, ScenarioParams};
use faultsearch::montecarlo::MomentAccumulator;
use faultsearch::oracle::{
    expected_time_det_block, expected_time_det_closed, expected_time_det_system,
};
use faultsearch::search::{
    default_fail_cap, deterministic_search, randomized_search_with, RandomChoices,
};
use faultsearch::two_agent::{force_change_direction, Follower};
use faultsearch::{
    leg_crossing_time, AgentState, Direction, FaultProb, RandomStream, SimOutcome, TargetPlacement,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check_outcome(o: &SimOutcome, x: f64) -> Result<(), TestCaseError> {
    let total = o.total_leg_time();
    prop_assert!((o.termination_time - total).abs() <= 1e-9 * total.max(1.0));
    prop_assert!(!o.truncated);
    prop_assert!((o.final_position() - x).abs() <= 1e-9 * x.abs().max(1.0));
    prop_assert!(o.termination_time >= x.abs() * (1.0 - 1e-12));
    for w in o.legs.windows(2) {
        prop_assert!((w[0].to - w[1].from).abs() <= 1e-9 * w[0].to.abs().max(1.0));
    }
    for l in &o.legs {
        prop_assert!(l.duration >= 0.0);
        if l.speed > 0.0 {
            prop_assert!(((l.to - l.from).abs() / l.speed - l.duration).abs() <= 1e-9);
        } else {
            prop_assert_eq!(l.from, l.to);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_routes_agree(p in 0.01f64..0.49, gf in 0.0f64..1.0, t in 0u32..=10, frac in 1e-9f64..=1.0) {
        let g = 2.0 + gf * (1.0 / p - 2.0).min(2.0) * 0.999;
        let lo = g.powi(t as i32);
        let n = lo * (1.0 + frac * (g - 1.0));
        let c = expected_time_det_closed(g, p, t, n).unwrap().value;
        let (s, _) = expected_time_det_system(g, p, t, n).unwrap();
        let b = expected_time_det_block(g, p, t, n).unwrap().value;
        prop_assert!(rel(c, s.value) < 1e-9);
        prop_assert!(rel(b, s.value) < 1e-9);
        prop_assert!(c >= n);
    }

    #[test]
    fn exact_value_increases_with_distance(p in 0.01f64..0.49, t in 0u32..8, a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let g = 2.0f64;
        let lo = g.powi(t as i32);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(b - a > 1e-6);
        let ra = expected_time_det_closed(g, p, t, lo * (1.0 + a)).unwrap().value;
        let rb = expected_time_det_closed(g, p, t, lo * (1.0 + b)).unwrap().value;
        prop_assert!(rb > ra);
    }

    #[test]
    fn scenario_outcomes_are_consistent(
        idx in 0usize..7,
        p in 0.0f64..0.45,
        x in prop_oneof![-50.0f64..-0.05, 0.05f64..50.0],
        seed in any::<u64>(),
    ) {
        let sc = Scenario::ALL[idx];
        let needs_positive = matches!(sc, Scenario::Rand | Scenario::RandToward | Scenario::Det | Scenario::DetSimRand | Scenario::PairRand | Scenario::Wireless);
        let p = if needs_positive { p.max(0.01) } else { p };
        let params = ScenarioParams::new(p, x);
        let o = run_scenario(sc, &params, &mut RandomStream::new(seed)).unwrap();
        check_outcome(&o, x)?;
    }

    #[test]
    fn farther_target_never_ends_earlier(p in 0.01f64..0.45, n in 0.1f64..100.0, extra in 0.0f64..50.0, seed in any::<u64>(), left in any::<bool>()) {
        let side = if left { Direction::Left } else { Direction::Right };
        let p = FaultProb::new(p).unwrap();
        let cap = default_fail_cap(p.value());
        let near = TargetPlacement::new(n, side).unwrap();
        let far = TargetPlacement::new(n + extra, side).unwrap();
        let a = deterministic_search(2.0, p, &near, &mut RandomStream::new(seed), cap).unwrap();
        let b = deterministic_search(2.0, p, &far, &mut RandomStream::new(seed), cap).unwrap();
        prop_assert!(b.termination_time >= a.termination_time);
    }

    #[test]
    fn pinned_randomized_is_the_deterministic_search(p in 0.01f64..0.45, x in prop_oneof![-80.0f64..-0.1, 0.1f64..80.0], seed in any::<u64>()) {
        let p = FaultProb::new(p).unwrap();
        let cap = default_fail_cap(p.value());
        let target = TargetPlacement::at(x).unwrap();
        let det = deterministic_search(2.0, p, &target, &mut RandomStream::new(seed), cap).unwrap();
        let rnd = randomized_search_with(2.0, p, &target, &mut RandomStream::new(seed), cap, RandomChoices::fixed(0.0, Direction::Right)).unwrap();
        prop_assert_eq!(det, rnd);
    }

    #[test]
    fn forced_turn_error_is_bounded(p in 0.0f64..0.49, gamma in 1e-6f64..0.1, gap in 0.01f64..=1.0, seed in any::<u64>(), at in -10.0f64..10.0) {
        let fp = FaultProb::new(p).unwrap();
        let leader = AgentState::at(at, Direction::Right);
        let follower = AgentState::at(at - gap * 2.0 * gamma, Direction::Right);
        let mut rng = RandomStream::new(seed);
        let r = force_change_direction(leader, Follower::Mobile(follower), gamma, fp, &mut rng).unwrap();
        prop_assert!(r.attempts >= 1);
        prop_assert!((r.realized_point - r.intended_point).abs() <= r.attempts as f64 * gamma * 2.0 + 1e-12);
        let r = force_change_direction(leader, Follower::Immobile(at), gamma, fp, &mut rng).unwrap();
        prop_assert!(r.attempts >= 1);
        prop_assert!(r.elapsed >= 2.0 * gamma);
    }

    #[test]
    fn advance_is_additive(x in -1e6f64..1e6, a in 0.0f64..1e3, b in 0.0f64..1e3, s in 0.01f64..=1.0, right in any::<bool>()) {
        let d = if right { Direction::Right } else { Direction::Left };
        let st = AgentState::new(x, d, s).unwrap();
        let two = st.advance(a).unwrap().advance(b).unwrap();
        let one = st.advance(a + b).unwrap();
        prop_assert!((two.position - one.position).abs() <= 4.0 * f64::EPSILON * (x.abs() + a + b));
        prop_assert_eq!(two.direction, d);
        prop_assert_eq!(d.opposite().opposite(), d);
        prop_assert_ne!(d.opposite(), d);
    }

    #[test]
    fn crossing_iff_inside(from in -100.0f64..100.0, to in -100.0f64..100.0, target in -120.0f64..120.0, s in 0.01f64..=1.0) {
        let inside = from.min(to) <= target && target <= from.max(to);
        let hit = leg_crossing_time(from, to, s, target);
        prop_assert_eq!(hit.is_some(), inside);
        if let Some(dt) = hit {
            prop_assert!(dt >= 0.0 && dt <= (to - from).abs() / s + 1e-9);
        }
    }

    #[test]
    fn amplification_recurrence(p in 0.0f64..=1.0) {
        let mut prev = amplify_q(p, 1).unwrap();
        prop_assert!((prev - p).abs() < 1e-15);
        for k in 2..=20 {
            let q = amplify_q(p, k).unwrap();
            prop_assert!((q - ((1.0 - p) * (1.0 - prev) + p * prev)).abs() < 1e-12);
            prev = q;
        }
    }

    #[test]
    fn harvest_stays_near_the_origin(p in 0.01f64..0.49, bits in 1usize..40, zeta in 1e-12f64..1e-3, seed in any::<u64>()) {
        let plan = plan_amplifier(p, 1e-3).unwrap();
        prop_assert!(plan.bias() <= 1e-3);
        let h = harvest_amplified(&plan, bits, zeta, &mut RandomStream::new(seed)).unwrap();
        prop_assert_eq!(h.bits.len(), bits);
        prop_assert!(h.max_excursion <= 2f64.powi(bits as i32) * zeta * (1.0 + 1e-12));
        prop_assert!(h.elapsed.is_finite());
        let u = uniform_from_bits(&h.bits).unwrap();
        prop_assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn merged_moments_match_one_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut all = MomentAccumulator::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = MomentAccumulator::default();
        let mut b = MomentAccumulator::default();
        xs[..cut].iter().for_each(|&x| a.push(x));
        xs[cut..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        prop_assert_eq!(a.count, all.count);
        prop_assert!((a.mean - all.mean).abs() <= 1e-9 * (1.0 + all.mean.abs()));
        prop_assert!((a.variance() - all.variance()).abs() <= 1e-7 * (1.0 + all.variance()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimates_ignore_thread_count(idx in 0usize..7, seed in any::<u64>(), threads in 2usize..8) {
        let params = ScenarioParams::new(0.2, 7.5);
        let sc = Scenario::ALL[idx];
        let a = estimate(sc, &params, 2500, seed, Some(1)).unwrap();
        let b = estimate(sc, &params, 2500, seed, Some(threads)).unwrap();
        prop_assert_eq!(a, b);
    }
}
