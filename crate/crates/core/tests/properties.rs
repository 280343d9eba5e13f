use dimsurgery_core::hamming::harper::brute_force_distance_bits;
use dimsurgery_core::hamming::{opposite_sphere_distance_bits, set_distance_bits};
use dimsurgery_core::proxy::estimate_chunk_dim;
use dimsurgery_core::surgery::{
    check_raise_budget, default_eps_seq, duplication_decode, duplication_encode, flip_budget, lower_blocks,
    plan_randomize, plan_raise, raise_chunk, CoverProvider, DuplicationDescription, Searcher, Strategy as Plan,
    SurgeryPlan,
};
use dimsurgery_core::{entropy, entropy_inv, BitSequence, DimEstimator};
use num_bigint::BigUint;
use proptest::collection::vec;
use proptest::prelude::*;

fn bits(len: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = BitSequence> {
    vec(any::<bool>(), len).prop_map(BitSequence::from_bools)
}

proptest! {
    #[test]
    fn entropy_inverse_round_trips(y in 0.0f64..=1.0) {
        let p = entropy_inv(y).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!((entropy(p).unwrap() - y).abs() <= 1e-12);
    }

    #[test]
    fn entropy_inverse_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(entropy_inv(lo).unwrap() <= entropy_inv(hi).unwrap());
    }

    #[test]
    fn byte_round_trip(x in bits(0..300)) {
        prop_assert_eq!(BitSequence::from_bytes_msb(&x.to_bytes_msb(), x.len()).unwrap(), x);
    }

    #[test]
    fn duplication_round_trips(z in bits(1..200), noise in bits(400)) {
        let y = BitSequence::from_bools(z.iter().flat_map(|b| [b, b]));
        let x = BitSequence::from_bools(y.iter().zip(noise.iter()).map(|(a, b)| a ^ b));
        let d = duplication_encode(&x, &y).unwrap();
        prop_assert_eq!(duplication_decode(&d).unwrap(), y.clone());
        let wire = d.to_bits();
        prop_assert_eq!(wire.len(), d.total_length_bits);
        let back = DuplicationDescription::from_bits(&wire, y.len()).unwrap();
        prop_assert_eq!(duplication_decode(&back).unwrap(), y);
    }

    #[test]
    fn flip_budget_respects_radius(r in 0.0f64..=1.0, len in 0usize..10_000) {
        let k = flip_budget(r, len);
        prop_assert!(k as f64 <= r * len as f64);
        prop_assert!((k + 1) as f64 > r * len as f64 || k == len);
    }

    #[test]
    fn raise_stays_in_radius(x in bits(1..400), r in 0.0f64..0.5, seed in any::<u64>(), which in 0usize..3) {
        let searcher = [Searcher::Greedy, Searcher::RandomFill, Searcher::SteepestAscent][which];
        let est = DimEstimator::BernoulliOracle;
        let empty = BitSequence::zeros(0);
        let y = raise_chunk(&x, &empty, r, &est, searcher, seed, None).unwrap();
        prop_assert!(x.hamming(&y).unwrap() <= flip_budget(r, x.len()));
        let before = estimate_chunk_dim(&x, &empty, &est).unwrap();
        let after = estimate_chunk_dim(&y, &empty, &est).unwrap();
        prop_assert!(after + 1e-12 >= before);
    }

    #[test]
    fn lowering_respects_budget(x in bits(1..300), s in 0.1f64..0.9, frac in 0.0f64..0.5, seed in 0u64..4) {
        let mut p = CoverProvider::new(s, seed).unwrap();
        p.max_block = 12;
        let budget = (frac * x.len() as f64) as usize;
        let low = lower_blocks(&x, &mut p, budget).unwrap();
        prop_assert!(x.hamming(&low.bits).unwrap() <= budget);
        prop_assert!(low.description_bits <= x.len() as f64 + 1e-9);
    }

    #[test]
    fn randomize_plans_are_valid(s_seq in vec(0.0f64..=1.0, 0..80)) {
        let plan = plan_randomize(&s_seq, &default_eps_seq(s_seq.len())).unwrap();
        prop_assert!(plan.validate().is_ok());
        prop_assert!(plan.entries.iter().all(|e| e.t_j == 1.0 && e.delta_j <= 1.0));
        let text = plan.to_text();
        let back = SurgeryPlan::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn raise_plans_respect_budget(
        base in 0.05f64..0.7,
        gap in 0.05f64..0.3,
        noise in vec(-0.04f64..0.04, 20..120),
    ) {
        let t = (base + gap).min(0.99);
        let s_seq: Vec<f64> = noise.iter().map(|e| (base + e).clamp(0.0, 1.0)).collect();
        let plan = plan_raise(&s_seq, base, t, &default_eps_seq(s_seq.len())).unwrap();
        prop_assert!(matches!(plan.strategy, Plan::RaiseCase1 | Plan::RaiseCase2));
        prop_assert!(plan.validate().is_ok());
        prop_assert!(check_raise_budget(&plan).is_ok());
        for e in &plan.entries {
            prop_assert!(e.t_j + 1e-12 >= e.s_j.min(t));
            prop_assert!(((e.t_j * e.j as f64).round() - e.t_j * e.j as f64).abs() < 1e-6 || e.t_j == 1.0);
        }
    }

    #[test]
    fn set_distance_matches_brute_force_and_harper(
        n in 1usize..9,
        a in vec(any::<u64>(), 1..12),
        b in vec(any::<u64>(), 1..12),
    ) {
        let mask = (1u64 << n) - 1;
        let mut a: Vec<u64> = a.into_iter().map(|w| w & mask).collect();
        let mut b: Vec<u64> = b.into_iter().map(|w| w & mask).collect();
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        let d = set_distance_bits(n, &a, &b).unwrap();
        prop_assert_eq!(d, brute_force_distance_bits(&a, &b).unwrap());
        let bound = opposite_sphere_distance_bits(n, &BigUint::from(a.len()), &BigUint::from(b.len())).unwrap();
        prop_assert!(d <= bound);
    }
}
