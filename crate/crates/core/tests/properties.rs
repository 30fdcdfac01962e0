use proptest::prelude::*;

use synchan::bounds::{evaluate, gallager_bound, ChannelParams, Method};
use synchan::combinatorics::{
    apply_deletion_pattern, enumerate_deletion_patterns, RunLengthSequence,
};
use synchan::oracle::Word;

fn bits(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, 1..=max)
}

proptest! {
    #[test]
    fn run_length_round_trip(x in bits(64)) {
        let rl = RunLengthSequence::encode(&x).unwrap();
        prop_assert_eq!(rl.decode(), x.clone());
        prop_assert_eq!(rl.len(), x.len());
        prop_assert!(rl.runs().iter().all(|&r| r >= 1));
        prop_assert_eq!(Word::from_bits(&x).unwrap().to_bits(), x);
    }

    #[test]
    fn pattern_multiplicities_sum_to_binomial(x in bits(20), frac in 0.0f64..=1.0) {
        let rl = RunLengthSequence::encode(&x).unwrap();
        let n = x.len();
        let d = (frac * n as f64).round() as usize;
        let mut total = 0u128;
        for p in enumerate_deletion_patterns(rl.runs(), d) {
            total += p.multiplicity(rl.runs());
            // Every pattern leaves a sequence of the right length.
            let out = apply_deletion_pattern(&rl, &p).unwrap();
            prop_assert_eq!(out.map_or(0, |o| o.len()), n - d);
        }
        let binom = (0..d).fold(1u128, |c, i| c * (n - i) as u128 / (i + 1) as u128);
        prop_assert_eq!(total, binom);
    }

    #[test]
    fn deletion_bound_exceeds_baseline_by_w_term_minus_p_d(n in 1usize..400, p_d in 0.0f64..0.5, p_e in 0.0f64..0.5) {
        let params = ChannelParams::deletion_substitution(p_d, p_e).unwrap();
        let b = evaluate(Method::DeletionSubstitution, n, &params).unwrap();
        let g = gallager_bound(&params).unwrap().rate;
        // bound - baseline = w_term - p_d, whatever its sign.
        let w = b.component("w_term").unwrap();
        prop_assert!((b.rate - g - (w - p_d)).abs() < 1e-12);
    }
}
