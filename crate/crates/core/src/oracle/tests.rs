use super::*;
use crate::combinatorics::RunLengthSequence;

fn failed(chain: &[ChainCheck]) -> Vec<&'static str> {
    chain.iter().filter(|c| !c.passed).map(|c| c.name).collect()
}

#[test]
fn deletion_chain_holds_on_small_grid() {
    for n in 1..=8 {
        for &p_d in &[0.01, 0.1, 0.3, 0.6] {
            for &p_e in &[0.0, 0.05, 0.2] {
                let params = ChannelParams::deletion_substitution(p_d, p_e).unwrap();
                let chain = bound_chain_check(Method::DeletionSubstitution, n, &params)
                    .unwrap_or_else(|e| panic!("{e}"));
                assert!(chain.len() >= 7);
            }
        }
    }
}

#[test]
fn corrected_insertion_chain_holds() {
    for n in 3..=7 {
        for &p in &[0.01, 0.1, 0.3] {
            let params = ChannelParams::insertion(p).unwrap();
            bound_chain_check(Method::RandomInsertionCorrected, n, &params)
                .unwrap_or_else(|e| panic!("{e}"));
        }
    }
}

#[test]
fn stated_insertion_lemma_overshoots_exact_rate() {
    let params = ChannelParams::insertion(0.1).unwrap();
    let report = exact_report(Method::RandomInsertion, 4, &params, &ClosedForm::default()).unwrap();
    let bad = failed(&report.bound_chain);
    assert_eq!(
        bad,
        vec![
            "conditional entropy at most the upper bound with the rewritten S3",
            "lemma at most (I - H(T)) / n"
        ]
    );
    assert!((report.rate_lower_target() - 0.5112).abs() < 1e-4);
    assert!(matches!(
        bound_chain_check(Method::RandomInsertion, 4, &params),
        Err(Error::Verification(_))
    ));
    match bound_chain_check(Method::RandomInsertion, 6, &params) {
        Err(Error::Verification(msg)) => {
            assert!(msg.contains("upper bound with the rewritten S3"), "{msg}")
        }
        other => panic!("expected a failed link at n = 6, got {other:?}"),
    }
    assert!(bound_chain_check(Method::RandomInsertionCorrected, 6, &params).is_ok());
}

#[test]
fn two_symbol_blocks_break_the_insertion_chain() {
    // With n = 2 the one-insertion and (n-1)-insertion classes coincide.
    let params = ChannelParams::insertion(0.25).unwrap();
    let report = exact_report(
        Method::RandomInsertionCorrected,
        2,
        &params,
        &ClosedForm::default(),
    )
    .unwrap();
    assert!(!report.all_passed());
}

#[test]
fn injected_faults_are_caught() {
    let params = ChannelParams::deletion_substitution(0.1, 0.02).unwrap();
    let closed = ClosedForm {
        deletion_output_entropy: |n, _| Ok(n as f64),
        ..ClosedForm::default()
    };
    let report = exact_report(Method::DeletionSubstitution, 6, &params, &closed).unwrap();
    assert_eq!(
        failed(&report.bound_chain),
        vec!["output entropy equals n(1-p_d) + H(T)"]
    );

    let closed = ClosedForm {
        deletion_conditional_bound: |n, p_d, p_e| {
            Ok(0.5 * (ClosedForm::default().deletion_conditional_bound)(n, p_d, p_e)?)
        },
        ..ClosedForm::default()
    };
    let report = exact_report(Method::DeletionSubstitution, 6, &params, &closed).unwrap();
    assert!(failed(&report.bound_chain).contains(&"conditional entropy at most its upper bound"));

    let params = ChannelParams::insertion(0.1).unwrap();
    let closed = ClosedForm {
        insertion_multi_bound: |_, _| Ok(0.0),
        ..ClosedForm::default()
    };
    let report = exact_report(Method::RandomInsertionCorrected, 5, &params, &closed).unwrap();
    assert!(failed(&report.bound_chain)
        .contains(&"equiprobable value on all words at most its closed form"));
}

#[test]
fn pattern_device_is_strict_when_patterns_collide() {
    // Deleting the middle run of 010 or either end symbol pair gives
    // coinciding outputs, so the exact entropy is strictly below the device.
    let rl = RunLengthSequence::new(1, vec![2, 1, 2, 3, 2]).unwrap();
    let x = Word::from_bits(&rl.decode()).unwrap();
    let exact = exact_deletion_conditional(x, 0.2).unwrap().entropy();
    let device = pattern_entropy(&rl, 0.2).unwrap();
    assert!(device - exact > 1e-3, "{device} vs {exact}");
    let short = RunLengthSequence::encode(&[0, 1, 0]).unwrap();
    let x = Word::from_bits(&[0, 1, 0]).unwrap();
    assert!(
        pattern_entropy(&short, 0.2).unwrap()
            > exact_deletion_conditional(x, 0.2).unwrap().entropy() + 1e-3
    );
}

#[test]
fn exact_rate_respects_information_limits() {
    let r = exact_deletion_substitution_entropies(10, 0.1, 0.01).unwrap();
    assert!(r.mutual_information > 0.0 && r.mutual_information <= 10.0);
    assert!(r.all_passed());
    let r = exact_insertion_entropies(5, 0.2).unwrap();
    assert!(r.mutual_information <= 5.0);
}

#[test]
fn unsupported_methods_are_rejected() {
    let params = ChannelParams::deletion_awgn(0.1, 1.0).unwrap();
    assert!(matches!(
        bound_chain_check(Method::DeletionAwgn, 4, &params),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        bound_chain_check(Method::Gallager, 4, &params),
        Err(Error::Domain(_))
    ));
}
