//! Keep/ignore rule checked against an independently written rule table,
//! plus verdict monotonicity under widening intervals.

use uqf_core::decide::{filter_codes, FilterOutcome, IgnoreReason};
use uqf_core::rng::seeded_rng;
use uqf_core::uq::{interval_per_class, PredictionSamples};
use uqf_core::{ternary_assign, Verdict};

#[derive(Debug, PartialEq)]
enum Expected {
    Keep(Vec<u8>, bool),
    Ignore(IgnoreReason),
}

/// Written from the rule text, deliberately structured differently from the
/// implementation: classify by the (ones, minus_ones) count pair.
fn oracle(v: &[i8]) -> Expected {
    let ones = v.iter().filter(|&&x| x == 1).count();
    let minus = v.iter().filter(|&&x| x == -1).count();
    let zeros = v.len() - ones - minus;
    match (ones, minus) {
        (0, 0) => Expected::Ignore(IgnoreReason::AllAbsent),
        (0, 1) if zeros == v.len() - 1 => Expected::Keep(v.iter().map(|&x| (x == -1) as u8).collect(), true),
        (0, _) => Expected::Ignore(IgnoreReason::UncertainOnly),
        (_, _) => Expected::Keep(v.iter().map(|&x| (x == 1) as u8).collect(), false),
    }
}

fn all_vectors(n: usize) -> Vec<Vec<i8>> {
    (0..3usize.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = (k % 3) as i8 - 1;
                    k /= 3;
                    d
                })
                .collect()
        })
        .collect()
}

#[test]
fn exhaustive_agreement_up_to_five_classes() {
    let mut total = 0;
    for n in 1..=5 {
        for v in all_vectors(n) {
            let got = match filter_codes(&v).unwrap() {
                FilterOutcome::Keep {
                    prediction,
                    benefit_of_doubt,
                    ..
                } => Expected::Keep(prediction, benefit_of_doubt),
                FilterOutcome::Ignore { reason } => Expected::Ignore(reason),
            };
            assert_eq!(got, oracle(&v), "vector {v:?}");
            total += 1;
        }
    }
    assert_eq!(total, 3 + 9 + 27 + 81 + 243);
}

#[test]
fn widening_only_moves_verdicts_toward_uncertain() {
    use rand::Rng;
    let mut rng = seeded_rng(17);
    for _ in 0..500 {
        let n = rng.random_range(2..20);
        let rows: Vec<Vec<f32>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let s = PredictionSamples::from_rows(rows).unwrap();
        let threshold = rng.random_range(0.05..0.95);
        let z1 = rng.random_range(0.0..2.0);
        let z2 = z1 + rng.random_range(0.0..2.0);
        let a = interval_per_class(&s, z1).unwrap();
        let b = interval_per_class(&s, z2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let (va, vb) = (ternary_assign(x, threshold), ternary_assign(y, threshold));
            if va == Verdict::Uncertain {
                assert_eq!(vb, Verdict::Uncertain);
            } else {
                assert!(vb == va || vb == Verdict::Uncertain);
            }
        }
    }
}
