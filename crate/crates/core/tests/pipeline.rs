use uqf_core::eval::{grid_search, run_uq_eval, EvalReport};
use uqf_core::harness::fixtures::{make_fixture, FixtureSpec};
use uqf_core::quant::{calibrate, quantize_model, QuantizedHead};
use uqf_core::{LabeledSample, McConfig};

fn setup(seed: u64) -> (QuantizedHead, Vec<LabeledSample>) {
    let fx = make_fixture(&FixtureSpec {
        seed,
        test_samples: 60,
        ..Default::default()
    })
    .unwrap();
    let qm = quantize_model(&fx.model, &calibrate(&fx.model, &fx.calib.feature_rows()).unwrap()).unwrap();
    (qm, fx.test.samples())
}

fn check_invariants(r: &EvalReport, n: usize) {
    assert_eq!(r.kept_ids.len() + r.ignored_ids.len(), n);
    assert!(r.kept_ids.iter().all(|id| !r.ignored_ids.contains(id)));
    assert!(r.misclassified_ignored <= r.ignored_ids.len());
    if let Some(f1) = r.micro_f1 {
        assert!((0.0..=1.0).contains(&f1));
    }
    if let Some(p) = r.misclassified_pct {
        assert!((0.0..=100.0).contains(&p));
        assert!((p * r.ignored_ids.len() as f64 - 100.0 * r.misclassified_ignored as f64).abs() < 1e-9);
    }
}

#[test]
fn grid_cells_equal_standalone_runs() {
    let (qm, data) = setup(3);
    let cfs = [0.7, 0.8, 0.9];
    let nis = [20, 30, 50];
    let g = grid_search(&qm, &data, &cfs, &nis, 0.5, 11).unwrap();
    assert_eq!(g.f1.len(), 3);
    assert!(g.f1.iter().all(|row| row.len() == 3));
    for (ci, &c) in cfs.iter().enumerate() {
        for (ni, &n) in nis.iter().enumerate() {
            let cfg = McConfig {
                num_iter: n,
                conf_factor: c,
                threshold: 0.5,
                base_seed: 11,
            };
            let r = run_uq_eval(&qm, &data, &cfg).unwrap();
            check_invariants(&r, data.len());
            assert_eq!(g.cell(ci, ni), (r.micro_f1, r.ignored_count()));
        }
    }
}

#[test]
fn grid_is_deterministic_and_duplicate_rows_agree() {
    let (qm, data) = setup(5);
    let a = grid_search(&qm, &data, &[0.8, 0.8], &[10, 20], 0.5, 2).unwrap();
    let b = grid_search(&qm, &data, &[0.8, 0.8], &[10, 20], 0.5, 2).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.f1[0], a.f1[1]);
    assert_eq!(a.ignored[0], a.ignored[1]);
}

#[test]
fn singleton_grid_is_one_run() {
    let (qm, data) = setup(6);
    let g = grid_search(&qm, &data, &[0.7], &[50], 0.5, 9).unwrap();
    let r = run_uq_eval(&qm, &data, &McConfig { base_seed: 9, ..Default::default() }).unwrap();
    assert_eq!(g.cell(0, 0), (r.micro_f1, r.ignored_count()));
}

#[test]
fn grid_rejects_empty_axes() {
    let (qm, data) = setup(6);
    assert!(grid_search(&qm, &data, &[], &[20], 0.5, 0).is_err());
    assert!(grid_search(&qm, &data, &[0.7], &[], 0.5, 0).is_err());
    assert!(grid_search(&qm, &data, &[0.7], &[1], 0.5, 0).is_err());
}

#[test]
fn wider_intervals_ignore_at_least_as_many() {
    // Verdicts only move toward uncertain as z grows, so the count of
    // samples with any uncertain class is monotone.
    let (qm, data) = setup(8);
    let narrow = run_uq_eval(&qm, &data, &McConfig { conf_factor: 0.5, ..Default::default() }).unwrap();
    let wide = run_uq_eval(&qm, &data, &McConfig { conf_factor: 0.95, ..Default::default() }).unwrap();
    let uncertain = |r: &EvalReport| r.samples.iter().filter(|s| s.verdict.contains(&-1)).count();
    assert!(uncertain(&wide) >= uncertain(&narrow));
    for (a, b) in narrow.samples.iter().zip(&wide.samples) {
        for (x, y) in a.verdict.iter().zip(&b.verdict) {
            assert!(x == y || *y == -1);
        }
    }
}

#[test]
fn report_is_deterministic() {
    let (qm, data) = setup(10);
    let cfg = McConfig { base_seed: 77, ..Default::default() };
    let a = run_uq_eval(&qm, &data, &cfg).unwrap();
    let b = run_uq_eval(&qm, &data, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    check_invariants(&a, data.len());
}
