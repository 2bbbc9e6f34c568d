mod common;

use common::*;
use moltop::labels::{LabelMatrix, ScoreMatrix};
use moltop::metrics::{
    auroc, average_precision, multitask_scores, wilcoxon_signed_rank, EvalReport, Metric, MetricError, SeedResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(2..60);
    // coarse scores force plenty of ties
    let levels = rng.gen_range(2..12);
    let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
    let mut labels: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.gen_bool(0.3)))).collect();
    labels[0] = 1.0;
    labels[1] = 0.0;
    (scores, labels)
}

#[test]
fn auroc_and_ap_match_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let (s, y) = random_instance(&mut rng);
        let got = auroc(&s, &y).unwrap();
        let want = auroc_by_pairs(&s, &y).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        let got = average_precision(&s, &y).unwrap();
        let want = ap_by_definition(&s, &y).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn wilcoxon_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..200 {
        let n = rng.gen_range(1..14);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
        match wilcoxon_signed_rank(&a, &b) {
            Ok(p) => assert!((p - wilcoxon_by_enumeration(&a, &b)).abs() < 1e-12),
            Err(e) => assert_eq!(e, MetricError::NoDifferences),
        }
    }
}

#[test]
fn wilcoxon_reproduces_published_comparisons() {
    let p = wilcoxon_signed_rank(&MOLTOP_ROW, &DMPNN_ROW).unwrap();
    assert_eq!(p, 0.7421875);
    assert_eq!(format!("{p:.3}"), "0.742");
    let p = wilcoxon_signed_rank(&MOLTOP_ROW, &GEM_ROW).unwrap();
    assert_eq!(p, 0.015625);
    // the table's pretrained GIN row wins 6 of 8 datasets
    assert_eq!(wilcoxon_signed_rank(&MOLTOP_ROW, &GIN_PRETRAINED_ROW).unwrap(), 0.25);
    assert_eq!(wilcoxon_signed_rank(&MOLTOP_ROW, &GRAPHMVP_ROW).unwrap(), 0.546875);
}

#[test]
fn wilcoxon_limits() {
    let a = vec![1.0; 26];
    let b = vec![0.0; 26];
    assert_eq!(wilcoxon_signed_rank(&a, &b), Err(MetricError::TooLarge { got: 26, max: 25 }));
    assert_eq!(wilcoxon_signed_rank(&a[..25], &b[..25]).unwrap(), 2.0 / (1u64 << 25) as f64);
    assert!(matches!(wilcoxon_signed_rank(&a, &b[..3]), Err(MetricError::Length(26, 3))));
}

#[test]
fn masked_rows_leave_the_task() {
    // the masked row would rank a negative above every positive
    let y = LabelMatrix::new(4, 1, vec![1.0, 0.0, 1.0, 0.0], vec![false, false, false, true]).unwrap();
    let s = ScoreMatrix {
        n_rows: 4,
        n_tasks: 1,
        values: vec![0.9, 0.1, 0.8, 1.0],
    };
    let (per, mean) = multitask_scores(&s, &y, Metric::Auroc).unwrap();
    assert_eq!(per, vec![Some(1.0)]);
    assert_eq!(mean, 1.0);
}

#[test]
fn report_roundtrip_and_population_std() {
    let seeds: Vec<SeedResult> = [0.7, 0.8, 0.9]
        .iter()
        .enumerate()
        .map(|(i, &v)| SeedResult {
            seed: i as u64,
            valid_tasks: vec![Some(v), None],
            test_tasks: vec![Some(v - 0.1), None],
            valid: v,
            test: v - 0.1,
        })
        .collect();
    let r = EvalReport::from_seeds(Metric::Auroc, seeds);
    assert!((r.valid_mean - 0.8).abs() < 1e-12);
    assert!((r.valid_std - (0.02f64 / 3.0).sqrt()).abs() < 1e-12);
    assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
    assert_eq!("ap".parse::<Metric>().unwrap(), Metric::Ap);
    assert!("f1".parse::<Metric>().is_err());
}
