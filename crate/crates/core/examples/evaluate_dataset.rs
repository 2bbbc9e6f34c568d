//! The full protocol on one dataset: fit the featurizer on train, train one
//! forest per seed, report valid/test AUROC as mean and std over seeds.
//!
//! cargo run --release --example evaluate_dataset -- data.csv split_dir [smiles_column]

mod support;

use moltop::datasets::Ingestion;
use moltop::pipeline::{cmd_evaluate, RunConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = tempfile::tempdir().unwrap();
    let (csv, split) = support::inputs(&args, tmp.path());
    let mut cfg = RunConfig::new(csv, split, tmp.path().join("out"));
    if let Some(col) = args.get(2) {
        cfg.smiles_col = col.clone();
    }
    cfg.ingestion = Ingestion::Lenient;

    let report = cmd_evaluate(&cfg).unwrap();
    for s in &report.per_seed {
        println!("seed {}: valid {:.4}  test {:.4}", s.seed, s.valid, s.test);
    }
    println!(
        "AUROC valid {:.2} ± {:.2}, test {:.2} ± {:.2}",
        100.0 * report.valid_mean,
        100.0 * report.valid_std,
        100.0 * report.test_mean,
        100.0 * report.test_std
    );
}
