//! Rebuild the model one refinement at a time and score each step.
//!
//! cargo run --release --example ablation_ladder -- data.csv split_dir

mod support;

use moltop::pipeline::{evaluate_split, load_inputs, Ablation, RunConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = tempfile::tempdir().unwrap();
    let (csv, split) = support::inputs(&args, tmp.path());

    use Ablation::*;
    let base_off = [NoReducedDegreeBins, NoDropConstant, UntunedForest];
    let ladder: [(&str, Vec<Ablation>); 5] = [
        ("degree features only", [&[NoEdge, NoAtomBond][..], &base_off].concat()),
        ("+ EBC, ARI, SCAN", [&[NoAtomBond][..], &base_off].concat()),
        ("+ atoms and bonds", base_off.to_vec()),
        ("+ 11 degree bins, drop constant", vec![UntunedForest]),
        ("+ tuned forest", vec![]),
    ];

    let mut cfg = RunConfig::new(csv, split, tmp.path().join("out"));
    cfg.seeds = (0..3).collect();
    let (data, split) = load_inputs(&cfg).unwrap();
    for (name, ablations) in ladder {
        cfg.ablations = ablations;
        let (report, f) = evaluate_split(&data, &split, &cfg).unwrap();
        println!(
            "{name:<34} width {:>4}  test AUROC {:.2} ± {:.2}",
            f.model.width(),
            100.0 * report.test_mean,
            100.0 * report.test_std
        );
    }
}
