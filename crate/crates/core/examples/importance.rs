//! Forest importances summed per feature group and averaged over seeds.
//!
//! cargo run --release --example importance -- data.csv split_dir

mod support;

use moltop::pipeline::{cmd_importance, RunConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = tempfile::tempdir().unwrap();
    let (csv, split) = support::inputs(&args, tmp.path());
    let mut cfg = RunConfig::new(csv, split, tmp.path().join("out"));
    cfg.seeds = (0..5).collect();

    let report = cmd_importance(&[cfg]).unwrap();
    let mut ranked: Vec<(&String, f64)> = report.groups.iter().zip(report.mean.iter().copied()).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (group, v) in ranked {
        println!("{group:<8} {:>6.2}%  {}", 100.0 * v, "#".repeat((v * 100.0).round() as usize));
    }
}
