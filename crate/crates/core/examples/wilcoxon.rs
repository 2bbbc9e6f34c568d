//! Exact Wilcoxon signed-rank test on paired per-dataset scores.
//!
//! cargo run --example wilcoxon -- 82.9,68.9,80.8 80.9,71.0,77.1

use moltop::metrics::wilcoxon_signed_rank;

fn parse(s: &str) -> Vec<f64> {
    s.split(',').map(|x| x.trim().parse().expect("comma-separated numbers")).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (a, b) = match args.as_slice() {
        [a, b, ..] => (parse(a), parse(b)),
        _ => {
            // mean test AUROC on eight MoleculeNet datasets for two models
            let a = parse("82.9,68.9,80.8,73.6,66.7,66.0,76.3,64.4");
            let b = parse("80.9,71.0,77.1,90.6,78.6,57.0,75.9,65.5");
            (a, b)
        }
    };
    let wins = a.iter().zip(&b).filter(|(x, y)| x > y).count();
    match wilcoxon_signed_rank(&a, &b) {
        Ok(p) => println!("{} pairs, first wins {wins}, two-sided exact p = {p:.6}", a.len()),
        Err(e) => println!("error: {e}"),
    }
}
