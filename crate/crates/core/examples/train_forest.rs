//! Train the multitask random forest on a synthetic problem and round-trip it
//! through its JSON model file.
//!
//! cargo run --release --example train_forest

use moltop::forest::{train, Forest, ForestConfig, Samples};
use moltop::labels::LabelMatrix;
use moltop::metrics::auroc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FEATURES: usize = 10;

fn sample(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n * FEATURES);
    let mut y = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let row: Vec<f64> = (0..FEATURES).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // task 0 depends on x0, task 1 on x1 * x2
        y.push(f64::from(u8::from((row[0] > 0.2) ^ rng.gen_bool(0.1))));
        y.push(f64::from(u8::from(row[1] * row[2] > 0.0)));
        x.extend(row);
    }
    (x, y)
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, y) = sample(&mut rng, 1000);
    let (xt, yt) = sample(&mut rng, 500);
    let labels = LabelMatrix::new(1000, 2, y, vec![false; 2000]).unwrap();

    let cfg = ForestConfig {
        n_trees: 300,
        ..ForestConfig::default()
    };
    let start = std::time::Instant::now();
    let forest = train(Samples::new(&x, FEATURES), &labels, &cfg).unwrap();
    println!(
        "{} trees in {:.2}s, mean depth {:.1}",
        forest.trees.len(),
        start.elapsed().as_secs_f64(),
        forest.trees.iter().map(|t| t.depth() as f64).sum::<f64>() / forest.trees.len() as f64
    );

    let p = forest.predict_proba(Samples::new(&xt, FEATURES)).unwrap();
    for t in 0..2 {
        let truth: Vec<f64> = (0..500).map(|i| yt[2 * i + t]).collect();
        println!("task {t}: test AUROC {:.4}", auroc(&p.task_column(t), &truth).unwrap());
    }
    let imp = forest.feature_importance();
    println!("importances {:?}", imp.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());

    let bytes = forest.save();
    let back = Forest::load(&bytes).unwrap();
    assert_eq!(back.predict_proba(Samples::new(&xt, FEATURES)).unwrap(), p);
    println!("model file {} KiB, reload gives identical predictions", bytes.len() / 1024);
}
