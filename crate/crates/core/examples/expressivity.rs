//! Count graph pairs the topological features cannot tell apart, and compare
//! against 1-WL on the decalin / bicyclopentyl pair.
//!
//! cargo run --release --example expressivity -- [graphs.g6]

use std::path::PathBuf;
use std::time::Instant;

use moltop::datasets::load_graph6;
use moltop::expressivity::{indistinguishability_report, topo_fingerprint, wl1_distinguishes, FingerprintMode};
use moltop::smiles::parse_smiles;

fn main() {
    let decalin = parse_smiles("C1CCC2CCCCC2C1").unwrap();
    let bicyclopentyl = parse_smiles("C1CCC(C1)C1CCCC1").unwrap();
    println!(
        "decalin vs bicyclopentyl: 1-WL distinguishes {}, fingerprints distinguish {}",
        wl1_distinguishes(&decalin, &bicyclopentyl),
        topo_fingerprint(&decalin, FingerprintMode::Exact) != topo_fingerprint(&bicyclopentyl, FingerprintMode::Exact)
    );

    let files: Vec<PathBuf> = match std::env::args().nth(1) {
        Some(p) => vec![p.into()],
        None => ["data/sr25.g6", "data/graph8c.g6"]
            .iter()
            .map(|p| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(p))
            .collect(),
    };
    for path in files {
        let graphs = load_graph6(&path).unwrap();
        let n_bins = graphs.first().map_or(1, |g| g.node_count());
        for mode in [FingerprintMode::Exact, FingerprintMode::Histogram { n_bins }] {
            let start = Instant::now();
            let r = indistinguishability_report(&graphs, mode);
            println!(
                "{}: {:?}: {} of {} pairs indistinguishable ({:.3}s)",
                path.file_name().unwrap().to_string_lossy(),
                mode,
                r.indistinguishable_pairs,
                r.total_pairs,
                start.elapsed().as_secs_f64()
            );
        }
    }
}
