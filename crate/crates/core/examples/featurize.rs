//! Fit the featurizer on a handful of molecules and inspect the vector layout.
//!
//! cargo run --example featurize

use std::collections::BTreeMap;

use moltop::featurizer::{FeaturizerModel, FeaturizerOptions};
use moltop::smiles::parse_smiles;

const TRAIN: [&str; 6] = [
    "CCO",
    "c1ccccc1O",
    "CC(=O)Nc1ccc(O)cc1",
    "C1CCC2CCCCC2C1",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "OC(=O)CCC(=O)O",
];

fn main() {
    let graphs: Vec<_> = TRAIN.iter().map(|s| parse_smiles(s).unwrap()).collect();
    let model = FeaturizerModel::fit(&graphs, FeaturizerOptions::default()).unwrap();
    println!(
        "n_bins {} (lower median size), raw width {}, kept {} non-zero columns",
        model.n_bins,
        model.raw_width,
        model.width()
    );

    let mut spans: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (c, &keep) in model.raw_columns().iter().zip(&model.retained_columns) {
        let e = spans.entry(c.span.clone()).or_default();
        e.0 += 1;
        e.1 += usize::from(keep);
    }
    for (span, (raw, kept)) in &spans {
        println!("  {span:<10} {kept:>3} of {raw:>3} columns kept");
    }

    let query = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
    let x = model.transform(&query).unwrap();
    println!("\naspirin, non-zero features:");
    for (c, v) in model.columns().iter().zip(&x) {
        if *v != 0.0 {
            println!("  {:<14} {v:.4}", c.name());
        }
    }

    let matrix = model.transform_collection(&graphs).unwrap();
    let mut csv = Vec::new();
    matrix.write_csv(&mut csv).unwrap();
    let header = String::from_utf8(csv).unwrap();
    println!("\nCSV header starts: {}...", &header[..80]);
}
