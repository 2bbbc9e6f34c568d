//! Per-node degree statistics and per-edge EBC / ARI / SCAN scores.
//!
//! cargo run --example descriptors -- "C1CCC2CCCCC2C1"

use moltop::descriptors::{degree_profile, edge_scores};
use moltop::smiles::parse_smiles;

fn main() {
    let smiles = std::env::args().nth(1).unwrap_or_else(|| "CC(C)Cc1ccc(cc1)C(C)C(=O)O".into());
    let g = parse_smiles(&smiles).expect("valid SMILES");

    println!("node  deg  dn_min  dn_max  dn_mean  dn_std");
    for (v, d) in degree_profile(&g).iter().enumerate() {
        println!(
            "{v:>4}  {:>3}  {:>6}  {:>6}  {:>7.3}  {:>6.3}",
            d.deg, d.dn_min, d.dn_max, d.dn_mean, d.dn_std
        );
    }

    let s = edge_scores(&g);
    println!("\nedge        ebc      ari     scan");
    for (i, &(u, v, _)) in g.edges().iter().enumerate() {
        println!("{u:>3}-{v:<3}  {:.4}  {:>7.4}  {:.4}", s.ebc[i], s.ari[i], s.scan[i]);
    }
}
