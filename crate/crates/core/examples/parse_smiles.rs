//! Parse SMILES strings into heavy-atom graphs.
//!
//! cargo run --example parse_smiles -- "CC(=O)Oc1ccccc1C(=O)O" "[Na+].[Cl-]"

use moltop::smiles::parse_smiles;

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = ["c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "[Na+].[Cl-]", "C1CC"]
            .map(String::from)
            .to_vec();
    }
    for s in &inputs {
        match parse_smiles(s) {
            Ok(g) => {
                println!(
                    "{s}: {} atoms, {} bonds, {} component(s)",
                    g.node_count(),
                    g.edge_count(),
                    g.component_count()
                );
                println!("  atomic numbers {:?}", g.atomic_numbers());
                for &(u, v, b) in g.edges() {
                    println!("  {u}-{v} {b:?}");
                }
            }
            Err(e) => println!("{s}: error: {e}"),
        }
    }
}
