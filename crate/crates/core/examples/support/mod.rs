//! A synthetic labeled SMILES dataset for the examples that need one on disk.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FRAGMENTS: [&str; 16] = [
    "C",
    "CC",
    "CCC",
    "O",
    "N",
    "C(=O)",
    "c1ccccc1",
    "c1ccncc1",
    "C1CCCCC1",
    "C1CCNCC1",
    "c1ccc2ccccc2c1",
    "Cl",
    "F",
    "C#N",
    "S",
    "C1CC1",
];

/// Writes `data.csv` (SMILES plus tasks `rings` and `polar`) and a
/// `split/` directory with a shuffled 80/10/10 split.
pub fn write_dataset(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(2..7);
        let smiles: String = (0..k).map(|_| FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())]).collect();
        let rings = smiles.chars().filter(char::is_ascii_digit).count() / 2;
        let rings_label = u8::from((rings >= 2) ^ rng.gen_bool(0.1));
        let polar = smiles.chars().filter(|c| matches!(c, 'O' | 'N' | 'n')).count();
        let polar_label = if rng.gen_bool(0.05) {
            String::new()
        } else {
            u8::from((polar >= 2) ^ rng.gen_bool(0.1)).to_string()
        };
        rows.push((smiles, rings_label, polar_label));
    }
    let mut text = String::from("smiles,rings,polar\n");
    for (s, r, p) in &rows {
        text.push_str(&format!("{s},{r},{p}\n"));
    }
    let csv = dir.join("data.csv");
    fs::write(&csv, text).unwrap();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (a, b) = (n * 8 / 10, n * 9 / 10);
    let split = dir.join("split");
    fs::create_dir_all(&split).unwrap();
    let lines = |idx: &[usize]| idx.iter().map(|i| format!("{i}\n")).collect::<String>();
    fs::write(split.join("train.csv"), lines(&order[..a])).unwrap();
    fs::write(split.join("valid.csv"), lines(&order[a..b])).unwrap();
    fs::write(split.join("test.csv"), lines(&order[b..])).unwrap();
    (csv, split)
}

/// Dataset and split from `args` (`CSV SPLIT_DIR`), or a synthetic one in `tmp`.
pub fn inputs(args: &[String], tmp: &Path) -> (PathBuf, PathBuf) {
    match args {
        [csv, split, ..] => (csv.into(), split.into()),
        _ => {
            println!("no dataset given, using a synthetic one (pass CSV SPLIT_DIR to use your own)");
            write_dataset(tmp, 600, 7)
        }
    }
}
