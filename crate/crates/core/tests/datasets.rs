mod common;

use std::fs;
use std::io::Write;

use common::{encode_graph6, temp_dataset};
use flate2::write::GzEncoder;
use flate2::Compression;
use moltop::datasets::{
    load_csv_dataset, load_split, parse_graph6, read_csv_dataset, DatasetError, Ingestion, SplitSpec,
};
use moltop::synthetic::random_graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn csv_roundtrip_keeps_labels_and_mask() {
    let data = temp_dataset(60, 1);
    let ds = load_csv_dataset(&data.csv, "smiles", &[], Ingestion::Strict).unwrap();
    assert_eq!(ds.len(), 60);
    assert_eq!(ds.task_names, ["a", "b"]);
    assert!(ds.labels.missing_mask().iter().any(|&m| m));

    let mut buf = Vec::new();
    ds.write_csv("smiles", &mut buf).unwrap();
    let back = read_csv_dataset(buf.as_slice(), "smiles", &[], Ingestion::Strict).unwrap();
    assert_eq!(back.smiles, ds.smiles);
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.graphs, ds.graphs);
}

#[test]
fn task_selection_and_float_labels() {
    let text = "id,smiles,x,y\n1,CCO,1.0,0\n2,c1ccccc1,0.0,\n";
    let ds = read_csv_dataset(text.as_bytes(), "smiles", &["y".to_string()], Ingestion::Strict).unwrap();
    assert_eq!(ds.task_names, ["y"]);
    assert!(ds.labels.is_missing(1, 0));
    let all = read_csv_dataset(text.as_bytes(), "smiles", &[], Ingestion::Strict);
    // the id column is not binary
    assert!(matches!(all, Err(DatasetError::NonBinaryLabel { .. })));
    let missing = read_csv_dataset(text.as_bytes(), "SMILES", &[], Ingestion::Strict);
    assert!(matches!(missing, Err(DatasetError::MissingColumn(_))));
}

#[test]
fn lenient_ingestion_skips_and_split_remaps() {
    let text = "smiles,t\nCCO,1\nC1CC,0\nCCN,0\nc1ccccc1,1\n";
    let strict = read_csv_dataset(text.as_bytes(), "smiles", &[], Ingestion::Strict);
    assert!(matches!(strict, Err(DatasetError::Smiles { row: 1, .. })));

    let ds = read_csv_dataset(text.as_bytes(), "smiles", &[], Ingestion::Lenient).unwrap();
    assert_eq!(ds.len(), 3);
    assert_eq!(ds.source_rows, [0, 2, 3]);
    assert_eq!(ds.skipped.len(), 1);
    let split = SplitSpec::new(vec![0, 1], vec![2], vec![3]).unwrap();
    split.bind(4).unwrap();
    let remapped = split.remap(&ds.source_rows);
    assert_eq!(remapped, SplitSpec::new(vec![0], vec![1], vec![2]).unwrap());
}

#[test]
fn gzipped_split_files() {
    let dir = tempfile::tempdir().unwrap();
    for (name, idx) in [("train", "0\n1\n2\n"), ("valid", "3\n"), ("test", "4\n5\n")] {
        let f = fs::File::create(dir.path().join(format!("{name}.csv.gz"))).unwrap();
        let mut gz = GzEncoder::new(f, Compression::default());
        gz.write_all(idx.as_bytes()).unwrap();
        gz.finish().unwrap();
    }
    let split = load_split(dir.path()).unwrap();
    assert_eq!(split, SplitSpec::new(vec![0, 1, 2], vec![3], vec![4, 5]).unwrap());
    assert!(matches!(split.bind(5), Err(DatasetError::IndexOutOfRange { index: 5, n: 5 })));
}

#[test]
fn split_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train.txt"), "0\n1\n").unwrap();
    fs::write(dir.path().join("valid.txt"), "2\n").unwrap();
    assert!(matches!(load_split(dir.path()), Err(DatasetError::MissingSplitFile("test", _))));
    fs::write(dir.path().join("test.txt"), "1\n").unwrap();
    assert!(matches!(load_split(dir.path()), Err(DatasetError::Overlap { index: 1, .. })));
    fs::write(dir.path().join("test.txt"), "x\n").unwrap();
    assert!(matches!(load_split(dir.path()), Err(DatasetError::BadIndex { line: 1, .. })));
}

#[test]
fn graph6_roundtrip_and_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 0..40 {
        let g = random_graph(&mut rng, n, 0.3);
        let back = parse_graph6(&encode_graph6(&g), 1).unwrap();
        assert_eq!(back.edges(), g.edges());
    }
    let g = parse_graph6("D??", 1).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (5, 0));
    assert!(matches!(parse_graph6("D?", 7), Err(DatasetError::Truncated { line: 7 })));
    assert!(matches!(parse_graph6("D\t?", 2), Err(DatasetError::InvalidByte { line: 2, byte: 9 })));
}
