//! End-to-end runs: featurize a split dataset, evaluate forests over seeds,
//! time the stages, count indistinguishable graphs and aggregate importances.
//!
//! Every command writes JSON reports (and CSV feature matrices) into the
//! output directory. Numeric outputs depend only on the configuration, never
//! on the worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{load_csv_dataset, load_graph6, load_split, DatasetError, Ingestion, LabeledDataset, SplitSpec};
use crate::expressivity::{indistinguishability_report, FingerprintMode, PairReport};
use crate::featurizer::{FeatureGroup, FeatureMatrix, FeaturizerError, FeaturizerModel, FeaturizerOptions, TopoFeature};
use crate::forest::{train, ForestConfig, ForestError};
use crate::metrics::{aggregate_importance, mean_vector, multitask_scores, EvalReport, Metric, MetricError, SeedResult};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Featurizer(#[from] FeaturizerError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// One switch of the ablation study. Each removes a feature family or undoes
/// one of the model refinements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// Drop all five degree features.
    NoLdp,
    /// Drop EBC, ARI and SCAN.
    NoEdge,
    NoEbc,
    NoAri,
    NoScan,
    NoAtomBond,
    NoMaxDegree,
    /// Degree, min and max neighbor degree use `n_bins` bins instead of 11.
    NoReducedDegreeBins,
    /// Keep columns that are zero on every training molecule.
    NoDropConstant,
    /// 100 trees and `min_samples_split = 2`.
    UntunedForest,
}

impl Ablation {
    pub const ALL: [Ablation; 10] = [
        Ablation::NoLdp,
        Ablation::NoEdge,
        Ablation::NoEbc,
        Ablation::NoAri,
        Ablation::NoScan,
        Ablation::NoAtomBond,
        Ablation::NoMaxDegree,
        Ablation::NoReducedDegreeBins,
        Ablation::NoDropConstant,
        Ablation::UntunedForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::NoLdp => "no-ldp",
            Ablation::NoEdge => "no-edge",
            Ablation::NoEbc => "no-ebc",
            Ablation::NoAri => "no-ari",
            Ablation::NoScan => "no-scan",
            Ablation::NoAtomBond => "no-atom-bond",
            Ablation::NoMaxDegree => "no-max-degree",
            Ablation::NoReducedDegreeBins => "no-reduced-degree-bins",
            Ablation::NoDropConstant => "no-drop-constant",
            Ablation::UntunedForest => "untuned-forest",
        }
    }

    fn removes(self, f: TopoFeature) -> bool {
        match self {
            Ablation::NoLdp => !f.is_edge_level(),
            Ablation::NoEdge => f.is_edge_level(),
            Ablation::NoEbc => f == TopoFeature::Ebc,
            Ablation::NoAri => f == TopoFeature::Ari,
            Ablation::NoScan => f == TopoFeature::Scan,
            Ablation::NoMaxDegree => f == TopoFeature::DnMax,
            _ => false,
        }
    }
}

impl FromStr for Ablation {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Ablation::ALL.iter().map(|a| a.name()).collect();
                PipelineError::Config(format!("unknown ablation {s:?}, expected one of {}", names.join(", ")))
            })
    }
}

/// Featurizer options and forest configuration after applying ablations.
pub fn apply_ablations(
    ablations: &[Ablation],
    bins: Option<usize>,
) -> Result<(FeaturizerOptions, ForestConfig), PipelineError> {
    let mut opts = FeaturizerOptions {
        bins,
        ..FeaturizerOptions::default()
    };
    let mut forest = ForestConfig::default();
    for &a in ablations {
        opts.features.retain(|&f| !a.removes(f));
        match a {
            Ablation::NoAtomBond => opts.atom_bond = false,
            Ablation::NoReducedDegreeBins => opts.reduced_degree_bins = false,
            Ablation::NoDropConstant => opts.drop_zero_columns = false,
            Ablation::UntunedForest => forest = ForestConfig::untuned(),
            _ => {}
        }
    }
    opts.validate()
        .map_err(|e| PipelineError::Config(format!("ablations {ablations:?}: {e}")))?;
    Ok((opts, forest))
}

/// Seeds from `"7"`, `"0,3,5"` or a half-open range `"0..10"`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, PipelineError> {
    let bad = || PipelineError::Config(format!("cannot parse seeds {s:?}"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?);
        (a..b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse::<u64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(PipelineError::Config("seed list is empty".into()));
    }
    Ok(seeds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub smiles_col: String,
    /// Task columns; empty means every column except SMILES.
    pub tasks: Vec<String>,
    pub split_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub bins: Option<usize>,
    pub metric: Metric,
    pub ablations: Vec<Ablation>,
    /// Overrides the number of trees of the (possibly ablated) forest.
    pub trees: Option<usize>,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub ingestion: Ingestion,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, split_dir: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            smiles_col: "smiles".into(),
            tasks: Vec::new(),
            split_dir: split_dir.into(),
            seeds: (0..10).collect(),
            bins: None,
            metric: Metric::Auroc,
            ablations: Vec::new(),
            trees: None,
            workers: None,
            out: out.into(),
            ingestion: Ingestion::Strict,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.seeds.is_empty() {
            return Err(PipelineError::Config("seed list is empty".into()));
        }
        if self.workers == Some(0) {
            return Err(PipelineError::Config("workers must be positive".into()));
        }
        if self.trees == Some(0) {
            return Err(PipelineError::Config("trees must be positive".into()));
        }
        self.settings().map(|_| ())
    }

    /// Featurizer options and forest configuration (seed not yet set).
    pub fn settings(&self) -> Result<(FeaturizerOptions, ForestConfig), PipelineError> {
        let (opts, mut forest) = apply_ablations(&self.ablations, self.bins)?;
        if let Some(t) = self.trees {
            forest.n_trees = t;
        }
        Ok((opts, forest))
    }
}

/// Runs `f` on a dedicated pool with the requested number of threads.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    Ok(builder.build()?.install(f))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    write_file(path, text)
}

/// Loads the dataset and its split, translating split indices (rows of the
/// source file) to positions in the loaded dataset.
pub fn load_inputs(cfg: &RunConfig) -> Result<(LabeledDataset, SplitSpec), PipelineError> {
    let data = load_csv_dataset(&cfg.dataset, &cfg.smiles_col, &cfg.tasks, cfg.ingestion)?;
    let split = load_split(&cfg.split_dir)?;
    split.bind(data.len() + data.skipped.len())?;
    let split = split.remap(&data.source_rows);
    info!(
        "{}: {} molecules ({} skipped), split {}/{}/{}",
        cfg.dataset.display(),
        data.len(),
        data.skipped.len(),
        split.train.len(),
        split.valid.len(),
        split.test.len()
    );
    Ok((data, split))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Featurized {
    pub model: FeaturizerModel,
    pub train: FeatureMatrix,
    pub valid: FeatureMatrix,
    pub test: FeatureMatrix,
}

/// Fits the featurizer on training molecules only and transforms all three
/// parts of the split.
pub fn featurize_split(
    data: &LabeledDataset,
    split: &SplitSpec,
    options: FeaturizerOptions,
) -> Result<Featurized, PipelineError> {
    let pick = |idx: &[usize]| idx.iter().map(|&i| data.graphs[i].clone()).collect::<Vec<_>>();
    let train_graphs = pick(&split.train);
    let model = FeaturizerModel::fit(&train_graphs, options)?;
    let train = model.transform_collection(&train_graphs)?;
    let valid = model.transform_collection(&pick(&split.valid))?;
    let test = model.transform_collection(&pick(&split.test))?;
    Ok(Featurized {
        model,
        train,
        valid,
        test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizeSummary {
    pub molecules: usize,
    pub skipped: usize,
    pub n_bins: usize,
    pub raw_width: usize,
    pub width: usize,
    pub train_rows: usize,
    pub valid_rows: usize,
    pub test_rows: usize,
}

/// Writes `featurizer.json`, `{train,valid,test}.csv`, `skipped.json` and
/// `featurize.json` into the output directory.
pub fn cmd_featurize(cfg: &RunConfig) -> Result<FeaturizeSummary, PipelineError> {
    cfg.validate()?;
    let (opts, _) = cfg.settings()?;
    let (data, split) = load_inputs(cfg)?;
    let f = with_workers(cfg.workers, || featurize_split(&data, &split, opts))??;

    write_file(&cfg.out.join("featurizer.json"), f.model.to_json()?)?;
    for (name, m) in [("train", &f.train), ("valid", &f.valid), ("test", &f.test)] {
        let mut buf = Vec::new();
        m.write_csv(&mut buf)?;
        write_file(&cfg.out.join(format!("{name}.csv")), buf)?;
    }
    write_json(&cfg.out.join("skipped.json"), &data.skipped)?;
    let summary = FeaturizeSummary {
        molecules: data.len(),
        skipped: data.skipped.len(),
        n_bins: f.model.n_bins,
        raw_width: f.model.raw_width,
        width: f.model.width(),
        train_rows: f.train.n_rows,
        valid_rows: f.valid.n_rows,
        test_rows: f.test.n_rows,
    };
    write_json(&cfg.out.join("featurize.json"), &summary)?;
    Ok(summary)
}

/// Trains one forest per seed and scores valid and test.
pub fn evaluate_split(
    data: &LabeledDataset,
    split: &SplitSpec,
    cfg: &RunConfig,
) -> Result<(EvalReport, Featurized), PipelineError> {
    let (opts, forest_cfg) = cfg.settings()?;
    let f = featurize_split(data, split, opts)?;
    let y_train = data.labels.select_rows(&split.train);
    let y_valid = data.labels.select_rows(&split.valid);
    let y_test = data.labels.select_rows(&split.test);
    let mut per_seed = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let forest = train(&f.train, &y_train, &forest_cfg.clone().with_seed(seed))?;
        let (valid_tasks, valid) = multitask_scores(&forest.predict_proba(&f.valid)?, &y_valid, cfg.metric)?;
        let (test_tasks, test) = multitask_scores(&forest.predict_proba(&f.test)?, &y_test, cfg.metric)?;
        info!("seed {seed}: valid {valid:.4} test {test:.4}");
        per_seed.push(SeedResult {
            seed,
            valid_tasks,
            test_tasks,
            valid,
            test,
        });
    }
    Ok((EvalReport::from_seeds(cfg.metric, per_seed), f))
}

/// Writes `report.json` into the output directory.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvalReport, PipelineError> {
    cfg.validate()?;
    let (data, split) = load_inputs(cfg)?;
    let (report, _) = with_workers(cfg.workers, || evaluate_split(&data, &split, cfg))??;
    write_file(&cfg.out.join("report.json"), report.to_json() + "\n")?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub molecules: usize,
    pub train_rows: usize,
    pub workers: usize,
    pub n_trees: usize,
    pub featurize_seconds: f64,
    pub train_seconds: f64,
}

/// Times featurization of every molecule and training of one forest.
pub fn cmd_benchmark(cfg: &RunConfig) -> Result<BenchmarkReport, PipelineError> {
    cfg.validate()?;
    let (data, split) = load_inputs(cfg)?;
    if data.is_empty() || split.train.is_empty() {
        return Err(PipelineError::Config("no molecules to benchmark".into()));
    }
    let (opts, forest_cfg) = cfg.settings()?;
    let report = with_workers(cfg.workers, || -> Result<_, PipelineError> {
        let start = Instant::now();
        let f = featurize_split(&data, &split, opts)?;
        let featurize_seconds = start.elapsed().as_secs_f64();
        let y = data.labels.select_rows(&split.train);
        let start = Instant::now();
        train(&f.train, &y, &forest_cfg.clone().with_seed(cfg.seeds[0]))?;
        Ok(BenchmarkReport {
            molecules: data.len(),
            train_rows: split.train.len(),
            workers: rayon::current_num_threads(),
            n_trees: forest_cfg.n_trees,
            featurize_seconds,
            train_seconds: start.elapsed().as_secs_f64(),
        })
    })??;
    write_json(&cfg.out.join("benchmark.json"), &report)?;
    Ok(report)
}

/// Counts indistinguishable pairs in a graph6 file and writes
/// `expressivity.json`.
pub fn cmd_expressivity(
    graphs: &Path,
    mode: FingerprintMode,
    workers: Option<usize>,
    out: &Path,
) -> Result<PairReport, PipelineError> {
    let gs = load_graph6(graphs)?;
    let report = with_workers(workers, || indistinguishability_report(&gs, mode))?;
    write_json(&out.join("expressivity.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRun {
    pub dataset: PathBuf,
    pub seed: u64,
    /// Group importances in `groups` order.
    pub importance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub groups: Vec<String>,
    pub runs: Vec<ImportanceRun>,
    pub mean: Vec<f64>,
}

/// Feature-group importances of one forest per seed, for one dataset.
pub fn importance_runs(
    data: &LabeledDataset,
    split: &SplitSpec,
    cfg: &RunConfig,
) -> Result<Vec<ImportanceRun>, PipelineError> {
    let (opts, forest_cfg) = cfg.settings()?;
    let f = featurize_split(data, split, opts)?;
    let y = data.labels.select_rows(&split.train);
    cfg.seeds
        .iter()
        .map(|&seed| {
            let forest = train(&f.train, &y, &forest_cfg.clone().with_seed(seed))?;
            let importance = aggregate_importance(&forest.feature_importance(), &f.train.columns)?;
            Ok(ImportanceRun {
                dataset: cfg.dataset.clone(),
                seed,
                importance,
            })
        })
        .collect()
}

/// Averages group importances over every seed of every configuration and
/// writes `importance.json` into the first configuration's output directory.
pub fn cmd_importance(cfgs: &[RunConfig]) -> Result<ImportanceReport, PipelineError> {
    let first = cfgs
        .first()
        .ok_or_else(|| PipelineError::Config("no dataset given".into()))?;
    let mut runs = Vec::new();
    for cfg in cfgs {
        cfg.validate()?;
        let (data, split) = load_inputs(cfg)?;
        runs.extend(with_workers(cfg.workers, || importance_runs(&data, &split, cfg))??);
    }
    let mean = mean_vector(&runs.iter().map(|r| r.importance.clone()).collect::<Vec<_>>());
    let report = ImportanceReport {
        groups: FeatureGroup::ALL.iter().map(|g| g.name().to_string()).collect(),
        runs,
        mean,
    };
    write_json(&first.out.join("importance.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 2").unwrap(), vec![4, 2]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn ablation_mapping() {
        let (o, f) = apply_ablations(&[Ablation::NoEdge, Ablation::UntunedForest], Some(50)).unwrap();
        assert_eq!(o.features.len(), 5);
        assert_eq!(o.bins, Some(50));
        assert_eq!((f.n_trees, f.min_samples_split), (100, 2));
        let (o, _) = apply_ablations(&[Ablation::NoMaxDegree], None).unwrap();
        assert!(!o.features.contains(&TopoFeature::DnMax));
        assert!(apply_ablations(&[Ablation::NoLdp, Ablation::NoEdge, Ablation::NoAtomBond], None).is_err());
        assert_eq!("no-atom-bond".parse::<Ablation>().unwrap(), Ablation::NoAtomBond);
        assert!("no-such".parse::<Ablation>().is_err());
    }
}
