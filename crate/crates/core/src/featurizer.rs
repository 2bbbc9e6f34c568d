//! Fixed-length molecular feature vectors.
//!
//! A vector is the concatenation of eight histograms (node degree, min / max /
//! mean / std of neighbor degrees, EBC, ARI, SCAN) followed by sum, mean and
//! std of the one-hot atom categories (90) and bond types (5). The number of
//! bins, the ranges of the two continuous degree statistics and the set of
//! retained (not all-zero) columns are fitted on training graphs only.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{degree_profile, edge_scores, EdgeScores, NodeDegreeProfile};
use crate::graph::{BondType, MolecularGraph};

/// Atom categories: atomic numbers 1..=89, with 0 collecting unknown and
/// anything heavier.
pub const ATOM_CATEGORIES: usize = 90;
pub const BOND_CATEGORIES: usize = 5;
/// Bins used by the integer degree histograms (values 0..=9 plus overflow).
pub const DEGREE_BINS: usize = 11;
/// Distance in bin units within which a value counts as lying on a bin edge.
pub const BIN_EDGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FeaturizerError {
    #[error("cannot fit on an empty graph collection")]
    EmptyCollection,
    #[error("every feature family is disabled")]
    NoFeatures,
    #[error("number of bins must be positive")]
    ZeroBins,
    #[error("model is inconsistent: {0}")]
    InvalidModel(String),
    #[error("graph {index}: {source}")]
    Graph {
        index: usize,
        #[source]
        source: Box<FeaturizerError>,
    },
    #[error("malformed feature matrix: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BinMode {
    /// Value `i` lands in bin `i`; the last bin collects everything larger.
    Integer,
    /// `n_bins` equal-width bins over `[lo, hi]`, out-of-range values clamp.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub n_bins: usize,
    #[serde(flatten)]
    pub mode: BinMode,
}

impl HistogramSpec {
    pub fn integer(n_bins: usize) -> Self {
        Self {
            n_bins,
            mode: BinMode::Integer,
        }
    }

    pub fn uniform(n_bins: usize, lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        Self {
            n_bins,
            mode: BinMode::Uniform { lo, hi },
        }
    }

    pub fn bin(&self, x: f64) -> usize {
        let last = self.n_bins - 1;
        match self.mode {
            BinMode::Integer => {
                if x <= 0.0 {
                    0
                } else {
                    (x.floor() as usize).min(last)
                }
            }
            BinMode::Uniform { lo, hi } => {
                if x.is_nan() || x <= lo {
                    0
                } else if x >= hi {
                    last
                } else {
                    // summation order can leave a value on a bin edge a few ulps short
                    let t = (x - lo) / (hi - lo) * self.n_bins as f64;
                    let snapped = if (t - t.round()).abs() < BIN_EDGE_TOLERANCE { t.round() } else { t };
                    (snapped as usize).min(last)
                }
            }
        }
    }

    /// Adds one count per value into `out` (length `n_bins`).
    pub fn accumulate(&self, values: impl IntoIterator<Item = f64>, out: &mut [f64]) {
        for x in values {
            out[self.bin(x)] += 1.0;
        }
    }
}

/// The eight histogrammed topological features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopoFeature {
    Degree,
    DnMin,
    DnMax,
    DnMean,
    DnStd,
    Ebc,
    Ari,
    Scan,
}

impl TopoFeature {
    pub const ALL: [TopoFeature; 8] = [
        TopoFeature::Degree,
        TopoFeature::DnMin,
        TopoFeature::DnMax,
        TopoFeature::DnMean,
        TopoFeature::DnStd,
        TopoFeature::Ebc,
        TopoFeature::Ari,
        TopoFeature::Scan,
    ];

    pub fn span_name(self) -> &'static str {
        match self {
            TopoFeature::Degree => "deg-hist",
            TopoFeature::DnMin => "min-hist",
            TopoFeature::DnMax => "max-hist",
            TopoFeature::DnMean => "mean-hist",
            TopoFeature::DnStd => "std-hist",
            TopoFeature::Ebc => "ebc-hist",
            TopoFeature::Ari => "ari-hist",
            TopoFeature::Scan => "scan-hist",
        }
    }

    pub fn is_edge_level(self) -> bool {
        matches!(self, TopoFeature::Ebc | TopoFeature::Ari | TopoFeature::Scan)
    }

    pub fn is_integer_degree(self) -> bool {
        matches!(self, TopoFeature::Degree | TopoFeature::DnMin | TopoFeature::DnMax)
    }

    pub fn group(self) -> FeatureGroup {
        match self {
            TopoFeature::Degree => FeatureGroup::Degree,
            TopoFeature::DnMin => FeatureGroup::DnMin,
            TopoFeature::DnMax => FeatureGroup::DnMax,
            TopoFeature::DnMean => FeatureGroup::DnMean,
            TopoFeature::DnStd => FeatureGroup::DnStd,
            TopoFeature::Ebc => FeatureGroup::Ebc,
            TopoFeature::Ari => FeatureGroup::Ari,
            TopoFeature::Scan => FeatureGroup::Scan,
        }
    }
}

/// Importance-aggregation groups: eight topological features plus the atom
/// and bond blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Degree,
    DnMin,
    DnMax,
    DnMean,
    DnStd,
    Ebc,
    Ari,
    Scan,
    Atom,
    Bond,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 10] = [
        FeatureGroup::Degree,
        FeatureGroup::DnMin,
        FeatureGroup::DnMax,
        FeatureGroup::DnMean,
        FeatureGroup::DnStd,
        FeatureGroup::Ebc,
        FeatureGroup::Ari,
        FeatureGroup::Scan,
        FeatureGroup::Atom,
        FeatureGroup::Bond,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Degree => "degree",
            FeatureGroup::DnMin => "dn_min",
            FeatureGroup::DnMax => "dn_max",
            FeatureGroup::DnMean => "dn_mean",
            FeatureGroup::DnStd => "dn_std",
            FeatureGroup::Ebc => "ebc",
            FeatureGroup::Ari => "ari",
            FeatureGroup::Scan => "scan",
            FeatureGroup::Atom => "atom",
            FeatureGroup::Bond => "bond",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One column of a feature matrix: the span it belongs to and its offset
/// inside that span (bin index or atom/bond category).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub span: String,
    pub group: FeatureGroup,
    pub index: usize,
}

impl Column {
    pub fn name(&self) -> String {
        format!("{}_{}", self.span, self.index)
    }
}

/// Switches mirroring the incremental model improvements, used for ablations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturizerOptions {
    /// Histogram features to compute, in canonical order.
    pub features: Vec<TopoFeature>,
    pub atom_bond: bool,
    /// 11 integer bins for degree, min and max neighbor degree. When off,
    /// those use `n_bins` integer bins as well.
    pub reduced_degree_bins: bool,
    pub drop_zero_columns: bool,
    /// Fixed number of bins instead of the training median molecule size.
    pub bins: Option<usize>,
}

impl Default for FeaturizerOptions {
    fn default() -> Self {
        Self {
            features: TopoFeature::ALL.to_vec(),
            atom_bond: true,
            reduced_degree_bins: true,
            drop_zero_columns: true,
            bins: None,
        }
    }
}

impl FeaturizerOptions {
    pub fn validate(&self) -> Result<(), FeaturizerError> {
        if self.features.is_empty() && !self.atom_bond {
            return Err(FeaturizerError::NoFeatures);
        }
        if self.bins == Some(0) {
            return Err(FeaturizerError::ZeroBins);
        }
        Ok(())
    }
}

/// Fitted featurization state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizerModel {
    pub n_bins: usize,
    pub options: FeaturizerOptions,
    pub specs: Vec<(TopoFeature, HistogramSpec)>,
    pub raw_width: usize,
    pub retained_columns: Vec<bool>,
    /// Number of graphs the model was fitted on.
    pub fitted_on: usize,
}

/// Lower median: element `(n - 1) / 2` of the sorted values.
pub fn lower_median(values: &[usize]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Some(sorted[(sorted.len() - 1) / 2])
}

/// `3 * 11 + 5 * n_bins + 90 * 3 + 5 * 3` for the default configuration.
pub fn default_raw_width(n_bins: usize) -> usize {
    3 * DEGREE_BINS + 5 * n_bins + ATOM_CATEGORIES * 3 + BOND_CATEGORIES * 3
}

struct Descriptors {
    profile: NodeDegreeProfile,
    edges: Option<EdgeScores>,
}

impl Descriptors {
    fn compute(g: &MolecularGraph, need_edges: bool) -> Self {
        Self {
            profile: degree_profile(g),
            edges: need_edges.then(|| edge_scores(g)),
        }
    }

    fn values(&self, feature: TopoFeature) -> Vec<f64> {
        let p = &self.profile;
        match feature {
            TopoFeature::Degree => p.iter().map(|s| s.deg as f64).collect(),
            TopoFeature::DnMin => p.iter().map(|s| s.dn_min as f64).collect(),
            TopoFeature::DnMax => p.iter().map(|s| s.dn_max as f64).collect(),
            TopoFeature::DnMean => p.iter().map(|s| s.dn_mean).collect(),
            TopoFeature::DnStd => p.iter().map(|s| s.dn_std).collect(),
            TopoFeature::Ebc => self.edges.as_ref().map_or_else(Vec::new, |e| e.ebc.clone()),
            TopoFeature::Ari => self.edges.as_ref().map_or_else(Vec::new, |e| e.ari.clone()),
            TopoFeature::Scan => self.edges.as_ref().map_or_else(Vec::new, |e| e.scan.clone()),
        }
    }
}

fn atom_category(z: u8) -> usize {
    let z = z as usize;
    if z < ATOM_CATEGORIES {
        z
    } else {
        0
    }
}

/// Writes sum, mean and population std of each one-hot category into the
/// three consecutive spans of `out` (each `counts.len()` long).
fn indicator_stats(counts: &[usize], total: usize, out: &mut [f64]) {
    let k = counts.len();
    if total == 0 {
        return;
    }
    for (c, &count) in counts.iter().enumerate() {
        let p = count as f64 / total as f64;
        out[c] = count as f64;
        out[k + c] = p;
        out[2 * k + c] = (p * (1.0 - p)).max(0.0).sqrt();
    }
}

impl FeaturizerModel {
    /// Fits bin count, continuous ranges and the retained-column mask.
    pub fn fit(train: &[MolecularGraph], options: FeaturizerOptions) -> Result<Self, FeaturizerError> {
        options.validate()?;
        if train.is_empty() {
            return Err(FeaturizerError::EmptyCollection);
        }
        let sizes: Vec<usize> = train.iter().map(MolecularGraph::node_count).collect();
        let n_bins = match options.bins {
            Some(b) => b,
            None => lower_median(&sizes).unwrap_or(1).max(1),
        };

        let need_edges = options.features.iter().any(|f| f.is_edge_level());
        let descriptors: Vec<Descriptors> = train
            .par_iter()
            .map(|g| Descriptors::compute(g, need_edges))
            .collect();

        let (mut mean_hi, mut std_hi) = (0.0f64, 0.0f64);
        for d in &descriptors {
            for s in &d.profile {
                mean_hi = mean_hi.max(s.dn_mean);
                std_hi = std_hi.max(s.dn_std);
            }
        }
        let range_hi = |hi: f64| if hi > 0.0 { hi } else { 1.0 };

        let mut features = options.features.clone();
        features.sort_unstable();
        features.dedup();
        let specs: Vec<_> = features
            .iter()
            .map(|&f| {
                let spec = match f {
                    TopoFeature::Degree | TopoFeature::DnMin | TopoFeature::DnMax => {
                        if options.reduced_degree_bins {
                            HistogramSpec::integer(DEGREE_BINS)
                        } else {
                            HistogramSpec::integer(n_bins)
                        }
                    }
                    TopoFeature::DnMean => HistogramSpec::uniform(n_bins, 0.0, range_hi(mean_hi)),
                    TopoFeature::DnStd => HistogramSpec::uniform(n_bins, 0.0, range_hi(std_hi)),
                    TopoFeature::Ebc | TopoFeature::Scan => HistogramSpec::uniform(n_bins, 0.0, 1.0),
                    TopoFeature::Ari => HistogramSpec::uniform(n_bins, -1.0, 1.0),
                };
                (f, spec)
            })
            .collect();

        let raw_width = specs.iter().map(|(_, s)| s.n_bins).sum::<usize>()
            + if options.atom_bond {
                3 * (ATOM_CATEGORIES + BOND_CATEGORIES)
            } else {
                0
            };

        let mut model = Self {
            n_bins,
            options,
            specs,
            raw_width,
            retained_columns: vec![true; raw_width],
            fitted_on: train.len(),
        };

        if model.options.drop_zero_columns {
            let mut nonzero = vec![false; raw_width];
            for (g, d) in train.iter().zip(&descriptors) {
                for (flag, x) in nonzero.iter_mut().zip(model.raw_from(g, d)) {
                    *flag |= x != 0.0;
                }
            }
            model.retained_columns = nonzero;
        }
        Ok(model)
    }

    pub fn width(&self) -> usize {
        self.retained_columns.iter().filter(|&&r| r).count()
    }

    /// Column descriptors of the full (unmasked) vector.
    pub fn raw_columns(&self) -> Vec<Column> {
        let mut cols = Vec::with_capacity(self.raw_width);
        for (f, spec) in &self.specs {
            for i in 0..spec.n_bins {
                cols.push(Column {
                    span: f.span_name().to_string(),
                    group: f.group(),
                    index: i,
                });
            }
        }
        if self.options.atom_bond {
            for (prefix, group, k) in [
                ("atom", FeatureGroup::Atom, ATOM_CATEGORIES),
                ("bond", FeatureGroup::Bond, BOND_CATEGORIES),
            ] {
                for stat in ["sum", "mean", "std"] {
                    for i in 0..k {
                        cols.push(Column {
                            span: format!("{prefix}-{stat}"),
                            group,
                            index: i,
                        });
                    }
                }
            }
        }
        cols
    }

    /// Column descriptors after masking.
    pub fn columns(&self) -> Vec<Column> {
        self.raw_columns()
            .into_iter()
            .zip(&self.retained_columns)
            .filter_map(|(c, &keep)| keep.then_some(c))
            .collect()
    }

    fn check(&self) -> Result<(), FeaturizerError> {
        if self.n_bins == 0 {
            return Err(FeaturizerError::InvalidModel("n_bins is zero".into()));
        }
        let expected = self.specs.iter().map(|(_, s)| s.n_bins).sum::<usize>()
            + if self.options.atom_bond {
                3 * (ATOM_CATEGORIES + BOND_CATEGORIES)
            } else {
                0
            };
        if expected != self.raw_width || self.retained_columns.len() != self.raw_width {
            return Err(FeaturizerError::InvalidModel(format!(
                "raw width {} does not match specs ({expected}) or mask ({})",
                self.raw_width,
                self.retained_columns.len()
            )));
        }
        if self.specs.iter().any(|(_, s)| s.n_bins == 0) {
            return Err(FeaturizerError::InvalidModel("histogram with zero bins".into()));
        }
        Ok(())
    }

    fn raw_from(&self, g: &MolecularGraph, d: &Descriptors) -> Vec<f64> {
        let mut out = vec![0.0; self.raw_width];
        let mut offset = 0;
        for &(f, spec) in &self.specs {
            spec.accumulate(d.values(f), &mut out[offset..offset + spec.n_bins]);
            offset += spec.n_bins;
        }
        if self.options.atom_bond {
            let mut atoms = [0usize; ATOM_CATEGORIES];
            for &z in g.atomic_numbers() {
                atoms[atom_category(z)] += 1;
            }
            let mut bonds = [0usize; BOND_CATEGORIES];
            for &(_, _, b) in g.edges() {
                bonds[b.index()] += 1;
            }
            indicator_stats(&atoms, g.node_count(), &mut out[offset..offset + 3 * ATOM_CATEGORIES]);
            offset += 3 * ATOM_CATEGORIES;
            indicator_stats(&bonds, g.edge_count(), &mut out[offset..offset + 3 * BOND_CATEGORIES]);
        }
        out
    }

    /// Unmasked feature vector of one graph.
    pub fn transform_raw(&self, g: &MolecularGraph) -> Result<Vec<f64>, FeaturizerError> {
        self.check()?;
        let need_edges = self.specs.iter().any(|(f, _)| f.is_edge_level());
        Ok(self.raw_from(g, &Descriptors::compute(g, need_edges)))
    }

    /// Masked feature vector of one graph.
    pub fn transform(&self, g: &MolecularGraph) -> Result<Vec<f64>, FeaturizerError> {
        let raw = self.transform_raw(g)?;
        Ok(raw
            .into_iter()
            .zip(&self.retained_columns)
            .filter_map(|(x, &keep)| keep.then_some(x))
            .collect())
    }

    /// Transforms every graph, in parallel on the current rayon pool. Row
    /// order always follows the input.
    pub fn transform_collection(&self, graphs: &[MolecularGraph]) -> Result<FeatureMatrix, FeaturizerError> {
        self.check()?;
        let rows: Vec<Vec<f64>> = graphs
            .par_iter()
            .enumerate()
            .map(|(index, g)| {
                self.transform(g).map_err(|e| FeaturizerError::Graph {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_, _>>()?;
        let cols = self.width();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            data.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            n_rows: rows.len(),
            columns: self.columns(),
            data,
        })
    }

    pub fn to_json(&self) -> Result<String, FeaturizerError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, FeaturizerError> {
        let model: Self = serde_json::from_str(s)?;
        model.check()?;
        Ok(model)
    }
}

/// Row-major feature matrix with its column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n_rows: usize,
    pub columns: Vec<Column>,
    pub data: Vec<f64>,
}

const MATRIX_MAGIC: &[u8; 8] = b"MOLTOPFM";
const MATRIX_VERSION: u32 = 1;

impl FeatureMatrix {
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(|i| self.row(i))
    }

    /// Rows at the given indices, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            n_rows: indices.len(),
            columns: self.columns.clone(),
            data,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), FeaturizerError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(self.columns.iter().map(Column::name))
            .map_err(|e| FeaturizerError::Format(e.to_string()))?;
        for row in self.rows() {
            wtr.write_record(row.iter().map(|x| format!("{x:?}")))
                .map_err(|e| FeaturizerError::Format(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Compact little-endian binary form: magic, version, shape, column
    /// descriptors, then `f64` values row by row.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), FeaturizerError> {
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&MATRIX_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_rows as u64).to_le_bytes())?;
        w.write_all(&(self.n_cols() as u64).to_le_bytes())?;
        for c in &self.columns {
            let name = c.span.as_bytes();
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name)?;
            w.write_all(&[c.group as u8])?;
            w.write_all(&(c.index as u32).to_le_bytes())?;
        }
        for x in &self.data {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, FeaturizerError> {
        fn take<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N], FeaturizerError> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)
                .map_err(|_| FeaturizerError::Format("truncated payload".into()))?;
            Ok(buf)
        }
        if &take::<_, 8>(&mut r)? != MATRIX_MAGIC {
            return Err(FeaturizerError::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != MATRIX_VERSION {
            return Err(FeaturizerError::Format(format!("unsupported version {version}")));
        }
        let n_rows = u64::from_le_bytes(take(&mut r)?) as usize;
        let n_cols = u64::from_le_bytes(take(&mut r)?) as usize;
        let mut columns = Vec::with_capacity(n_cols.min(1 << 20));
        for _ in 0..n_cols {
            let len = u32::from_le_bytes(take(&mut r)?) as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)
                .map_err(|_| FeaturizerError::Format("truncated payload".into()))?;
            let span = String::from_utf8(name).map_err(|e| FeaturizerError::Format(e.to_string()))?;
            let g = take::<_, 1>(&mut r)?[0] as usize;
            let group = *FeatureGroup::ALL
                .get(g)
                .ok_or_else(|| FeaturizerError::Format(format!("unknown group {g}")))?;
            let index = u32::from_le_bytes(take(&mut r)?) as usize;
            columns.push(Column { span, group, index });
        }
        let mut data = Vec::with_capacity((n_rows * n_cols).min(1 << 24));
        for _ in 0..n_rows * n_cols {
            data.push(f64::from_le_bytes(take(&mut r)?));
        }
        Ok(Self {
            n_rows,
            columns,
            data,
        })
    }
}

/// Atom category used for a given atomic number.
pub fn atom_category_of(atomic_number: u8) -> usize {
    atom_category(atomic_number)
}

/// Bond category index used for a given bond type.
pub fn bond_category_of(bond: BondType) -> usize {
    bond.index()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn mols(smiles: &[&str]) -> Vec<MolecularGraph> {
        smiles.iter().map(|s| parse_smiles(s).unwrap()).collect()
    }

    fn chain(n: usize) -> MolecularGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        MolecularGraph::from_topology(n, &edges).unwrap()
    }

    #[test]
    fn median_bins() {
        assert_eq!(lower_median(&[3, 5, 7]), Some(5));
        assert_eq!(lower_median(&[4, 6]), Some(4));
        assert_eq!(lower_median(&[]), None);
        let m = FeaturizerModel::fit(&[chain(3), chain(5), chain(7)], FeaturizerOptions::default()).unwrap();
        assert_eq!(m.n_bins, 5);
        let m = FeaturizerModel::fit(&[chain(6), chain(4)], FeaturizerOptions::default()).unwrap();
        assert_eq!(m.n_bins, 4);
    }

    #[test]
    fn empty_fit_rejected() {
        assert!(matches!(
            FeaturizerModel::fit(&[], FeaturizerOptions::default()),
            Err(FeaturizerError::EmptyCollection)
        ));
        let none = FeaturizerOptions {
            features: vec![],
            atom_bond: false,
            ..Default::default()
        };
        assert!(matches!(
            FeaturizerModel::fit(&[chain(2)], none),
            Err(FeaturizerError::NoFeatures)
        ));
    }

    #[test]
    fn raw_width_formula() {
        for n in [1, 5, 33, 50] {
            let opts = FeaturizerOptions {
                bins: Some(n),
                drop_zero_columns: false,
                ..Default::default()
            };
            let m = FeaturizerModel::fit(&[chain(4)], opts).unwrap();
            assert_eq!(m.raw_width, default_raw_width(n));
            assert_eq!(m.raw_columns().len(), m.raw_width);
            assert_eq!(m.width(), m.raw_width);
        }
        assert_eq!(default_raw_width(33), 33 + 165 + 270 + 15);
    }

    #[test]
    fn ethanol_carbon_block() {
        let g = parse_smiles("CCO").unwrap();
        let opts = FeaturizerOptions {
            drop_zero_columns: false,
            ..Default::default()
        };
        let m = FeaturizerModel::fit(std::slice::from_ref(&g), opts).unwrap();
        let raw = m.transform_raw(&g).unwrap();
        let cols = m.raw_columns();
        let find = |span: &str, idx: usize| {
            let pos = cols.iter().position(|c| c.span == span && c.index == idx).unwrap();
            raw[pos]
        };
        assert_eq!(find("atom-sum", 6), 2.0);
        assert!((find("atom-mean", 6) - 2.0 / 3.0).abs() < 1e-15);
        // population std of the indicator [1, 1, 0]
        let oracle = {
            let xs = [1.0f64, 1.0, 0.0];
            let mu = xs.iter().sum::<f64>() / 3.0;
            (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / 3.0).sqrt()
        };
        assert!((find("atom-std", 6) - oracle).abs() < 1e-15);
        assert!((oracle - 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(find("atom-sum", 8), 1.0);
        assert_eq!(find("bond-sum", 0), 2.0);
        assert_eq!(find("bond-mean", 0), 1.0);
        assert_eq!(find("bond-std", 0), 0.0);
    }

    #[test]
    fn single_atom_molecule() {
        let g = parse_smiles("[He]").unwrap();
        let opts = FeaturizerOptions {
            drop_zero_columns: false,
            ..Default::default()
        };
        let m = FeaturizerModel::fit(std::slice::from_ref(&g), opts).unwrap();
        let raw = m.transform_raw(&g).unwrap();
        let cols = m.raw_columns();
        for (c, x) in cols.iter().zip(&raw) {
            if c.group == FeatureGroup::Atom || c.group == FeatureGroup::Bond {
                continue;
            }
            let expected = match (c.span.as_str(), c.index) {
                // every node-level feature of an isolated node is 0
                ("deg-hist" | "min-hist" | "max-hist" | "mean-hist" | "std-hist", 0) => 1.0,
                _ => 0.0,
            };
            assert_eq!(*x, expected, "{}", c.name());
        }
        let bonds: f64 = cols
            .iter()
            .zip(&raw)
            .filter(|(c, _)| c.group == FeatureGroup::Bond)
            .map(|(_, x)| *x)
            .sum();
        assert_eq!(bonds, 0.0);
    }

    #[test]
    fn histogram_conservation() {
        let graphs = mols(&["CC(=O)Oc1ccccc1C(=O)O", "C1CCC2CCCCC2C1", "[Na+].[Cl-]", "C"]);
        let opts = FeaturizerOptions {
            drop_zero_columns: false,
            ..Default::default()
        };
        let m = FeaturizerModel::fit(&graphs, opts).unwrap();
        let cols = m.raw_columns();
        for g in &graphs {
            let raw = m.transform_raw(g).unwrap();
            for f in TopoFeature::ALL {
                let total: f64 = cols
                    .iter()
                    .zip(&raw)
                    .filter(|(c, _)| c.span == f.span_name())
                    .map(|(_, x)| *x)
                    .sum();
                let expected = if f.is_edge_level() { g.edge_count() } else { g.node_count() };
                assert_eq!(total, expected as f64, "{:?}", f);
            }
        }
    }

    #[test]
    fn mask_drops_exactly_zero_columns() {
        let graphs = mols(&["CCO", "c1ccccc1", "CC#N", "C=CCl"]);
        let m = FeaturizerModel::fit(&graphs, FeaturizerOptions::default()).unwrap();
        let raws: Vec<_> = graphs.iter().map(|g| m.transform_raw(g).unwrap()).collect();
        for (j, &keep) in m.retained_columns.iter().enumerate() {
            let any = raws.iter().any(|r| r[j] != 0.0);
            assert_eq!(keep, any, "column {j}");
        }
        let fm = m.transform_collection(&graphs).unwrap();
        assert_eq!(fm.n_cols(), m.width());
        assert_eq!(fm.columns, m.columns());
    }

    #[test]
    fn heavy_elements_map_to_unknown() {
        assert_eq!(atom_category_of(89), 89);
        assert_eq!(atom_category_of(90), 0);
        assert_eq!(atom_category_of(118), 0);
        assert_eq!(atom_category_of(0), 0);
    }

    #[test]
    fn binning_rules() {
        let int = HistogramSpec::integer(11);
        assert_eq!(int.bin(0.0), 0);
        assert_eq!(int.bin(9.0), 9);
        assert_eq!(int.bin(10.0), 10);
        assert_eq!(int.bin(17.0), 10);
        let uni = HistogramSpec::uniform(4, -1.0, 1.0);
        assert_eq!(uni.bin(-1.0), 0);
        assert_eq!(uni.bin(-0.5), 1);
        assert_eq!(uni.bin(0.99), 3);
        assert_eq!(uni.bin(1.0), 3);
        assert_eq!(uni.bin(5.0), 3);
        assert_eq!(uni.bin(-5.0), 0);
    }

    #[test]
    fn empty_collection_transform() {
        let m = FeaturizerModel::fit(&[chain(3)], FeaturizerOptions::default()).unwrap();
        let fm = m.transform_collection(&[]).unwrap();
        assert_eq!(fm.n_rows, 0);
        assert_eq!(fm.n_cols(), m.width());
    }

    #[test]
    fn model_json_roundtrip() {
        let graphs = mols(&["CCO", "c1ccccc1O", "CC(C)(C)N"]);
        let m = FeaturizerModel::fit(&graphs, FeaturizerOptions::default()).unwrap();
        let back = FeaturizerModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let mut broken = m.clone();
        broken.retained_columns.pop();
        let s = serde_json::to_string(&broken).unwrap();
        assert!(matches!(
            FeaturizerModel::from_json(&s),
            Err(FeaturizerError::InvalidModel(_))
        ));
    }

    #[test]
    fn matrix_binary_and_csv() {
        let graphs = mols(&["CCO", "c1ccccc1O"]);
        let m = FeaturizerModel::fit(&graphs, FeaturizerOptions::default()).unwrap();
        let fm = m.transform_collection(&graphs).unwrap();
        let mut buf = Vec::new();
        fm.write_binary(&mut buf).unwrap();
        assert_eq!(FeatureMatrix::read_binary(&buf[..]).unwrap(), fm);
        assert!(FeatureMatrix::read_binary(&buf[..buf.len() - 3]).is_err());

        let mut csv_out = Vec::new();
        fm.write_csv(&mut csv_out).unwrap();
        let text = String::from_utf8(csv_out).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("deg-hist_"));
        assert_eq!(text.lines().count(), 3);
    }
}
