pub mod datasets;
pub mod descriptors;
pub mod elements;
pub mod expressivity;
pub mod featurizer;
pub mod forest;
pub mod graph;
pub mod labels;
pub mod metrics;
pub mod pipeline;
pub mod smiles;
pub mod synthetic;
