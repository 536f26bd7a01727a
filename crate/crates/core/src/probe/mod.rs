//! Feature-quality harness: PCA compression, Ward clustering purity and a
//! linear probe, comparing quanvolution features with raw pixels and a frozen
//! random classical convolution of the same geometry.

mod cluster;
mod conv;
mod dataset;
mod experiment;
mod linear;
mod pca;

pub use cluster::{cluster_and_score, majority_purity, ward_clusters};
pub use conv::{classical_conv_extract, ClassicalConvBaseline};
pub use dataset::{
    extract_dataset, load_dataset_dir, FeatureDataset, FeatureExtractor, LabeledImages, Provenance,
};
pub use experiment::{write_results_csv, ProbeExperiment, ProbeSummary};
pub use linear::{linear_probe, LinearProbe, ProbeHyper, ProbeReport};
pub use pca::{pca_reduce, Pca};
