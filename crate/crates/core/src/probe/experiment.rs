use std::path::Path;

use serde::Serialize;

use super::cluster::cluster_and_score;
use super::conv::ClassicalConvBaseline;
use super::dataset::{extract_dataset, FeatureDataset, FeatureExtractor, LabeledImages};
use super::linear::{LinearProbe, ProbeHyper, ProbeReport};
use super::pca::pca_reduce;
use crate::error::{Error, Result};
use crate::quanv::{LayerStack, QuanvConfig};

/// Quanvolution features against raw pixels and a frozen classical
/// convolution of identical geometry, on identical splits.
#[derive(Debug, Clone)]
pub struct ProbeExperiment {
    pub layers: Vec<QuanvConfig>,
    /// Layer `i` of the classical comparator uses seed `conv_seed + i`.
    pub conv_seed: u64,
    /// Dimensionality kept by PCA before clustering.
    pub pca_dim: usize,
    pub workers: usize,
    pub hyper: ProbeHyper,
}

impl ProbeExperiment {
    pub fn new(layers: Vec<QuanvConfig>) -> Self {
        ProbeExperiment {
            layers,
            conv_seed: 1,
            pca_dim: 10,
            workers: 1,
            hyper: ProbeHyper::default(),
        }
    }

    pub fn conv_layers(&self) -> Vec<ClassicalConvBaseline> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, cfg)| ClassicalConvBaseline::matching(cfg, self.conv_seed + i as u64))
            .collect()
    }

    /// Extracts all three feature sets, trains the probes on `train`, scores
    /// them on `test`, and clusters the PCA-compressed training features.
    pub fn run(&self, train: &LabeledImages, test: &LabeledImages) -> Result<ProbeSummary> {
        let stack = LayerStack::new(&self.layers)?;
        let conv = self.conv_layers();
        let quanv = FeatureExtractor::Quanv {
            stack: &stack,
            workers: self.workers,
        };
        let classical = FeatureExtractor::ClassicalConv(&conv);

        let mut arms = Vec::new();
        for extractor in [FeatureExtractor::RawPixels, quanv, classical] {
            log::info!("extracting {:?} features", extractor.provenance());
            let tr = extract_dataset(train, extractor)?;
            let te = extract_dataset(test, extractor)?;
            arms.push(self.score(&tr, &te)?);
        }
        let conv_arm = arms.pop().expect("three arms");
        let quanv_arm = arms.pop().expect("three arms");
        let raw_arm = arms.pop().expect("three arms");
        Ok(ProbeSummary {
            n_train: train.len(),
            n_test: test.len(),
            raw: raw_arm.0,
            quanv: quanv_arm.0,
            conv: conv_arm.0,
            raw_purity: raw_arm.1,
            quanv_purity: quanv_arm.1,
            conv_purity: conv_arm.1,
        })
    }

    fn score(&self, train: &FeatureDataset, test: &FeatureDataset) -> Result<(ProbeReport, f64)> {
        let report = LinearProbe::fit(train, self.hyper)?.evaluate(test)?;
        let (reduced, _) = pca_reduce(train, self.pca_dim.min(train.dim()))?;
        let purity = cluster_and_score(&reduced, reduced.classes().len())?;
        Ok((report, purity))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub n_train: usize,
    pub n_test: usize,
    #[serde(serialize_with = "mean_only")]
    pub raw: ProbeReport,
    #[serde(serialize_with = "mean_only")]
    pub quanv: ProbeReport,
    #[serde(serialize_with = "mean_only")]
    pub conv: ProbeReport,
    pub raw_purity: f64,
    pub quanv_purity: f64,
    pub conv_purity: f64,
}

fn mean_only<S: serde::Serializer>(r: &ProbeReport, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(r.mean_accuracy)
}

/// `class,conv_acc,quanv_acc` per class, then a `mean` row.
pub fn write_results_csv(summary: &ProbeSummary, path: &Path) -> Result<()> {
    let to_err = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(["class", "conv_acc", "quanv_acc"])
        .map_err(to_err)?;
    for (i, class) in summary.quanv.classes.iter().enumerate() {
        w.write_record([
            class.to_string(),
            format!("{:.4}", summary.conv.per_class[i]),
            format!("{:.4}", summary.quanv.per_class[i]),
        ])
        .map_err(to_err)?;
    }
    w.write_record([
        "mean".to_string(),
        format!("{:.4}", summary.conv.mean_accuracy),
        format!("{:.4}", summary.quanv.mean_accuracy),
    ])
    .map_err(to_err)?;
    w.flush().map_err(|e| Error::io(path, e))
}
