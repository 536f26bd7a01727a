use nalgebra::{DMatrix, DVector};

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};

/// Hyperparameters of the softmax-regression probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for ProbeHyper {
    fn default() -> Self {
        ProbeHyper {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

/// Multinomial logistic regression on standardized features, trained by
/// full-batch gradient descent from zero weights.
#[derive(Debug, Clone)]
pub struct LinearProbe {
    classes: Vec<u32>,
    mean: DVector<f64>,
    scale: DVector<f64>,
    weights: DMatrix<f64>,
    bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub classes: Vec<u32>,
    /// Accuracy on the test samples of each class, aligned with `classes`.
    pub per_class: Vec<f64>,
    /// Unweighted mean of `per_class`.
    pub mean_accuracy: f64,
    pub overall_accuracy: f64,
}

impl LinearProbe {
    pub fn fit(train: &FeatureDataset, hyper: ProbeHyper) -> Result<LinearProbe> {
        let classes = train.classes();
        if classes.len() < 2 {
            return Err(Error::DegenerateData(
                "the probe needs at least two classes".into(),
            ));
        }
        let (n, d) = train.features.shape();
        let mean = train.features.row_mean().transpose();
        let var = train.features.row_variance().transpose();
        let scale = var.map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 });
        let x = standardize(&train.features, &mean, &scale);

        let k = classes.len();
        let mut onehot = DMatrix::zeros(n, k);
        for (i, l) in train.labels.iter().enumerate() {
            onehot[(i, classes.binary_search(l).expect("label is a class"))] = 1.0;
        }
        let mut weights = DMatrix::zeros(d, k);
        let mut bias = DVector::zeros(k);
        let inv_n = 1.0 / n as f64;
        for _ in 0..hyper.epochs {
            let mut probs = &x * &weights;
            softmax_rows(&mut probs, &bias);
            probs -= &onehot;
            probs *= inv_n;
            let grad_w = x.tr_mul(&probs) + &weights * hyper.l2;
            let grad_b = probs.row_sum().transpose();
            weights -= grad_w * hyper.learning_rate;
            bias -= grad_b * hyper.learning_rate;
        }
        Ok(LinearProbe {
            classes,
            mean,
            scale,
            weights,
            bias,
        })
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn predict(&self, features: &DMatrix<f64>) -> Vec<u32> {
        let x = standardize(features, &self.mean, &self.scale);
        let mut logits = &x * &self.weights;
        for mut row in logits.row_iter_mut() {
            row += self.bias.transpose();
        }
        logits
            .row_iter()
            .map(|row| {
                let best = row
                    .iter()
                    .enumerate()
                    .fold(0, |b, (i, v)| if *v > row[b] { i } else { b });
                self.classes[best]
            })
            .collect()
    }

    pub fn evaluate(&self, test: &FeatureDataset) -> Result<ProbeReport> {
        let missing: Vec<u32> = test
            .classes()
            .into_iter()
            .filter(|c| self.classes.binary_search(c).is_err())
            .collect();
        if !missing.is_empty() {
            return Err(Error::NonOverlappingLabels(missing));
        }
        if test.dim() != self.weights.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "test features have {} columns, probe expects {}",
                test.dim(),
                self.weights.nrows()
            )));
        }
        let predicted = self.predict(&test.features);
        let classes = test.classes();
        let per_class: Vec<f64> = classes
            .iter()
            .map(|&c| {
                let (hit, total) = test
                    .labels
                    .iter()
                    .zip(&predicted)
                    .filter(|(l, _)| **l == c)
                    .fold((0usize, 0usize), |(h, t), (l, p)| {
                        (h + usize::from(l == p), t + 1)
                    });
                hit as f64 / total as f64
            })
            .collect();
        let mean_accuracy = per_class.iter().sum::<f64>() / per_class.len() as f64;
        let correct = test
            .labels
            .iter()
            .zip(&predicted)
            .filter(|(a, b)| a == b)
            .count();
        Ok(ProbeReport {
            classes,
            per_class,
            mean_accuracy,
            overall_accuracy: correct as f64 / test.len() as f64,
        })
    }
}

fn standardize(x: &DMatrix<f64>, mean: &DVector<f64>, scale: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut row in out.row_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - mean[j]) / scale[j];
        }
    }
    out
}

fn softmax_rows(logits: &mut DMatrix<f64>, bias: &DVector<f64>) {
    for mut row in logits.row_iter_mut() {
        row += bias.transpose();
        let max = row.max();
        row.apply(|v| *v = (*v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Trains on `train` with the default hyperparameters and scores `test`.
pub fn linear_probe(train: &FeatureDataset, test: &FeatureDataset) -> Result<ProbeReport> {
    LinearProbe::fit(train, ProbeHyper::default())?.evaluate(test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::Provenance;

    fn toy() -> FeatureDataset {
        let rows = [
            [0.0, 0.1],
            [0.2, 0.0],
            [0.1, 0.3],
            [2.0, 2.1],
            [2.2, 1.9],
            [1.8, 2.0],
            [0.0, 4.0],
            [0.3, 4.2],
        ];
        let labels = vec![0, 0, 0, 1, 1, 1, 2, 2];
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        FeatureDataset::new(
            DMatrix::from_row_slice(8, 2, &flat),
            labels,
            Provenance::RawPixels,
        )
        .unwrap()
    }

    #[test]
    fn separable_train_equals_test() {
        let ds = toy();
        let report = linear_probe(&ds, &ds).unwrap();
        assert_eq!(report.mean_accuracy, 1.0);
        assert_eq!(report.per_class, vec![1.0; 3]);
    }

    #[test]
    fn deterministic() {
        let ds = toy();
        let a = LinearProbe::fit(&ds, ProbeHyper::default()).unwrap();
        let b = LinearProbe::fit(&ds, ProbeHyper::default()).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }

    #[test]
    fn unknown_test_label() {
        let train = toy();
        let mut test = toy();
        test.labels[0] = 9;
        assert!(
            matches!(linear_probe(&train, &test), Err(Error::NonOverlappingLabels(l)) if l == vec![9])
        );
    }

    #[test]
    fn constant_feature_is_harmless() {
        let mut ds = toy();
        ds.features.column_mut(1).fill(3.0);
        let report = linear_probe(&ds, &ds).unwrap();
        assert!(report.mean_accuracy.is_finite());
    }
}
